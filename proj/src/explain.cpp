#include "gdlnn/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gdlnn/errors.hpp"
#include "gdlnn/rng.hpp"

namespace gdlnn {

namespace {

// Solve (XᵀWX + λI) beta = XᵀWy by Cholesky. Column 0 of X is the intercept.
// λ > 0 keeps the matrix positive definite, so no pivoting is needed.
std::vector<double> weighted_ridge(const std::vector<std::vector<double>>& X,
                                   const std::vector<double>& y,
                                   const std::vector<double>& w, double lambda) {
    const int p = static_cast<int>(X[0].size());
    std::vector<double> a(static_cast<std::size_t>(p) * p, 0.0);
    std::vector<double> b(p, 0.0);
    for (std::size_t s = 0; s < X.size(); ++s) {
        const double ws = w[s];
        for (int i = 0; i < p; ++i) {
            const double wx = ws * X[s][i];
            if (wx == 0.0) continue;
            b[i] += wx * y[s];
            for (int j = i; j < p; ++j) a[static_cast<std::size_t>(i) * p + j] += wx * X[s][j];
        }
    }
    for (int i = 0; i < p; ++i) a[static_cast<std::size_t>(i) * p + i] += lambda;

    // Cholesky: a = LLᵀ (upper triangle of a holds the input)
    std::vector<double> L(static_cast<std::size_t>(p) * p, 0.0);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(std::min(i, j)) * p + std::max(i, j)];
            for (int k = 0; k < j; ++k) {
                sum -= L[static_cast<std::size_t>(i) * p + k] * L[static_cast<std::size_t>(j) * p + k];
            }
            if (i == j) {
                if (sum <= 0.0) throw ValidationError("ridge system is not positive definite");
                L[static_cast<std::size_t>(i) * p + i] = std::sqrt(sum);
            } else {
                L[static_cast<std::size_t>(i) * p + j] =
                    sum / L[static_cast<std::size_t>(j) * p + j];
            }
        }
    }
    // forward/backward substitution
    std::vector<double> z(p);
    for (int i = 0; i < p; ++i) {
        double sum = b[i];
        for (int k = 0; k < i; ++k) sum -= L[static_cast<std::size_t>(i) * p + k] * z[k];
        z[i] = sum / L[static_cast<std::size_t>(i) * p + i];
    }
    std::vector<double> beta(p);
    for (int i = p - 1; i >= 0; --i) {
        double sum = z[i];
        for (int k = i + 1; k < p; ++k) {
            sum -= L[static_cast<std::size_t>(k) * p + i] * beta[k];
        }
        beta[i] = sum / L[static_cast<std::size_t>(i) * p + i];
    }
    return beta;
}

}  // namespace

ImportanceResult important_features(const Graph& g, const Model& m, int samples, int select,
                                    std::uint64_t seed, long long budget) {
    if (samples < 100) throw ConfigError("surrogate needs at least 100 samples");
    const int k = static_cast<int>(m.programs.size());
    ImportanceResult res;
    res.weights.assign(k, 0.0);

    const std::vector<double> rep = embed(g, m.program_ptrs(), m.activation, budget);
    std::vector<int> active;
    for (int i = 0; i < k; ++i) {
        if (rep[i] != 0.0) active.push_back(i);
    }
    if (active.empty()) {
        res.degenerate = true;
        return res;
    }
    const int predicted = m.mlp.predict_class(rep);

    Rng rng(mix_seed(seed, 0x11e));
    const int na = static_cast<int>(active.size());
    std::vector<std::vector<double>> X;        // design matrix: intercept + keep bits
    std::vector<double> y;                     // predicted-class logit (unsaturated score)
    std::vector<double> w;                     // locality kernel
    const double sigma = 0.75 * std::sqrt(static_cast<double>(k));
    X.reserve(samples);
    std::vector<double> masked(rep.size());
    std::vector<char> keep(na);
    bool any_variation = false;
    for (int s = 0; s < samples; ++s) {
        int flipped = 0;
        for (int i = 0; i < na; ++i) {
            keep[i] = rng.bernoulli(0.5) ? 0 : 1;
            if (!keep[i]) ++flipped;
        }
        if (flipped > 0 && flipped < na) any_variation = true;
        masked = rep;
        std::vector<double> row(na + 1, 0.0);
        row[0] = 1.0;
        for (int i = 0; i < na; ++i) {
            if (keep[i]) {
                row[i + 1] = 1.0;
            } else {
                masked[active[i]] = 0.0;
            }
        }
        X.push_back(std::move(row));
        y.push_back(m.mlp.logits(masked)[predicted]);
        w.push_back(std::exp(-(static_cast<double>(flipped) * flipped) / (sigma * sigma)));
    }
    // all-identical masks can only happen with na so small that every draw
    // collapses; treat the no-variation case as degenerate
    if (!any_variation && na > 1) {
        res.degenerate = true;
        return res;
    }

    std::vector<double> beta;
    try {
        beta = weighted_ridge(X, y, w, 0.01);
    } catch (const ValidationError&) {
        res.degenerate = true;
        return res;
    }
    for (int i = 0; i < na; ++i) res.weights[active[i]] = beta[i + 1];

    // weighted R² of the fit
    double wsum = 0.0, ymean = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
        wsum += w[s];
        ymean += w[s] * y[s];
    }
    ymean /= wsum;
    double sse = 0.0, sst = 0.0;
    for (std::size_t s = 0; s < y.size(); ++s) {
        double pred = 0.0;
        for (std::size_t j = 0; j < X[s].size(); ++j) pred += X[s][j] * beta[j];
        sse += w[s] * (y[s] - pred) * (y[s] - pred);
        sst += w[s] * (y[s] - ymean) * (y[s] - ymean);
    }
    res.r2 = sst > 0.0 ? 1.0 - sse / sst : 0.0;

    std::vector<int> positive;
    for (int i : active) {
        if (res.weights[i] > 0.0) positive.push_back(i);
    }
    std::sort(positive.begin(), positive.end(), [&](int a, int b) {
        if (res.weights[a] != res.weights[b]) return res.weights[a] > res.weights[b];
        return a < b;
    });
    if (static_cast<int>(positive.size()) > select) positive.resize(select);
    res.selected = std::move(positive);
    return res;
}

Graph induced_subgraph(const Graph& g, const std::vector<int>& kept) {
    Graph sub;
    sub.d = g.d;
    sub.c = g.c;
    sub.label = g.label;
    sub.n = static_cast<int>(kept.size());
    std::vector<int> remap(g.n, -1);
    for (int i = 0; i < sub.n; ++i) {
        remap[kept[i]] = i;
        auto feat = g.node_feat(kept[i]);
        sub.node_features.insert(sub.node_features.end(), feat.begin(), feat.end());
    }
    for (int e = 0; e < g.num_edges(); ++e) {
        auto [u, v] = g.edges[e];
        if (remap[u] < 0 || remap[v] < 0) continue;
        sub.edges.emplace_back(remap[u], remap[v]);
        auto feat = g.edge_feat(e);
        sub.edge_features.insert(sub.edge_features.end(), feat.begin(), feat.end());
    }
    return sub;
}

std::vector<int> refine_pass(const Graph& g, const std::vector<const Program*>& selected,
                             long long budget) {
    // only programs the input graph satisfies constrain the removals
    std::vector<const Program*> active;
    {
        MatchIndex index(g);
        for (const Program* p : selected) {
            if (index.satisfies(*p, budget)) active.push_back(p);
        }
    }
    std::vector<int> kept(g.n);
    std::iota(kept.begin(), kept.end(), 0);
    for (int v = g.n - 1; v >= 0; --v) {
        std::vector<int> trial;
        trial.reserve(kept.size() - 1);
        for (int u : kept) {
            if (u != v) trial.push_back(u);
        }
        Graph candidate = induced_subgraph(g, trial);
        MatchIndex index(candidate);
        bool ok = true;
        for (const Program* p : active) {
            if (!index.satisfies(*p, budget)) {
                ok = false;
                break;
            }
        }
        if (ok) kept = std::move(trial);
    }
    return kept;
}

Graph refine(const Graph& g, const std::vector<const Program*>& selected, long long budget) {
    return induced_subgraph(g, refine_pass(g, selected, budget));
}

std::pair<ImportanceResult, SubgraphExplanation> explain(const Graph& g, const Model& m,
                                                         int samples, int select,
                                                         std::uint64_t seed, long long budget) {
    ImportanceResult imp = important_features(g, m, samples, select, seed, budget);

    std::vector<const Program*> selected;
    for (int i : imp.selected) selected.push_back(&m.programs[i].program);

    SubgraphExplanation sub;
    {
        MatchIndex index(g);
        for (int i : imp.selected) {
            if (index.satisfies(m.programs[i].program, budget)) {
                sub.satisfied_selected.push_back(i);
            }
        }
    }

    // Alg.-style fixpoint: rerun the removal pass until the kept set stops
    // shrinking. Node identities track back to the original graph.
    std::vector<int> kept(g.n);
    std::iota(kept.begin(), kept.end(), 0);
    for (;;) {
        Graph current = induced_subgraph(g, kept);
        std::vector<int> survivors = refine_pass(current, selected, budget);
        if (survivors.size() == kept.size()) break;
        std::vector<int> next;
        next.reserve(survivors.size());
        for (int local : survivors) next.push_back(kept[local]);
        kept = std::move(next);
    }

    sub.kept_nodes = kept;
    std::vector<char> in_kept(g.n, 0);
    for (int u : kept) in_kept[u] = 1;
    for (auto [u, v] : g.edges) {
        if (in_kept[u] && in_kept[v]) sub.kept_edges.emplace_back(u, v);
    }
    return {std::move(imp), std::move(sub)};
}

double fidelity(const Model& m, const std::vector<const Graph*>& test,
                const std::vector<int>& labels,
                const std::vector<SubgraphExplanation>& explanations, long long budget) {
    if (test.size() != explanations.size() || test.size() != labels.size()) {
        throw ValidationError("fidelity: graphs, labels and explanations must align");
    }
    if (test.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < test.size(); ++i) {
        const int full_pred = predict(m, *test[i], budget).first;
        Graph sub = induced_subgraph(*test[i], explanations[i].kept_nodes);
        const int sub_pred = predict(m, sub, budget).first;
        total += (full_pred == labels[i] ? 1.0 : 0.0) - (sub_pred == labels[i] ? 1.0 : 0.0);
    }
    return total / static_cast<double>(test.size());
}

double sparsity(const std::vector<const Graph*>& graphs,
                const std::vector<SubgraphExplanation>& explanations) {
    if (graphs.size() != explanations.size()) {
        throw ValidationError("sparsity: graphs and explanations must align");
    }
    if (graphs.empty()) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < graphs.size(); ++i) {
        if (graphs[i]->n == 0) continue;
        total += 1.0 - static_cast<double>(explanations[i].kept_nodes.size()) / graphs[i]->n;
    }
    return total / static_cast<double>(graphs.size());
}

std::string subgraph_to_dot(const Graph& g, const SubgraphExplanation& sub) {
    std::string out = "digraph explanation {\n";
    for (int u : sub.kept_nodes) {
        out += "  n" + std::to_string(u) + " [label=\"" + std::to_string(u) + ": <";
        auto feat = g.node_feat(u);
        for (std::size_t j = 0; j < feat.size(); ++j) {
            if (j) out += ", ";
            out += format_real(feat[j]);
        }
        out += ">\"];\n";
    }
    for (auto [u, v] : sub.kept_edges) {
        out += "  n" + std::to_string(u) + " -> n" + std::to_string(v) + ";\n";
    }
    out += "}\n";
    return out;
}

std::string explanation_report(const Graph& g, const Model& m, const ImportanceResult& imp,
                               const SubgraphExplanation& sub, int predicted_label) {
    std::string out;
    out += "predicted " + std::to_string(predicted_label) + "\n";
    out += "surrogate_r2 " + format_real(imp.r2) + "\n";
    out += "weights";
    for (double w : imp.weights) out += " " + format_real(w);
    out += "\n";
    out += "selected";
    for (int i : imp.selected) out += " " + std::to_string(i);
    out += "\n";
    for (int i : imp.selected) {
        out += "# program " + std::to_string(i) + " label=" +
               std::to_string(m.programs[i].label) + "\n";
        out += print_program(m.programs[i].program);
    }
    out += "kept-nodes";
    for (int u : sub.kept_nodes) out += " " + std::to_string(u);
    out += "\n";
    out += subgraph_to_dot(g, sub);
    return out;
}

}  // namespace gdlnn
