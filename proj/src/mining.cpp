#include "gdlnn/mining.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <iostream>
#include <unordered_map>

#include "gdlnn/detail/bits.hpp"
#include "gdlnn/errors.hpp"
#include "gdlnn/parallel.hpp"

namespace gdlnn {

TrainingSet TrainingSet::from_pointers(std::vector<const Graph*> graphs) {
    TrainingSet D;
    D.graphs = std::move(graphs);
    D.labels.reserve(D.graphs.size());
    std::set<int> labels;
    for (const Graph* g : D.graphs) {
        if (!g->label) throw ValidationError("training graph without a label");
        D.labels.push_back(*g->label);
        labels.insert(*g->label);
    }
    D.label_set.assign(labels.begin(), labels.end());
    return D;
}

TrainingSet TrainingSet::from_graphs(std::span<const Graph> graphs) {
    std::vector<const Graph*> ptrs;
    ptrs.reserve(graphs.size());
    for (const Graph& g : graphs) ptrs.push_back(&g);
    return from_pointers(std::move(ptrs));
}

// ---------------------------------------------------------------------------
// Core mining operations
// ---------------------------------------------------------------------------

Program initialize(const Graph& g) {
    Program p;
    p.nodes.reserve(g.n);
    for (int u = 0; u < g.n; ++u) {
        IntervalVec cs;
        cs.reserve(g.d);
        for (double v : g.node_feat(u)) cs.push_back({v, v});
        p.nodes.push_back({"v" + std::to_string(u), normalize_constraints(std::move(cs))});
    }
    p.edges.reserve(g.edges.size());
    for (std::size_t j = 0; j < g.edges.size(); ++j) {
        IntervalVec cs;
        cs.reserve(g.c);
        for (double v : g.edge_feat(static_cast<int>(j))) cs.push_back({v, v});
        p.edges.push_back({"v" + std::to_string(g.edges[j].first),
                           "v" + std::to_string(g.edges[j].second),
                           normalize_constraints(std::move(cs))});
    }
    return p;
}

std::vector<IntervalVec> generalize_itv(const IntervalVec& v) {
    std::vector<IntervalVec> out;
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j].lo != kNegInf) {
            IntervalVec widened = v;
            widened[j].lo = kNegInf;
            out.push_back(std::move(widened));
        }
        if (v[j].hi != kPosInf) {
            IntervalVec widened = v;
            widened[j].hi = kPosInf;
            out.push_back(std::move(widened));
        }
    }
    return out;
}

namespace {

struct Mutation {
    enum Kind { kRemoveNode, kRemoveEdge, kGeneralizeNode, kGeneralizeEdge } kind;
    int desc_idx;  // node index for *Node, edge index for *Edge, within the parent program
    Program prog;
    std::string canon;
    // parent node-description indices whose requirements this mutation
    // relaxes or removes; the screens may not reject based on them
    std::uint64_t changed_vars = 0;
};

Program remove_node(const Program& p, int node_idx) {
    Program out;
    const std::string& victim = p.nodes[node_idx].var;
    out.nodes.reserve(p.nodes.size() - 1);
    for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) {
        if (i != node_idx) out.nodes.push_back(p.nodes[i]);
    }
    for (const EdgeDescription& ed : p.edges) {
        if (ed.src != victim && ed.dst != victim) out.edges.push_back(ed);
    }
    return out;
}

std::vector<Mutation> enumerate_detailed(const Program& p) {
    std::vector<Mutation> out;
    std::set<std::string> seen;
    auto push = [&](Mutation m) {
        m.canon = canonical_text(m.prog);
        if (seen.insert(m.canon).second) out.push_back(std::move(m));
    };

    std::map<std::string, int> var_index;
    for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) var_index[p.nodes[i].var] = i;
    auto var_bit = [&](const std::string& v) {
        const int i = var_index.at(v);
        return i < 64 ? std::uint64_t{1} << i : std::uint64_t{0};
    };

    for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) {
        Mutation m{Mutation::kRemoveNode, i, remove_node(p, i), {}, 0};
        // the victim disappears and its program-neighbors lose degree needs
        m.changed_vars = i < 64 ? std::uint64_t{1} << i : 0;
        for (const EdgeDescription& ed : p.edges) {
            if (ed.src == p.nodes[i].var || ed.dst == p.nodes[i].var) {
                m.changed_vars |= var_bit(ed.src) | var_bit(ed.dst);
            }
        }
        push(std::move(m));
    }
    for (int j = 0; j < static_cast<int>(p.edges.size()); ++j) {
        Program q = p;
        q.edges.erase(q.edges.begin() + j);
        Mutation m{Mutation::kRemoveEdge, j, std::move(q), {}, 0};
        m.changed_vars = var_bit(p.edges[j].src) | var_bit(p.edges[j].dst);
        push(std::move(m));
    }
    for (int i = 0; i < static_cast<int>(p.nodes.size()); ++i) {
        if (!p.nodes[i].constraints) continue;
        // widening i's features also widens the one-hop filtered masks of its
        // program neighbors
        std::uint64_t changed = i < 64 ? std::uint64_t{1} << i : 0;
        for (const EdgeDescription& ed : p.edges) {
            if (ed.src == p.nodes[i].var || ed.dst == p.nodes[i].var) {
                changed |= var_bit(ed.src) | var_bit(ed.dst);
            }
        }
        for (IntervalVec& widened : generalize_itv(*p.nodes[i].constraints)) {
            Program q = p;
            q.nodes[i].constraints = normalize_constraints(std::move(widened));
            push({Mutation::kGeneralizeNode, i, std::move(q), {}, changed});
        }
    }
    for (int j = 0; j < static_cast<int>(p.edges.size()); ++j) {
        if (!p.edges[j].constraints) continue;
        for (IntervalVec& widened : generalize_itv(*p.edges[j].constraints)) {
            Program q = p;
            q.edges[j].constraints = normalize_constraints(std::move(widened));
            push({Mutation::kGeneralizeEdge, j, std::move(q), {}, 0});
        }
    }
    return out;
}

// (score desc, fewer descriptions, lexicographically smaller canonical text)
bool better_candidate(double s1, std::size_t n1, const std::string& c1, double s2,
                      std::size_t n2, const std::string& c2) {
    if (s1 != s2) return s1 > s2;
    if (n1 != n2) return n1 < n2;
    return c1 < c2;
}

using Mask = std::vector<std::uint64_t>;

// Process-wide per-learn cache of satisfies results, keyed by canonical
// program text. Values are pure functions of (program, graph, budget), so the
// cache is transparent to determinism and to --jobs.
struct EvalCache {
    struct Entry {
        Mask known;
        Mask value;
    };
    std::mutex mu;
    std::unordered_map<std::string, Entry> map;
    std::size_t cap = 500'000;
    int words = 0;

    bool snapshot(const std::string& canon, Mask* known, Mask* value) {
        std::lock_guard<std::mutex> lock(mu);
        auto it = map.find(canon);
        if (it == map.end()) return false;
        *known = it->second.known;
        *value = it->second.value;
        return true;
    }

    void merge(const std::string& canon, const std::vector<std::pair<int, bool>>& results) {
        if (results.empty()) return;
        std::lock_guard<std::mutex> lock(mu);
        if (map.size() >= cap && !map.count(canon)) return;
        Entry& e = map[canon];
        if (e.known.empty()) {
            e.known.assign(words, 0);
            e.value.assign(words, 0);
        }
        for (auto [i, v] : results) {
            bits::set(e.known.data(), i);
            if (v) bits::set(e.value.data(), i);
        }
    }
};

struct MiningContext {
    const TrainingSet& D;
    long long budget;
    int words;
    std::vector<MatchIndex> indexes;
    std::map<int, Mask> label_masks;
    mutable EvalCache cache;

    MiningContext(const TrainingSet& D, long long budget) : D(D), budget(budget) {
        words = bits::words_for(D.size());
        cache.words = words;
        indexes.reserve(D.graphs.size());
        for (const Graph* g : D.graphs) indexes.emplace_back(*g);
        for (int label : D.label_set) {
            Mask m(words, 0);
            for (int i = 0; i < D.size(); ++i) {
                if (D.labels[i] == label) bits::set(m.data(), i);
            }
            label_masks.emplace(label, std::move(m));
        }
    }

    bool eval_policy(const CompiledProgram& p, int i, long long* misses) const {
        try {
            return indexes[i].satisfies(p, budget);
        } catch (const BudgetExceededError&) {
            ++*misses;
            return false;
        }
    }
};

// Per-(parent program, graph) necessary conditions shared by every one-step
// mutation of that parent. Each variable gets a candidate mask from its
// feature constraints and degree needs, then one filtering round per edge
// description (the neighbor side uses feature-only masks, so a mutation
// invalidates masks at most one hop away). An unrelaxed variable with an
// empty mask, or a set of identical-mask variables with fewer candidates
// than unrelaxed members, proves the mutation cannot match.
struct ParentInfo {
    bool usable = false;  // vars fit in a 64-bit mask
    int nvars = 0;
    std::vector<const std::optional<IntervalVec>*> cs;
    std::vector<int> out_need;
    std::vector<int> in_need;
    std::vector<std::pair<int, int>> binary_descs;
};

ParentInfo make_parent_info(const Program& p) {
    ParentInfo P;
    P.nvars = static_cast<int>(p.nodes.size());
    if (P.nvars > 64) return P;
    P.usable = true;
    std::map<std::string, int> var_index;
    for (int i = 0; i < P.nvars; ++i) {
        var_index[p.nodes[i].var] = i;
        P.cs.push_back(&p.nodes[i].constraints);
    }
    P.out_need.assign(P.nvars, 0);
    P.in_need.assign(P.nvars, 0);
    for (const EdgeDescription& ed : p.edges) {
        if (ed.src == ed.dst) continue;
        const int x = var_index.at(ed.src), y = var_index.at(ed.dst);
        ++P.out_need[x];
        ++P.in_need[y];
        P.binary_descs.emplace_back(x, y);
    }
    return P;
}

struct HallGroup {
    std::uint64_t members;
    int avail;
};

struct GraphScreen {
    bool usable = false;
    std::uint64_t empty_vars = 0;
    std::vector<HallGroup> deficient;
};

GraphScreen make_screen(const ParentInfo& P, const MatchIndex& index) {
    GraphScreen s;
    const Graph& g = index.graph();
    if (!P.usable || g.n > 64) return s;
    s.usable = true;

    std::uint64_t feat[64];
    std::uint64_t refined[64];
    for (int v = 0; v < P.nvars; ++v) {
        std::uint64_t fm = 0, rm = 0;
        for (int u = 0; u < g.n; ++u) {
            if (!interval_vec_contains(*P.cs[v], g.node_feat(u))) continue;
            fm |= std::uint64_t{1} << u;
            if (index.out_degree(u) >= P.out_need[v] && index.in_degree(u) >= P.in_need[v]) {
                rm |= std::uint64_t{1} << u;
            }
        }
        feat[v] = fm;
        refined[v] = rm;
    }
    for (auto [x, y] : P.binary_descs) {
        std::uint64_t keep = 0;
        std::uint64_t m = refined[x];
        while (m) {
            const int u = std::countr_zero(m);
            m &= m - 1;
            if (*index.out_adjacency(u) & feat[y]) keep |= std::uint64_t{1} << u;
        }
        refined[x] = keep;
        keep = 0;
        m = refined[y];
        while (m) {
            const int u = std::countr_zero(m);
            m &= m - 1;
            if (*index.in_adjacency(u) & feat[x]) keep |= std::uint64_t{1} << u;
        }
        refined[y] = keep;
    }

    std::pair<std::uint64_t, int> order[64];
    int live = 0;
    for (int v = 0; v < P.nvars; ++v) {
        if (refined[v] == 0) {
            s.empty_vars |= std::uint64_t{1} << v;
        } else {
            order[live++] = {refined[v], v};
        }
    }
    std::sort(order, order + live);
    int start = 0;
    for (int i = 1; i <= live; ++i) {
        if (i == live || order[i].first != order[start].first) {
            const int need = i - start;
            const int avail = std::popcount(order[start].first);
            if (need > avail) {
                std::uint64_t members = 0;
                for (int j = start; j < i; ++j) members |= std::uint64_t{1} << order[j].second;
                s.deficient.push_back({members, avail});
            }
            start = i;
        }
    }
    return s;
}

bool screen_admits(const Mutation& m, const GraphScreen& s, const Graph& g) {
    if (static_cast<int>(m.prog.nodes.size()) > g.n) return false;
    if (m.prog.edges.size() > g.edges.size()) return false;
    if (!s.usable) return true;
    if (s.empty_vars & ~m.changed_vars) return false;
    for (const HallGroup& hg : s.deficient) {
        if (std::popcount(hg.members & ~m.changed_vars) > hg.avail) return false;
    }
    return true;
}

struct MineOutcome {
    ScoredProgram scored;
    long long budget_misses = 0;
    long long iterations = 0;
    long long evals = 0;          // matcher queries actually run
    long long screen_rejects = 0;
    long long memo_hits = 0;
};

// Evaluate a program over every graph not yet in `base`, starting the result
// mask from `base` (sound: one-step mutations only generalize, so matched
// sets only grow). Freshly computed bits go through the cache.
Mask eval_from_base(const MiningContext& ctx, const Mutation& m,
                    const std::vector<GraphScreen>& screens, const Mask& base,
                    const std::vector<int>& unmatched, MineOutcome* out) {
    Mask result = base;
    Mask known(ctx.words, 0), value(ctx.words, 0);
    bool have = ctx.cache.snapshot(m.canon, &known, &value);
    std::vector<std::pair<int, bool>> fresh;
    std::optional<CompiledProgram> compiled;
    for (std::size_t u = 0; u < unmatched.size(); ++u) {
        int i = unmatched[u];
        bool v;
        if (have && bits::test(known.data(), i)) {
            v = bits::test(value.data(), i);
            ++out->memo_hits;
        } else {
            if (screen_admits(m, screens[u], *ctx.D.graphs[i])) {
                if (!compiled) compiled = compile_program(m.prog);
                v = ctx.eval_policy(*compiled, i, &out->budget_misses);
                ++out->evals;
            } else {
                v = false;
                ++out->screen_rejects;
            }
            fresh.emplace_back(i, v);
        }
        if (v) bits::set(result.data(), i);
    }
    ctx.cache.merge(m.canon, fresh);
    return result;
}

// Candidates are scored in tie-break order, so a later candidate can only
// displace the incumbent with a strictly higher score, which requires at
// least one new same-label match. This probe looks for one; when it finds
// none the candidate's full evaluation is skipped entirely.
bool probe_new_same_match(const MiningContext& ctx, const Mutation& m,
                          const std::vector<GraphScreen>& screens, int y,
                          const std::vector<int>& unmatched, MineOutcome* out) {
    Mask known(ctx.words, 0), value(ctx.words, 0);
    bool have = ctx.cache.snapshot(m.canon, &known, &value);
    std::vector<std::pair<int, bool>> fresh;
    std::optional<CompiledProgram> compiled;
    bool found = false;
    for (std::size_t u = 0; u < unmatched.size() && !found; ++u) {
        int i = unmatched[u];
        if (ctx.D.labels[i] != y) continue;
        if (have && bits::test(known.data(), i)) {
            found = bits::test(value.data(), i);
            ++out->memo_hits;
            continue;
        }
        bool v;
        if (screen_admits(m, screens[u], *ctx.D.graphs[i])) {
            if (!compiled) compiled = compile_program(m.prog);
            v = ctx.eval_policy(*compiled, i, &out->budget_misses);
            ++out->evals;
        } else {
            v = false;
            ++out->screen_rejects;
        }
        fresh.emplace_back(i, v);
        found = v;
    }
    ctx.cache.merge(m.canon, fresh);
    return found;
}

Mask eval_all(const MiningContext& ctx, const Program& p, const std::string& canon,
              MineOutcome* out) {
    Mask result(ctx.words, 0);
    Mask known(ctx.words, 0), value(ctx.words, 0);
    bool have = ctx.cache.snapshot(canon, &known, &value);
    std::vector<std::pair<int, bool>> fresh;
    std::optional<CompiledProgram> compiled;
    for (int i = 0; i < ctx.D.size(); ++i) {
        bool v;
        if (have && bits::test(known.data(), i)) {
            v = bits::test(value.data(), i);
            ++out->memo_hits;
        } else {
            if (!compiled) compiled = compile_program(p);
            v = ctx.eval_policy(*compiled, i, &out->budget_misses);
            ++out->evals;
            fresh.emplace_back(i, v);
        }
        if (v) bits::set(result.data(), i);
    }
    ctx.cache.merge(canon, fresh);
    return result;
}

MineOutcome mine_one(const MiningContext& ctx, int graph_idx, double eps) {
    MineOutcome out;
    const int y = ctx.D.labels[graph_idx];
    const Mask& ymask = ctx.label_masks.at(y);

    Program p = initialize(*ctx.D.graphs[graph_idx]);
    std::string canon = canonical_text(p);
    Mask matched = eval_all(ctx, p, canon, &out);

    auto score_of = [&](const Mask& m) {
        int total = bits::popcount(m.data(), ctx.words);
        int same = bits::popcount_and(m.data(), ymask.data(), ctx.words);
        return std::tuple<double, int, int>(same / (total + eps), same, total);
    };
    auto [cur_score, cur_same, cur_total] = score_of(matched);

    for (;;) {
        std::vector<Mutation> muts = enumerate_detailed(p);
        if (muts.empty()) break;
        // tie-break order: the first candidate reaching the maximal score wins
        std::sort(muts.begin(), muts.end(), [](const Mutation& a, const Mutation& b) {
            if (a.prog.size() != b.prog.size()) return a.prog.size() < b.prog.size();
            return a.canon < b.canon;
        });

        std::vector<int> unmatched;
        for (int i = 0; i < ctx.D.size(); ++i) {
            if (!bits::test(matched.data(), i)) unmatched.push_back(i);
        }
        ParentInfo info = make_parent_info(p);
        std::vector<GraphScreen> screens(unmatched.size());
        for (std::size_t u = 0; u < unmatched.size(); ++u) {
            screens[u] = make_screen(info, ctx.indexes[unmatched[u]]);
        }

        int best = -1;
        double best_score = 0.0;
        Mask best_mask;
        for (std::size_t mi = 0; mi < muts.size(); ++mi) {
            if (best >= 0 && best_score >= cur_score &&
                !probe_new_same_match(ctx, muts[mi], screens, y, unmatched, &out)) {
                continue;  // no new same-label match, so the score cannot exceed best
            }
            Mask mask = eval_from_base(ctx, muts[mi], screens, matched, unmatched, &out);
            auto [s, same, total] = score_of(mask);
            if (best < 0 || s > best_score) {
                best = static_cast<int>(mi);
                best_score = s;
                best_mask = std::move(mask);
            }
        }

        if (best_score < cur_score) break;  // every mutation is strictly worse
        p = std::move(muts[best].prog);
        canon = std::move(muts[best].canon);
        matched = std::move(best_mask);
        std::tie(cur_score, cur_same, cur_total) = score_of(matched);
        ++out.iterations;
    }

    // Report counts from a direct evaluation of the final program (the climb
    // masks inherit matches from ancestors, which is sound but can over-count
    // relative to a fresh budget-capped query).
    Mask final_mask = eval_all(ctx, p, canon, &out);
    auto [s, same, total] = score_of(final_mask);
    out.scored = {std::move(p), y, s, same, total};
    return out;
}

}  // namespace

ScoreResult score(const Program& p, const TrainingSet& D, int y, double eps, long long budget) {
    if (!(eps > 0)) throw ConfigError("score epsilon must be positive");
    ScoreResult r;
    for (int i = 0; i < D.size(); ++i) {
        bool m;
        try {
            m = satisfies(p, *D.graphs[i], budget);
        } catch (const BudgetExceededError&) {
            ++r.budget_misses;
            m = false;
        }
        if (m) {
            ++r.matched_total;
            if (D.labels[i] == y) ++r.matched_same;
        }
    }
    r.score = r.matched_same / (r.matched_total + eps);
    return r;
}

std::vector<Program> enumerate_mutations(const Program& p) {
    std::vector<Program> out;
    for (Mutation& m : enumerate_detailed(p)) out.push_back(std::move(m.prog));
    return out;
}

std::optional<Program> choose(const std::vector<Program>& candidates, const TrainingSet& D,
                              int y, double eps, long long budget) {
    if (candidates.empty()) return std::nullopt;
    int best = -1;
    double best_score = 0.0;
    std::string best_canon;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        double s = score(candidates[i], D, y, eps, budget).score;
        std::string canon = canonical_text(candidates[i]);
        if (best < 0 || better_candidate(s, candidates[i].size(), canon, best_score,
                                         candidates[best].size(), best_canon)) {
            best = static_cast<int>(i);
            best_score = s;
            best_canon = std::move(canon);
        }
    }
    return candidates[best];
}

ScoredProgram mine(const TrainingSet& D, const Graph& g, int y, const MiningConfig& cfg,
                   MiningStats* stats) {
    int idx = -1;
    for (int i = 0; i < D.size(); ++i) {
        if (D.graphs[i] == &g) {
            idx = i;
            break;
        }
    }
    if (idx < 0) {
        for (int i = 0; i < D.size(); ++i) {
            if (*D.graphs[i] == g) {
                idx = i;
                break;
            }
        }
    }
    if (idx < 0 || D.labels[idx] != y) {
        throw ValidationError("mine: (g, y) is not an element of the training set");
    }
    if (!(cfg.epsilon > 0)) throw ConfigError("mining epsilon must be positive");
    MiningContext ctx(D, cfg.match_budget);
    MineOutcome out = mine_one(ctx, idx, cfg.epsilon);
    if (stats) {
        stats->budget_misses += out.budget_misses;
        stats->iterations += out.iterations;
    }
    return out.scored;
}

std::vector<ScoredProgram> learn(const TrainingSet& D, const MiningConfig& cfg,
                                 MiningStats* stats) {
    if (!(cfg.epsilon > 0)) throw ConfigError("mining epsilon must be positive");
    if (cfg.k < 1) throw ConfigError("mining k must be at least 1");

    MiningContext ctx(D, cfg.match_budget);
    std::vector<MineOutcome> outcomes(D.size());
    parallel_for(D.size(), cfg.jobs,
                 [&](int i) { outcomes[i] = mine_one(ctx, i, cfg.epsilon); });

    if (stats) {
        for (const MineOutcome& o : outcomes) {
            stats->budget_misses += o.budget_misses;
            stats->iterations += o.iterations;
        }
    }
    {
        long long evals = 0, rejects = 0, hits = 0;
        for (const MineOutcome& o : outcomes) {
            evals += o.evals;
            rejects += o.screen_rejects;
            hits += o.memo_hits;
        }
        std::cerr << "log learn evals=" << evals << " screen_rejects=" << rejects
                  << " memo_hits=" << hits << "\n";
    }

    // dedup up to renaming, keeping the first occurrence in input order
    std::vector<std::pair<ScoredProgram, std::string>> pool;
    std::set<std::string> seen;
    for (MineOutcome& o : outcomes) {
        std::string canon = canonical_text(o.scored.program);
        if (seen.insert(canon).second) pool.emplace_back(std::move(o.scored), std::move(canon));
    }
    auto by_rank = [](const std::pair<ScoredProgram, std::string>& a,
                      const std::pair<ScoredProgram, std::string>& b) {
        return better_candidate(a.first.score, a.first.program.size(), a.second,
                                b.first.score, b.first.program.size(), b.second);
    };
    std::sort(pool.begin(), pool.end(), by_rank);

    const std::size_t k = static_cast<std::size_t>(cfg.k);
    std::vector<std::pair<ScoredProgram, std::string>> selected;
    if (!cfg.balanced_topk) {
        for (auto& entry : pool) {
            if (selected.size() >= k) break;
            selected.push_back(std::move(entry));
        }
    } else {
        std::map<int, std::vector<std::pair<ScoredProgram, std::string>*>> by_label;
        for (auto& entry : pool) by_label[entry.first.label].push_back(&entry);
        for (std::size_t round = 0; selected.size() < k; ++round) {
            bool took_any = false;
            for (int label : D.label_set) {
                auto& queue = by_label[label];
                if (round < queue.size() && selected.size() < k) {
                    selected.push_back(std::move(*queue[round]));
                    took_any = true;
                }
            }
            if (!took_any) break;
        }
        std::sort(selected.begin(), selected.end(), by_rank);
    }

    std::vector<ScoredProgram> result;
    result.reserve(selected.size());
    for (auto& [sp, canon] : selected) result.push_back(std::move(sp));
    return result;
}

// ---------------------------------------------------------------------------
// Diagnostics and the layer file format
// ---------------------------------------------------------------------------

double hamming_objective(const std::vector<Program>& programs, const TrainingSet& D,
                         long long budget, bool* degenerate) {
    if (degenerate) *degenerate = programs.empty();
    if (programs.empty()) return 0.0;
    const int k = static_cast<int>(programs.size());
    const int words = bits::words_for(k);
    std::vector<std::uint64_t> reps(static_cast<std::size_t>(D.size()) * words, 0);
    for (int i = 0; i < D.size(); ++i) {
        MatchIndex index(*D.graphs[i]);
        for (int j = 0; j < k; ++j) {
            if (index.satisfies(programs[j], budget)) {
                bits::set(reps.data() + static_cast<std::size_t>(i) * words, j);
            }
        }
    }
    double total = 0.0;
    for (int i = 0; i < D.size(); ++i) {
        for (int j = 0; j < D.size(); ++j) {
            if (i == j) continue;
            int differing = 0;
            for (int w = 0; w < words; ++w) {
                differing += std::popcount(reps[static_cast<std::size_t>(i) * words + w] ^
                                           reps[static_cast<std::size_t>(j) * words + w]);
            }
            double sim = static_cast<double>(k - differing) / k;
            total += sim * (D.labels[i] == D.labels[j] ? 1.0 : -1.0);
        }
    }
    return total;
}

std::string layer_to_string(const std::vector<ScoredProgram>& programs, int k, double epsilon) {
    std::string out = "gdl-layer k=" + std::to_string(k) + " epsilon=" + format_real(epsilon) + "\n";
    for (std::size_t i = 0; i < programs.size(); ++i) {
        const ScoredProgram& sp = programs[i];
        out += "# program " + std::to_string(i) + " label=" + std::to_string(sp.label) +
               " score=" + format_real(sp.score) + " matched=" + std::to_string(sp.matched_same) +
               "/" + std::to_string(sp.matched_total) + "\n";
        out += print_program(sp.program);
        out += "\n";
    }
    return out;
}

void save_layer(const std::string& path, const std::vector<ScoredProgram>& programs, int k,
                double epsilon) {
    std::ofstream f(path);
    if (!f) throw ModelIoError("cannot open '" + path + "' for writing");
    f << layer_to_string(programs, k, epsilon);
    if (!f) throw ModelIoError("failed writing layer file '" + path + "'");
}

std::vector<ScoredProgram> layer_from_stream(std::istream& in, int* k_out, double* epsilon_out,
                                             std::string* terminator) {
    if (terminator) terminator->clear();
    std::string line;
    if (!std::getline(in, line)) throw ModelIoError("empty layer file");
    int k = 0;
    double epsilon = 0.0;
    {
        std::istringstream hdr(line);
        std::string tag, kfield, efield;
        hdr >> tag >> kfield >> efield;
        if (tag != "gdl-layer" || kfield.rfind("k=", 0) != 0 || efield.rfind("epsilon=", 0) != 0) {
            throw ModelIoError("malformed layer header: " + line);
        }
        try {
            k = std::stoi(kfield.substr(2));
            epsilon = std::stod(efield.substr(8));
        } catch (const std::exception&) {
            throw ModelIoError("malformed layer header: " + line);
        }
    }
    if (k_out) *k_out = k;
    if (epsilon_out) *epsilon_out = epsilon;

    std::vector<ScoredProgram> programs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# program", 0) != 0) {  // start of a following section
            if (terminator) *terminator = line;
            break;
        }
        ScoredProgram sp;
        {
            std::istringstream hdr(line);
            std::string hash, word, idx, lab, sc, matched;
            hdr >> hash >> word >> idx >> lab >> sc >> matched;
            if (lab.rfind("label=", 0) != 0 || sc.rfind("score=", 0) != 0 ||
                matched.rfind("matched=", 0) != 0) {
                throw ModelIoError("malformed program header: " + line);
            }
            try {
                sp.label = std::stoi(lab.substr(6));
                sp.score = std::stod(sc.substr(6));
                std::string counts = matched.substr(8);
                auto slash = counts.find('/');
                if (slash == std::string::npos) throw ModelIoError("bad matched field");
                sp.matched_same = std::stoi(counts.substr(0, slash));
                sp.matched_total = std::stoi(counts.substr(slash + 1));
            } catch (const ModelIoError&) {
                throw;
            } catch (const std::exception&) {
                throw ModelIoError("malformed program header: " + line);
            }
        }
        std::string text;
        while (std::getline(in, line) && !line.empty()) {
            text += line;
            text += '\n';
        }
        try {
            sp.program = parse_program(text);
            validate_program(sp.program);
        } catch (const Error& e) {
            throw ModelIoError(std::string("bad program in layer file: ") + e.what());
        }
        programs.push_back(std::move(sp));
    }
    return programs;
}

std::vector<ScoredProgram> load_layer(const std::string& path, int* k_out, double* epsilon_out) {
    std::ifstream f(path);
    if (!f) throw ModelIoError("cannot open layer file '" + path + "'");
    return layer_from_stream(f, k_out, epsilon_out);
}

}  // namespace gdlnn
