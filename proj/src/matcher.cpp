#include "gdlnn/matcher.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <map>
#include <string>

#include "gdlnn/detail/bits.hpp"
#include "gdlnn/errors.hpp"

namespace gdlnn {

void Graph::validate() const {
    if (n < 0 || d < 0 || c < 0) throw ValidationError("negative graph dimensions");
    if (node_features.size() != static_cast<std::size_t>(n) * d) {
        throw ValidationError("node feature matrix does not have n rows of d values");
    }
    if (edge_features.size() != edges.size() * static_cast<std::size_t>(c)) {
        throw ValidationError("edge feature matrix does not have m rows of c values");
    }
    std::map<std::pair<int, int>, int> seen;
    for (std::size_t j = 0; j < edges.size(); ++j) {
        auto [u, v] = edges[j];
        if (u < 0 || u >= n || v < 0 || v >= n) {
            throw ValidationError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
        }
        if (!seen.emplace(edges[j], static_cast<int>(j)).second) {
            throw ValidationError("duplicate directed edge (" + std::to_string(u) + ", " +
                                  std::to_string(v) + ")");
        }
    }
}

bool interval_vec_contains(const std::optional<IntervalVec>& constraints,
                           std::span<const double> x) {
    if (!constraints) return true;
    if (constraints->size() != x.size()) {
        throw ValidationError("constraint vector length " + std::to_string(constraints->size()) +
                              " does not match feature vector length " + std::to_string(x.size()));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(*constraints)[i].contains(x[i])) return false;
    }
    return true;
}

bool check_valuation(const Program& p, const Graph& g, const Valuation& eta) {
    auto lookup = [&](const std::string& var) {
        auto it = eta.assignment.find(var);
        if (it == eta.assignment.end()) {
            throw ValidationError("valuation leaves variable '" + var + "' unassigned");
        }
        return it->second;
    };

    // injectivity over the program's variables
    std::vector<int> targets;
    targets.reserve(p.nodes.size());
    for (const NodeDescription& nd : p.nodes) targets.push_back(lookup(nd.var));
    std::vector<int> sorted_targets = targets;
    std::sort(sorted_targets.begin(), sorted_targets.end());
    if (std::adjacent_find(sorted_targets.begin(), sorted_targets.end()) != sorted_targets.end()) {
        return false;
    }

    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        int u = targets[i];
        if (u < 0 || u >= g.n) return false;
        if (!interval_vec_contains(p.nodes[i].constraints, g.node_feat(u))) return false;
    }
    for (const EdgeDescription& ed : p.edges) {
        int u = lookup(ed.src);
        int v = lookup(ed.dst);
        int found = -1;
        for (std::size_t j = 0; j < g.edges.size(); ++j) {
            if (g.edges[j].first == u && g.edges[j].second == v) {
                found = static_cast<int>(j);
                break;
            }
        }
        if (found < 0) return false;
        if (!interval_vec_contains(ed.constraints, g.edge_feat(found))) return false;
    }
    return true;
}

MatchIndex::MatchIndex(const Graph& g) : g_(&g) {
    g.validate();
    words_ = std::max(1, (g.n + 63) / 64);
    out_any_.assign(static_cast<std::size_t>(g.n) * words_, 0);
    in_any_.assign(static_cast<std::size_t>(g.n) * words_, 0);
    out_degree_.assign(g.n, 0);
    in_degree_.assign(g.n, 0);
    edge_lookup_.reserve(g.edges.size() * 2);
    for (std::size_t j = 0; j < g.edges.size(); ++j) {
        auto [u, v] = g.edges[j];
        bits::set(out_any_.data() + static_cast<std::size_t>(u) * words_, v);
        bits::set(in_any_.data() + static_cast<std::size_t>(v) * words_, u);
        ++out_degree_[u];
        ++in_degree_[v];
        edge_lookup_.emplace((static_cast<std::uint64_t>(u) << 32) | static_cast<std::uint32_t>(v),
                             static_cast<int>(j));
    }
}

int MatchIndex::edge_index(int u, int v) const {
    auto it = edge_lookup_.find((static_cast<std::uint64_t>(u) << 32) |
                                static_cast<std::uint32_t>(v));
    return it == edge_lookup_.end() ? -1 : it->second;
}

int MatchIndex::count_nodes_satisfying(const std::optional<IntervalVec>& constraints) const {
    return count_nodes_satisfying(constraints, 0, 0);
}

int MatchIndex::count_nodes_satisfying(const std::optional<IntervalVec>& constraints,
                                       int min_out_degree, int min_in_degree) const {
    const Graph& g = *g_;
    int count = 0;
    for (int u = 0; u < g.n; ++u) {
        if (out_degree_[u] < min_out_degree || in_degree_[u] < min_in_degree) continue;
        if (!constraints || interval_vec_contains(constraints, g.node_feat(u))) ++count;
    }
    return count;
}
CompiledProgram compile_program(const Program& p) {
    CompiledProgram cp;
    cp.nvars = static_cast<int>(p.nodes.size());
    cp.total_edges = p.edges.size();
    cp.node_constraints.reserve(p.nodes.size());
    for (const NodeDescription& nd : p.nodes) cp.node_constraints.push_back(&nd.constraints);
    cp.out_need.assign(cp.nvars, 0);
    cp.in_need.assign(cp.nvars, 0);

    auto var_index = [&](const std::string& name) {
        for (int i = 0; i < cp.nvars; ++i) {
            if (p.nodes[i].var == name) return i;
        }
        throw ValidationError("edge description references undeclared variable '" + name + "'");
    };
    for (const EdgeDescription& ed : p.edges) {
        CompiledProgram::Edge e{var_index(ed.src), var_index(ed.dst), &ed.constraints};
        if (e.src == e.dst) {
            cp.self_edges.push_back(e);
        } else {
            cp.binary_edges.push_back(e);
            ++cp.out_need[e.src];
            ++cp.in_need[e.dst];
        }
    }
    return cp;
}

class MatchRun {
public:
    MatchRun(const MatchIndex& index, const CompiledProgram& p, long long budget)
        : gi_(index), g_(index.graph()), p_(p), budget_(budget), words_(index.words()),
          s_(scratch()) {}

    bool exists() { return run(false) > 0; }
    long long count() { return run(true); }

private:
    struct BinaryDesc {
        int src;
        int dst;
        const std::uint64_t* out;  // n x words adjacency restricted to the constraint
        const std::uint64_t* in;
    };

    // per-thread buffers reused across queries; matching runs in the miner's
    // innermost loops and must not allocate once warm
    struct Scratch {
        std::vector<std::uint64_t> cand;
        std::vector<std::uint64_t> desc_adj;
        std::vector<BinaryDesc> descs;
        std::vector<int> var_desc_offsets;  // CSR over vars
        std::vector<int> var_desc_list;
        std::vector<int> var_desc_cursor;
        std::vector<std::uint64_t> frames;
        std::vector<std::uint64_t> used;
        std::vector<int> assignment;
        std::vector<int> hall_idx;
        std::vector<std::uint64_t> ac_buf;
        std::vector<std::uint64_t> union_buf;
        std::vector<int> match_owner;
        std::vector<std::uint64_t> match_visited;
    };
    static Scratch& scratch() {
        thread_local Scratch s;
        return s;
    }

    static constexpr long long kHardModeAttempts = 2048;

    const MatchIndex& gi_;
    const Graph& g_;
    const CompiledProgram& p_;
    long long budget_;
    long long attempts_ = 0;
    int words_;
    int nvars_ = 0;
    Scratch& s_;
    long long found_ = 0;
    bool stop_ = false;

    std::uint64_t* cand(int v) { return s_.cand.data() + static_cast<std::size_t>(v) * words_; }

    long long run(bool count_all) {
        nvars_ = p_.nvars;
        if (nvars_ == 0) return 1;  // empty conjunction: the empty valuation
        if (nvars_ > g_.n) return 0;
        if (p_.total_edges > g_.edges.size()) return 0;

        if (!build_candidates()) return 0;
        if (!hall_check()) return 0;
        build_descs();
        if (!run_ac(s_.cand.data(), false)) return 0;
        if (!hall_check()) return 0;

        s_.frames.assign(static_cast<std::size_t>(nvars_ + 1) * nvars_ * words_, 0);
        std::memcpy(frame(0), s_.cand.data(), static_cast<std::size_t>(nvars_) * words_ * 8);
        s_.used.assign(words_, 0);
        s_.assignment.assign(nvars_, -1);
        s_.union_buf.assign(words_, 0);
        found_ = 0;
        stop_ = !count_all;
        dfs(0);
        return found_;
    }

    bool build_candidates() {
        s_.cand.assign(static_cast<std::size_t>(nvars_) * words_, 0);
        for (int i = 0; i < nvars_; ++i) {
            const auto& cs = *p_.node_constraints[i];
            std::uint64_t* m = cand(i);
            for (int u = 0; u < g_.n; ++u) {
                if (gi_.out_degree_[u] < p_.out_need[i] || gi_.in_degree_[u] < p_.in_need[i]) {
                    continue;
                }
                if (interval_vec_contains(cs, g_.node_feat(u))) bits::set(m, u);
            }
        }
        // self-loop edge descriptions are unary constraints
        for (const CompiledProgram::Edge& ed : p_.self_edges) {
            std::uint64_t* m = cand(ed.src);
            for (int u = 0; u < g_.n; ++u) {
                if (!bits::test(m, u)) continue;
                int e = gi_.edge_index(u, u);
                if (e < 0 || !interval_vec_contains(*ed.constraints, g_.edge_feat(e))) {
                    bits::clear(m, u);
                }
            }
        }
        for (int i = 0; i < nvars_; ++i) {
            if (bits::empty(cand(i), words_)) return false;
        }
        return true;
    }

    // vars with identical candidate masks need at least that many nodes
    bool hall_check() {
        if (nvars_ < 2) return true;
        s_.hall_idx.resize(nvars_);
        for (int i = 0; i < nvars_; ++i) s_.hall_idx[i] = i;
        std::sort(s_.hall_idx.begin(), s_.hall_idx.end(), [&](int a, int b) {
            return std::memcmp(cand(a), cand(b), static_cast<std::size_t>(words_) * 8) < 0;
        });
        int group_start = 0;
        for (int i = 1; i <= nvars_; ++i) {
            if (i == nvars_ ||
                !bits::equal(cand(s_.hall_idx[i]), cand(s_.hall_idx[group_start]), words_)) {
                int size = i - group_start;
                if (size > bits::popcount(cand(s_.hall_idx[group_start]), words_)) return false;
                group_start = i;
            }
        }
        return true;
    }

    void build_descs() {
        s_.descs.clear();
        std::size_t constrained = 0;
        for (const CompiledProgram::Edge& ed : p_.binary_edges) {
            if (*ed.constraints) ++constrained;
        }
        s_.desc_adj.assign(constrained * 2 * g_.n * words_, 0);
        std::size_t slab = 0;

        s_.var_desc_cursor.assign(nvars_, 0);
        for (const CompiledProgram::Edge& ed : p_.binary_edges) {
            BinaryDesc bd;
            bd.src = ed.src;
            bd.dst = ed.dst;
            if (!*ed.constraints) {
                bd.out = gi_.out_adjacency(0);
                bd.in = gi_.in_adjacency(0);
            } else {
                std::uint64_t* out = s_.desc_adj.data() + slab;
                slab += static_cast<std::size_t>(g_.n) * words_;
                std::uint64_t* in = s_.desc_adj.data() + slab;
                slab += static_cast<std::size_t>(g_.n) * words_;
                for (std::size_t j = 0; j < g_.edges.size(); ++j) {
                    auto [u, v] = g_.edges[j];
                    if (interval_vec_contains(*ed.constraints, g_.edge_feat(j))) {
                        bits::set(out + static_cast<std::size_t>(u) * words_, v);
                        bits::set(in + static_cast<std::size_t>(v) * words_, u);
                    }
                }
                bd.out = out;
                bd.in = in;
            }
            s_.descs.push_back(bd);
            ++s_.var_desc_cursor[bd.src];
            ++s_.var_desc_cursor[bd.dst];
        }

        // CSR adjacency from vars to their descriptions
        s_.var_desc_offsets.assign(nvars_ + 1, 0);
        for (int v = 0; v < nvars_; ++v) {
            s_.var_desc_offsets[v + 1] = s_.var_desc_offsets[v] + s_.var_desc_cursor[v];
        }
        s_.var_desc_list.assign(s_.var_desc_offsets[nvars_], 0);
        for (int v = 0; v < nvars_; ++v) s_.var_desc_cursor[v] = s_.var_desc_offsets[v];
        for (int id = 0; id < static_cast<int>(s_.descs.size()); ++id) {
            s_.var_desc_list[s_.var_desc_cursor[s_.descs[id].src]++] = id;
            s_.var_desc_list[s_.var_desc_cursor[s_.descs[id].dst]++] = id;
        }
    }

    int var_degree(int v) const { return s_.var_desc_offsets[v + 1] - s_.var_desc_offsets[v]; }

    const std::uint64_t* adj_row(const std::uint64_t* base, int u) const {
        return base + static_cast<std::size_t>(u) * words_;
    }

    // Arc consistency to fixpoint over `masks` (nvars x words). When
    // `skip_assigned` is set, descriptions touching an assigned variable are
    // left alone (forward checking already enforced them).
    bool run_ac(std::uint64_t* masks, bool skip_assigned) {
        auto m = [&](int v) { return masks + static_cast<std::size_t>(v) * words_; };
        s_.ac_buf.resize(words_);
        std::uint64_t* buf = s_.ac_buf.data();
        bool changed = true;
        while (changed) {
            changed = false;
            for (const BinaryDesc& bd : s_.descs) {
                if (skip_assigned &&
                    (s_.assignment[bd.src] >= 0 || s_.assignment[bd.dst] >= 0)) {
                    continue;
                }
                // src side: keep u with an out-neighbor among dst candidates
                std::fill(buf, buf + words_, 0);
                bits::for_each(m(bd.src), words_, [&](int u) {
                    if (bits::intersects(adj_row(bd.out, u), m(bd.dst), words_)) {
                        bits::set(buf, u);
                    }
                });
                if (!bits::equal(buf, m(bd.src), words_)) {
                    std::memcpy(m(bd.src), buf, static_cast<std::size_t>(words_) * 8);
                    if (bits::empty(m(bd.src), words_)) return false;
                    changed = true;
                }
                // dst side
                std::fill(buf, buf + words_, 0);
                bits::for_each(m(bd.dst), words_, [&](int v) {
                    if (bits::intersects(adj_row(bd.in, v), m(bd.src), words_)) {
                        bits::set(buf, v);
                    }
                });
                if (!bits::equal(buf, m(bd.dst), words_)) {
                    std::memcpy(m(bd.dst), buf, static_cast<std::size_t>(words_) * 8);
                    if (bits::empty(m(bd.dst), words_)) return false;
                    changed = true;
                }
            }
        }
        return true;
    }

    // Régin-style feasibility: a perfect matching of the unassigned variables
    // into their remaining candidates must exist (assigned variables already
    // occupy used nodes, which the masks exclude via ~used).
    bool matching_feasible(const std::uint64_t* masks) {
        s_.match_owner.assign(g_.n, -1);
        s_.match_visited.resize(words_);
        auto m = [&](int v) { return masks + static_cast<std::size_t>(v) * words_; };

        auto augment = [&](auto&& self, int var) -> bool {
            for (int w = 0; w < words_; ++w) {
                std::uint64_t x = m(var)[w] & ~s_.used[w] & ~s_.match_visited[w];
                while (x) {
                    const int u = w * 64 + std::countr_zero(x);
                    x &= x - 1;
                    bits::set(s_.match_visited.data(), u);
                    if (s_.match_owner[u] < 0 || self(self, s_.match_owner[u])) {
                        s_.match_owner[u] = var;
                        return true;
                    }
                }
            }
            return false;
        };
        for (int v = 0; v < nvars_; ++v) {
            if (s_.assignment[v] >= 0) continue;
            std::fill(s_.match_visited.begin(), s_.match_visited.end(), 0);
            if (!augment(augment, v)) return false;
        }
        return true;
    }

    std::uint64_t* frame(int depth) {
        return s_.frames.data() + static_cast<std::size_t>(depth) * nvars_ * words_;
    }

    void dfs(int depth) {
        if (stop_ && found_) return;
        if (depth == nvars_) {
            ++found_;
            return;
        }
        std::uint64_t* cur = frame(depth);
        std::uint64_t* next = frame(depth + 1);

        // Once a query has burned through enough attempts it is combinatorial;
        // switch the remaining subtrees to maintained arc consistency plus the
        // matching feasibility check. Cheap queries never pay for either.
        if (attempts_ >= kHardModeAttempts && nvars_ - depth >= 4) {
            if (!run_ac(cur, true)) return;
            if (!matching_feasible(cur)) return;
        }

        // dynamic most-constrained-variable selection over remaining domains;
        // the union of the remaining domains must cover the remaining vars
        int var = -1;
        int var_count = 0;
        std::uint64_t* domain_union = s_.union_buf.data();
        std::fill(domain_union, domain_union + words_, 0);
        int remaining = 0;
        for (int v = 0; v < nvars_; ++v) {
            if (s_.assignment[v] >= 0) continue;
            ++remaining;
            const std::uint64_t* dom = cur + static_cast<std::size_t>(v) * words_;
            int c = 0;
            for (int w = 0; w < words_; ++w) {
                const std::uint64_t avail_w = dom[w] & ~s_.used[w];
                domain_union[w] |= avail_w;
                c += std::popcount(avail_w);
            }
            if (c == 0) return;  // dead end
            if (var < 0 || c < var_count ||
                (c == var_count && var_degree(v) > var_degree(var))) {
                var = v;
                var_count = c;
            }
        }
        if (bits::popcount(domain_union, words_) < remaining) return;  // all-different
        const std::uint64_t* avail = cur + static_cast<std::size_t>(var) * words_;

        for (int w = 0; w < words_; ++w) {
            std::uint64_t x = avail[w] & ~s_.used[w];
            while (x) {
                int u = w * 64 + std::countr_zero(x);
                x &= x - 1;
                if (++attempts_ > budget_) throw BudgetExceededError(budget_);

                std::memcpy(next, cur, static_cast<std::size_t>(nvars_) * words_ * 8);
                bool viable = true;
                for (int off = s_.var_desc_offsets[var]; off < s_.var_desc_offsets[var + 1];
                     ++off) {
                    const BinaryDesc& bd = s_.descs[s_.var_desc_list[off]];
                    int other = bd.src == var ? bd.dst : bd.src;
                    if (s_.assignment[other] >= 0) continue;  // enforced at its assignment
                    const std::uint64_t* allowed =
                        bd.src == var ? adj_row(bd.out, u) : adj_row(bd.in, u);
                    std::uint64_t* om = next + static_cast<std::size_t>(other) * words_;
                    bool nonempty = false;
                    for (int k = 0; k < words_; ++k) {
                        om[k] &= allowed[k];
                        nonempty |= om[k] != 0;
                    }
                    if (!nonempty) {
                        viable = false;
                        break;
                    }
                }
                if (!viable) continue;

                s_.assignment[var] = u;
                s_.used[w] |= std::uint64_t{1} << (u & 63);
                dfs(depth + 1);
                s_.used[w] &= ~(std::uint64_t{1} << (u & 63));
                s_.assignment[var] = -1;
                if (stop_ && found_) return;
            }
        }
    }
};

bool MatchIndex::satisfies(const CompiledProgram& p, long long budget) const {
    MatchRun run(*this, p, budget);
    return run.exists();
}

long long MatchIndex::count_valuations(const CompiledProgram& p, long long budget) const {
    MatchRun run(*this, p, budget);
    return run.count();
}

bool MatchIndex::satisfies(const Program& p, long long budget) const {
    return satisfies(compile_program(p), budget);
}

long long MatchIndex::count_valuations(const Program& p, long long budget) const {
    return count_valuations(compile_program(p), budget);
}

bool satisfies(const Program& p, const Graph& g, long long budget) {
    return MatchIndex(g).satisfies(p, budget);
}

long long count_valuations(const Program& p, const Graph& g, long long budget) {
    return MatchIndex(g).count_valuations(p, budget);
}

namespace {

long long brute_force_enumerate(const Program& p, const Graph& g, bool stop_at_first) {
    const int nvars = static_cast<int>(p.nodes.size());
    std::vector<int> assignment(nvars, -1);
    std::vector<char> used(g.n, 0);
    long long found = 0;

    auto leaf_check = [&]() {
        Valuation eta;
        for (int i = 0; i < nvars; ++i) eta.assignment[p.nodes[i].var] = assignment[i];
        if (check_valuation(p, g, eta)) ++found;
    };

    auto rec = [&](auto&& self, int i) -> void {
        if (stop_at_first && found) return;
        if (i == nvars) {
            leaf_check();
            return;
        }
        for (int u = 0; u < g.n; ++u) {
            if (used[u]) continue;
            used[u] = 1;
            assignment[i] = u;
            self(self, i + 1);
            assignment[i] = -1;
            used[u] = 0;
            if (stop_at_first && found) return;
        }
    };
    rec(rec, 0);
    return found;
}

}  // namespace

bool brute_force_satisfies(const Program& p, const Graph& g) {
    return brute_force_enumerate(p, g, true) > 0;
}

long long brute_force_count_valuations(const Program& p, const Graph& g) {
    return brute_force_enumerate(p, g, false);
}

}  // namespace gdlnn
