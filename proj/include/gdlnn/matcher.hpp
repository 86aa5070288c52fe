#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "gdlnn/gdl.hpp"
#include "gdlnn/graph.hpp"

namespace gdlnn {

// Default cap on attempted variable assignments per satisfies/count query.
inline constexpr long long kDefaultMatchBudget = 10'000'000;

// True iff every coordinate of x lies in its closed interval; absent
// constraints accept everything. Throws ValidationError on length mismatch.
bool interval_vec_contains(const std::optional<IntervalVec>& constraints,
                           std::span<const double> x);

// (G, eta) ∈ ⟦P⟧: every node description's target satisfies its intervals and
// every edge description maps to an existing edge whose features satisfy
// theirs. Returns false for non-injective assignments (they witness nothing).
// Throws ValidationError when eta leaves a program variable unassigned.
bool check_valuation(const Program& p, const Graph& g, const Valuation& eta);

// Graph-independent program analysis, computed once and reused across many
// graphs (variable numbering, edge lists, per-variable degree requirements).
// Holds pointers into the source Program, which must outlive it.
struct CompiledProgram {
    struct Edge {
        int src;
        int dst;
        const std::optional<IntervalVec>* constraints;
    };
    int nvars = 0;
    std::vector<const std::optional<IntervalVec>*> node_constraints;
    std::vector<Edge> binary_edges;
    std::vector<Edge> self_edges;
    std::vector<int> out_need;
    std::vector<int> in_need;
    std::size_t total_edges = 0;
};
CompiledProgram compile_program(const Program& p);

// Per-graph index reused across many queries: adjacency bitmasks and an edge
// lookup table. Immutable after construction; safe to share across threads.
class MatchIndex {
public:
    explicit MatchIndex(const Graph& g);

    const Graph& graph() const { return *g_; }

    // G ⊨ P: some injective valuation exists. Deterministic backtracking
    // (interval-filtered candidates, arc consistency, most-constrained-first
    // ordering). Throws BudgetExceededError past `budget` attempted
    // assignments.
    bool satisfies(const Program& p, long long budget = kDefaultMatchBudget) const;
    bool satisfies(const CompiledProgram& p, long long budget = kDefaultMatchBudget) const;

    // Number of distinct injective valuations eta with (G, eta) ∈ ⟦P⟧.
    long long count_valuations(const Program& p, long long budget = kDefaultMatchBudget) const;
    long long count_valuations(const CompiledProgram& p,
                               long long budget = kDefaultMatchBudget) const;

    // Nodes whose feature vector satisfies the constraint vector; the unary
    // candidate count used by the mining prescreens. The degree-aware variant
    // additionally requires out/in degrees of at least the given bounds.
    int count_nodes_satisfying(const std::optional<IntervalVec>& constraints) const;
    int count_nodes_satisfying(const std::optional<IntervalVec>& constraints, int min_out_degree,
                               int min_in_degree) const;

    int out_degree(int node) const { return out_degree_[node]; }
    int in_degree(int node) const { return in_degree_[node]; }

    int words() const { return words_; }
    const std::uint64_t* out_adjacency(int node) const { return out_any_.data() + static_cast<std::size_t>(node) * words_; }
    const std::uint64_t* in_adjacency(int node) const { return in_any_.data() + static_cast<std::size_t>(node) * words_; }
    int edge_index(int u, int v) const;  // -1 when absent

private:
    friend class MatchRun;
    const Graph* g_;
    int words_;
    std::vector<std::uint64_t> out_any_;
    std::vector<std::uint64_t> in_any_;
    std::vector<int> out_degree_;
    std::vector<int> in_degree_;
    std::unordered_map<std::uint64_t, int> edge_lookup_;
};

// Convenience single-shot wrappers (build a MatchIndex internally).
bool satisfies(const Program& p, const Graph& g, long long budget = kDefaultMatchBudget);
long long count_valuations(const Program& p, const Graph& g,
                           long long budget = kDefaultMatchBudget);

// Test oracle: exhaustively enumerates every injective variable→node
// assignment and applies check_valuation at the leaves. No filtering, no
// pruning — intentionally independent of the backtracking path above.
// Intended for small instances only.
bool brute_force_satisfies(const Program& p, const Graph& g);
long long brute_force_count_valuations(const Program& p, const Graph& g);

}  // namespace gdlnn
