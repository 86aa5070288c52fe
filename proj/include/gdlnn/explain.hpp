#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdlnn/graph.hpp"
#include "gdlnn/matcher.hpp"
#include "gdlnn/model.hpp"

namespace gdlnn {

// Feature attribution from the local surrogate: per-coordinate weights,
// the selected important program indices (descending |weight|), and the
// weighted R² of the surrogate fit.
struct ImportanceResult {
    std::vector<double> weights;
    std::vector<int> selected;
    double r2 = 0.0;
    bool degenerate = false;  // all perturbation masks identical; empty selection
};

// Node-removal explanation. Indices refer to the original graph; kept_edges
// are the original edges with both endpoints kept.
struct SubgraphExplanation {
    std::vector<int> kept_nodes;
    std::vector<std::pair<int, int>> kept_edges;
    std::vector<int> satisfied_selected;  // selected programs the original graph satisfies
};

// Local surrogate around the representation of g: `samples` random masks over
// the active coordinates (each flipped off with probability 1/2), the MLP
// queried on each masked representation, and a weighted ridge regression
// (weights exp(-H²/σ²), σ = 0.75·√k, λ = 0.01) fit to the predicted-class
// probability. Selected: up to `select` features with positive coefficients.
ImportanceResult important_features(const Graph& g, const Model& m, int samples, int select,
                                    std::uint64_t seed, long long budget = kDefaultMatchBudget);

// One greedy pass of single-node removals in descending node-index order;
// a removal is kept iff every program in `selected` that the input graph
// satisfies stays satisfied. Returns the node indices (of g) that survive.
std::vector<int> refine_pass(const Graph& g, const std::vector<const Program*>& selected,
                             long long budget = kDefaultMatchBudget);

// The subgraph of g induced by `kept` (indices remapped, label preserved).
Graph induced_subgraph(const Graph& g, const std::vector<int>& kept);

// Refine as a graph-to-graph operation: a single removal pass, with g
// returned unchanged when nothing can be removed.
Graph refine(const Graph& g, const std::vector<const Program*>& selected,
             long long budget = kDefaultMatchBudget);

// Full explanation: important features, then refine iterated to a fixpoint.
std::pair<ImportanceResult, SubgraphExplanation> explain(
    const Graph& g, const Model& m, int samples, int select, std::uint64_t seed,
    long long budget = kDefaultMatchBudget);

// (1/N)·Σ [pred(G_i)==y_i] − [pred(subgraph_i)==y_i]; subgraph predictions
// re-embed the explanation through the model's GDL layer.
double fidelity(const Model& m, const std::vector<const Graph*>& test,
                const std::vector<int>& labels,
                const std::vector<SubgraphExplanation>& explanations,
                long long budget = kDefaultMatchBudget);

// (1/N)·Σ (1 − kept_i / total_i)
double sparsity(const std::vector<const Graph*>& graphs,
                const std::vector<SubgraphExplanation>& explanations);

// Explanation report written per graph by the CLI: prediction, weights,
// selected programs with their GDL text, kept nodes, and a DOT rendering.
std::string explanation_report(const Graph& g, const Model& m, const ImportanceResult& imp,
                               const SubgraphExplanation& sub, int predicted_label);
std::string subgraph_to_dot(const Graph& g, const SubgraphExplanation& sub);

}  // namespace gdlnn
