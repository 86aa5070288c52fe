#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gdlnn {

// Directed attributed graph. Node features are an n x d row-major matrix,
// edge features m x c (c or d may be 0). Endpoints must be < n and no
// directed edge may repeat; undirected datasets are stored as symmetric
// directed pairs.
struct Graph {
    int n = 0;
    int d = 0;
    int c = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<double> node_features;  // n * d
    std::vector<double> edge_features;  // m * c
    std::optional<int> label;

    int num_edges() const { return static_cast<int>(edges.size()); }

    std::span<const double> node_feat(int i) const {
        return {node_features.data() + static_cast<std::size_t>(i) * d,
                static_cast<std::size_t>(d)};
    }
    std::span<const double> edge_feat(int j) const {
        return {edge_features.data() + static_cast<std::size_t>(j) * c,
                static_cast<std::size_t>(c)};
    }

    // Throws ValidationError on bad endpoints, duplicate directed edges, or
    // feature matrices whose sizes do not match n/m and d/c.
    void validate() const;

    bool operator==(const Graph&) const = default;
};

// Injective assignment of program node variables to graph nodes (the match
// witness). std::map keeps iteration order deterministic.
struct Valuation {
    std::map<std::string, int> assignment;
};

}  // namespace gdlnn
