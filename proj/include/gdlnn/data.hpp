#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gdlnn/graph.hpp"

namespace gdlnn {

// A labeled graph collection with shared feature dimensions and (after
// split()) a train/val/test partition of the graph indices.
struct Dataset {
    std::string name;
    int d = 0;
    int c = 0;
    std::vector<Graph> graphs;
    std::vector<int> label_set;  // sorted distinct labels
    std::vector<int> train_idx;
    std::vector<int> val_idx;
    std::vector<int> test_idx;

    int size() const { return static_cast<int>(graphs.size()); }
    std::vector<const Graph*> pointers(const std::vector<int>& idx) const;
};

struct SplitConfig {
    double train_ratio = 0.8;
    double val_ratio = 0.1;  // test gets the remainder
    std::uint64_t seed = 0;
};

// TU plain-text format: <name>_A.txt (1-indexed "u, v" pairs),
// <name>_graph_indicator.txt, <name>_graph_labels.txt, and optional
// node/edge label and attribute files. Integer labels become one extra real
// feature dimension; attributes are taken as-is; with both, the label dim is
// appended after the attributes. Edges are kept exactly as listed.
Dataset load_tu(const std::string& dir, const std::string& name);

// JSON schema: { name, d, c, graphs: [ { nodes: [[f,..],..],
// edges: [[src,dst],..], edge_features: [[f,..],..], label } ] }, 0-indexed.
Dataset load_json(const std::string& path);
void save_json(const Dataset& ds, const std::string& path);

// Seeded shuffle, then contiguous cuts at floor(train_ratio*n) and
// floor((train_ratio+val_ratio)*n). Requires at least 3 graphs.
void split(Dataset& ds, const SplitConfig& cfg);

// Synthetic benchmark: `count` graphs (even; half per label), each a 20-node
// Barabási–Albert tree (attachment 1) plus a 5-node motif — a house (middle
// nodes connected) for label 1, a 5-cycle (middles not connected) for
// label 2 — attached to the base by one edge from a middle node. Undirected
// edges stored as symmetric directed pairs; node feature = degree.
Dataset generate_ba2motifs(int count, std::uint64_t seed);

struct DatasetStats {
    int num_graphs = 0;
    double avg_nodes = 0.0;
    double avg_edges = 0.0;  // unordered endpoint pairs (symmetric pairs count once)
    int num_labels = 0;
    int node_dim = 0;
    int edge_dim = 0;
};
DatasetStats stats(const Dataset& ds);
std::string to_string(const DatasetStats& s);

}  // namespace gdlnn
