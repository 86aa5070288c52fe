#pragma once

// Shared hand-built graphs and programs used across the unit and acceptance
// suites: four small labeled chain/star graphs whose two pattern programs
// produce linearly separable representations, plus one edge-featured graph.

#include <optional>

#include "gdlnn/data.hpp"
#include "gdlnn/gdl.hpp"
#include "gdlnn/graph.hpp"

namespace fixtures {

inline constexpr const char* kP1Text =
    "node x <[3.0, 4.0]>\n"
    "node y <[2.0, 2.0]>\n"
    "node z <[1.0, 1.0]>\n"
    "edge (x, y)\n"
    "edge (y, z)\n";

inline constexpr const char* kP2Text =
    "node x <[1.0, 1.0]>\n"
    "node y <[0.0, 5.0]>\n"
    "node z <[1.0, 1.0]>\n"
    "edge (x, y)\n"
    "edge (y, z)\n";

// node z is unconstrained, edge (y, z) carries a half-open interval
inline constexpr const char* kPartialText =
    "node x <[-inf, 0.3]>\n"
    "node y <[0.5, 1.0]>\n"
    "node z\n"
    "edge (x, y)\n"
    "edge (y, z) <[5, inf]>\n";

inline gdlnn::Graph make_graph(int d, int c, std::vector<double> feats,
                               std::vector<std::pair<int, int>> edges,
                               std::vector<double> edge_feats, std::optional<int> label) {
    gdlnn::Graph g;
    g.d = d;
    g.c = c;
    g.n = static_cast<int>(feats.size()) / std::max(1, d);
    g.node_features = std::move(feats);
    g.edges = std::move(edges);
    g.edge_features = std::move(edge_feats);
    g.label = label;
    g.validate();
    return g;
}

// star: <4.0> -> <2.0>, <2.0> -> <1.0> (twice); label 1
inline gdlnn::Graph g1() {
    return make_graph(1, 0, {2.0, 4.0, 1.0, 1.0}, {{1, 0}, {0, 2}, {0, 3}}, {}, 1);
}
// star: <1.0> -> <2.0>, <2.0> -> <4.0>, <2.0> -> <1.0>; label 2
inline gdlnn::Graph g2() {
    return make_graph(1, 0, {2.0, 1.0, 4.0, 1.0}, {{1, 0}, {0, 2}, {0, 3}}, {}, 2);
}
// chain: <3.0> -> <2.0> -> <1.0> -> <1.0>; label 1
inline gdlnn::Graph g3() {
    return make_graph(1, 0, {3.0, 2.0, 1.0, 1.0}, {{0, 1}, {1, 2}, {2, 3}}, {}, 1);
}
// chain: <1.0> -> <2.0> -> <1.0> -> <3.0>; label 2
inline gdlnn::Graph g4() {
    return make_graph(1, 0, {2.0, 1.0, 1.0, 3.0}, {{1, 0}, {0, 2}, {2, 3}}, {}, 2);
}

inline gdlnn::Dataset four_graph_dataset() {
    gdlnn::Dataset ds;
    ds.name = "four-graphs";
    ds.d = 1;
    ds.c = 0;
    ds.graphs = {g1(), g2(), g3(), g4()};
    ds.label_set = {1, 2};
    return ds;
}

// edge-featured graph: 0.2 -> 0.5 (feat 9), 0.5 -> 0.7 (feat -5),
// 0.5 -> 0.8 (feat 6), 0.8 -> 0.7 (feat -8)
inline gdlnn::Graph edge_featured_graph() {
    return make_graph(1, 1, {0.2, 0.5, 0.7, 0.8}, {{0, 1}, {1, 2}, {1, 3}, {3, 2}},
                      {9.0, -5.0, 6.0, -8.0}, std::nullopt);
}

}  // namespace fixtures
