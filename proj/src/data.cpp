#include "gdlnn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gdlnn/errors.hpp"
#include "gdlnn/gdl.hpp"
#include "gdlnn/rng.hpp"

namespace gdlnn {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<const Graph*> Dataset::pointers(const std::vector<int>& idx) const {
    std::vector<const Graph*> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(&graphs[i]);
    return out;
}

namespace {

void finalize(Dataset& ds) {
    std::set<int> labels;
    for (Graph& g : ds.graphs) {
        g.d = ds.d;
        g.c = ds.c;
        g.validate();
        if (g.label) labels.insert(*g.label);
    }
    ds.label_set.assign(labels.begin(), labels.end());
}

// --- TU format ------------------------------------------------------------

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(f, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::vector<double> parse_csv_row(const std::string& line, const fs::path& origin, int lineno) {
    std::vector<double> row;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ',')) {
        try {
            row.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw DataError("bad number '" + cell + "' at " + origin.string() + ":" +
                            std::to_string(lineno));
        }
    }
    if (row.empty()) {
        throw DataError("empty row at " + origin.string() + ":" + std::to_string(lineno));
    }
    return row;
}

std::vector<std::vector<double>> read_rows(const fs::path& path) {
    std::vector<std::vector<double>> rows;
    auto lines = read_lines(path);
    rows.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        rows.push_back(parse_csv_row(lines[i], path, static_cast<int>(i) + 1));
    }
    return rows;
}

}  // namespace

Dataset load_tu(const std::string& dir, const std::string& name) {
    const fs::path base = fs::path(dir);
    auto file = [&](const char* suffix) { return base / (name + suffix); };

    const auto indicator_lines = read_lines(file("_graph_indicator.txt"));
    const auto label_lines = read_lines(file("_graph_labels.txt"));
    const auto edge_lines = read_lines(file("_A.txt"));

    const int num_graphs = static_cast<int>(label_lines.size());
    const int num_nodes = static_cast<int>(indicator_lines.size());
    if (num_graphs == 0) throw DataError("TU dataset '" + name + "' has no graphs");

    // node id (0-based global) -> (graph, local index)
    std::vector<int> node_graph(num_nodes);
    std::vector<int> node_local(num_nodes);
    std::vector<int> graph_sizes(num_graphs, 0);
    for (int v = 0; v < num_nodes; ++v) {
        int gid;
        try {
            gid = std::stoi(indicator_lines[v]);
        } catch (const std::exception&) {
            throw DataError("bad graph indicator at line " + std::to_string(v + 1));
        }
        if (gid < 1 || gid > num_graphs) {
            throw DataError("graph indicator " + std::to_string(gid) + " out of range at line " +
                            std::to_string(v + 1));
        }
        node_graph[v] = gid - 1;
        node_local[v] = graph_sizes[gid - 1]++;
    }

    Dataset ds;
    ds.name = name;
    ds.graphs.resize(num_graphs);
    for (int g = 0; g < num_graphs; ++g) {
        ds.graphs[g].n = graph_sizes[g];
        try {
            ds.graphs[g].label = std::stoi(label_lines[g]);
        } catch (const std::exception&) {
            throw DataError("bad graph label at line " + std::to_string(g + 1));
        }
    }

    // node features: attributes, with integer labels appended as one extra dim
    const bool have_node_attr = fs::exists(file("_node_attributes.txt"));
    const bool have_node_label = fs::exists(file("_node_labels.txt"));
    std::vector<std::vector<double>> node_attrs;
    std::vector<std::vector<double>> node_labels;
    if (have_node_attr) {
        node_attrs = read_rows(file("_node_attributes.txt"));
        if (static_cast<int>(node_attrs.size()) != num_nodes) {
            throw DataError("node attribute count does not match node count");
        }
    }
    if (have_node_label) {
        node_labels = read_rows(file("_node_labels.txt"));
        if (static_cast<int>(node_labels.size()) != num_nodes) {
            throw DataError("node label count does not match node count");
        }
    }
    ds.d = (have_node_attr ? static_cast<int>(node_attrs[0].size()) : 0) + (have_node_label ? 1 : 0);
    for (int g = 0; g < num_graphs; ++g) {
        ds.graphs[g].node_features.assign(static_cast<std::size_t>(graph_sizes[g]) * ds.d, 0.0);
    }
    for (int v = 0; v < num_nodes; ++v) {
        double* row = ds.graphs[node_graph[v]].node_features.data() +
                      static_cast<std::size_t>(node_local[v]) * ds.d;
        int at = 0;
        if (have_node_attr) {
            if (node_attrs[v].size() != node_attrs[0].size()) {
                throw DataError("ragged node attribute rows");
            }
            for (double x : node_attrs[v]) row[at++] = x;
        }
        if (have_node_label) row[at++] = node_labels[v][0];
    }

    // edges, in file order, endpoints rebased per graph
    const bool have_edge_attr = fs::exists(file("_edge_attributes.txt"));
    const bool have_edge_label = fs::exists(file("_edge_labels.txt"));
    std::vector<std::vector<double>> edge_attrs;
    std::vector<std::vector<double>> edge_labels;
    if (have_edge_attr) edge_attrs = read_rows(file("_edge_attributes.txt"));
    if (have_edge_label) edge_labels = read_rows(file("_edge_labels.txt"));
    if (have_edge_attr && edge_attrs.size() != edge_lines.size()) {
        throw DataError("edge attribute count does not match edge count");
    }
    if (have_edge_label && edge_labels.size() != edge_lines.size()) {
        throw DataError("edge label count does not match edge count");
    }
    ds.c = (have_edge_attr ? static_cast<int>(edge_attrs[0].size()) : 0) + (have_edge_label ? 1 : 0);

    for (std::size_t e = 0; e < edge_lines.size(); ++e) {
        std::istringstream in(edge_lines[e]);
        std::string left, right;
        if (!std::getline(in, left, ',') || !std::getline(in, right)) {
            throw DataError("bad edge at " + name + "_A.txt:" + std::to_string(e + 1));
        }
        int u, v;
        try {
            u = std::stoi(left);
            v = std::stoi(right);
        } catch (const std::exception&) {
            throw DataError("bad edge at " + name + "_A.txt:" + std::to_string(e + 1));
        }
        if (u < 1 || u > num_nodes || v < 1 || v > num_nodes) {
            throw DataError("edge endpoint out of range at line " + std::to_string(e + 1));
        }
        const int gu = node_graph[u - 1], gv = node_graph[v - 1];
        if (gu != gv) {
            throw DataError("edge crosses graphs at line " + std::to_string(e + 1));
        }
        Graph& g = ds.graphs[gu];
        g.edges.emplace_back(node_local[u - 1], node_local[v - 1]);
        if (ds.c > 0) {
            if (have_edge_attr) {
                if (edge_attrs[e].size() != edge_attrs[0].size()) {
                    throw DataError("ragged edge attribute rows");
                }
                g.edge_features.insert(g.edge_features.end(), edge_attrs[e].begin(),
                                       edge_attrs[e].end());
            }
            if (have_edge_label) g.edge_features.push_back(edge_labels[e][0]);
        }
    }

    try {
        finalize(ds);
    } catch (const ValidationError& e) {
        throw DataError("TU dataset '" + name + "': " + e.what());
    }
    return ds;
}

// --- JSON format ------------------------------------------------------------

Dataset load_json(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open '" + path + "'");
    json doc;
    try {
        f >> doc;
    } catch (const json::exception& e) {
        throw DataError("malformed JSON in '" + path + "': " + e.what());
    }
    try {
        Dataset ds;
        ds.name = doc.value("name", "");
        ds.d = doc.at("d").get<int>();
        ds.c = doc.at("c").get<int>();
        for (const json& jg : doc.at("graphs")) {
            Graph g;
            const json& nodes = jg.at("nodes");
            g.n = static_cast<int>(nodes.size());
            for (const json& row : nodes) {
                if (static_cast<int>(row.size()) != ds.d) {
                    throw DataError("node feature row length does not match d");
                }
                for (const json& x : row) g.node_features.push_back(x.get<double>());
            }
            for (const json& e : jg.at("edges")) {
                if (e.size() != 2) throw DataError("edge is not a [src, dst] pair");
                g.edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
            if (jg.contains("edge_features") && !jg.at("edge_features").is_null()) {
                for (const json& row : jg.at("edge_features")) {
                    if (static_cast<int>(row.size()) != ds.c) {
                        throw DataError("edge feature row length does not match c");
                    }
                    for (const json& x : row) g.edge_features.push_back(x.get<double>());
                }
            }
            if (ds.c == 0) g.edge_features.clear();
            if (jg.contains("label") && !jg.at("label").is_null()) {
                g.label = jg.at("label").get<int>();
            }
            ds.graphs.push_back(std::move(g));
        }
        finalize(ds);
        return ds;
    } catch (const json::exception& e) {
        throw DataError("bad dataset schema in '" + path + "': " + e.what());
    } catch (const ValidationError& e) {
        throw DataError("invalid graph in '" + path + "': " + e.what());
    }
}

void save_json(const Dataset& ds, const std::string& path) {
    json doc;
    doc["name"] = ds.name;
    doc["d"] = ds.d;
    doc["c"] = ds.c;
    doc["graphs"] = json::array();
    for (const Graph& g : ds.graphs) {
        json jg;
        jg["nodes"] = json::array();
        for (int u = 0; u < g.n; ++u) {
            json row = json::array();
            for (double x : g.node_feat(u)) row.push_back(x);
            jg["nodes"].push_back(std::move(row));
        }
        jg["edges"] = json::array();
        for (auto [u, v] : g.edges) jg["edges"].push_back(json::array({u, v}));
        jg["edge_features"] = json::array();
        for (int e = 0; e < g.num_edges(); ++e) {
            json row = json::array();
            for (double x : g.edge_feat(e)) row.push_back(x);
            jg["edge_features"].push_back(std::move(row));
        }
        if (g.label) jg["label"] = *g.label;
        doc["graphs"].push_back(std::move(jg));
    }
    std::ofstream f(path);
    if (!f) throw DataError("cannot open '" + path + "' for writing");
    f << doc.dump(1) << "\n";
    if (!f) throw DataError("failed writing '" + path + "'");
}

// --- split ------------------------------------------------------------------

void split(Dataset& ds, const SplitConfig& cfg) {
    const int n = ds.size();
    if (n < 3) throw DataError("need at least 3 graphs to split");
    if (!(cfg.train_ratio > 0) || !(cfg.val_ratio >= 0) ||
        !(cfg.train_ratio + cfg.val_ratio <= 1.0)) {
        throw ConfigError("split ratios must be positive and sum to at most 1");
    }
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    Rng rng(mix_seed(cfg.seed, 0x51717));
    for (int i = n - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform_int(0, i)]);
    }
    const int train_end = static_cast<int>(std::floor(cfg.train_ratio * n));
    const int val_end = static_cast<int>(std::floor((cfg.train_ratio + cfg.val_ratio) * n));
    ds.train_idx.assign(order.begin(), order.begin() + train_end);
    ds.val_idx.assign(order.begin() + train_end, order.begin() + val_end);
    ds.test_idx.assign(order.begin() + val_end, order.end());
}

// --- BA-2Motifs ---------------------------------------------------------------

namespace {

Graph make_ba2motifs_graph(int label, Rng& rng) {
    constexpr int kBaseSize = 20;
    std::vector<std::pair<int, int>> undirected;

    // Barabási–Albert tree: each new node attaches to an endpoint drawn
    // uniformly from all prior edge endpoints (degree-proportional).
    std::vector<int> endpoints;
    for (int v = 1; v < kBaseSize; ++v) {
        int target;
        if (endpoints.empty()) {
            target = 0;
        } else {
            target = endpoints[rng.uniform_int(0, static_cast<int>(endpoints.size()) - 1)];
        }
        undirected.emplace_back(v, target);
        endpoints.push_back(v);
        endpoints.push_back(target);
    }

    // motif nodes: roof, middle1, middle2, bottom1, bottom2
    const int roof = kBaseSize, m1 = kBaseSize + 1, m2 = kBaseSize + 2;
    const int b1 = kBaseSize + 3, b2 = kBaseSize + 4;
    undirected.emplace_back(roof, m1);
    undirected.emplace_back(roof, m2);
    undirected.emplace_back(m1, b1);
    undirected.emplace_back(m2, b2);
    undirected.emplace_back(b1, b2);
    if (label == 1) undirected.emplace_back(m1, m2);  // house chord
    undirected.emplace_back(m2, rng.uniform_int(0, kBaseSize - 1));

    Graph g;
    g.n = kBaseSize + 5;
    g.d = 1;
    g.c = 0;
    g.label = label;
    std::vector<int> degree(g.n, 0);
    for (auto [u, v] : undirected) {
        g.edges.emplace_back(u, v);
        g.edges.emplace_back(v, u);
        ++degree[u];
        ++degree[v];
    }
    g.node_features.resize(g.n);
    for (int u = 0; u < g.n; ++u) g.node_features[u] = static_cast<double>(degree[u]);
    return g;
}

}  // namespace

Dataset generate_ba2motifs(int count, std::uint64_t seed) {
    if (count <= 0 || count % 2 != 0) throw ConfigError("ba2motifs count must be even and positive");
    Dataset ds;
    ds.name = "BA-2Motifs";
    ds.d = 1;
    ds.c = 0;
    ds.graphs.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i)));
        const int label = i < count / 2 ? 1 : 2;
        ds.graphs.push_back(make_ba2motifs_graph(label, rng));
    }
    finalize(ds);
    return ds;
}

// --- stats --------------------------------------------------------------------

DatasetStats stats(const Dataset& ds) {
    DatasetStats s;
    s.num_graphs = ds.size();
    s.num_labels = static_cast<int>(ds.label_set.size());
    s.node_dim = ds.d;
    s.edge_dim = ds.c;
    if (ds.graphs.empty()) return s;
    double nodes = 0.0, edges = 0.0;
    for (const Graph& g : ds.graphs) {
        nodes += g.n;
        std::set<std::pair<int, int>> pairs;
        for (auto [u, v] : g.edges) pairs.insert({std::min(u, v), std::max(u, v)});
        edges += static_cast<double>(pairs.size());
    }
    s.avg_nodes = nodes / ds.size();
    s.avg_edges = edges / ds.size();
    return s;
}

std::string to_string(const DatasetStats& s) {
    std::string out;
    out += "graphs=" + std::to_string(s.num_graphs);
    out += " avg_nodes=" + format_real(s.avg_nodes);
    out += " avg_edges=" + format_real(s.avg_edges);
    out += " labels=" + std::to_string(s.num_labels);
    out += " node_features=" + std::to_string(s.node_dim);
    out += " edge_features=" + std::to_string(s.edge_dim);
    return out;
}

}  // namespace gdlnn
