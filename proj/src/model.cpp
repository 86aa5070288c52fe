#include "gdlnn/model.hpp"

#include <fstream>
#include <sstream>

#include "gdlnn/errors.hpp"
#include "gdlnn/parallel.hpp"

namespace gdlnn {

Activation activation_from_string(const std::string& s) {
    if (s == "sigma") return Activation::kSigma;
    if (s == "sigma_count") return Activation::kSigmaCount;
    throw ConfigError("unknown activation '" + s + "' (expected sigma or sigma_count)");
}

std::string to_string(Activation a) {
    return a == Activation::kSigma ? "sigma" : "sigma_count";
}

std::vector<const Program*> Model::program_ptrs() const {
    std::vector<const Program*> ptrs;
    ptrs.reserve(programs.size());
    for (const ScoredProgram& sp : programs) ptrs.push_back(&sp.program);
    return ptrs;
}

std::vector<double> embed(const MatchIndex& index, const std::vector<const Program*>& programs,
                          Activation kind, long long budget) {
    std::vector<double> rep;
    rep.reserve(programs.size());
    for (const Program* p : programs) {
        if (auto err = validate_against_dataset(*p, index.graph().d, index.graph().c)) {
            throw ValidationError("embed: " + *err);
        }
        if (kind == Activation::kSigma) {
            rep.push_back(index.satisfies(*p, budget) ? 1.0 : 0.0);
        } else {
            rep.push_back(static_cast<double>(index.count_valuations(*p, budget)));
        }
    }
    return rep;
}

std::vector<double> embed(const Graph& g, const std::vector<const Program*>& programs,
                          Activation kind, long long budget) {
    MatchIndex index(g);
    return embed(index, programs, kind, budget);
}

std::vector<std::vector<double>> embed_all(const std::vector<const Graph*>& graphs,
                                           const std::vector<const Program*>& programs,
                                           Activation kind, long long budget, int jobs) {
    std::vector<std::vector<double>> reps(graphs.size());
    parallel_for(static_cast<int>(graphs.size()), jobs,
                 [&](int i) { reps[i] = embed(*graphs[i], programs, kind, budget); });
    return reps;
}

std::pair<int, std::vector<double>> predict_from_representation(const Model& m,
                                                                const std::vector<double>& rep) {
    std::vector<double> probs = m.mlp.forward(rep);
    int best = 0;
    for (int j = 1; j < static_cast<int>(probs.size()); ++j) {
        if (probs[j] > probs[best]) best = j;
    }
    if (best >= static_cast<int>(m.class_labels.size())) {
        throw ModelIoError("model class map is narrower than the mlp output");
    }
    return {m.class_labels[best], probs};
}

std::pair<int, std::vector<double>> predict(const Model& m, const Graph& g, long long budget) {
    return predict_from_representation(m, embed(g, m.program_ptrs(), m.activation, budget));
}

std::string model_to_string(const Model& m) {
    std::string out = "gdlnn-model v1\n";
    out += "activation " + to_string(m.activation) + "\n";
    out += "labels";
    for (int label : m.class_labels) out += " " + std::to_string(label);
    out += "\n";
    out += layer_to_string(m.programs, m.mining_k, m.mining_epsilon);
    out += "mlp-sizes";
    for (int s : m.mlp.sizes) out += " " + std::to_string(s);
    out += "\n";
    for (int l = 0; l < m.mlp.num_layers(); ++l) {
        const int in = m.mlp.sizes[l], outw = m.mlp.sizes[l + 1];
        out += "weights " + std::to_string(in) + " " + std::to_string(outw) + "\n";
        for (int i = 0; i < in; ++i) {
            for (int j = 0; j < outw; ++j) {
                if (j) out += " ";
                out += format_real(m.mlp.weights[l][static_cast<std::size_t>(i) * outw + j]);
            }
            out += "\n";
        }
        out += "bias " + std::to_string(outw) + "\n";
        for (int j = 0; j < outw; ++j) {
            if (j) out += " ";
            out += format_real(m.mlp.biases[l][j]);
        }
        out += "\n";
    }
    for (const auto& [key, value] : m.metadata) {
        out += "meta " + key + " " + value + "\n";
    }
    out += "end\n";
    return out;
}

void save_model(const Model& m, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ModelIoError("cannot open '" + path + "' for writing");
    f << model_to_string(m);
    if (!f) throw ModelIoError("failed writing model file '" + path + "'");
}

namespace {

std::vector<double> parse_row(const std::string& line, int expected, const char* what) {
    std::istringstream in(line);
    std::vector<double> row;
    double v;
    while (in >> v) row.push_back(v);
    if (static_cast<int>(row.size()) != expected) {
        throw ModelIoError(std::string("malformed ") + what + " row: expected " +
                           std::to_string(expected) + " values, got " +
                           std::to_string(row.size()));
    }
    return row;
}

}  // namespace

Model model_from_stream(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "gdlnn-model v1") {
        throw ModelIoError("not a gdlnn-model v1 file");
    }
    Model m;
    if (!std::getline(in, line) || line.rfind("activation ", 0) != 0) {
        throw ModelIoError("missing activation line");
    }
    m.activation = activation_from_string(line.substr(11));
    if (!std::getline(in, line) || line.rfind("labels", 0) != 0) {
        throw ModelIoError("missing labels line");
    }
    {
        std::istringstream ls(line.substr(6));
        int v;
        while (ls >> v) m.class_labels.push_back(v);
        if (m.class_labels.empty()) throw ModelIoError("empty label map");
    }
    std::string terminator;
    m.programs = layer_from_stream(in, &m.mining_k, &m.mining_epsilon, &terminator);

    if (terminator.rfind("mlp-sizes", 0) != 0) {
        throw ModelIoError("missing mlp-sizes line (truncated model file?)");
    }
    {
        std::istringstream ss(terminator.substr(9));
        int v;
        while (ss >> v) m.mlp.sizes.push_back(v);
        if (m.mlp.sizes.size() < 2) throw ModelIoError("mlp needs at least input and output sizes");
    }
    if (m.mlp.sizes.front() != static_cast<int>(m.programs.size())) {
        throw ModelIoError("mlp input width " + std::to_string(m.mlp.sizes.front()) +
                           " does not match the " + std::to_string(m.programs.size()) +
                           "-program layer");
    }
    if (m.mlp.sizes.back() != static_cast<int>(m.class_labels.size())) {
        throw ModelIoError("mlp output width does not match the label map");
    }

    for (std::size_t l = 0; l + 1 < m.mlp.sizes.size(); ++l) {
        const int in_w = m.mlp.sizes[l], out_w = m.mlp.sizes[l + 1];
        if (!std::getline(in, line) ||
            line != "weights " + std::to_string(in_w) + " " + std::to_string(out_w)) {
            throw ModelIoError("missing weights block for layer " + std::to_string(l));
        }
        std::vector<double> w;
        w.reserve(static_cast<std::size_t>(in_w) * out_w);
        for (int i = 0; i < in_w; ++i) {
            if (!std::getline(in, line)) throw ModelIoError("truncated weights block");
            for (double v : parse_row(line, out_w, "weights")) w.push_back(v);
        }
        m.mlp.weights.push_back(std::move(w));
        if (!std::getline(in, line) || line != "bias " + std::to_string(out_w)) {
            throw ModelIoError("missing bias block for layer " + std::to_string(l));
        }
        if (!std::getline(in, line)) throw ModelIoError("truncated bias block");
        m.mlp.biases.push_back(parse_row(line, out_w, "bias"));
    }

    bool ended = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line == "end") {
            ended = true;
            break;
        }
        if (line.rfind("meta ", 0) != 0) throw ModelIoError("unexpected line: " + line);
        std::string rest = line.substr(5);
        auto space = rest.find(' ');
        if (space == std::string::npos) {
            m.metadata[rest] = "";
        } else {
            m.metadata[rest.substr(0, space)] = rest.substr(space + 1);
        }
    }
    if (!ended) throw ModelIoError("missing end marker (truncated model file?)");
    return m;
}

Model load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ModelIoError("cannot open model file '" + path + "'");
    return model_from_stream(f);
}

}  // namespace gdlnn
