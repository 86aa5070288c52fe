#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "gdlnn/graph.hpp"
#include "gdlnn/matcher.hpp"
#include "gdlnn/mining.hpp"
#include "gdlnn/mlp.hpp"

namespace gdlnn {

enum class Activation { kSigma, kSigmaCount };

Activation activation_from_string(const std::string& s);  // "sigma" | "sigma_count"
std::string to_string(Activation a);

// GDL layer then MLP. programs holds the ordered mined layer; class_labels
// maps MLP output index -> dataset label.
struct Model {
    std::vector<ScoredProgram> programs;
    Activation activation = Activation::kSigma;
    Mlp mlp;
    std::vector<int> class_labels;
    std::map<std::string, std::string> metadata;
    int mining_k = 0;
    double mining_epsilon = 1.0;

    std::vector<const Program*> program_ptrs() const;
};

// Representation of g under the layer: coordinate i is sigma(P_i, g) in
// {0.0, 1.0}, or the valuation count under kSigmaCount. Budget errors
// propagate — a partially evaluated embedding is never returned.
std::vector<double> embed(const Graph& g, const std::vector<const Program*>& programs,
                          Activation kind, long long budget = kDefaultMatchBudget);
std::vector<double> embed(const MatchIndex& index, const std::vector<const Program*>& programs,
                          Activation kind, long long budget = kDefaultMatchBudget);

// Embeddings for many graphs, parallelized; row i belongs to graphs[i].
std::vector<std::vector<double>> embed_all(const std::vector<const Graph*>& graphs,
                                           const std::vector<const Program*>& programs,
                                           Activation kind, long long budget, int jobs);

// argmax class of mlp(embed(g)); ties resolve to the lowest class index.
// Returns the dataset label and the softmax probabilities per class.
std::pair<int, std::vector<double>> predict(const Model& m, const Graph& g,
                                            long long budget = kDefaultMatchBudget);
std::pair<int, std::vector<double>> predict_from_representation(const Model& m,
                                                                const std::vector<double>& rep);

// Text model file: "gdlnn-model v1" header, activation and label-map lines,
// the mined-layer block (layer file format), then the MLP as a sizes line and
// row-major weight/bias blocks, then metadata lines.
void save_model(const Model& m, const std::string& path);
std::string model_to_string(const Model& m);
Model load_model(const std::string& path);
Model model_from_stream(std::istream& in);

}  // namespace gdlnn
