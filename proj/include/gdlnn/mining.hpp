#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gdlnn/gdl.hpp"
#include "gdlnn/graph.hpp"
#include "gdlnn/matcher.hpp"

namespace gdlnn {

// Labeled training graphs. Holds pointers; the backing graphs must outlive it.
struct TrainingSet {
    std::vector<const Graph*> graphs;
    std::vector<int> labels;
    std::vector<int> label_set;  // sorted distinct labels

    int size() const { return static_cast<int>(graphs.size()); }

    // Builds from graphs carrying their own labels; throws ValidationError if
    // any graph is unlabeled.
    static TrainingSet from_graphs(std::span<const Graph> graphs);
    static TrainingSet from_pointers(std::vector<const Graph*> graphs);
};

struct MiningConfig {
    double epsilon = 1.0;
    int k = 1;
    long long match_budget = kDefaultMatchBudget;
    std::uint64_t seed = 0;  // recorded for reproducibility; mining itself is deterministic
    int jobs = 1;
    bool balanced_topk = false;
};

struct ScoredProgram {
    Program program;
    int label = 0;
    double score = 0.0;
    int matched_same = 0;
    int matched_total = 0;
};

struct MiningStats {
    long long budget_misses = 0;  // graphs counted as unmatched because the budget ran out
    long long iterations = 0;     // accepted hill-climb steps across all mined graphs
};

struct ScoreResult {
    double score = 0.0;
    int matched_same = 0;
    int matched_total = 0;
    long long budget_misses = 0;
};

// Score(P, D, y) = |matched graphs in D_y| / (|matched graphs in D| + eps).
// A graph whose match query exhausts the budget counts as not matched and is
// tallied in budget_misses.
ScoreResult score(const Program& p, const TrainingSet& D, int y, double eps,
                  long long budget = kDefaultMatchBudget);

// The most specific program describing g: one node description per node with
// degenerate intervals [v, v] per feature, one edge description per edge
// likewise; variables named v0..v(n-1) by node index.
Program initialize(const Graph& g);

// All vectors obtained by widening exactly one finite bound to its infinity;
// vectors identical to the input are excluded.
std::vector<IntervalVec> generalize_itv(const IntervalVec& v);

// One-step mutations: node removals (with incident edges), edge removals,
// and per-description interval generalizations. Deduplicated up to variable
// renaming; every output satisfies the Program invariants.
std::vector<Program> enumerate_mutations(const Program& p);

// Argmax of score with deterministic tie-breaking (higher score, then fewer
// descriptions, then lexicographically smallest canonical text); nullopt for
// an empty candidate set.
std::optional<Program> choose(const std::vector<Program>& candidates, const TrainingSet& D,
                              int y, double eps, long long budget = kDefaultMatchBudget);

// Greedy per-graph mining: starts from initialize(g), repeatedly moves to the
// chosen mutation while its score is no worse, and returns when every
// candidate scores strictly lower (or none exist). g must be an element of D.
ScoredProgram mine(const TrainingSet& D, const Graph& g, int y, const MiningConfig& cfg,
                   MiningStats* stats = nullptr);

// Mines one program per training graph, deduplicates, and keeps the top k
// under (score desc, fewer descriptions, canonical text). With
// cfg.balanced_topk the k slots are round-robined across labels.
std::vector<ScoredProgram> learn(const TrainingSet& D, const MiningConfig& cfg,
                                 MiningStats* stats = nullptr);

// Diagnostic: sum over ordered pairs i != j of Hamming similarity of the
// sigma-representations times +1/-1 for same/different labels. Returns 0 for
// an empty program list (degenerate, `degenerate` flagged when non-null).
double hamming_objective(const std::vector<Program>& programs, const TrainingSet& D,
                         long long budget = kDefaultMatchBudget, bool* degenerate = nullptr);

// Mined-layer text file: "gdl-layer k=<k> epsilon=<eps>" header, then per
// program "# program <idx> label=<y> score=<s> matched=<a>/<b>", its GDL
// text, and a blank line.
void save_layer(const std::string& path, const std::vector<ScoredProgram>& programs, int k,
                double epsilon);
std::string layer_to_string(const std::vector<ScoredProgram>& programs, int k, double epsilon);
std::vector<ScoredProgram> load_layer(const std::string& path, int* k_out = nullptr,
                                      double* epsilon_out = nullptr);
// Reads program blocks until the first line that is not a program header;
// that line (the start of a following section, or empty at EOF) is written to
// *terminator when non-null.
std::vector<ScoredProgram> layer_from_stream(std::istream& in, int* k_out, double* epsilon_out,
                                             std::string* terminator = nullptr);

}  // namespace gdlnn
