#pragma once

#include <cstdint>
#include <string>

#include "gdlnn/data.hpp"
#include "gdlnn/model.hpp"

namespace gdlnn {

// One parsed command invocation. Defaults are the single fixed values used
// when --grid is off; grid search sweeps epsilon, k, and the learning rate
// (the remaining hyperparameters stay at their configured values).
struct RunConfig {
    std::string data_path;
    std::string format = "json";  // tu | json | ba2motifs
    std::string tu_name;          // TU dataset name; defaults to the directory basename
    int ba_count = 1000;

    std::uint64_t seed = 1;
    double epsilon = 1.0;
    int topk = 0;  // 0 -> ceil(0.2 * |train|)
    long long budget = 10'000'000;
    int jobs = 0;  // 0 -> hardware concurrency
    bool balanced_topk = false;
    std::string activation = "sigma";

    double lr = 0.01;
    int hidden = 64;
    double weight_decay = 0.0;
    double dropout = 0.5;
    int epochs = 500;
    int patience = 100;

    int samples = 1000;
    int select = 10;

    bool grid = false;
    bool override_grids = false;

    std::string split_name = "test";  // train | val | test | all
    std::string out_path;
    std::string layer_path;
    std::string model_path;
};

// Throws ConfigError when a training hyperparameter lies outside its grid
// and override_grids is not set.
void validate_grids(const RunConfig& cfg);

// Loads (or generates) the dataset named by cfg and applies the seeded
// 80/10/10 split.
Dataset load_dataset(const RunConfig& cfg);

struct CommandOutput {
    std::string text;  // deterministic metrics lines for stdout
};

CommandOutput cmd_mine(const RunConfig& cfg);
CommandOutput cmd_train(const RunConfig& cfg, Model* model_out = nullptr);
CommandOutput cmd_predict(const RunConfig& cfg);
CommandOutput cmd_explain(const RunConfig& cfg);
CommandOutput cmd_eval(const RunConfig& cfg);

}  // namespace gdlnn
