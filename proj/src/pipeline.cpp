#include "gdlnn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "gdlnn/errors.hpp"
#include "gdlnn/explain.hpp"
#include "gdlnn/mining.hpp"
#include "gdlnn/parallel.hpp"
#include "gdlnn/rng.hpp"

namespace gdlnn {

namespace fs = std::filesystem;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

void log_line(const std::string& line) { std::cerr << line << "\n"; }

bool approx_in(double v, std::initializer_list<double> grid) {
    for (double g : grid) {
        if (v == g) return true;
    }
    return false;
}

std::vector<int> all_indices(int n) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    return idx;
}

const std::vector<int>& split_indices(const Dataset& ds, const std::string& name,
                                      std::vector<int>& scratch) {
    if (name == "train") return ds.train_idx;
    if (name == "val") return ds.val_idx;
    if (name == "test") return ds.test_idx;
    if (name == "all") {
        scratch = all_indices(ds.size());
        return scratch;
    }
    throw ConfigError("unknown split '" + name + "' (expected train|val|test|all)");
}

int default_topk(int train_size) {
    return std::max(1, static_cast<int>(std::ceil(0.2 * train_size)));
}

MiningConfig mining_config(const RunConfig& cfg, int train_size) {
    MiningConfig mc;
    mc.epsilon = cfg.epsilon;
    mc.k = cfg.topk > 0 ? cfg.topk : default_topk(train_size);
    mc.match_budget = cfg.budget;
    mc.seed = cfg.seed;
    mc.jobs = cfg.jobs;
    mc.balanced_topk = cfg.balanced_topk;
    return mc;
}

TrainConfig train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.learning_rate = cfg.lr;
    tc.hidden = {cfg.hidden, cfg.hidden};
    tc.weight_decay = cfg.weight_decay;
    tc.dropout = cfg.dropout;
    tc.max_epochs = cfg.epochs;
    tc.patience = cfg.patience;
    tc.seed = mix_seed(cfg.seed, 0x317a11);
    return tc;
}

std::vector<int> class_indices(const Dataset& ds, const std::vector<int>& graph_idx) {
    std::vector<int> out;
    out.reserve(graph_idx.size());
    for (int i : graph_idx) {
        const auto it =
            std::lower_bound(ds.label_set.begin(), ds.label_set.end(), *ds.graphs[i].label);
        out.push_back(static_cast<int>(it - ds.label_set.begin()));
    }
    return out;
}

double labeled_accuracy(const Model& m, const Dataset& ds, const std::vector<int>& idx,
                        const std::vector<std::vector<double>>& reps) {
    if (idx.empty()) return 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (predict_from_representation(m, reps[i]).first == *ds.graphs[idx[i]].label) ++correct;
    }
    return static_cast<double>(correct) / idx.size();
}

}  // namespace

void validate_grids(const RunConfig& cfg) {
    if (cfg.override_grids) return;
    if (!approx_in(cfg.lr, {0.01, 0.005, 0.0005})) {
        throw ConfigError("learning rate must be one of {0.01, 0.005, 0.0005}; use --override");
    }
    if (cfg.hidden != 20 && cfg.hidden != 32 && cfg.hidden != 64 && cfg.hidden != 128) {
        throw ConfigError("hidden dim must be one of {20, 32, 64, 128}; use --override");
    }
    if (!approx_in(cfg.weight_decay, {0.0, 1e-3, 5e-4, 5e-5})) {
        throw ConfigError("weight decay must be one of {0, 1e-3, 5e-4, 5e-5}; use --override");
    }
    if (cfg.dropout != 0.5) throw ConfigError("dropout is fixed at 0.5; use --override");
    if (cfg.epochs < 1 || cfg.epochs > 500) {
        throw ConfigError("epochs must be in [1, 500]; use --override");
    }
    if (cfg.patience < 1 || cfg.patience > 100) {
        throw ConfigError("patience must be in [1, 100]; use --override");
    }
}

Dataset load_dataset(const RunConfig& cfg) {
    Dataset ds;
    if (cfg.format == "tu") {
        if (cfg.data_path.empty()) throw ConfigError("--data is required for --format tu");
        std::string name = cfg.tu_name;
        if (name.empty()) name = fs::path(cfg.data_path).filename().string();
        ds = load_tu(cfg.data_path, name);
    } else if (cfg.format == "json") {
        if (cfg.data_path.empty()) throw ConfigError("--data is required for --format json");
        ds = load_json(cfg.data_path);
    } else if (cfg.format == "ba2motifs") {
        ds = generate_ba2motifs(cfg.ba_count, cfg.seed);
    } else {
        throw ConfigError("unknown format '" + cfg.format + "' (expected tu|json|ba2motifs)");
    }
    split(ds, SplitConfig{0.8, 0.1, cfg.seed});
    log_line("log load " + to_string(stats(ds)) + " train=" + std::to_string(ds.train_idx.size()) +
             " val=" + std::to_string(ds.val_idx.size()) +
             " test=" + std::to_string(ds.test_idx.size()));
    return ds;
}

CommandOutput cmd_mine(const RunConfig& cfg) {
    Dataset ds = load_dataset(cfg);
    TrainingSet D = TrainingSet::from_pointers(ds.pointers(ds.train_idx));
    MiningConfig mc = mining_config(cfg, D.size());

    const double t0 = now_seconds();
    MiningStats stats;
    std::vector<ScoredProgram> programs = learn(D, mc, &stats);
    log_line("log mine graphs=" + std::to_string(D.size()) +
             " programs=" + std::to_string(programs.size()) +
             " iterations=" + std::to_string(stats.iterations) +
             " budget_misses=" + std::to_string(stats.budget_misses) +
             " seconds=" + std::to_string(now_seconds() - t0));

    if (!cfg.out_path.empty()) save_layer(cfg.out_path, programs, mc.k, mc.epsilon);

    CommandOutput out;
    out.text = "mined=" + std::to_string(programs.size()) + " k=" + std::to_string(mc.k) +
               " epsilon=" + format_real(mc.epsilon) + "\n";
    for (std::size_t i = 0; i < programs.size(); ++i) {
        const ScoredProgram& sp = programs[i];
        out.text += "program=" + std::to_string(i) + " label=" + std::to_string(sp.label) +
                    " score=" + format_real(sp.score) + " matched=" +
                    std::to_string(sp.matched_same) + "/" + std::to_string(sp.matched_total) +
                    " descriptions=" + std::to_string(sp.program.size()) + "\n";
    }
    return out;
}

namespace {

struct EmbeddedSplits {
    std::vector<std::vector<double>> train, val, test;
    std::vector<int> ytrain, yval, ytest;
};

EmbeddedSplits embed_splits(const Dataset& ds, const std::vector<const Program*>& programs,
                            Activation act, const RunConfig& cfg) {
    EmbeddedSplits e;
    e.train = embed_all(ds.pointers(ds.train_idx), programs, act, cfg.budget, cfg.jobs);
    e.val = embed_all(ds.pointers(ds.val_idx), programs, act, cfg.budget, cfg.jobs);
    e.test = embed_all(ds.pointers(ds.test_idx), programs, act, cfg.budget, cfg.jobs);
    e.ytrain = class_indices(ds, ds.train_idx);
    e.yval = class_indices(ds, ds.val_idx);
    e.ytest = class_indices(ds, ds.test_idx);
    return e;
}

std::vector<std::vector<double>> take_columns(const std::vector<std::vector<double>>& reps,
                                              int k) {
    std::vector<std::vector<double>> out(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) {
        out[i].assign(reps[i].begin(), reps[i].begin() + k);
    }
    return out;
}

}  // namespace

CommandOutput cmd_train(const RunConfig& cfg, Model* model_out) {
    validate_grids(cfg);
    Dataset ds = load_dataset(cfg);
    TrainingSet D = TrainingSet::from_pointers(ds.pointers(ds.train_idx));
    const Activation act = activation_from_string(cfg.activation);
    const int num_classes = static_cast<int>(ds.label_set.size());

    Model model;
    model.activation = act;
    model.class_labels = ds.label_set;

    CommandOutput out;

    if (!cfg.grid) {
        MiningConfig mc = mining_config(cfg, D.size());
        if (!cfg.layer_path.empty()) {
            model.programs = load_layer(cfg.layer_path, &model.mining_k, &model.mining_epsilon);
        } else {
            const double t0 = now_seconds();
            MiningStats mstats;
            model.programs = learn(D, mc, &mstats);
            model.mining_k = mc.k;
            model.mining_epsilon = mc.epsilon;
            log_line("log mine graphs=" + std::to_string(D.size()) +
                     " programs=" + std::to_string(model.programs.size()) +
                     " iterations=" + std::to_string(mstats.iterations) +
                     " budget_misses=" + std::to_string(mstats.budget_misses) +
                     " seconds=" + std::to_string(now_seconds() - t0));
        }

        EmbeddedSplits e = embed_splits(ds, model.program_ptrs(), act, cfg);
        model.mlp = train_mlp(e.train, e.ytrain, e.val, e.yval, num_classes, train_config(cfg));

        const double train_acc = labeled_accuracy(model, ds, ds.train_idx, e.train);
        const double val_acc = labeled_accuracy(model, ds, ds.val_idx, e.val);
        const double test_acc = labeled_accuracy(model, ds, ds.test_idx, e.test);

        out.text = "programs=" + std::to_string(model.programs.size()) +
                   " k=" + std::to_string(model.mining_k) +
                   " epsilon=" + format_real(model.mining_epsilon) + " lr=" + format_real(cfg.lr) +
                   " hidden=" + std::to_string(cfg.hidden) +
                   " weight_decay=" + format_real(cfg.weight_decay) + "\n";
        out.text += "train_accuracy=" + format_real(train_acc) + "\n";
        out.text += "val_accuracy=" + format_real(val_acc) + "\n";
        out.text += "test_accuracy=" + format_real(test_acc) + "\n";

        model.metadata["dataset"] = ds.name;
        model.metadata["seed"] = std::to_string(cfg.seed);
        model.metadata["epsilon"] = format_real(model.mining_epsilon);
        model.metadata["k"] = std::to_string(model.mining_k);
        model.metadata["lr"] = format_real(cfg.lr);
        model.metadata["hidden"] = std::to_string(cfg.hidden);
        model.metadata["weight_decay"] = format_real(cfg.weight_decay);
        model.metadata["dropout"] = format_real(cfg.dropout);
        model.metadata["epochs"] = std::to_string(cfg.epochs);
        model.metadata["patience"] = std::to_string(cfg.patience);
        model.metadata["train_accuracy"] = format_real(train_acc);
        model.metadata["val_accuracy"] = format_real(val_acc);
        model.metadata["test_accuracy"] = format_real(test_acc);
    } else {
        // Grid search over (epsilon, k, lr); hidden width and weight decay
        // stay at their configured values. Mining runs once per epsilon with
        // the full-width layer; k slices the ranked program prefix.
        const std::vector<double> eps_grid = {0.1, 1.0, 0.01 * D.size()};
        std::vector<int> k_grid;
        for (double frac : {0.01, 0.2, 0.4, 0.6, 0.8, 1.0}) {
            int k = std::max(1, static_cast<int>(std::ceil(frac * D.size())));
            if (k_grid.empty() || k != k_grid.back()) k_grid.push_back(k);
        }
        const std::vector<double> lr_grid = {0.01, 0.005, 0.0005};

        double best_val = -1.0;
        double best_eps = 0.0;
        int best_k = 0;
        double best_lr = 0.0;

        for (double eps : eps_grid) {
            RunConfig mine_cfg = cfg;
            mine_cfg.epsilon = eps;
            mine_cfg.topk = D.size();  // keep every mined program; slice below
            MiningConfig mc = mining_config(mine_cfg, D.size());
            const double t0 = now_seconds();
            MiningStats mstats;
            std::vector<ScoredProgram> programs = learn(D, mc, &mstats);
            log_line("log mine epsilon=" + format_real(eps) +
                     " programs=" + std::to_string(programs.size()) +
                     " iterations=" + std::to_string(mstats.iterations) +
                     " budget_misses=" + std::to_string(mstats.budget_misses) +
                     " seconds=" + std::to_string(now_seconds() - t0));

            Model probe;
            probe.activation = act;
            probe.class_labels = ds.label_set;
            probe.programs = programs;
            EmbeddedSplits e = embed_splits(ds, probe.program_ptrs(), act, cfg);

            for (int k : k_grid) {
                const int width = std::min<int>(k, static_cast<int>(programs.size()));
                if (width == 0) continue;
                auto train_k = take_columns(e.train, width);
                auto val_k = take_columns(e.val, width);
                for (double lr : lr_grid) {
                    RunConfig tc_cfg = cfg;
                    tc_cfg.lr = lr;
                    Mlp net = train_mlp(train_k, e.ytrain, val_k, e.yval, num_classes,
                                        train_config(tc_cfg));
                    const double val_acc = accuracy(net, val_k, e.yval);
                    log_line("log grid epsilon=" + format_real(eps) + " k=" + std::to_string(k) +
                             " lr=" + format_real(lr) + " val_accuracy=" + format_real(val_acc));
                    if (val_acc > best_val) {
                        best_val = val_acc;
                        best_eps = eps;
                        best_k = k;
                        best_lr = lr;
                        model.programs.assign(programs.begin(), programs.begin() + width);
                        model.mlp = std::move(net);
                        model.mining_k = k;
                        model.mining_epsilon = eps;
                    }
                }
            }
        }
        if (best_k == 0) throw DataError("grid search produced no candidate model");

        EmbeddedSplits e = embed_splits(ds, model.program_ptrs(), act, cfg);
        const double train_acc = labeled_accuracy(model, ds, ds.train_idx, e.train);
        const double val_acc = labeled_accuracy(model, ds, ds.val_idx, e.val);
        const double test_acc = labeled_accuracy(model, ds, ds.test_idx, e.test);

        out.text = "grid_best epsilon=" + format_real(best_eps) + " k=" + std::to_string(best_k) +
                   " lr=" + format_real(best_lr) + "\n";
        out.text += "programs=" + std::to_string(model.programs.size()) + "\n";
        out.text += "train_accuracy=" + format_real(train_acc) + "\n";
        out.text += "val_accuracy=" + format_real(val_acc) + "\n";
        out.text += "test_accuracy=" + format_real(test_acc) + "\n";

        model.metadata["dataset"] = ds.name;
        model.metadata["seed"] = std::to_string(cfg.seed);
        model.metadata["epsilon"] = format_real(best_eps);
        model.metadata["k"] = std::to_string(best_k);
        model.metadata["lr"] = format_real(best_lr);
        model.metadata["grid"] = "1";
        model.metadata["val_accuracy"] = format_real(val_acc);
        model.metadata["test_accuracy"] = format_real(test_acc);
    }

    if (!cfg.out_path.empty()) save_model(model, cfg.out_path);
    if (model_out) *model_out = std::move(model);
    return out;
}

CommandOutput cmd_predict(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ConfigError("--model is required for predict");
    Model model = load_model(cfg.model_path);
    Dataset ds = load_dataset(cfg);
    std::vector<int> scratch;
    const std::vector<int>& idx = split_indices(ds, cfg.split_name, scratch);

    std::vector<int> preds(idx.size());
    parallel_for(static_cast<int>(idx.size()), cfg.jobs, [&](int i) {
        preds[i] = predict(model, ds.graphs[idx[i]], cfg.budget).first;
    });

    CommandOutput out;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.text += "graph=" + std::to_string(idx[i]) + " predicted=" + std::to_string(preds[i]);
        if (ds.graphs[idx[i]].label) out.text += " label=" + std::to_string(*ds.graphs[idx[i]].label);
        out.text += "\n";
    }
    return out;
}

namespace {

struct ExplainedSplit {
    std::vector<int> idx;
    std::vector<ImportanceResult> importances;
    std::vector<SubgraphExplanation> subgraphs;
    std::vector<int> predictions;
};

ExplainedSplit explain_split(const Model& model, const Dataset& ds, const RunConfig& cfg) {
    ExplainedSplit r;
    std::vector<int> scratch;
    r.idx = split_indices(ds, cfg.split_name, scratch);
    r.importances.resize(r.idx.size());
    r.subgraphs.resize(r.idx.size());
    r.predictions.resize(r.idx.size());
    parallel_for(static_cast<int>(r.idx.size()), cfg.jobs, [&](int i) {
        const int gidx = r.idx[i];
        const Graph& g = ds.graphs[gidx];
        auto [imp, sub] = explain(g, model, cfg.samples, cfg.select,
                                  mix_seed(cfg.seed, static_cast<std::uint64_t>(gidx)),
                                  cfg.budget);
        r.predictions[i] = predict(model, g, cfg.budget).first;
        r.importances[i] = std::move(imp);
        r.subgraphs[i] = std::move(sub);
    });
    return r;
}

}  // namespace

CommandOutput cmd_explain(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ConfigError("--model is required for explain");
    if (cfg.out_path.empty()) throw ConfigError("--out directory is required for explain");
    Model model = load_model(cfg.model_path);
    Dataset ds = load_dataset(cfg);

    fs::create_directories(cfg.out_path);
    ExplainedSplit r = explain_split(model, ds, cfg);
    for (std::size_t i = 0; i < r.idx.size(); ++i) {
        const int gidx = r.idx[i];
        std::ofstream f(fs::path(cfg.out_path) / ("graph_" + std::to_string(gidx) + ".txt"));
        if (!f) throw DataError("cannot write explanation file in '" + cfg.out_path + "'");
        f << "graph " << gidx << "\n"
          << explanation_report(ds.graphs[gidx], model, r.importances[i], r.subgraphs[i],
                                r.predictions[i]);
    }

    CommandOutput out;
    out.text = "explained=" + std::to_string(r.idx.size()) + " out=" + cfg.out_path + "\n";
    return out;
}

CommandOutput cmd_eval(const RunConfig& cfg) {
    if (cfg.model_path.empty()) throw ConfigError("--model is required for eval");
    Model model = load_model(cfg.model_path);
    Dataset ds = load_dataset(cfg);
    ExplainedSplit r = explain_split(model, ds, cfg);

    std::vector<const Graph*> graphs = ds.pointers(r.idx);
    std::vector<int> labels;
    labels.reserve(r.idx.size());
    int correct = 0;
    for (std::size_t i = 0; i < r.idx.size(); ++i) {
        if (!ds.graphs[r.idx[i]].label) throw DataError("eval needs labeled graphs");
        labels.push_back(*ds.graphs[r.idx[i]].label);
        if (r.predictions[i] == labels.back()) ++correct;
    }

    const double acc = r.idx.empty() ? 0.0 : static_cast<double>(correct) / r.idx.size();
    const double fid = fidelity(model, graphs, labels, r.subgraphs, cfg.budget);
    const double spars = sparsity(graphs, r.subgraphs);

    TrainingSet D = TrainingSet::from_pointers(graphs);
    std::vector<Program> layer;
    for (const ScoredProgram& sp : model.programs) layer.push_back(sp.program);
    bool degenerate = false;
    const double hamming = hamming_objective(layer, D, cfg.budget, &degenerate);
    if (degenerate) log_line("log eval hamming_objective_degenerate=1");

    CommandOutput out;
    out.text = "accuracy=" + format_real(acc) + "\n";
    out.text += "fidelity=" + format_real(fid) + "\n";
    out.text += "sparsity=" + format_real(spars) + "\n";
    out.text += "hamming_objective=" + format_real(hamming) + "\n";
    return out;
}

}  // namespace gdlnn
