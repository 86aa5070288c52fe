#include <iostream>

#include <CLI11.hpp>

#include "gdlnn/errors.hpp"
#include "gdlnn/pipeline.hpp"

namespace {

void add_common_options(CLI::App* cmd, gdlnn::RunConfig* cfg) {
    cmd->add_option("--data", cfg->data_path, "Dataset path (TU directory or JSON file)");
    cmd->add_option("--format", cfg->format, "Dataset format: tu|json|ba2motifs")
        ->check(CLI::IsMember({"tu", "json", "ba2motifs"}));
    cmd->add_option("--name", cfg->tu_name, "TU dataset name (default: directory basename)");
    cmd->add_option("--count", cfg->ba_count, "Number of graphs for --format ba2motifs");
    cmd->add_option("--seed", cfg->seed, "Seed for splits, training, and explanations");
    cmd->add_option("--epsilon", cfg->epsilon, "Score smoothing epsilon");
    cmd->add_option("--topk", cfg->topk, "GDL-layer width k (default: ceil(0.2*|train|))");
    cmd->add_option("--budget", cfg->budget, "Matcher budget per query (assignments)");
    cmd->add_option("--jobs", cfg->jobs, "Worker threads (default: hardware)");
    cmd->add_flag("--balanced-topk", cfg->balanced_topk,
                  "Round-robin the k slots across labels");
    cmd->add_option("--activation", cfg->activation, "GDL-layer activation: sigma|sigma_count")
        ->check(CLI::IsMember({"sigma", "sigma_count"}));
    cmd->add_option("--lr", cfg->lr, "Learning rate");
    cmd->add_option("--hidden", cfg->hidden, "Hidden width (two hidden layers)");
    cmd->add_option("--weight-decay", cfg->weight_decay, "L2 weight decay");
    cmd->add_option("--dropout", cfg->dropout, "Dropout rate on hidden activations");
    cmd->add_option("--epochs", cfg->epochs, "Max training epochs");
    cmd->add_option("--patience", cfg->patience, "Early-stopping patience (epochs)");
    cmd->add_option("--samples", cfg->samples, "Surrogate perturbation samples");
    cmd->add_option("--select", cfg->select, "Max selected important features");
    cmd->add_flag("--grid", cfg->grid, "Grid-search epsilon, k, and learning rate");
    cmd->add_flag("--override", cfg->override_grids,
                  "Allow hyperparameters outside the default grids");
    cmd->add_option("--split", cfg->split_name, "Graphs to process: train|val|test|all")
        ->check(CLI::IsMember({"train", "val", "test", "all"}));
    cmd->add_option("--out", cfg->out_path, "Output path (file, or directory for explain)");
    cmd->add_option("--layer", cfg->layer_path, "Mined-layer file to reuse (train)");
    cmd->add_option("--model", cfg->model_path, "Model file (predict/explain/eval)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"GDL-layer graph classifier: mine, train, predict, explain, eval"};
    app.require_subcommand(1);

    gdlnn::RunConfig cfg;
    CLI::App* mine = app.add_subcommand("mine", "Mine a GDL layer from the training split");
    CLI::App* train = app.add_subcommand("train", "Mine (or load) a layer and train the MLP");
    CLI::App* predict = app.add_subcommand("predict", "Print per-graph predictions");
    CLI::App* explain = app.add_subcommand("explain", "Write per-graph explanation files");
    CLI::App* eval = app.add_subcommand("eval", "Print accuracy, fidelity, sparsity");
    for (CLI::App* cmd : {mine, train, predict, explain, eval}) {
        add_common_options(cmd, &cfg);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        gdlnn::CommandOutput out;
        if (mine->parsed()) {
            out = gdlnn::cmd_mine(cfg);
        } else if (train->parsed()) {
            out = gdlnn::cmd_train(cfg);
        } else if (predict->parsed()) {
            out = gdlnn::cmd_predict(cfg);
        } else if (explain->parsed()) {
            out = gdlnn::cmd_explain(cfg);
        } else if (eval->parsed()) {
            out = gdlnn::cmd_eval(cfg);
        }
        std::cout << out.text;
        return 0;
    } catch (const gdlnn::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const gdlnn::BudgetExceededError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const gdlnn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
