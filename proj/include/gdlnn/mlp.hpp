#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gdlnn {

// Hyperparameters. Grids follow the evaluation setup: learning rate in
// {0.01, 0.005, 0.0005}, hidden width in {20, 32, 64, 128}, weight decay in
// {0, 1e-3, 5e-4, 5e-5}, dropout 0.5, up to 500 epochs with patience 100.
struct TrainConfig {
    double learning_rate = 0.01;
    std::vector<int> hidden = {64, 64};
    double weight_decay = 0.0;
    double dropout = 0.5;
    int max_epochs = 500;
    int patience = 100;
    std::uint64_t seed = 1;
};

// Dense multi-layer perceptron with rectifier hidden activations and a
// softmax head. Weights[l] is sizes[l] x sizes[l+1], row-major by input.
struct Mlp {
    std::vector<int> sizes;
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    int num_layers() const { return static_cast<int>(weights.size()); }
    int input_width() const { return sizes.empty() ? 0 : sizes.front(); }
    int output_width() const { return sizes.empty() ? 0 : sizes.back(); }

    std::vector<double> logits(std::span<const double> x) const;
    std::vector<double> forward(std::span<const double> x) const;  // softmax probabilities
    int predict_class(std::span<const double> x) const;            // argmax, ties to lowest

    static Mlp zeros(const std::vector<int>& sizes);
};

// Mean softmax cross-entropy over the batch plus (weight_decay/2)·Σ‖W‖²
// (biases are not decayed). When grads is non-null it receives d(loss)/d(param)
// in the same layout as Mlp::weights / Mlp::biases. No dropout here; this is
// the deterministic objective the gradient check differentiates.
struct MlpGradients {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;
};
double mlp_loss(const Mlp& net, const std::vector<std::vector<double>>& X,
                const std::vector<int>& y, double weight_decay, MlpGradients* grads = nullptr);

// Full-batch momentum SGD (momentum 0.9) minimizing the loss above, with
// inverted dropout on hidden activations during training. Keeps the weights
// of the best validation-accuracy epoch (falls back to best training loss
// when the validation set is empty) and stops after `patience` epochs without
// improvement. Deterministic for a fixed cfg.seed.
Mlp train_mlp(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              const std::vector<std::vector<double>>& Xval, const std::vector<int>& yval,
              int num_classes, const TrainConfig& cfg);

double accuracy(const Mlp& net, const std::vector<std::vector<double>>& X,
                const std::vector<int>& y);

}  // namespace gdlnn
