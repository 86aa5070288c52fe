#include "gdlnn/mlp.hpp"

#include <algorithm>
#include <cmath>

#include "gdlnn/errors.hpp"
#include "gdlnn/rng.hpp"

namespace gdlnn {

namespace {

void affine(const std::vector<double>& w, const std::vector<double>& b, int in, int out,
            const double* x, double* z) {
    for (int j = 0; j < out; ++j) z[j] = b[j];
    for (int i = 0; i < in; ++i) {
        const double xi = x[i];
        if (xi == 0.0) continue;
        const double* row = w.data() + static_cast<std::size_t>(i) * out;
        for (int j = 0; j < out; ++j) z[j] += xi * row[j];
    }
}

std::vector<double> softmax(std::vector<double> z) {
    double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        sum += v;
    }
    for (double& v : z) v /= sum;
    return z;
}

}  // namespace

Mlp Mlp::zeros(const std::vector<int>& sizes) {
    Mlp net;
    net.sizes = sizes;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        net.weights.emplace_back(static_cast<std::size_t>(sizes[l]) * sizes[l + 1], 0.0);
        net.biases.emplace_back(sizes[l + 1], 0.0);
    }
    return net;
}

std::vector<double> Mlp::logits(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != input_width()) {
        throw ValidationError("mlp input width mismatch: got " + std::to_string(x.size()) +
                              ", expected " + std::to_string(input_width()));
    }
    std::vector<double> cur(x.begin(), x.end());
    for (int l = 0; l < num_layers(); ++l) {
        std::vector<double> next(sizes[l + 1]);
        affine(weights[l], biases[l], sizes[l], sizes[l + 1], cur.data(), next.data());
        if (l + 1 < num_layers()) {
            for (double& v : next) v = std::max(0.0, v);
        }
        cur = std::move(next);
    }
    return cur;
}

std::vector<double> Mlp::forward(std::span<const double> x) const {
    return softmax(logits(x));
}

int Mlp::predict_class(std::span<const double> x) const {
    std::vector<double> z = logits(x);
    int best = 0;
    for (int j = 1; j < static_cast<int>(z.size()); ++j) {
        if (z[j] > z[best]) best = j;
    }
    return best;
}

double accuracy(const Mlp& net, const std::vector<std::vector<double>>& X,
                const std::vector<int>& y) {
    if (X.empty()) return 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (net.predict_class(X[i]) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / X.size();
}

namespace {

// Forward+backward over one batch. dropout_masks, when non-null, holds one
// vector per hidden layer, indexed [layer][sample][unit]; kept units carry
// the inverted-dropout scale 1/(1-p), dropped ones 0. acts[l] stores the
// post-dropout activation, so relu/dropout gating reads off a[l][i] == 0 and
// the surviving derivative is exactly the mask value.
double batch_pass(const Mlp& net, const std::vector<std::vector<double>>& X,
                  const std::vector<int>& y, double weight_decay,
                  const std::vector<std::vector<std::vector<double>>>* dropout_masks,
                  MlpGradients* grads) {
    const int layers = net.num_layers();
    const std::size_t batch = X.size();
    if (batch == 0) throw ValidationError("mlp batch is empty");

    if (grads) {
        grads->weights.clear();
        grads->biases.clear();
        for (int l = 0; l < layers; ++l) {
            grads->weights.emplace_back(net.weights[l].size(), 0.0);
            grads->biases.emplace_back(net.biases[l].size(), 0.0);
        }
    }

    double loss = 0.0;
    std::vector<std::vector<double>> acts(layers + 1);
    for (std::size_t s = 0; s < batch; ++s) {
        if (static_cast<int>(X[s].size()) != net.input_width()) {
            throw ValidationError("mlp input width mismatch in batch");
        }
        if (y[s] < 0 || y[s] >= net.output_width()) {
            throw ValidationError("mlp label out of range");
        }
        acts[0] = X[s];
        for (int l = 0; l < layers; ++l) {
            acts[l + 1].assign(net.sizes[l + 1], 0.0);
            affine(net.weights[l], net.biases[l], net.sizes[l], net.sizes[l + 1], acts[l].data(),
                   acts[l + 1].data());
            if (l + 1 < layers) {
                for (double& v : acts[l + 1]) v = std::max(0.0, v);
                if (dropout_masks) {
                    const std::vector<double>& mask = (*dropout_masks)[l][s];
                    for (int j = 0; j < net.sizes[l + 1]; ++j) acts[l + 1][j] *= mask[j];
                }
            }
        }

        std::vector<double> probs = softmax(acts[layers]);
        loss += -std::log(std::max(probs[y[s]], 1e-300));
        if (!grads) continue;

        std::vector<double> delta = std::move(probs);  // d(loss)/d(logits)
        delta[y[s]] -= 1.0;
        for (int l = layers - 1; l >= 0; --l) {
            const int in = net.sizes[l];
            const int out = net.sizes[l + 1];
            std::vector<double>& gw = grads->weights[l];
            std::vector<double>& gb = grads->biases[l];
            for (int j = 0; j < out; ++j) gb[j] += delta[j] / batch;
            for (int i = 0; i < in; ++i) {
                const double a = acts[l][i];
                if (a == 0.0) continue;
                double* row = gw.data() + static_cast<std::size_t>(i) * out;
                for (int j = 0; j < out; ++j) row[j] += a * delta[j] / batch;
            }
            if (l == 0) break;
            std::vector<double> prev(in, 0.0);
            for (int i = 0; i < in; ++i) {
                if (acts[l][i] == 0.0) continue;  // relu or dropout zeroed this unit
                const double* row = net.weights[l].data() + static_cast<std::size_t>(i) * out;
                double sum = 0.0;
                for (int j = 0; j < out; ++j) sum += row[j] * delta[j];
                if (dropout_masks) sum *= (*dropout_masks)[l - 1][s][i];
                prev[i] = sum;
            }
            delta = std::move(prev);
        }
    }
    loss /= batch;

    if (weight_decay != 0.0) {
        for (int l = 0; l < layers; ++l) {
            for (double w : net.weights[l]) loss += 0.5 * weight_decay * w * w;
        }
        if (grads) {
            for (int l = 0; l < layers; ++l) {
                for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
                    grads->weights[l][i] += weight_decay * net.weights[l][i];
                }
            }
        }
    }
    return loss;
}

}  // namespace

double mlp_loss(const Mlp& net, const std::vector<std::vector<double>>& X,
                const std::vector<int>& y, double weight_decay, MlpGradients* grads) {
    return batch_pass(net, X, y, weight_decay, nullptr, grads);
}

Mlp train_mlp(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
              const std::vector<std::vector<double>>& Xval, const std::vector<int>& yval,
              int num_classes, const TrainConfig& cfg) {
    if (X.empty()) throw ValidationError("mlp training set is empty");
    if (X.size() != y.size() || Xval.size() != yval.size()) {
        throw ValidationError("mlp feature/label length mismatch");
    }
    if (num_classes < 1) throw ValidationError("mlp needs at least one class");

    std::vector<int> sizes;
    sizes.push_back(static_cast<int>(X[0].size()));
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(num_classes);

    Rng rng(cfg.seed);
    Mlp net = Mlp::zeros(sizes);
    for (int l = 0; l < net.num_layers(); ++l) {
        const double scale = std::sqrt(2.0 / net.sizes[l]);
        for (double& w : net.weights[l]) w = scale * rng.normal();
    }

    MlpGradients grads;
    MlpGradients velocity;
    for (int l = 0; l < net.num_layers(); ++l) {
        velocity.weights.emplace_back(net.weights[l].size(), 0.0);
        velocity.biases.emplace_back(net.biases[l].size(), 0.0);
    }
    constexpr double kMomentum = 0.9;

    Mlp best = net;
    double best_metric = -1e300;
    int since_best = 0;
    const int hidden_layers = net.num_layers() - 1;
    const bool use_dropout = cfg.dropout > 0.0 && hidden_layers > 0;
    std::vector<std::vector<std::vector<double>>> masks(hidden_layers);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        if (use_dropout) {
            for (int l = 0; l < hidden_layers; ++l) {
                masks[l].assign(X.size(), std::vector<double>(net.sizes[l + 1]));
                for (std::size_t s = 0; s < X.size(); ++s) {
                    for (int j = 0; j < net.sizes[l + 1]; ++j) {
                        masks[l][s][j] =
                            rng.bernoulli(cfg.dropout) ? 0.0 : 1.0 / (1.0 - cfg.dropout);
                    }
                }
            }
        }
        batch_pass(net, X, y, cfg.weight_decay, use_dropout ? &masks : nullptr, &grads);

        for (int l = 0; l < net.num_layers(); ++l) {
            for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
                velocity.weights[l][i] =
                    kMomentum * velocity.weights[l][i] - cfg.learning_rate * grads.weights[l][i];
                net.weights[l][i] += velocity.weights[l][i];
            }
            for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
                velocity.biases[l][i] =
                    kMomentum * velocity.biases[l][i] - cfg.learning_rate * grads.biases[l][i];
                net.biases[l][i] += velocity.biases[l][i];
            }
        }

        const double metric = Xval.empty()
                                  ? -batch_pass(net, X, y, cfg.weight_decay, nullptr, nullptr)
                                  : accuracy(net, Xval, yval);
        if (metric > best_metric) {
            best_metric = metric;
            best = net;
            since_best = 0;
        } else if (++since_best >= cfg.patience) {
            break;
        }
    }
    return best;
}

}  // namespace gdlnn
