#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "jocot/rng.hpp"

namespace jocot {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense feed-forward classifier: ReLU hidden layers, softmax output.
///
/// weights[l] has shape (layer_dims[l], layer_dims[l + 1]) so a batch of rows
/// maps as A * W + b.
struct ModelParams {
    std::vector<int> layer_dims;
    std::vector<RowMatrix> weights;
    std::vector<Eigen::RowVectorXd> biases;

    int input_dim() const { return layer_dims.front(); }
    int num_classes() const { return layer_dims.back(); }
    std::size_t num_layers() const { return weights.size(); }
    std::size_t num_parameters() const;

    /// Zero-filled parameters with the given shape.
    static ModelParams zeros(std::vector<int> layer_dims);

    bool same_shape(const ModelParams& other) const;
    bool all_finite() const;
    bool operator==(const ModelParams& other) const;

    /// Visits every scalar parameter in a fixed order (layer, weights then bias).
    void for_each(const std::function<void(double&)>& fn);
};

/// Gradients use the parameter layout.
using Gradients = ModelParams;

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    ModelParams first_moment;
    ModelParams second_moment;
    std::uint64_t step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static OptimizerState for_params(const ModelParams& params, AdamSettings settings = {});
    bool operator==(const OptimizerState& other) const;
};

/// One trainable peer network.
struct Network {
    ModelParams params;
    OptimizerState optimizer;

    bool operator==(const Network& other) const = default;
};

struct TrainConfig {
    double base_lr = 1e-4;
    int batch_size = 128;
    int total_epochs = 300;
    int decay_start_epoch = 80;
    double lambda_weight = 0.85;
    int num_gradual_T = 10;
    double noise_rate_tau = 0.0;
    std::uint64_t seed = 1;

    std::vector<int> hidden_dims{256, 128};
    AdamSettings adam{};
    /// JoCoR peers rank by the shared joint loss instead of per-network loss.
    bool jocor_shared_ranking = false;

    /// Throws ConfigError if any field is out of range.
    void validate() const;
};

/// Layer dims for `input_dim -> hidden... -> num_classes`.
std::vector<int> layer_dims_for(int input_dim, int num_classes, std::span<const int> hidden);

/// Uniform in +-sqrt(6 / fan_in) weights, zero biases.
ModelParams init_params(std::vector<int> layer_dims, Rng& rng);

Network make_network(std::vector<int> layer_dims, Rng& rng, AdamSettings settings = {});

/// Class probabilities, one row per input row.
RowMatrix forward(const ModelParams& params, const RowMatrix& features);

/// Per-sample loss callback used by gradient().
///
/// Receives the row index within the batch and that row's probabilities; must
/// write dLoss/dProbs into `dprobs` and return the loss value.
using SampleLossFn =
    std::function<double(std::size_t row, std::span<const double> probs, std::span<double> dprobs)>;

struct GradientResult {
    Gradients grads;
    double mean_loss = 0.0;
};

/// Gradient of the mean per-sample loss over the batch.
GradientResult gradient(const ModelParams& params, const RowMatrix& features, const SampleLossFn& loss);

/// In-place bias-corrected Adam update.
void adam_step(ModelParams& params, OptimizerState& state, const Gradients& grads, double lr);

/// Constant base_lr until decay_start_epoch, then linear to zero at total_epochs.
double lr_at(int epoch, const TrainConfig& config);

/// argmax per row; ties resolve to the smallest class index.
std::vector<int> predict(const ModelParams& params, const RowMatrix& features);

}  // namespace jocot
