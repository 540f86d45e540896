#include "jocot/net.hpp"

#include <cmath>
#include <string>

#include "jocot/errors.hpp"

namespace jocot {

std::size_t ModelParams::num_parameters() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
    return n;
}

ModelParams ModelParams::zeros(std::vector<int> dims) {
    if (dims.size() < 2) throw ConfigError("a network needs at least input and output layers");
    for (int d : dims)
        if (d <= 0) throw ConfigError("layer dims must be positive");
    ModelParams p;
    p.layer_dims = std::move(dims);
    for (std::size_t l = 0; l + 1 < p.layer_dims.size(); ++l) {
        p.weights.push_back(RowMatrix::Zero(p.layer_dims[l], p.layer_dims[l + 1]));
        p.biases.push_back(Eigen::RowVectorXd::Zero(p.layer_dims[l + 1]));
    }
    return p;
}

bool ModelParams::same_shape(const ModelParams& other) const {
    if (layer_dims != other.layer_dims || weights.size() != other.weights.size()) return false;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != other.weights[l].rows() || weights[l].cols() != other.weights[l].cols())
            return false;
        if (biases[l].size() != other.biases[l].size()) return false;
    }
    return true;
}

bool ModelParams::all_finite() const {
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (!weights[l].allFinite() || !biases[l].allFinite()) return false;
    return true;
}

bool ModelParams::operator==(const ModelParams& other) const {
    if (!same_shape(other)) return false;
    for (std::size_t l = 0; l < weights.size(); ++l)
        if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
    return true;
}

void ModelParams::for_each(const std::function<void(double&)>& fn) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (Eigen::Index i = 0; i < weights[l].size(); ++i) fn(weights[l].data()[i]);
        for (Eigen::Index i = 0; i < biases[l].size(); ++i) fn(biases[l].data()[i]);
    }
}

OptimizerState OptimizerState::for_params(const ModelParams& params, AdamSettings settings) {
    OptimizerState s;
    s.first_moment = ModelParams::zeros(params.layer_dims);
    s.second_moment = ModelParams::zeros(params.layer_dims);
    s.beta1 = settings.beta1;
    s.beta2 = settings.beta2;
    s.epsilon = settings.epsilon;
    return s;
}

bool OptimizerState::operator==(const OptimizerState& other) const {
    return step_count == other.step_count && beta1 == other.beta1 && beta2 == other.beta2 &&
           epsilon == other.epsilon && first_moment == other.first_moment &&
           second_moment == other.second_moment;
}

void TrainConfig::validate() const {
    if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ConfigError("base_lr must be positive");
    if (batch_size <= 0) throw ConfigError("batch_size must be positive");
    if (total_epochs <= 0) throw ConfigError("total_epochs must be positive");
    if (decay_start_epoch <= 0 || decay_start_epoch >= total_epochs)
        throw ConfigError("decay_start_epoch must lie in (0, total_epochs)");
    if (!(lambda_weight >= 0.05 && lambda_weight <= 0.95))
        throw ConfigError("lambda_weight must lie in [0.05, 0.95]");
    if (num_gradual_T <= 0) throw ConfigError("num_gradual_T must be positive");
    if (!(noise_rate_tau >= 0.0 && noise_rate_tau < 1.0))
        throw ConfigError("noise_rate_tau must lie in [0, 1)");
    for (int h : hidden_dims)
        if (h <= 0) throw ConfigError("hidden layer widths must be positive");
}

std::vector<int> layer_dims_for(int input_dim, int num_classes, std::span<const int> hidden) {
    std::vector<int> dims{input_dim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(num_classes);
    return dims;
}

ModelParams init_params(std::vector<int> layer_dims, Rng& rng) {
    ModelParams p = ModelParams::zeros(std::move(layer_dims));
    for (std::size_t l = 0; l < p.weights.size(); ++l) {
        const double bound = std::sqrt(6.0 / p.layer_dims[l]);
        for (Eigen::Index i = 0; i < p.weights[l].size(); ++i)
            p.weights[l].data()[i] = rng.uniform(-bound, bound);
    }
    return p;
}

Network make_network(std::vector<int> layer_dims, Rng& rng, AdamSettings settings) {
    Network net;
    net.params = init_params(std::move(layer_dims), rng);
    net.optimizer = OptimizerState::for_params(net.params, settings);
    return net;
}

namespace {

void check_input(const ModelParams& params, const RowMatrix& features) {
    if (params.weights.empty()) throw ConfigError("network has no layers");
    if (features.cols() != params.input_dim())
        throw ConfigError("feature dim " + std::to_string(features.cols()) + " does not match network input dim " +
                          std::to_string(params.input_dim()));
    if (!features.allFinite()) throw InputError("non-finite feature value");
}

void softmax_rows(RowMatrix& logits) {
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        auto row = logits.row(r);
        const double peak = row.maxCoeff();
        row = (row.array() - peak).exp().matrix();
        row /= row.sum();
    }
}

// Activations after each layer; acts[0] is the input, acts.back() the probabilities.
std::vector<RowMatrix> forward_all(const ModelParams& params, const RowMatrix& features) {
    std::vector<RowMatrix> acts;
    acts.reserve(params.num_layers() + 1);
    acts.push_back(features);
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        RowMatrix z = acts.back() * params.weights[l];
        z.rowwise() += params.biases[l];
        if (l + 1 < params.num_layers())
            z = z.cwiseMax(0.0);
        else
            softmax_rows(z);
        acts.push_back(std::move(z));
    }
    return acts;
}

}  // namespace

RowMatrix forward(const ModelParams& params, const RowMatrix& features) {
    check_input(params, features);
    return std::move(forward_all(params, features).back());
}

GradientResult gradient(const ModelParams& params, const RowMatrix& features, const SampleLossFn& loss) {
    check_input(params, features);
    const Eigen::Index n = features.rows();
    GradientResult result{ModelParams::zeros(params.layer_dims), 0.0};
    if (n == 0) return result;

    std::vector<RowMatrix> acts = forward_all(params, features);
    const RowMatrix& probs = acts.back();
    const Eigen::Index classes = probs.cols();

    // dLoss/dLogits for the softmax layer: p * (g - <p, g>).
    RowMatrix delta(n, classes);
    std::vector<double> dprobs(static_cast<std::size_t>(classes));
    double total = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
        std::fill(dprobs.begin(), dprobs.end(), 0.0);
        std::span<const double> row(probs.row(r).data(), static_cast<std::size_t>(classes));
        const double value = loss(static_cast<std::size_t>(r), row, dprobs);
        if (!std::isfinite(value)) throw NumericalError("non-finite loss", static_cast<std::size_t>(r));
        total += value;
        double inner = 0.0;
        for (Eigen::Index c = 0; c < classes; ++c) inner += row[c] * dprobs[c];
        for (Eigen::Index c = 0; c < classes; ++c) delta(r, c) = row[c] * (dprobs[c] - inner);
    }
    result.mean_loss = total / static_cast<double>(n);
    delta /= static_cast<double>(n);

    for (std::size_t l = params.num_layers(); l-- > 0;) {
        result.grads.weights[l].noalias() = acts[l].transpose() * delta;
        result.grads.biases[l] = delta.colwise().sum();
        if (l == 0) break;
        RowMatrix upstream = delta * params.weights[l].transpose();
        delta = (acts[l].array() > 0.0).select(upstream, 0.0);
    }
    return result;
}

void adam_step(ModelParams& params, OptimizerState& state, const Gradients& grads, double lr) {
    if (!params.same_shape(grads) || !params.same_shape(state.first_moment) ||
        !params.same_shape(state.second_moment))
        throw ConfigError("adam_step: parameter, gradient and moment shapes differ");
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double correction1 = 1.0 - std::pow(state.beta1, t);
    const double correction2 = 1.0 - std::pow(state.beta2, t);

    auto update = [&](auto& theta, auto& m, auto& v, const auto& g) {
        m = state.beta1 * m + (1.0 - state.beta1) * g;
        v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
        theta.array() -= lr * (m.array() / correction1) /
                         ((v.array() / correction2).sqrt() + state.epsilon);
    };
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
        update(params.weights[l], state.first_moment.weights[l], state.second_moment.weights[l], grads.weights[l]);
        update(params.biases[l], state.first_moment.biases[l], state.second_moment.biases[l], grads.biases[l]);
    }
}

double lr_at(int epoch, const TrainConfig& config) {
    if (epoch < 0 || epoch > config.total_epochs)
        throw ArgumentError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(config.total_epochs) + "]");
    if (epoch < config.decay_start_epoch) return config.base_lr;
    const double span = static_cast<double>(config.total_epochs - config.decay_start_epoch);
    return config.base_lr * static_cast<double>(config.total_epochs - epoch) / span;
}

std::vector<int> predict(const ModelParams& params, const RowMatrix& features) {
    RowMatrix probs = forward(params, features);
    std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        Eigen::Index best = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c)
            if (probs(r, c) > probs(r, best)) best = c;
        labels[static_cast<std::size_t>(r)] = static_cast<int>(best);
    }
    return labels;
}

}  // namespace jocot
