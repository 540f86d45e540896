#include "jocot/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "jocot/errors.hpp"

namespace jocot {

namespace {

double floored(double p) { return std::max(p, kProbabilityFloor); }

void check_label(std::span<const double> probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw ArgumentError("label " + std::to_string(label) + " outside [0, " + std::to_string(probs.size()) + ")");
}

void check_lengths(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw ArgumentError("probability vectors differ in length: " + std::to_string(p.size()) + " vs " +
                            std::to_string(q.size()));
}

}  // namespace

double per_sample_ce(std::span<const double> probs, int label) {
    check_label(probs, label);
    return -std::log(floored(probs[static_cast<std::size_t>(label)]));
}

void per_sample_ce_grad(std::span<const double> probs, int label, std::span<double> dprobs) {
    check_label(probs, label);
    std::fill(dprobs.begin(), dprobs.end(), 0.0);
    const double p = probs[static_cast<std::size_t>(label)];
    if (p >= kProbabilityFloor) dprobs[static_cast<std::size_t>(label)] = -1.0 / p;
}

PairLoss coteaching_pair_loss(const PeerPredictions& pp, int label) {
    return {per_sample_ce(pp.probs_net1, label), per_sample_ce(pp.probs_net2, label)};
}

double symmetric_kl(std::span<const double> p, std::span<const double> q) {
    check_lengths(p, q);
    // KL(p||q) + KL(q||p) = sum (p - q)(log p - log q); every term is >= 0 and
    // the expression is exactly symmetric under swapping p and q.
    double total = 0.0;
    for (std::size_t m = 0; m < p.size(); ++m)
        total += (p[m] - q[m]) * (std::log(floored(p[m])) - std::log(floored(q[m])));
    return total;
}

void symmetric_kl_grad(std::span<const double> p, std::span<const double> q, std::span<double> dp) {
    check_lengths(p, q);
    for (std::size_t m = 0; m < p.size(); ++m) {
        // d/dp [p log p~ - p log q~ + q log q~ - q log p~]
        const double log_q = std::log(floored(q[m]));
        if (p[m] >= kProbabilityFloor)
            dp[m] = std::log(p[m]) + 1.0 - log_q - q[m] / p[m];
        else
            dp[m] = std::log(kProbabilityFloor) - log_q;
    }
}

double jocor_per_sample_loss(const PeerPredictions& pp, int label, double lambda_weight) {
    if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) throw ArgumentError("lambda_weight must lie in [0, 1]");
    const PairLoss ce = coteaching_pair_loss(pp, label);
    const double contrast = symmetric_kl(pp.probs_net1, pp.probs_net2);
    return (1.0 - lambda_weight) * ce.sum() + lambda_weight * contrast;
}

void jocor_per_sample_grad(std::span<const double> own, std::span<const double> peer, int label,
                           double lambda_weight, std::span<double> dprobs) {
    if (!(lambda_weight >= 0.0 && lambda_weight <= 1.0)) throw ArgumentError("lambda_weight must lie in [0, 1]");
    // symmetric_kl_grad writes every entry, so the ce part is added on top.
    symmetric_kl_grad(own, peer, dprobs);
    for (double& d : dprobs) d *= lambda_weight;
    const std::size_t y = static_cast<std::size_t>(label);
    check_label(own, label);
    if (own[y] >= kProbabilityFloor) dprobs[y] -= (1.0 - lambda_weight) / own[y];
}

}  // namespace jocot
