#pragma once

#include <span>

namespace jocot {

/// Floor applied to every probability before it enters a log.
inline constexpr double kProbabilityFloor = 1e-12;

/// Class-probability outputs of the two peers of a teacher module for one sample.
struct PeerPredictions {
    std::span<const double> probs_net1;
    std::span<const double> probs_net2;
};

struct PairLoss {
    double net1 = 0.0;
    double net2 = 0.0;
    double sum() const { return net1 + net2; }
};

/// -log(probs[label]) with the probability floor.
double per_sample_ce(std::span<const double> probs, int label);

/// dCE/dProbs written into `dprobs` (zero outside the label entry).
void per_sample_ce_grad(std::span<const double> probs, int label, std::span<double> dprobs);

/// Cross-entropy of each peer against the same (possibly noisy) label.
PairLoss coteaching_pair_loss(const PeerPredictions& pp, int label);

/// KL(p||q) + KL(q||p).
double symmetric_kl(std::span<const double> p, std::span<const double> q);

/// d symmetric_kl(p, q) / dp with q held fixed.
void symmetric_kl_grad(std::span<const double> p, std::span<const double> q, std::span<double> dp);

/// (1 - lambda) * (ce_1 + ce_2) + lambda * symmetric_kl(p_1, p_2).
double jocor_per_sample_loss(const PeerPredictions& pp, int label, double lambda_weight);

/// d jocor_per_sample_loss / d probs of one peer with the other held fixed.
void jocor_per_sample_grad(std::span<const double> own, std::span<const double> peer, int label,
                           double lambda_weight, std::span<double> dprobs);

}  // namespace jocot
