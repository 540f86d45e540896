#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jocot/data.hpp"
#include "jocot/net.hpp"
#include "jocot/noise.hpp"
#include "jocot/selection.hpp"

namespace jocot {

enum class TeacherKind { coteaching, jocor, coteachingplus };

std::string to_string(TeacherKind kind);

/// Global training indices of one mini-batch.
using Batch = std::vector<std::size_t>;

/// Shuffled mini-batches over [0, n); the trailing partial batch is kept.
std::vector<Batch> make_batches(std::size_t n, int batch_size, Rng& rng);

/// What one peer pair did on one mini-batch.
struct BatchRecord {
    SelectionSet selected_by_net1;  // small-loss selection of net1's ranking
    SelectionSet selected_by_net2;
    SelectionSet update_net1;  // samples net1's gradient was computed from
    SelectionSet update_net2;
    std::size_t disagreement = 0;  // co-teaching+ only: size of the disagreement subset
    double selected_loss_sum = 0.0;
    std::size_t selected_count = 0;
};

struct TeacherState {
    TeacherKind module_kind = TeacherKind::coteaching;
    Network net1;
    Network net2;
    /// Records of the most recent epoch, in batch order.
    std::vector<BatchRecord> epoch_selections;

    /// Fresh peers drawn from independent seed streams of `config.seed`.
    static TeacherState create(TeacherKind kind, int input_dim, int num_classes, const TrainConfig& config);
};

/// Cross-update with small-loss selection: each net learns from the samples its peer ranks cleanest.
void coteaching_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                      double remember, double lr);

/// Joint (1 - lambda) CE + lambda symmetric-KL loss; each net updates on its own selection.
void jocor_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                 double remember, double lr, double lambda_weight, bool shared_ranking = false);

/// Co-teaching restricted to the samples where the peers' argmax predictions disagree.
void coteachingplus_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                          double remember, double lr);

/// Runs the epoch routine that matches state.module_kind.
void teacher_epoch(TeacherState& state, const LabeledDataset& noisy_train, std::span<const Batch> batches,
                   double remember, double lr, const TrainConfig& config);

struct EpochMetrics {
    int epoch = 0;
    std::optional<double> test_accuracy;
    std::optional<double> noisy_label_precision;
    double remember_rate = 1.0;
    double lr = 0.0;
    double mean_selected_loss = 0.0;
    std::size_t clean_set_size = 0;

    bool operator==(const EpochMetrics& other) const = default;
};

/// Selections of all four teacher peers on one batch and their consensus.
struct BatchConsensus {
    int epoch = 0;
    std::size_t batch = 0;
    SelectionSet p1, p2, q1, q2;
    SelectionSet ip, iq, icon;
};

/// Optional monitoring inputs; none of them influence training.
struct Monitor {
    const NoiseMask* mask = nullptr;       // enables noisy-label precision
    const LabeledDataset* test = nullptr;  // enables per-epoch test accuracy
    std::function<void(const BatchConsensus&)> on_batch;
};

struct TeacherRun {
    SelectionSet clean_set;  // final-epoch consensus union
    std::vector<EpochMetrics> epochs;
    TeacherState jocor;
    TeacherState coteaching;
};

/// Both teacher modules over shared batch orders with per-batch inner/outer consensus.
///
/// Throws TrainingError if the final clean set is empty.
TeacherRun train_teachers(const TrainConfig& config, const LabeledDataset& noisy_train, const Monitor& monitor = {});

struct ModuleRun {
    SelectionSet clean_set;  // final-epoch union of the module's inner consensus
    std::vector<EpochMetrics> epochs;
    TeacherState state;
    ModelParams best_net1;  // net1 snapshot with the best validation accuracy
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
};

/// A single teacher module trained alone, as the baseline methods.
ModuleRun train_module(TeacherKind kind, const TrainConfig& config, const LabeledDataset& noisy_train,
                       const LabeledDataset& clean_val, const Monitor& monitor = {});

struct StudentRun {
    ModelParams params;  // best-validation snapshot
    int best_epoch = 0;
    double best_val_accuracy = 0.0;
    std::vector<EpochMetrics> epochs;
    Network final_network;          // state after the last epoch
    std::optional<Rng> final_shuffle;  // shuffle stream after the last epoch
};

/// Plain mean-CE training of a fresh network on `train` restricted to `clean_set`.
StudentRun train_student(const LabeledDataset& train, const SelectionSet& clean_set, const LabeledDataset& clean_val,
                         const TrainConfig& config, const Monitor& monitor = {});

/// Fraction of argmax predictions equal to the labels.
double evaluate(const ModelParams& model, const LabeledDataset& test_set);

/// Seed streams for the independent random sources of one run.
namespace streams {
inline constexpr std::uint64_t teacher_shuffle = 0;
inline constexpr std::uint64_t jocor_net1 = 1;
inline constexpr std::uint64_t jocor_net2 = 2;
inline constexpr std::uint64_t coteaching_net1 = 3;
inline constexpr std::uint64_t coteaching_net2 = 4;
inline constexpr std::uint64_t student_init = 7;
inline constexpr std::uint64_t student_shuffle = 8;
inline constexpr std::uint64_t noise = 9;
}  // namespace streams

}  // namespace jocot
