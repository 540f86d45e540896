#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jocot/config.hpp"
#include "jocot/data.hpp"
#include "jocot/trainer.hpp"

namespace jocot {

inline constexpr const char* kArtifactVersion = "jocot 0.1.0";

/// One (method, noise kind, rate, seed) grid cell.
struct CellResult {
    Method method = Method::jocot;
    NoiseKind noise_kind = NoiseKind::symmetric;
    double rate = 0.0;
    std::uint64_t seed = 0;
    double test_accuracy = 0.0;
    std::optional<double> noisy_label_precision;  // undefined when nothing was flipped
    std::size_t clean_set_size = 0;
    std::size_t train_size = 0;
    double realized_noise = 0.0;
    int best_epoch = 0;
    std::vector<EpochMetrics> epochs;
    std::optional<std::string> error;

    /// Stem shared by the cell's output files, e.g. `jocot_symmetric_0.4_s1`.
    std::string name() const;
    bool operator==(const CellResult& other) const = default;
};

/// Seed-averaged row of successful cells sharing (method, kind, rate).
struct SummaryRow {
    Method method = Method::jocot;
    NoiseKind noise_kind = NoiseKind::symmetric;
    double rate = 0.0;
    std::size_t seeds = 0;
    double test_accuracy = 0.0;
    std::optional<double> noisy_label_precision;
    double clean_set_size = 0.0;
    bool operator==(const SummaryRow& other) const = default;
};

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
    std::string config_text;  // render_config of the configuration that produced the result
    std::string version = kArtifactVersion;

    bool all_succeeded() const;
    bool operator==(const ExperimentResult& other) const = default;
};

struct PreparedData {
    DatasetSplits splits;
};

/// Loads or synthesizes the dataset, rebalances, splits and optionally standardizes.
PreparedData prepare_data(const DataSource& source);

/// Runs one cell; failures propagate as exceptions.
CellResult run_cell(Method method, NoiseKind kind, double rate, std::uint64_t seed, const ExperimentConfig& config,
                    const PreparedData& data);

/// Whole grid; a failing cell is recorded and the rest still run.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const PreparedData& data);

std::vector<SummaryRow> summarize(const std::vector<CellResult>& cells);

/// summary.csv, summary_mean.csv, epochs_<cell>.csv per cell and result.json.
void emit_metrics(const ExperimentResult& result, const std::filesystem::path& out_dir);

std::string summary_csv(const ExperimentResult& result);
std::string epochs_csv(const CellResult& cell);

/// Console table with percentages.
std::string render_table(const ExperimentResult& result);

void to_json(nlohmann::json& j, const EpochMetrics& m);
void from_json(const nlohmann::json& j, EpochMetrics& m);
void to_json(nlohmann::json& j, const CellResult& c);
void from_json(const nlohmann::json& j, CellResult& c);
void to_json(nlohmann::json& j, const SummaryRow& s);
void from_json(const nlohmann::json& j, SummaryRow& s);
void to_json(nlohmann::json& j, const ExperimentResult& r);
void from_json(const nlohmann::json& j, ExperimentResult& r);

ExperimentResult load_result(const std::filesystem::path& path);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

}  // namespace jocot
