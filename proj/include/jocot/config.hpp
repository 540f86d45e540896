#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "jocot/data.hpp"
#include "jocot/net.hpp"
#include "jocot/noise.hpp"

namespace jocot {

enum class Method { jocot, coteaching, coteachingplus, jocor, ce_baseline };

std::string to_string(Method method);
Method parse_method(const std::string& text);

struct DataSource {
    enum class Kind { synthetic, csv };
    Kind kind = Kind::synthetic;
    std::filesystem::path path;  // csv only
    int classes = 12;
    std::size_t per_class = 600;
    int dim = kSkeletonFeatureDim;
    double separation = 3.0;
    std::uint64_t seed = 2024;  // synthesis, rebalance and split
    std::size_t rebalance_per_class = 0;  // 0 = keep all samples
    bool standardize = false;
    SplitSpec split{};
};

/// `[train.<rate>]` or `[train.<kind>.<rate>]` section: TrainConfig keys for matching cells.
struct CellOverride {
    std::string noise_kind;  // empty = any kind
    double rate = 0.0;
    std::vector<std::pair<std::string, std::string>> values;
};

struct ExperimentConfig {
    DataSource data;
    std::vector<Method> methods{Method::jocot};
    std::vector<NoiseKind> noise_kinds{NoiseKind::symmetric};
    std::vector<double> rates{0.2};
    std::vector<std::uint64_t> seeds{1};
    TrainConfig train;
    std::vector<CellOverride> overrides;
    std::filesystem::path out_dir = "results";
    bool save_checkpoints = false;

    /// TrainConfig for one grid cell: base values, then matching overrides,
    /// with seed and tau set from the cell unless a `tau` override is present.
    TrainConfig train_for(NoiseKind kind, double rate, std::uint64_t seed) const;

    void validate() const;
};

/// Parses the sectioned key-value format (`[section]`, `key = value`, `#` comments).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies `section.key=value`; throws ConfigError for unknown keys.
void apply_setting(ExperimentConfig& config, const std::string& section, const std::string& key,
                   const std::string& value);

/// Applies one TrainConfig key.
void apply_train_key(TrainConfig& train, const std::string& key, const std::string& value);

/// Canonical text form; parse_config(render_config(c)) reproduces c.
std::string render_config(const ExperimentConfig& config);

std::vector<double> parse_real_list(const std::string& text);
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace jocot
