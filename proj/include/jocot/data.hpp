#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jocot/net.hpp"

namespace jocot {

/// 17 skeleton landmarks x {x, y, confidence}.
inline constexpr int kSkeletonFeatureDim = 51;

struct LabeledDataset {
    RowMatrix features;  // one sample per row
    std::vector<int> labels;
    int num_classes = 0;
    std::vector<std::string> class_names;

    std::size_t size() const { return labels.size(); }
    int dim() const { return static_cast<int>(features.cols()); }

    /// Rows at the given positions, in that order.
    LabeledDataset subset(std::span<const std::size_t> rows) const;
    /// Same features with replacement labels.
    LabeledDataset with_labels(std::vector<int> labels) const;
    std::vector<std::size_t> class_counts() const;

    /// Throws ConfigError when features and labels disagree.
    void validate() const;
};

struct SplitSpec {
    double train_frac = 0.8;
    double test_frac = 0.1;
    double val_frac = 0.1;
    std::uint64_t seed = 0;
};

struct DatasetSplits {
    LabeledDataset train;
    LabeledDataset test;
    LabeledDataset val;
};

/// Reads `f0,...,f<d-1>,label` rows. Labels are shifted to 0-based when the
/// file contains no label 0 (1-based activity IDs).
LabeledDataset load_csv(const std::filesystem::path& path, int expected_dim = kSkeletonFeatureDim);

/// Writes the same schema with 0-based labels and shortest round-trip reals.
void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path);

/// Keeps min(per_class, count) samples per class, drawn without replacement.
LabeledDataset rebalance(const LabeledDataset& dataset, std::size_t per_class, std::uint64_t seed);

/// Stratified shuffle split with exact largest-remainder totals.
DatasetSplits split(const LabeledDataset& dataset, const SplitSpec& spec);

/// Gaussian clusters (unit variance) around random centers of norm `separation`.
LabeledDataset synthesize(int num_classes, std::size_t per_class, int dim, double separation, std::uint64_t seed);

/// Per-feature standardization fitted on one dataset and applied to others.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const LabeledDataset& dataset);
    LabeledDataset apply(const LabeledDataset& dataset) const;
};

}  // namespace jocot
