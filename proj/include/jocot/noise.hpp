#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jocot/selection.hpp"

namespace jocot {

enum class NoiseKind { pairflip, symmetric };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

/// Row-stochastic label transition matrix: rows[true][noisy].
struct NoiseMatrix {
    NoiseKind kind = NoiseKind::symmetric;
    double rate = 0.0;
    int num_classes = 0;
    std::vector<std::vector<double>> rows;
};

/// Per-sample corruption record for a training split.
struct NoiseMask {
    std::vector<int> true_labels;
    std::vector<int> noisy_labels;
    std::vector<bool> flipped;

    std::size_t size() const { return true_labels.size(); }
    std::size_t num_flipped() const;
    double flipped_fraction() const;
};

/// Pairflip moves class m to (m + 1) mod M; symmetric spreads rate / (M - 1) over the others.
NoiseMatrix build_noise_matrix(NoiseKind kind, double rate, int num_classes);

/// Draws each noisy label independently from the matrix row of its true label.
NoiseMask inject_noise(std::span<const int> true_labels, const NoiseMatrix& matrix, std::uint64_t seed);

/// Fraction of truly flipped samples that appear in `judged_noisy`.
///
/// This is the recall of the noise mask; it is reported under the name
/// "noisy-label precision". Throws UndefinedMetricError if nothing was flipped.
double noisy_label_precision(const SelectionSet& judged_noisy, const NoiseMask& mask);

/// Training indices that are absent from `clean` (the complement within [0, n)).
SelectionSet complement(const SelectionSet& clean, std::size_t n);

/// CSV with columns index,true_label,noisy_label,flipped.
void write_noise_mask_csv(const NoiseMask& mask, const std::filesystem::path& path);
NoiseMask read_noise_mask_csv(const std::filesystem::path& path);

}  // namespace jocot
