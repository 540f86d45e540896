#include "jocot/noise.hpp"

#include <fstream>
#include <sstream>

#include "jocot/errors.hpp"
#include "jocot/rng.hpp"

namespace jocot {

std::string to_string(NoiseKind kind) { return kind == NoiseKind::pairflip ? "pairflip" : "symmetric"; }

NoiseKind parse_noise_kind(const std::string& text) {
    if (text == "pairflip") return NoiseKind::pairflip;
    if (text == "symmetric") return NoiseKind::symmetric;
    throw ArgumentError("unknown noise kind '" + text + "' (expected pairflip or symmetric)");
}

std::size_t NoiseMask::num_flipped() const {
    std::size_t n = 0;
    for (bool f : flipped) n += f ? 1 : 0;
    return n;
}

double NoiseMask::flipped_fraction() const {
    return size() == 0 ? 0.0 : static_cast<double>(num_flipped()) / static_cast<double>(size());
}

NoiseMatrix build_noise_matrix(NoiseKind kind, double rate, int num_classes) {
    if (!(rate >= 0.0 && rate < 1.0)) throw ArgumentError("noise rate must lie in [0, 1)");
    if (num_classes < 2) throw ArgumentError("noise matrix needs at least 2 classes");
    NoiseMatrix w{kind, rate, num_classes, {}};
    const auto m = static_cast<std::size_t>(num_classes);
    w.rows.assign(m, std::vector<double>(m, 0.0));
    const double off = rate / static_cast<double>(num_classes - 1);
    for (std::size_t i = 0; i < m; ++i) {
        if (kind == NoiseKind::pairflip) {
            w.rows[i][(i + 1) % m] = rate;
        } else {
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) w.rows[i][j] = off;
        }
        w.rows[i][i] = 1.0 - rate;
    }
    return w;
}

NoiseMask inject_noise(std::span<const int> true_labels, const NoiseMatrix& matrix, std::uint64_t seed) {
    Rng rng(seed);
    NoiseMask mask;
    mask.true_labels.assign(true_labels.begin(), true_labels.end());
    mask.noisy_labels.resize(true_labels.size());
    mask.flipped.resize(true_labels.size());
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int y = true_labels[i];
        if (y < 0 || y >= matrix.num_classes) throw ArgumentError("label " + std::to_string(y) + " out of range");
        const auto& row = matrix.rows[static_cast<std::size_t>(y)];
        // Inverse-CDF draw; the last class absorbs rounding in the cumulative sum.
        const double u = rng.uniform();
        double cumulative = 0.0;
        int drawn = matrix.num_classes - 1;
        for (std::size_t j = 0; j < row.size(); ++j) {
            cumulative += row[j];
            if (u < cumulative) {
                drawn = static_cast<int>(j);
                break;
            }
        }
        // Guard against the tail landing on a zero-probability class.
        while (row[static_cast<std::size_t>(drawn)] == 0.0) --drawn;
        mask.noisy_labels[i] = drawn;
        mask.flipped[i] = drawn != y;
    }
    return mask;
}

double noisy_label_precision(const SelectionSet& judged_noisy, const NoiseMask& mask) {
    const std::size_t total = mask.num_flipped();
    if (total == 0) throw UndefinedMetricError("noisy-label precision is undefined: no flipped samples");
    std::size_t found = 0;
    for (std::size_t i : judged_noisy.indices()) {
        if (i >= mask.size()) throw ArgumentError("judged index " + std::to_string(i) + " outside the mask");
        found += mask.flipped[i] ? 1 : 0;
    }
    return static_cast<double>(found) / static_cast<double>(total);
}

SelectionSet complement(const SelectionSet& clean, std::size_t n) {
    std::vector<std::size_t> out;
    out.reserve(n - std::min(n, clean.size()));
    auto it = clean.indices().begin();
    const auto end = clean.indices().end();
    for (std::size_t i = 0; i < n; ++i) {
        while (it != end && *it < i) ++it;
        if (it == end || *it != i) out.push_back(i);
    }
    return SelectionSet(std::move(out), clean.scope());
}

void write_noise_mask_csv(const NoiseMask& mask, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "index,true_label,noisy_label,flipped\n";
    for (std::size_t i = 0; i < mask.size(); ++i)
        out << i << ',' << mask.true_labels[i] << ',' << mask.noisy_labels[i] << ',' << (mask.flipped[i] ? 1 : 0)
            << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

NoiseMask read_noise_mask_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "index,true_label,noisy_label,flipped")
        throw SchemaError(path.string() + ": missing noise mask header");
    NoiseMask mask;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t index;
        int t, n, f;
        char c1, c2, c3;
        if (!(row >> index >> c1 >> t >> c2 >> n >> c3 >> f) || c1 != ',' || c2 != ',' || c3 != ',' ||
            index != mask.size() || (f != 0 && f != 1) || (f == 1) != (t != n))
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": malformed noise mask row");
        mask.true_labels.push_back(t);
        mask.noisy_labels.push_back(n);
        mask.flipped.push_back(f == 1);
    }
    return mask;
}

}  // namespace jocot
