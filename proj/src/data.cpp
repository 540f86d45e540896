#include "jocot/data.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "jocot/errors.hpp"
#include "jocot/rng.hpp"

namespace jocot {

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.num_classes = num_classes;
    out.class_names = class_names;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
        out.labels.push_back(labels[rows[r]]);
    }
    return out;
}

LabeledDataset LabeledDataset::with_labels(std::vector<int> new_labels) const {
    if (new_labels.size() != labels.size()) throw ConfigError("replacement labels differ in count");
    LabeledDataset out = *this;
    out.labels = std::move(new_labels);
    return out;
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (int y : labels) ++counts[static_cast<std::size_t>(y)];
    return counts;
}

void LabeledDataset::validate() const {
    if (static_cast<std::size_t>(features.rows()) != labels.size())
        throw ConfigError("feature rows and labels differ in count");
    for (int y : labels)
        if (y < 0 || y >= num_classes) throw ConfigError("label " + std::to_string(y) + " outside class range");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& value) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    return ec == std::errc() && ptr == end;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

LabeledDataset load_csv(const std::filesystem::path& path, int expected_dim) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
    const auto header = split_fields(trim(line));
    const auto expected_cols = static_cast<std::size_t>(expected_dim) + 1;
    if (header.size() != expected_cols || trim(header.back()) != "label")
        throw SchemaError(path.string() + ": expected " + std::to_string(expected_dim) +
                          " feature columns plus 'label', found " +
                          std::to_string(header.empty() ? 0 : header.size() - 1) + " feature columns");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != expected_cols)
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(expected_cols) + " columns, found " + std::to_string(fields.size()));
        for (std::size_t c = 0; c + 1 < fields.size(); ++c) {
            double v;
            if (!parse_number(trim(fields[c]), v) || !std::isfinite(v))
                throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad feature value '" +
                                  fields[c] + "' in column " + std::to_string(c));
            values.push_back(v);
        }
        int y;
        if (!parse_number(trim(fields.back()), y) || y < 0)
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + fields.back() + "'");
        labels.push_back(y);
    }

    LabeledDataset ds;
    ds.features.resize(static_cast<Eigen::Index>(labels.size()), expected_dim);
    std::copy(values.begin(), values.end(), ds.features.data());
    if (!labels.empty()) {
        const bool one_based = *std::min_element(labels.begin(), labels.end()) >= 1;
        if (one_based)
            for (int& y : labels) --y;
        ds.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
    }
    ds.labels = std::move(labels);
    return ds;
}

void write_csv(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (int c = 0; c < dataset.dim(); ++c) out << 'f' << c << ',';
    out << "label\n";
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        for (int c = 0; c < dataset.dim(); ++c)
            out << format_double(dataset.features(static_cast<Eigen::Index>(r), c)) << ',';
        out << dataset.labels[r] << '\n';
    }
    if (!out) throw IoError("failed writing " + path.string());
}

LabeledDataset rebalance(const LabeledDataset& dataset, std::size_t per_class, std::uint64_t seed) {
    dataset.validate();
    if (per_class == 0) throw ArgumentError("rebalance: per_class must be positive");
    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
    for (std::size_t i = 0; i < dataset.size(); ++i) by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

    Rng rng(seed);
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& members = by_class[c];
        if (members.empty()) {
            const std::string name =
                c < dataset.class_names.size() ? " (" + dataset.class_names[c] + ")" : std::string();
            throw ArgumentError("rebalance: class " + std::to_string(c) + name + " has no samples");
        }
        if (members.size() < per_class) {
            std::cerr << "warning: class " << c << " has only " << members.size() << " samples (< " << per_class
                      << "); keeping all\n";
            kept.insert(kept.end(), members.begin(), members.end());
            continue;
        }
        // Partial Fisher-Yates: the first per_class slots are a uniform sample.
        for (std::size_t i = 0; i < per_class; ++i) {
            const auto j = i + static_cast<std::size_t>(rng.index(members.size() - i));
            std::swap(members[i], members[j]);
        }
        kept.insert(kept.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(per_class));
    }
    std::sort(kept.begin(), kept.end());
    return dataset.subset(kept);
}

DatasetSplits split(const LabeledDataset& dataset, const SplitSpec& spec) {
    dataset.validate();
    const double fracs[3] = {spec.train_frac, spec.test_frac, spec.val_frac};
    for (double f : fracs)
        if (!(f > 0.0)) throw ArgumentError("split fractions must be positive");
    if (std::abs(fracs[0] + fracs[1] + fracs[2] - 1.0) > 1e-9) throw ArgumentError("split fractions must sum to 1");
    const std::size_t n = dataset.size();
    if (n < 3) throw ArgumentError("split: dataset needs at least 3 samples");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
    for (std::size_t i = 0; i < n; ++i) by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
    const std::size_t classes = by_class.size();

    // Global targets by largest remainder.
    auto largest_remainder = [](double total, const double* f, std::size_t* out) {
        double rema[3];
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double q = total * f[s];
            out[s] = static_cast<std::size_t>(std::floor(q));
            rema[s] = q - std::floor(q);
            assigned += out[s];
        }
        auto left = static_cast<std::size_t>(std::llround(total)) - assigned;
        int order[3] = {0, 1, 2};
        std::stable_sort(order, order + 3, [&](int a, int b) { return rema[a] > rema[b]; });
        for (std::size_t k = 0; k < left; ++k) ++out[order[k % 3]];
    };
    std::size_t target[3];
    largest_remainder(static_cast<double>(n), fracs, target);

    // Per-class floors, then hand out the remaining units by largest fractional
    // remainder subject to both the class total and the global split totals.
    std::vector<std::array<std::size_t, 3>> counts(classes);
    struct Cell {
        double remainder;
        std::size_t cls;
        int s;
    };
    std::vector<Cell> cells;
    std::vector<std::size_t> class_left(classes);
    std::size_t column_left[3] = {target[0], target[1], target[2]};
    for (std::size_t c = 0; c < classes; ++c) {
        std::size_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double q = static_cast<double>(by_class[c].size()) * fracs[s];
            counts[c][s] = static_cast<std::size_t>(std::floor(q + 1e-9));
            assigned += counts[c][s];
            column_left[s] -= std::min(column_left[s], counts[c][s]);
            cells.push_back({q - static_cast<double>(counts[c][s]), c, s});
        }
        class_left[c] = by_class[c].size() - assigned;
    }
    std::stable_sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) { return a.remainder > b.remainder; });
    for (const Cell& cell : cells) {
        if (class_left[cell.cls] > 0 && column_left[cell.s] > 0) {
            ++counts[cell.cls][cell.s];
            --class_left[cell.cls];
            --column_left[cell.s];
        }
    }
    for (std::size_t c = 0; c < classes; ++c)
        for (int s = 0; s < 3 && class_left[c] > 0; ++s)
            while (class_left[c] > 0 && column_left[s] > 0) {
                ++counts[c][s];
                --class_left[c];
                --column_left[s];
            }

    Rng rng(spec.seed);
    std::vector<std::size_t> parts[3];
    for (std::size_t c = 0; c < classes; ++c) {
        auto& members = by_class[c];
        rng.shuffle(std::span<std::size_t>(members));
        std::size_t offset = 0;
        for (int s = 0; s < 3; ++s) {
            parts[s].insert(parts[s].end(), members.begin() + static_cast<std::ptrdiff_t>(offset),
                            members.begin() + static_cast<std::ptrdiff_t>(offset + counts[c][s]));
            offset += counts[c][s];
        }
    }
    for (auto& p : parts) std::sort(p.begin(), p.end());
    return {dataset.subset(parts[0]), dataset.subset(parts[1]), dataset.subset(parts[2])};
}

LabeledDataset synthesize(int num_classes, std::size_t per_class, int dim, double separation, std::uint64_t seed) {
    if (num_classes < 2) throw ArgumentError("synthesize: need at least 2 classes");
    if (dim < 2) throw ArgumentError("synthesize: dim must be at least 2");
    if (per_class == 0) throw ArgumentError("synthesize: per_class must be positive");
    if (!(separation > 0.0)) throw ArgumentError("synthesize: separation must be positive");

    Rng rng(seed);
    RowMatrix centers(num_classes, dim);
    for (int c = 0; c < num_classes; ++c) {
        for (int d = 0; d < dim; ++d) centers(c, d) = rng.normal();
        centers.row(c) *= separation / centers.row(c).norm();
    }
    LabeledDataset ds;
    ds.num_classes = num_classes;
    const auto total = static_cast<Eigen::Index>(per_class) * num_classes;
    ds.features.resize(total, dim);
    ds.labels.reserve(static_cast<std::size_t>(total));
    Eigen::Index row = 0;
    for (int c = 0; c < num_classes; ++c) {
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            for (int d = 0; d < dim; ++d) ds.features(row, d) = centers(c, d) + rng.normal();
            ds.labels.push_back(c);
        }
    }
    return ds;
}

Standardizer Standardizer::fit(const LabeledDataset& dataset) {
    if (dataset.size() == 0) throw ArgumentError("cannot fit a standardizer on an empty dataset");
    Standardizer s;
    s.mean = dataset.features.colwise().mean();
    RowMatrix centered = dataset.features.rowwise() - s.mean;
    s.scale = (centered.array().square().colwise().sum() / static_cast<double>(dataset.size())).sqrt().matrix();
    for (Eigen::Index c = 0; c < s.scale.size(); ++c)
        if (!(s.scale(c) > 0.0)) s.scale(c) = 1.0;
    return s;
}

LabeledDataset Standardizer::apply(const LabeledDataset& dataset) const {
    LabeledDataset out = dataset;
    out.features = ((dataset.features.rowwise() - mean).array().rowwise() / scale.array()).matrix();
    return out;
}

}  // namespace jocot
