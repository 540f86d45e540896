#include "jocot/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "jocot/errors.hpp"

namespace jocot {

SelectionSet::SelectionSet(std::vector<std::size_t> indices, SelectionScope scope)
    : indices_(std::move(indices)), scope_(scope) {
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool SelectionSet::contains(std::size_t index) const {
    return std::binary_search(indices_.begin(), indices_.end(), index);
}

bool SelectionSet::is_subset_of(const SelectionSet& other) const {
    return std::includes(other.indices_.begin(), other.indices_.end(), indices_.begin(), indices_.end());
}

SelectionSet SelectionSet::with_scope(SelectionScope scope) const {
    SelectionSet copy = *this;
    copy.scope_ = scope;
    return copy;
}

double remember_rate(int epoch, int num_gradual_T, double tau) {
    if (epoch < 0) throw ArgumentError("remember_rate: epoch must be non-negative");
    if (num_gradual_T < 1) throw ArgumentError("remember_rate: T must be at least 1");
    if (!(tau >= 0.0 && tau < 1.0)) throw ArgumentError("remember_rate: tau must lie in [0, 1)");
    const double ramp = static_cast<double>(epoch) / static_cast<double>(num_gradual_T) * tau;
    return 1.0 - std::min(ramp, tau);
}

std::size_t kept_count(double keep_fraction, std::size_t n) {
    // The slack keeps products such as 0.7 * 10 = 7.000000000000001 from rounding up.
    const double target = std::ceil(keep_fraction * static_cast<double>(n) - 1e-9);
    const auto k = static_cast<std::size_t>(std::max(target, 1.0));
    return std::min(k, n);
}

SelectionSet small_loss_select(std::span<const IndexedLoss> losses, double keep_fraction) {
    if (losses.empty()) throw ArgumentError("small_loss_select: empty loss list");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw ArgumentError("small_loss_select: keep_fraction must lie in (0, 1]");
    for (const auto& l : losses)
        if (!std::isfinite(l.loss)) throw ArgumentError("small_loss_select: non-finite loss");

    std::vector<IndexedLoss> order(losses.begin(), losses.end());
    const std::size_t k = kept_count(keep_fraction, order.size());
    auto less = [](const IndexedLoss& a, const IndexedLoss& b) {
        return a.loss < b.loss || (a.loss == b.loss && a.index < b.index);
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), less);
    std::vector<std::size_t> kept;
    kept.reserve(k);
    for (std::size_t i = 0; i < k; ++i) kept.push_back(order[i].index);
    return SelectionSet(std::move(kept), SelectionScope::batch);
}

namespace {

void require_same_scope(const SelectionSet& a, const SelectionSet& b) {
    if (a.scope() != b.scope()) throw ArgumentError("consensus of selection sets with different scopes");
}

SelectionSet intersect(const SelectionSet& a, const SelectionSet& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.indices().begin(), a.indices().end(), b.indices().begin(), b.indices().end(),
                          std::back_inserter(out));
    return SelectionSet(std::move(out), a.scope());
}

}  // namespace

SelectionSet inner_consensus(const SelectionSet& a, const SelectionSet& b) {
    require_same_scope(a, b);
    return intersect(a, b);
}

SelectionSet outer_consensus(const SelectionSet& ip, const SelectionSet& iq) {
    require_same_scope(ip, iq);
    return intersect(ip, iq);
}

SelectionSet set_union(const SelectionSet& a, const SelectionSet& b) {
    std::vector<std::size_t> out;
    std::set_union(a.indices().begin(), a.indices().end(), b.indices().begin(), b.indices().end(),
                   std::back_inserter(out));
    return SelectionSet(std::move(out), a.scope());
}

void write_selection_csv(const SelectionSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    for (std::size_t i : set.indices()) out << i << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

SelectionSet read_selection_csv(const std::filesystem::path& path, SelectionScope scope) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::size_t> indices;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::size_t pos = 0;
        unsigned long long value = 0;
        try {
            value = std::stoull(line, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != line.size() || line[0] == '-')
            throw SchemaError(path.string() + ":" + std::to_string(line_no) + ": expected a non-negative index");
        indices.push_back(static_cast<std::size_t>(value));
    }
    return SelectionSet(std::move(indices), scope);
}

}  // namespace jocot
