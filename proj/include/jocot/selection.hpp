#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

namespace jocot {

enum class SelectionScope { batch, epoch, final };

/// Sorted, duplicate-free set of dataset-global sample indices.
class SelectionSet {
public:
    SelectionSet() = default;
    /// Sorts and deduplicates `indices`.
    explicit SelectionSet(std::vector<std::size_t> indices, SelectionScope scope = SelectionScope::batch);

    const std::vector<std::size_t>& indices() const { return indices_; }
    SelectionScope scope() const { return scope_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    bool contains(std::size_t index) const;
    bool is_subset_of(const SelectionSet& other) const;

    /// Same indices tagged with a different scope.
    SelectionSet with_scope(SelectionScope scope) const;

    bool operator==(const SelectionSet& other) const = default;

private:
    std::vector<std::size_t> indices_;
    SelectionScope scope_ = SelectionScope::batch;
};

/// Kept fraction for an epoch: 1 - min(epoch / T * tau, tau).
double remember_rate(int epoch, int num_gradual_T, double tau);

/// max(1, ceil(keep_fraction * n)).
std::size_t kept_count(double keep_fraction, std::size_t n);

struct IndexedLoss {
    std::size_t index;
    double loss;
};

/// The kept_count smallest losses; ties go to the smaller global index.
SelectionSet small_loss_select(std::span<const IndexedLoss> losses, double keep_fraction);

/// Intersection of the two peer selections of one teacher module.
SelectionSet inner_consensus(const SelectionSet& a, const SelectionSet& b);

/// Intersection of the two modules' inner consensus sets.
SelectionSet outer_consensus(const SelectionSet& ip, const SelectionSet& iq);

SelectionSet set_union(const SelectionSet& a, const SelectionSet& b);

/// One index per line.
void write_selection_csv(const SelectionSet& set, const std::filesystem::path& path);
SelectionSet read_selection_csv(const std::filesystem::path& path, SelectionScope scope = SelectionScope::final);

}  // namespace jocot
