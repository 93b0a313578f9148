#pragma once

#include "reshape/forest.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace reshape {

/// Static interval tree over half-open intervals (lower, upper], each
/// tagged with a caller id. Empty intervals are dropped on construction.
class IntervalIndex {
public:
    IntervalIndex() = default;
    explicit IntervalIndex(std::vector<std::pair<Interval, std::size_t>> items);

    /// Ids of every stored interval that shares a point with `query`, in
    /// ascending id order.
    std::vector<std::size_t> overlapping(const Interval& query) const;

    std::size_t size() const { return items_.size(); }

private:
    void visit(std::size_t lo, std::size_t hi, const Interval& q, std::vector<std::size_t>& out) const;

    std::vector<std::pair<Interval, std::size_t>> items_;  // sorted by lower bound
    std::vector<double> max_upper_;                        // per implicit subtree root
};

/// Pairs (l, r) of leaf positions, l from `left_cells` and r from
/// `right_cells`, whose cells intersect once the `drop_feature` interval is
/// ignored. Empty cells pair with nothing. Ordered by l, then r, in the
/// input order.
std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(const std::vector<LeafCell>& left_cells,
                                                                   const std::vector<LeafCell>& right_cells,
                                                                   std::size_t drop_feature);

}  // namespace reshape
