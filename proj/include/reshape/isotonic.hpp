#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace reshape {

/// A maximal run of equal fitted values in an isotonic fit.
struct IsoBlock {
    double value = 0.0;
    std::size_t size = 0;
};

/// Pool adjacent violators. Returns the blocks of the least-squares
/// non-decreasing fit, in order. Linear time.
std::vector<IsoBlock> pava_blocks(std::span<const double> values);

/// L2 projection of `values` onto the cone of non-decreasing sequences.
/// Throws InvalidInput on a non-finite entry.
std::vector<double> pava(std::span<const double> values);

/// A sequence with one position pinned to a fixed value. `pivot` is 0-based.
struct PivotedSequence {
    std::vector<double> values;
    std::size_t pivot = 0;
    double pivot_value = 0.0;
};

/// Closest non-decreasing sequence with `values[pivot] == pivot_value`:
/// PAVA on both tails, then clip the left tail with min(., c) and the right
/// tail with max(., c).
std::vector<double> pivoted_isotonic(const PivotedSequence& seq);

/// Throws InvalidInput naming `what` when any entry is NaN or infinite.
void require_finite(std::span<const double> values, const char* what);

}  // namespace reshape
