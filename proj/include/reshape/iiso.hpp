#pragma once

#include <cstddef>
#include <vector>

namespace reshape {

/// K non-decreasing chains that must agree on one common value at their
/// pivot positions.
///
/// `pivots[k]` is the 0-based pivot position in `vectors[k]`. When
/// `pivot_widths` is non-empty, `pivot_widths[k]` consecutive positions
/// starting at the pivot are all pinned to the common value (used for tied
/// coordinates in black-box grids); an empty list means width 1 everywhere.
struct IisoProblem {
    std::vector<std::vector<double>> vectors;
    std::vector<std::size_t> pivots;
    std::vector<std::size_t> pivot_widths;
};

struct IisoSolution {
    std::vector<std::vector<double>> fitted;
    double intersection_value = 0.0;
    double objective = 0.0;  ///< total squared distance moved
};

/// Exact global minimizer of the intersecting isotonic problem in
/// O(n log K) for n total entries.
IisoSolution solve_iiso(const IisoProblem& problem);

/// Total squared error of the best feasible fit whose common pivot value is
/// `c`. Convex piecewise quadratic in `c`.
double evaluate_g(const IisoProblem& problem, double c);

/// Throws InvalidInput unless the problem is well formed.
void validate(const IisoProblem& problem);

}  // namespace reshape
