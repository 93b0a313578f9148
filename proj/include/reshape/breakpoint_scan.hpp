#pragma once

#include <span>

namespace reshape {

/// A breakpoint of a clipped quadratic term, carrying `weight` unit residuals
/// whose mean is `value`.
struct Knot {
    double value = 0.0;
    double weight = 1.0;
};

/// Minimizes over c the convex piecewise quadratic
///
///     base_weight * (c - base_mean)^2
///       + sum_{u in upper} u.weight * (u.value - min(u.value, c))^2
///       + sum_{l in lower} l.weight * (l.value - max(l.value, c))^2
///
/// (up to an additive constant), given `base_sum = base_weight * base_mean`.
/// Both knot lists must be sorted ascending. The derivative is scanned from
/// the smallest knot upward until it changes sign; the minimizer inside that
/// segment is closed form. On a segment where the objective is flat the
/// segment midpoint is returned.
double minimize_clipped_quadratic(double base_weight, double base_sum,
                                  std::span<const Knot> upper, std::span<const Knot> lower);

}  // namespace reshape
