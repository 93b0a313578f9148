#include "reshape/breakpoint_scan.hpp"

#include "reshape/errors.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

namespace reshape {

double minimize_clipped_quadratic(double base_weight, double base_sum,
                                  std::span<const Knot> upper, std::span<const Knot> lower) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t nu = upper.size();
    const std::size_t nl = lower.size();
    if (base_weight <= 0.0 && nu == 0 && nl == 0) {
        throw InvalidInput("minimize_clipped_quadratic: objective has no terms");
    }

    // Active upper knots form a suffix (value > c), active lower knots a
    // prefix (value < c). Suffix and prefix sums avoid cancellation that a
    // running add/subtract would accumulate.
    std::vector<double> upper_w(nu + 1, 0.0), upper_s(nu + 1, 0.0);
    for (std::size_t i = nu; i-- > 0;) {
        upper_w[i] = upper_w[i + 1] + upper[i].weight;
        upper_s[i] = upper_s[i + 1] + upper[i].weight * upper[i].value;
    }
    std::vector<double> lower_w(nl + 1, 0.0), lower_s(nl + 1, 0.0);
    for (std::size_t j = 0; j < nl; ++j) {
        lower_w[j + 1] = lower_w[j] + lower[j].weight;
        lower_s[j + 1] = lower_s[j] + lower[j].weight * lower[j].value;
    }

    std::size_t i = 0;  // upper knots below i have been crossed
    std::size_t j = 0;  // lower knots below j have been crossed
    double lo = -inf;
#ifndef NDEBUG
    double prev_slope = -inf;
#endif
    while (true) {
        const double next_u = i < nu ? upper[i].value : inf;
        const double next_l = j < nl ? lower[j].value : inf;
        const double next = std::min(next_u, next_l);

        // On (lo, next) the half-derivative is a*c - b.
        const double a = base_weight + upper_w[i] + lower_w[j];
        const double b = base_sum + upper_s[i] + lower_s[j];
        if (a > 0.0) {
            const double cand = b / a;
            if (cand <= next) return std::max(cand, lo);
        } else {
            if (lo == -inf) return next;
            if (next == inf) return lo;
            return lo + 0.5 * (next - lo);
        }
#ifndef NDEBUG
        const double slope = a * next - b;
        assert(slope >= prev_slope - 1e-9 * (1.0 + std::abs(slope)));
        prev_slope = slope;
#endif
        if (next_u <= next_l) {
            ++i;
        } else {
            ++j;
        }
        lo = next;
    }
}

}  // namespace reshape
