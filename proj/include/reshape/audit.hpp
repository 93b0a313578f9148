#pragma once

#include "reshape/blackbox.hpp"
#include "reshape/data.hpp"
#include "reshape/forest.hpp"
#include "reshape/shape.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace reshape {

struct AuditConfig {
    ShapeSpec spec;
    std::size_t probes = 1000;   ///< random base points
    std::size_t grid_size = 32;  ///< evenly spaced sweep positions per variable
    std::uint64_t seed = 0;
    /// [lo, hi] per feature; base points are uniform on this box.
    std::vector<std::pair<double, double>> feature_ranges;
    /// Extra sweep positions per constrained feature (typically split
    /// thresholds). Each t contributes t - off and t + off with
    /// off = max(|t|, 1) * 2^-40, when inside the range.
    std::map<std::size_t, std::vector<double>> breakpoints;
    double tolerance = 1e-12;

    void validate() const;
};

struct AuditWitness {
    std::vector<double> point;  ///< base point of the sweep
    std::size_t variable = 0;
    std::size_t lower_position = 0;  ///< sweep index before the drop
    std::size_t upper_position = 0;
    double drop = 0.0;               ///< size of the violation
};

struct AuditResult {
    std::size_t violations = 0;
    std::size_t total_checks = 0;
    std::size_t sweeps = 0;
    double worst_violation = 0.0;
    std::vector<AuditWitness> witnesses;  ///< at most 10, in probe order

    std::string to_json() const;
};

/// Sweeps each constrained coordinate over an ascending grid at random base
/// points (others held fixed) and counts adjacent pairs that move against
/// the declared direction by more than the tolerance. Deterministic given
/// the seed, for any `threads`. Throws InvalidModel on a non-finite
/// prediction.
AuditResult audit_monotonicity(const Predictor& predict, const AuditConfig& config, unsigned threads = 1);

/// Checks every fiber of a (reshaped) black-box grid in coordinate order.
AuditResult audit_grid(const BlackBoxGrid& grid, const ShapeSpec& spec, double tolerance = 1e-12);

/// All split thresholds on each constrained feature, sorted and unique.
std::map<std::size_t, std::vector<double>> forest_breakpoints(const ForestModel& model, const ShapeSpec& spec);

/// Per-column [min, max]; a constant column is widened to [x - 1, x + 1].
std::vector<std::pair<double, double>> data_ranges(const DataMatrix& data);

/// Sorted sweep positions used for one variable.
std::vector<double> sweep_positions(double lo, double hi, std::size_t grid_size, const std::vector<double>& breakpoints);

}  // namespace reshape
