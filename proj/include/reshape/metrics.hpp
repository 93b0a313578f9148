#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace reshape {

/// Mean squared residual.
double mse(std::span<const double> pred, std::span<const double> truth);

/// Mean of |pred - truth| / |truth|, as a fraction. Throws InvalidInput naming
/// the index of a zero truth value.
double mape(std::span<const double> pred, std::span<const double> truth);

/// Fraction of labels (0/1) matched by `prob >= threshold`.
double accuracy(std::span<const double> prob, std::span<const double> labels, double threshold = 0.5);

/// k >= 2 disjoint folds partitioning [0, n), sizes differing by at most one.
/// Deterministic given the seed.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed);

/// Fold-level aggregate. Both spread conventions are kept since reports
/// differ on which one they call the standard error.
struct FoldSummary {
    double mean = 0.0;
    double stddev = 0.0;          ///< sample standard deviation across folds
    double standard_error = 0.0;  ///< stddev / sqrt(k)
};

FoldSummary summarize_folds(std::span<const double> values);

}  // namespace reshape
