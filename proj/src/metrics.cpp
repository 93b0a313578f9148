#include "reshape/metrics.hpp"

#include "reshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace reshape {

namespace {

void check_lengths(std::span<const double> a, std::span<const double> b, const char* what) {
    if (a.size() != b.size()) {
        throw InvalidInput(std::string(what) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                           std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw InvalidInput(std::string(what) + ": empty input");
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "mse");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return sum / static_cast<double>(pred.size());
}

double mape(std::span<const double> pred, std::span<const double> truth) {
    check_lengths(pred, truth, "mape");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (truth[i] == 0.0) throw InvalidInput("mape: truth value is zero at index " + std::to_string(i));
        sum += std::abs(pred[i] - truth[i]) / std::abs(truth[i]);
    }
    return sum / static_cast<double>(pred.size());
}

double accuracy(std::span<const double> prob, std::span<const double> labels, double threshold) {
    check_lengths(prob, labels, "accuracy");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < prob.size(); ++i) {
        const double predicted = prob[i] >= threshold ? 1.0 : 0.0;
        correct += predicted == labels[i];
    }
    return static_cast<double>(correct) / static_cast<double>(prob.size());
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) {
        throw InvalidInput("kfold_indices: need 2 <= k <= n, got k=" + std::to_string(k) + ", n=" + std::to_string(n));
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Fisher-Yates with explicit draws; std::shuffle's draw pattern is
    // implementation-defined.
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(perm[i - 1], perm[j]);
    }
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < k; ++f) {
        const std::size_t size = n / k + (f < n % k ? 1 : 0);
        folds[f].assign(perm.begin() + pos, perm.begin() + pos + size);
        std::sort(folds[f].begin(), folds[f].end());
        pos += size;
    }
    return folds;
}

FoldSummary summarize_folds(std::span<const double> values) {
    if (values.empty()) throw InvalidInput("summarize_folds: no folds");
    FoldSummary s;
    const double k = static_cast<double>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / k;
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / (k - 1.0));
        s.standard_error = s.stddev / std::sqrt(k);
    }
    return s;
}

}  // namespace reshape
