#include "reshape/iiso.hpp"

#include "reshape/breakpoint_scan.hpp"
#include "reshape/errors.hpp"
#include "reshape/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <tuple>

namespace reshape {

namespace {

std::size_t width_of(const IisoProblem& p, std::size_t k) {
    return p.pivot_widths.empty() ? 1 : p.pivot_widths[k];
}

struct Tails {
    std::vector<std::vector<IsoBlock>> left;
    std::vector<std::vector<IsoBlock>> right;
};

Tails isotonize_tails(const IisoProblem& p) {
    Tails t;
    t.left.reserve(p.vectors.size());
    t.right.reserve(p.vectors.size());
    for (std::size_t k = 0; k < p.vectors.size(); ++k) {
        std::span<const double> v(p.vectors[k]);
        const std::size_t first = p.pivots[k];
        const std::size_t end = first + width_of(p, k);
        t.left.push_back(pava_blocks(v.subspan(0, first)));
        t.right.push_back(pava_blocks(v.subspan(end)));
    }
    return t;
}

// K-way merge of per-chain sorted block lists into one ascending knot list.
std::vector<Knot> merge_knots(const std::vector<std::vector<IsoBlock>>& tails) {
    using Entry = std::tuple<double, std::size_t, std::size_t>;  // value, chain, block
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
    std::size_t total = 0;
    for (std::size_t k = 0; k < tails.size(); ++k) {
        total += tails[k].size();
        if (!tails[k].empty()) heap.emplace(tails[k][0].value, k, 0);
    }
    std::vector<Knot> out;
    out.reserve(total);
    while (!heap.empty()) {
        auto [value, k, b] = heap.top();
        heap.pop();
        out.push_back({value, static_cast<double>(tails[k][b].size)});
        if (b + 1 < tails[k].size()) heap.emplace(tails[k][b + 1].value, k, b + 1);
    }
    return out;
}

double square(double x) { return x * x; }

}  // namespace

void validate(const IisoProblem& p) {
    if (p.vectors.empty()) throw InvalidInput("iiso: empty vector list");
    if (p.pivots.size() != p.vectors.size()) {
        throw InvalidInput("iiso: " + std::to_string(p.vectors.size()) + " vectors but " +
                           std::to_string(p.pivots.size()) + " pivots");
    }
    if (!p.pivot_widths.empty() && p.pivot_widths.size() != p.vectors.size()) {
        throw InvalidInput("iiso: pivot_widths length does not match vector count");
    }
    for (std::size_t k = 0; k < p.vectors.size(); ++k) {
        const auto w = width_of(p, k);
        if (w == 0 || p.pivots[k] >= p.vectors[k].size() || p.pivots[k] + w > p.vectors[k].size()) {
            throw InvalidInput("iiso: pivot out of range in vector " + std::to_string(k));
        }
        require_finite(p.vectors[k], "iiso");
    }
}

IisoSolution solve_iiso(const IisoProblem& p) {
    validate(p);
    const std::size_t K = p.vectors.size();
    const Tails tails = isotonize_tails(p);

    double base_weight = 0.0;
    double base_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto w = width_of(p, k);
        for (std::size_t j = 0; j < w; ++j) base_sum += p.vectors[k][p.pivots[k] + j];
        base_weight += static_cast<double>(w);
    }

    const auto upper = merge_knots(tails.left);
    const auto lower = merge_knots(tails.right);
    // The minimizer lies within the data range; clamp away rounding in b / a.
    double lo = p.vectors[0][0], hi = lo;
    for (const auto& v : p.vectors) {
        const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
        lo = std::min(lo, *mn);
        hi = std::max(hi, *mx);
    }
    const double c = std::clamp(minimize_clipped_quadratic(base_weight, base_sum, upper, lower), lo, hi);

    IisoSolution sol;
    sol.intersection_value = c;
    sol.fitted.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        const auto& v = p.vectors[k];
        std::vector<double> f;
        f.reserve(v.size());
        for (const auto& b : tails.left[k]) f.insert(f.end(), b.size, std::min(b.value, c));
        f.insert(f.end(), width_of(p, k), c);
        for (const auto& b : tails.right[k]) f.insert(f.end(), b.size, std::max(b.value, c));
        for (std::size_t j = 0; j < v.size(); ++j) sol.objective += square(f[j] - v[j]);
        sol.fitted.push_back(std::move(f));
    }
    return sol;
}

double evaluate_g(const IisoProblem& p, double c) {
    validate(p);
    const Tails tails = isotonize_tails(p);
    double g = 0.0;
    for (std::size_t k = 0; k < p.vectors.size(); ++k) {
        const auto& v = p.vectors[k];
        std::size_t pos = 0;
        for (const auto& b : tails.left[k]) {
            for (std::size_t j = 0; j < b.size; ++j, ++pos) g += square(v[pos] - std::min(b.value, c));
        }
        for (std::size_t j = 0; j < width_of(p, k); ++j, ++pos) g += square(c - v[pos]);
        for (const auto& b : tails.right[k]) {
            for (std::size_t j = 0; j < b.size; ++j, ++pos) g += square(v[pos] - std::max(b.value, c));
        }
    }
    return g;
}

}  // namespace reshape
