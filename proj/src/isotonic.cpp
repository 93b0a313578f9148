#include "reshape/isotonic.hpp"

#include "reshape/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace reshape {

namespace {

struct Pool {
    double sum;
    double lo;
    double hi;
    std::size_t size;

    // Block mean, clamped to the members' range so that rounding never pushes
    // a fitted value outside the data it averages.
    double mean() const { return std::clamp(sum / static_cast<double>(size), lo, hi); }
};

}  // namespace

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InvalidInput(std::string(what) + ": non-finite entry at index " + std::to_string(i));
        }
    }
}

std::vector<IsoBlock> pava_blocks(std::span<const double> values) {
    require_finite(values, "pava");
    std::vector<Pool> stack;
    stack.reserve(values.size());
    for (double v : values) {
        stack.push_back({v, v, v, 1});
        while (stack.size() > 1) {
            auto& prev = stack[stack.size() - 2];
            const auto& cur = stack.back();
            if (!(prev.mean() > cur.mean())) break;
            prev.sum += cur.sum;
            prev.lo = std::min(prev.lo, cur.lo);
            prev.hi = std::max(prev.hi, cur.hi);
            prev.size += cur.size;
            stack.pop_back();
        }
    }
    std::vector<IsoBlock> blocks;
    blocks.reserve(stack.size());
    for (const auto& p : stack) blocks.push_back({p.mean(), p.size});
    return blocks;
}

std::vector<double> pava(std::span<const double> values) {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& b : pava_blocks(values)) out.insert(out.end(), b.size, b.value);
    return out;
}

std::vector<double> pivoted_isotonic(const PivotedSequence& seq) {
    const auto& v = seq.values;
    if (seq.pivot >= v.size()) {
        throw InvalidInput("pivoted_isotonic: pivot " + std::to_string(seq.pivot) +
                           " out of range for length " + std::to_string(v.size()));
    }
    require_finite(v, "pivoted_isotonic");
    if (!std::isfinite(seq.pivot_value)) throw InvalidInput("pivoted_isotonic: non-finite pivot value");
    const double c = seq.pivot_value;
    std::span<const double> all(v);

    std::vector<double> out = pava(all.subspan(0, seq.pivot));
    for (double& x : out) x = std::min(x, c);
    out.push_back(c);
    for (double x : pava(all.subspan(seq.pivot + 1))) out.push_back(std::max(x, c));
    return out;
}

}  // namespace reshape
