#include "reshape/interval_index.hpp"

#include <algorithm>
#include <cmath>

namespace reshape {

IntervalIndex::IntervalIndex(std::vector<std::pair<Interval, std::size_t>> items) {
    for (auto& it : items) {
        if (!it.first.empty()) items_.push_back(it);
    }
    std::sort(items_.begin(), items_.end(), [](const auto& a, const auto& b) {
        if (a.first.lower != b.first.lower) return a.first.lower < b.first.lower;
        return a.second < b.second;
    });
    max_upper_.assign(items_.size(), -INFINITY);
    // Post-order fill of the implicit tree rooted at mid = (lo + hi) / 2.
    auto build = [this](auto&& self, std::size_t lo, std::size_t hi) -> double {
        if (lo >= hi) return -INFINITY;
        const std::size_t mid = lo + (hi - lo) / 2;
        const double m = std::max({items_[mid].first.upper, self(self, lo, mid), self(self, mid + 1, hi)});
        max_upper_[mid] = m;
        return m;
    };
    build(build, 0, items_.size());
}

void IntervalIndex::visit(std::size_t lo, std::size_t hi, const Interval& q, std::vector<std::size_t>& out) const {
    if (lo >= hi) return;
    const std::size_t mid = lo + (hi - lo) / 2;
    if (max_upper_[mid] <= q.lower) return;
    visit(lo, mid, q, out);
    const auto& [iv, id] = items_[mid];
    if (overlaps(iv, q)) out.push_back(id);
    if (iv.lower < q.upper) visit(mid + 1, hi, q, out);
}

std::vector<std::size_t> IntervalIndex::overlapping(const Interval& query) const {
    std::vector<std::size_t> out;
    if (query.empty()) return out;
    visit(0, items_.size(), query, out);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::pair<std::size_t, std::size_t>> overlapping_pairs(const std::vector<LeafCell>& left_cells,
                                                                   const std::vector<LeafCell>& right_cells,
                                                                   std::size_t drop_feature) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (left_cells.empty() || right_cells.empty()) return pairs;
    const std::size_t d = left_cells.front().intervals.size();

    auto compatible = [&](const LeafCell& a, const LeafCell& b, std::size_t skip) {
        for (std::size_t j = 0; j < d; ++j) {
            if (j == drop_feature || j == skip) continue;
            if (!overlaps(a.intervals[j], b.intervals[j])) return false;
        }
        return true;
    };

    // Index the feature whose right-cell intervals carry the most finite
    // bounds; it prunes the most candidates.
    std::size_t key = d;
    std::size_t best = 0;
    for (std::size_t j = 0; j < d; ++j) {
        if (j == drop_feature) continue;
        std::size_t bounded = 0;
        for (const auto& c : right_cells) {
            bounded += std::isfinite(c.intervals[j].lower) + std::isfinite(c.intervals[j].upper);
        }
        if (key == d || bounded > best) {
            key = j;
            best = bounded;
        }
    }

    if (key == d) {
        for (const auto& l : left_cells) {
            if (l.empty()) continue;
            for (const auto& r : right_cells) {
                if (!r.empty()) pairs.emplace_back(l.leaf, r.leaf);
            }
        }
        return pairs;
    }

    std::vector<std::pair<Interval, std::size_t>> items;
    items.reserve(right_cells.size());
    for (std::size_t idx = 0; idx < right_cells.size(); ++idx) {
        if (!right_cells[idx].empty()) items.emplace_back(right_cells[idx].intervals[key], idx);
    }
    const IntervalIndex index(std::move(items));
    for (const auto& l : left_cells) {
        if (l.empty()) continue;
        for (std::size_t idx : index.overlapping(l.intervals[key])) {
            if (compatible(l, right_cells[idx], key)) pairs.emplace_back(l.leaf, right_cells[idx].leaf);
        }
    }
    return pairs;
}

}  // namespace reshape
