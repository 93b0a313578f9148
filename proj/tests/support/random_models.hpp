#pragma once

// Random trees and a small CART random-forest trainer for tests. Training is
// not part of the library; acceptance checks need a pre-trained rule.

#include "reshape/data.hpp"
#include "reshape/forest.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace reshape::testing {

struct RandomTreeOptions {
    std::size_t n_features = 5;
    std::size_t max_depth = 6;
    std::size_t max_leaves = 64;
    double split_probability = 0.85;
    double degenerate_probability = 0.02;  ///< threshold drawn outside the current cell
    bool probability_leaves = false;
};

namespace detail {

struct Builder {
    std::mt19937_64& rng;
    const RandomTreeOptions& opt;
    std::vector<TreeNode> nodes;
    std::size_t leaves = 1;

    std::size_t grow(std::vector<Interval>& box, std::size_t depth) {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        const std::size_t pos = nodes.size();
        nodes.emplace_back();
        const bool split = depth < opt.max_depth && leaves < opt.max_leaves && u01(rng) < opt.split_probability;
        if (!split) {
            auto& n = nodes[pos];
            n.leaf = true;
            if (opt.probability_leaves) {
                n.value = u01(rng);
            } else {
                std::normal_distribution<double> g(0.0, 1.0);
                n.value = g(rng);
            }
            return pos;
        }
        ++leaves;
        std::uniform_int_distribution<std::size_t> pick(0, opt.n_features - 1);
        const std::size_t f = pick(rng);
        const double lo = std::max(0.0, box[f].lower);
        const double hi = std::min(1.0, box[f].upper);
        double t;
        if (u01(rng) < opt.degenerate_probability || !(lo < hi)) {
            t = u01(rng);
        } else {
            // thresholds on a coarse lattice so that ties across subtrees happen
            t = lo + (hi - lo) * u01(rng);
            t = std::round(t * 64.0) / 64.0;
        }
        const Interval saved = box[f];
        box[f].upper = std::min(saved.upper, t);
        const std::size_t l = grow(box, depth + 1);
        box[f] = saved;
        box[f].lower = std::max(saved.lower, t);
        const std::size_t r = grow(box, depth + 1);
        box[f] = saved;
        auto& n = nodes[pos];
        n.leaf = false;
        n.feature = f;
        n.threshold = t;
        n.left = l;
        n.right = r;
        return pos;
    }
};

}  // namespace detail

inline Tree random_tree(std::mt19937_64& rng, const RandomTreeOptions& opt = {}) {
    detail::Builder b{rng, opt, {}, 1};
    std::vector<Interval> box(opt.n_features);
    b.grow(box, 0);
    // scatter node ids so that file ids and array positions differ
    std::vector<std::int64_t> ids(b.nodes.size());
    std::iota(ids.begin(), ids.end(), std::int64_t{100});
    std::shuffle(ids.begin(), ids.end(), rng);
    for (std::size_t p = 0; p < b.nodes.size(); ++p) b.nodes[p].id = ids[p];
    return Tree(std::move(b.nodes), 0);
}

inline ForestModel random_forest(std::mt19937_64& rng, std::size_t n_trees, const RandomTreeOptions& opt = {}) {
    ForestModel m;
    m.n_features = opt.n_features;
    m.task = opt.probability_leaves ? Task::Probability : Task::Regression;
    for (std::size_t t = 0; t < n_trees; ++t) m.trees.push_back(random_tree(rng, opt));
    return m;
}

struct TrainOptions {
    std::size_t n_trees = 50;
    std::size_t max_depth = 10;
    std::size_t min_leaf = 5;
    std::size_t mtry = 2;
    std::uint64_t seed = 1;
};

namespace detail {

struct Cart {
    const DataMatrix& x;
    const std::vector<double>& y;
    const TrainOptions& opt;
    std::mt19937_64& rng;
    std::vector<TreeNode> nodes;

    std::size_t grow(std::vector<std::size_t>& rows, std::size_t depth) {
        const std::size_t pos = nodes.size();
        nodes.emplace_back();
        nodes[pos].id = static_cast<std::int64_t>(pos);
        double sum = 0.0;
        for (auto r : rows) sum += y[r];
        const double mean = sum / static_cast<double>(rows.size());

        double best_gain = 0.0;
        std::size_t best_f = 0;
        double best_t = 0.0;
        if (depth < opt.max_depth && rows.size() >= 2 * opt.min_leaf) {
            std::vector<std::size_t> feats(x.cols());
            std::iota(feats.begin(), feats.end(), std::size_t{0});
            std::shuffle(feats.begin(), feats.end(), rng);
            feats.resize(std::min(opt.mtry, feats.size()));
            const double n = static_cast<double>(rows.size());
            for (auto f : feats) {
                std::sort(rows.begin(), rows.end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
                double left = 0.0;
                for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
                    left += y[rows[i]];
                    const std::size_t nl = i + 1;
                    if (nl < opt.min_leaf || rows.size() - nl < opt.min_leaf) continue;
                    if (x(rows[i], f) == x(rows[i + 1], f)) continue;
                    const double right = sum - left;
                    const double gain = left * left / static_cast<double>(nl) +
                                        right * right / (n - static_cast<double>(nl)) - sum * sum / n;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best_f = f;
                        best_t = 0.5 * (x(rows[i], f) + x(rows[i + 1], f));
                    }
                }
            }
        }
        if (best_gain <= 0.0) {
            nodes[pos].leaf = true;
            nodes[pos].value = mean;
            return pos;
        }
        std::vector<std::size_t> lrows, rrows;
        for (auto r : rows) (x(r, best_f) <= best_t ? lrows : rrows).push_back(r);
        const std::size_t l = grow(lrows, depth + 1);
        const std::size_t r = grow(rrows, depth + 1);
        auto& node = nodes[pos];
        node.leaf = false;
        node.feature = best_f;
        node.threshold = best_t;
        node.left = l;
        node.right = r;
        return pos;
    }
};

}  // namespace detail

/// Bootstrap-aggregated CART regression trees on the given rows of x.
inline ForestModel train_forest(const DataMatrix& x, const std::vector<double>& y, const std::vector<std::size_t>& rows,
                                const TrainOptions& opt) {
    std::mt19937_64 rng(opt.seed);
    ForestModel m;
    m.n_features = x.cols();
    std::uniform_int_distribution<std::size_t> pick(0, rows.size() - 1);
    for (std::size_t t = 0; t < opt.n_trees; ++t) {
        std::vector<std::size_t> sample(rows.size());
        for (auto& s : sample) s = rows[pick(rng)];
        detail::Cart cart{x, y, opt, rng, {}};
        cart.grow(sample, 0);
        m.trees.emplace_back(std::move(cart.nodes), 0);
    }
    return m;
}

}  // namespace reshape::testing
