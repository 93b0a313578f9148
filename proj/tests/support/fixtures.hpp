#pragma once

// Small hand-built trees with known constraint structure.

#include "reshape/forest.hpp"

#include <vector>

namespace reshape::testing {

inline TreeNode split(std::int64_t id, std::size_t feature, double threshold, std::size_t left, std::size_t right) {
    TreeNode n;
    n.id = id;
    n.leaf = false;
    n.feature = feature;
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    return n;
}

inline TreeNode leaf(std::int64_t id, double value) {
    TreeNode n;
    n.id = id;
    n.value = value;
    return n;
}

/// Two nested splits on feature `v`: the root at t2 = 2 and its left child
/// at t1 = 1. Leaves l1 (x_v <= 1), l2 (1 < x_v <= 2), l3 (x_v > 2) at
/// positions 2, 3, 4.
inline Tree nested_split_tree(std::size_t v, double l1, double l2, double l3) {
    return Tree({split(0, v, 2.0, 1, 4), split(1, v, 1.0, 2, 3), leaf(10, l1), leaf(11, l2), leaf(12, l3)}, 0);
}

/// Root splits on x3 (feature 2). Left subtree: x2 <= 1 ? (x1 <= 2 ? l1 : l2)
/// : l3. Right subtree: x1 <= 1 ? r1 : (x2 <= 3 ? r2 : r3).
struct TwoSubtree {
    Tree tree;
    std::size_t l1, l2, l3, r1, r2, r3;  // leaf positions
};

inline TwoSubtree two_subtree_tree(std::vector<double> values = {6, 5, 4, 3, 2, 1}) {
    std::vector<TreeNode> nodes{
        split(0, 2, 0.0, 1, 2),            // x3 <= 0
        split(1, 1, 1.0, 3, 4),            // x2 <= 1
        split(2, 0, 1.0, 5, 6),            // x1 <= 1
        split(3, 0, 2.0, 7, 8),            // x1 <= 2
        leaf(103, values[2]),              // l3
        leaf(201, values[3]),              // r1
        split(6, 1, 3.0, 9, 10),           // x2 <= 3
        leaf(101, values[0]),              // l1
        leaf(102, values[1]),              // l2
        leaf(202, values[4]),              // r2
        leaf(203, values[5]),              // r3
    };
    return {Tree(std::move(nodes), 0), 7, 8, 4, 5, 9, 10};
}

inline ForestModel single_tree_forest(Tree tree, std::size_t n_features) {
    ForestModel m;
    m.n_features = n_features;
    m.trees.push_back(std::move(tree));
    return m;
}

}  // namespace reshape::testing
