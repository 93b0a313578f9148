#pragma once

#include "reshape/dag_isotonic.hpp"
#include "reshape/forest.hpp"
#include "reshape/shape.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace reshape {

enum class Method { Exact, OverConstrained };

std::string to_string(Method m);
/// Accepts "exact", "oc", "overconstrained".
Method parse_method(const std::string& text);

/// Order constraints between the leaves of one tree: for every split on a
/// constrained variable, one edge per pair of left/right leaves whose cells
/// intersect after ignoring that variable. Edges point from the leaf that
/// must be smaller to the one that must be larger; duplicates are merged and
/// only leaves that appear in some edge become vertices (left-to-right
/// order). `vertices` hold leaf node positions.
ConstraintGraph build_constraint_graph(const Tree& tree, const ShapeSpec& spec, std::size_t n_features);

struct NodeSolve {
    std::vector<double> left;
    std::vector<double> right;
    double cut = 0.0;  ///< common clip level c
    double objective = 0.0;
};

/// Least-squares fit with max(left) <= min(right): left values become
/// min(c, l), right values max(c, r), with c found by a breakpoint scan over
/// the sorted values. O(n log n). Throws InvalidInput when either side is empty.
NodeSolve solve_node_overconstrained(std::span<const double> left, std::span<const double> right);

struct TreeReshape {
    Tree tree;
    std::size_t edges = 0;         ///< constraints enforced
    std::size_t nodes_solved = 0;  ///< splits on constrained variables
    double objective = 0.0;        ///< squared distance moved by leaf values
};

/// Rewrites leaf values only. Exact: one projection over the tree's
/// constraint graph. Over-constrained: every constrained split solved in
/// reverse level order (deepest first, left to right within a level).
TreeReshape reshape_tree(const Tree& tree, const ShapeSpec& spec, Method method, std::size_t n_features);

struct ReshapeReport {
    Method method = Method::Exact;
    std::size_t edges = 0;
    double objective = 0.0;
    std::size_t nodes_solved = 0;
    double wall_ms = 0.0;

    std::string to_json() const;
};

struct ForestReshape {
    ForestModel model;
    ReshapeReport report;
};

/// Reshapes each tree independently. Output does not depend on `threads`.
ForestReshape reshape_forest(const ForestModel& model, const ShapeSpec& spec, Method method, unsigned threads = 1);

}  // namespace reshape
