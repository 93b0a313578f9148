#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace reshape {

enum class Task { Regression, Probability };

/// One node of a binary decision tree. Internal nodes route x_feature <=
/// threshold to `left` and everything else to `right`; `left` and `right`
/// are positions in the owning tree's node array.
struct TreeNode {
    std::int64_t id = 0;  ///< identifier from the model file
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double value = 0.0;  ///< leaf value
};

class Tree {
public:
    Tree() = default;
    /// Validates structure: single root, every node reachable, no cycles,
    /// child positions in range. Throws InvalidModel.
    Tree(std::vector<TreeNode> nodes, std::size_t root);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t root() const { return root_; }
    const TreeNode& node(std::size_t pos) const { return nodes_[pos]; }

    /// Node position of the leaf reached by `x`.
    std::size_t route(std::span<const double> x) const;
    double predict(std::span<const double> x) const { return nodes_[route(x)].value; }

    /// Leaf positions in left-to-right order.
    std::vector<std::size_t> leaves() const;
    /// Leaf positions under `pos`, left-to-right.
    std::vector<std::size_t> leaves_under(std::size_t pos) const;
    /// Internal-node positions in breadth-first order with their depths.
    std::vector<std::pair<std::size_t, std::size_t>> level_order() const;

    /// Replaces a leaf's value; structure is immutable.
    void set_leaf_value(std::size_t pos, double value);

    /// Parent position of each node; the root maps to itself.
    std::size_t parent(std::size_t pos) const { return parents_[pos]; }

private:
    std::vector<TreeNode> nodes_;
    std::vector<std::size_t> parents_;
    std::size_t root_ = 0;
};

/// An averaging ensemble of trees.
struct ForestModel {
    std::vector<Tree> trees;
    std::size_t n_features = 0;
    Task task = Task::Regression;

    /// Mean over trees. Throws InvalidInput on dimension mismatch or a
    /// non-finite coordinate.
    double predict(std::span<const double> x) const;
    /// As predict, without input validation.
    double predict_unchecked(std::span<const double> x) const;

    /// Throws InvalidModel when a feature index is out of range, a value is
    /// non-finite, or a probability leaf lies outside [0, 1].
    void validate() const;
};

/// A half-open interval (lower, upper]. Empty when !(lower < upper).
struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool empty() const { return !(lower < upper); }
    bool contains(double x) const { return lower < x && x <= upper; }
};

/// Two half-open intervals share a point iff max(lowers) < min(uppers).
inline bool overlaps(const Interval& a, const Interval& b) {
    return std::max(a.lower, b.lower) < std::min(a.upper, b.upper);
}

/// The axis-aligned region routed to one leaf.
struct LeafCell {
    std::size_t leaf = 0;  ///< node position
    std::vector<Interval> intervals;

    bool empty() const;
    bool contains(std::span<const double> x) const;
};

/// One cell per leaf, in left-to-right leaf order. Cells partition R^d.
std::vector<LeafCell> leaf_cells(const Tree& tree, std::size_t n_features);
/// Cells of the leaves under `pos` only (intervals still include every
/// ancestor split).
std::vector<LeafCell> leaf_cells_under(const Tree& tree, std::size_t pos, std::size_t n_features);

ForestModel forest_from_json(const std::string& text);
std::string forest_to_json(const ForestModel& model);
/// Throws ParseError for unreadable or malformed files.
ForestModel load_forest(const std::filesystem::path& path);
void save_forest(const ForestModel& model, const std::filesystem::path& path);

}  // namespace reshape
