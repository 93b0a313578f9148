#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace reshape {

/// Order constraints between values: an edge (i, j) requires fit[i] <= fit[j].
/// Edges index into `values`.
struct ConstraintGraph {
    std::vector<std::size_t> vertices;  ///< caller labels (leaf positions for trees)
    std::vector<double> values;         ///< original value per vertex
    std::vector<std::pair<std::size_t, std::size_t>> edges;
};

/// Exact L2 projection of `graph.values` onto the order cone of the graph,
/// by recursive min-cut partitioning: each block is split at its mean into
/// the maximum-weight upper set and its complement until no split improves.
/// Intended for graphs up to roughly 10^3 vertices.
///
/// Throws InvalidInput if the graph has a cycle, a self-loop, or an edge
/// endpoint out of range.
std::vector<double> dag_isotonic_exact(const ConstraintGraph& graph);

/// Vertices in topological order. Throws InvalidInput on a cycle.
std::vector<std::size_t> topological_order(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges);

}  // namespace reshape
