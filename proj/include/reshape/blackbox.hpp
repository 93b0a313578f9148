#pragma once

#include "reshape/data.hpp"
#include "reshape/shape.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace reshape {

/// Any prediction rule f: R^d -> R.
using Predictor = std::function<double(std::span<const double>)>;

/// Predictions of a rule on the synthetic points x^{i,k,v}: observation i
/// with its v-th coordinate replaced by that of observation k, for every
/// constrained variable v.
///
/// Variables are addressed by their position r in `variables` (ascending
/// feature index). Monotonicity is certified only on these points.
struct BlackBoxGrid {
    std::size_t n = 0;
    std::vector<std::size_t> variables;
    /// orderings[r]: observation indices sorted by (x^k_v, k).
    std::vector<std::vector<std::size_t>> orderings;
    /// coordinates[r][k] = x^k_v.
    std::vector<std::vector<double>> coordinates;
    /// values[(i * n + k) * R + r] = F[i, k, v_r].
    std::vector<double> values;

    std::size_t num_variables() const { return variables.size(); }
    double at(std::size_t i, std::size_t k, std::size_t r) const {
        return values[(i * n + k) * variables.size() + r];
    }
    double& at(std::size_t i, std::size_t k, std::size_t r) { return values[(i * n + k) * variables.size() + r]; }
};

/// One F[i, k, v] entry. Indices are 0-based; `v` is a feature index.
struct TensorEntry {
    std::size_t i = 0;
    std::size_t k = 0;
    std::size_t v = 0;
    double value = 0.0;
};

struct ReshapedGrid {
    BlackBoxGrid grid;                ///< F*, same layout as the input grid
    std::vector<double> predictions;  ///< f*(x^i) = F*[i, i, .]
    std::vector<double> objectives;   ///< squared distance moved, per observation
    double objective = 0.0;
};

/// Reshaped value and cost for one observation, without the grid.
struct PointReshape {
    double prediction = 0.0;
    double objective = 0.0;
};

/// Evaluates `predictor` on every synthetic point. Throws InvalidModel,
/// naming (i, k, v) 1-based, on a non-finite prediction.
BlackBoxGrid build_grid(const DataMatrix& data, const Predictor& predictor, const ShapeSpec& spec,
                        unsigned threads = 1);

/// Builds a grid from precomputed predictions. Every (i, k, v) for v in the
/// spec must appear exactly once.
BlackBoxGrid grid_from_tensor(const DataMatrix& data, std::span<const TensorEntry> entries,
                              const ShapeSpec& spec);

/// Solves the n independent intersecting isotonic problems. Results do not
/// depend on `threads`.
ReshapedGrid reshape_grid(const BlackBoxGrid& grid, const ShapeSpec& spec, unsigned threads = 1);

/// Diagonal values of a reshaped grid. Throws InternalError if they disagree
/// across variables by more than 1e-9.
std::vector<double> reshaped_predictions(const ReshapedGrid& rg);

/// Same predictions as build_grid + reshape_grid, but holds only one
/// observation's fibers at a time (memory O(n R) per worker).
std::vector<PointReshape> reshape_blackbox_streaming(const DataMatrix& data, const Predictor& predictor,
                                                     const ShapeSpec& spec, unsigned threads = 1);

/// Observation indices sorted by (x^k_v, k).
std::vector<std::size_t> coordinate_ordering(std::span<const double> coords);

}  // namespace reshape
