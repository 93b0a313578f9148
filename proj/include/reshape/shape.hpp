#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace reshape {

enum class Direction { Increasing, Decreasing };

/// The set of reshaped predictors, each with its monotone direction.
/// Feature indices are 0-based.
class ShapeSpec {
public:
    ShapeSpec() = default;
    explicit ShapeSpec(std::map<std::size_t, Direction> constraints);

    /// Parses `index:inc|dec[,index:inc|dec...]`. When `feature_names` is
    /// non-empty, a name from that list may stand in for the index.
    static ShapeSpec parse(std::string_view text,
                           const std::vector<std::string>& feature_names = {});

    /// Throws InvalidInput unless every index is below `n_features` and the
    /// spec is non-empty.
    void validate(std::size_t n_features) const;

    bool constrains(std::size_t feature) const { return constraints_.count(feature) != 0; }
    Direction direction(std::size_t feature) const;
    std::size_t size() const { return constraints_.size(); }
    bool empty() const { return constraints_.empty(); }

    /// Constrained features in ascending order.
    std::vector<std::size_t> features() const;
    const std::map<std::size_t, Direction>& constraints() const { return constraints_; }

    std::string to_string() const;

private:
    std::map<std::size_t, Direction> constraints_;
};

}  // namespace reshape
