#include "reshape/shape.hpp"

#include "reshape/errors.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace reshape {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

ShapeSpec::ShapeSpec(std::map<std::size_t, Direction> constraints)
    : constraints_(std::move(constraints)) {}

ShapeSpec ShapeSpec::parse(std::string_view text, const std::vector<std::string>& feature_names) {
    std::map<std::size_t, Direction> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        if (comma == std::string_view::npos) comma = text.size();
        auto item = trim(text.substr(pos, comma - pos));
        pos = comma + 1;
        if (item.empty()) {
            throw InvalidInput("shape spec: empty entry in '" + std::string(text) + "'");
        }
        auto colon = item.rfind(':');
        if (colon == std::string_view::npos) {
            throw InvalidInput("shape spec: expected index:inc|dec, got '" + std::string(item) + "'");
        }
        auto key = trim(item.substr(0, colon));
        auto dir = trim(item.substr(colon + 1));

        std::size_t index = 0;
        auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
        if (ec != std::errc{} || ptr != key.data() + key.size()) {
            auto it = std::find(feature_names.begin(), feature_names.end(), key);
            if (it == feature_names.end()) {
                throw InvalidInput("shape spec: unknown feature '" + std::string(key) + "'");
            }
            index = static_cast<std::size_t>(it - feature_names.begin());
        }

        Direction d;
        if (dir == "inc" || dir == "increasing") {
            d = Direction::Increasing;
        } else if (dir == "dec" || dir == "decreasing") {
            d = Direction::Decreasing;
        } else {
            throw InvalidInput("shape spec: direction must be inc or dec, got '" + std::string(dir) + "'");
        }
        if (!out.emplace(index, d).second) {
            throw InvalidInput("shape spec: feature " + std::to_string(index) + " listed twice");
        }
        if (comma == text.size()) break;
    }
    return ShapeSpec(std::move(out));
}

void ShapeSpec::validate(std::size_t n_features) const {
    if (constraints_.empty()) throw InvalidInput("shape spec: no constrained variables");
    for (const auto& [feature, dir] : constraints_) {
        if (feature >= n_features) {
            throw InvalidInput("shape spec: feature " + std::to_string(feature) +
                               " out of range for dimension " + std::to_string(n_features));
        }
    }
}

Direction ShapeSpec::direction(std::size_t feature) const {
    auto it = constraints_.find(feature);
    if (it == constraints_.end()) {
        throw InvalidInput("shape spec: feature " + std::to_string(feature) + " is not constrained");
    }
    return it->second;
}

std::vector<std::size_t> ShapeSpec::features() const {
    std::vector<std::size_t> out;
    out.reserve(constraints_.size());
    for (const auto& kv : constraints_) out.push_back(kv.first);
    return out;
}

std::string ShapeSpec::to_string() const {
    std::ostringstream os;
    bool first = true;
    for (const auto& [feature, dir] : constraints_) {
        if (!first) os << ',';
        first = false;
        os << feature << ':' << (dir == Direction::Increasing ? "inc" : "dec");
    }
    return os.str();
}

}  // namespace reshape
