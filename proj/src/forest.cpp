#include "reshape/forest.hpp"

#include "reshape/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace reshape {

using nlohmann::json;

Tree::Tree(std::vector<TreeNode> nodes, std::size_t root) : nodes_(std::move(nodes)), root_(root) {
    const std::size_t n = nodes_.size();
    if (n == 0) throw InvalidModel("tree has no nodes");
    if (root_ >= n) throw InvalidModel("tree root out of range");
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    parents_.assign(n, none);
    for (std::size_t p = 0; p < n; ++p) {
        const auto& node = nodes_[p];
        if (node.leaf) continue;
        for (std::size_t child : {node.left, node.right}) {
            if (child >= n) {
                throw InvalidModel("node " + std::to_string(node.id) + " has a dangling child");
            }
            if (child == root_ || parents_[child] != none || node.left == node.right) {
                throw InvalidModel("node " + std::to_string(nodes_[child].id) +
                                   " has more than one parent (cycle or shared subtree)");
            }
            parents_[child] = p;
        }
    }
    parents_[root_] = root_;
    std::vector<std::size_t> stack{root_};
    std::size_t seen = 0;
    while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        ++seen;
        if (!nodes_[p].leaf) {
            stack.push_back(nodes_[p].right);
            stack.push_back(nodes_[p].left);
        }
    }
    if (seen != n) throw InvalidModel("tree has nodes unreachable from the root (cycle or orphan)");
}

std::size_t Tree::route(std::span<const double> x) const {
    std::size_t p = root_;
    while (!nodes_[p].leaf) {
        const auto& node = nodes_[p];
        p = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    return p;
}

std::vector<std::size_t> Tree::leaves_under(std::size_t pos) const {
    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{pos};
    while (!stack.empty()) {
        const auto p = stack.back();
        stack.pop_back();
        if (nodes_[p].leaf) {
            out.push_back(p);
        } else {
            stack.push_back(nodes_[p].right);
            stack.push_back(nodes_[p].left);
        }
    }
    return out;
}

std::vector<std::size_t> Tree::leaves() const { return leaves_under(root_); }

std::vector<std::pair<std::size_t, std::size_t>> Tree::level_order() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::vector<std::pair<std::size_t, std::size_t>> queue{{root_, 0}};
    for (std::size_t head = 0; head < queue.size(); ++head) {
        const auto [p, depth] = queue[head];
        if (nodes_[p].leaf) continue;
        out.emplace_back(p, depth);
        queue.emplace_back(nodes_[p].left, depth + 1);
        queue.emplace_back(nodes_[p].right, depth + 1);
    }
    return out;
}

void Tree::set_leaf_value(std::size_t pos, double value) {
    if (pos >= nodes_.size() || !nodes_[pos].leaf) throw InvalidInput("set_leaf_value: not a leaf");
    nodes_[pos].value = value;
}

double ForestModel::predict_unchecked(std::span<const double> x) const {
    double sum = 0.0;
    for (const auto& t : trees) sum += t.predict(x);
    return sum / static_cast<double>(trees.size());
}

double ForestModel::predict(std::span<const double> x) const {
    if (x.size() != n_features) {
        throw InvalidInput("predict: expected " + std::to_string(n_features) + " features, got " +
                           std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw InvalidInput("predict: non-finite feature value");
    }
    if (trees.empty()) throw InvalidModel("predict: forest has no trees");
    return predict_unchecked(x);
}

void ForestModel::validate() const {
    if (trees.empty()) throw InvalidModel("forest has no trees");
    if (n_features == 0) throw InvalidModel("forest has zero features");
    for (std::size_t t = 0; t < trees.size(); ++t) {
        for (const auto& node : trees[t].nodes()) {
            const std::string where = "tree " + std::to_string(t) + " node " + std::to_string(node.id);
            if (node.leaf) {
                if (!std::isfinite(node.value)) throw InvalidModel(where + ": non-finite leaf value");
                if (task == Task::Probability && (node.value < 0.0 || node.value > 1.0)) {
                    throw InvalidModel(where + ": probability leaf outside [0, 1]");
                }
            } else {
                if (node.feature >= n_features) throw InvalidModel(where + ": feature index out of range");
                if (std::isnan(node.threshold)) throw InvalidModel(where + ": threshold is NaN");
            }
        }
    }
}

bool LeafCell::empty() const {
    for (const auto& iv : intervals) {
        if (iv.empty()) return true;
    }
    return false;
}

bool LeafCell::contains(std::span<const double> x) const {
    for (std::size_t j = 0; j < intervals.size(); ++j) {
        if (!intervals[j].contains(x[j])) return false;
    }
    return true;
}

namespace {

void collect_cells(const Tree& tree, std::size_t pos, std::vector<Interval>& box, std::vector<LeafCell>& out) {
    const auto& node = tree.node(pos);
    if (node.leaf) {
        out.push_back({pos, box});
        return;
    }
    const Interval saved = box[node.feature];
    box[node.feature].upper = std::min(saved.upper, node.threshold);
    collect_cells(tree, node.left, box, out);
    box[node.feature] = saved;
    box[node.feature].lower = std::max(saved.lower, node.threshold);
    collect_cells(tree, node.right, box, out);
    box[node.feature] = saved;
}

}  // namespace

std::vector<LeafCell> leaf_cells_under(const Tree& tree, std::size_t pos, std::size_t n_features) {
    std::vector<Interval> box(n_features);
    for (std::size_t child = pos; child != tree.root();) {
        const auto parent = tree.parent(child);
        const auto& node = tree.node(parent);
        auto& iv = box[node.feature];
        if (node.left == child) {
            iv.upper = std::min(iv.upper, node.threshold);
        } else {
            iv.lower = std::max(iv.lower, node.threshold);
        }
        child = parent;
    }
    std::vector<LeafCell> out;
    collect_cells(tree, pos, box, out);
    return out;
}

std::vector<LeafCell> leaf_cells(const Tree& tree, std::size_t n_features) {
    return leaf_cells_under(tree, tree.root(), n_features);
}

// ---- model file -----------------------------------------------------------

namespace {

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field '" + key + "' has the wrong type");
    }
}

Tree tree_from_json(const json& jt, const std::string& where) {
    const auto& jnodes = jt.contains("nodes") ? jt.at("nodes") : json();
    if (!jnodes.is_array() || jnodes.empty()) throw ParseError(where + ": 'nodes' must be a non-empty array");

    std::unordered_map<std::int64_t, std::size_t> pos_of;
    for (std::size_t j = 0; j < jnodes.size(); ++j) {
        const auto id = field<std::int64_t>(jnodes[j], "id", where + ".nodes[" + std::to_string(j) + "]");
        if (!pos_of.emplace(id, j).second) {
            throw ParseError(where + ".nodes[" + std::to_string(j) + "]: duplicate node id " + std::to_string(id));
        }
    }
    auto resolve = [&](std::int64_t id, const std::string& at) {
        auto it = pos_of.find(id);
        if (it == pos_of.end()) throw ParseError(at + ": dangling node id " + std::to_string(id));
        return it->second;
    };

    std::vector<TreeNode> nodes(jnodes.size());
    for (std::size_t j = 0; j < jnodes.size(); ++j) {
        const auto& jn = jnodes[j];
        const std::string at = where + ".nodes[" + std::to_string(j) + "]";
        auto& node = nodes[j];
        node.id = jn.at("id").get<std::int64_t>();
        const bool has_value = jn.contains("value");
        const bool has_split = jn.contains("feature") || jn.contains("threshold") || jn.contains("left") ||
                               jn.contains("right");
        if (has_value == has_split) throw ParseError(at + ": node must be either a leaf or a split");
        if (has_value) {
            node.leaf = true;
            node.value = field<double>(jn, "value", at);
        } else {
            node.leaf = false;
            const auto feature = field<std::int64_t>(jn, "feature", at);
            if (feature < 0) throw ParseError(at + ": negative feature index");
            node.feature = static_cast<std::size_t>(feature);
            node.threshold = field<double>(jn, "threshold", at);
            node.left = resolve(field<std::int64_t>(jn, "left", at), at);
            node.right = resolve(field<std::int64_t>(jn, "right", at), at);
        }
    }
    const auto root = resolve(field<std::int64_t>(jt, "root", where), where);
    try {
        return Tree(std::move(nodes), root);
    } catch (const InvalidModel& e) {
        throw ParseError(where + ": " + e.what());
    }
}

}  // namespace

ForestModel forest_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("model file: top level must be an object");
    const auto version = field<int>(doc, "format_version", "model");
    if (version != 1) throw ParseError("model: unsupported format_version " + std::to_string(version));
    const auto routing = field<std::string>(doc, "routing", "model");
    if (routing != "le_left") {
        throw ParseError("model: routing '" + routing + "' is not supported (expected le_left)");
    }
    ForestModel model;
    const auto task = field<std::string>(doc, "task", "model");
    if (task == "regression") {
        model.task = Task::Regression;
    } else if (task == "probability") {
        model.task = Task::Probability;
    } else {
        throw ParseError("model: unknown task '" + task + "'");
    }
    const auto n_features = field<std::int64_t>(doc, "n_features", "model");
    if (n_features <= 0) throw ParseError("model: n_features must be positive");
    model.n_features = static_cast<std::size_t>(n_features);

    if (!doc.contains("trees") || !doc.at("trees").is_array() || doc.at("trees").empty()) {
        throw ParseError("model: 'trees' must be a non-empty array");
    }
    const auto& jtrees = doc.at("trees");
    for (std::size_t t = 0; t < jtrees.size(); ++t) {
        model.trees.push_back(tree_from_json(jtrees[t], "trees[" + std::to_string(t) + "]"));
    }
    try {
        model.validate();
    } catch (const InvalidModel& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    return model;
}

std::string forest_to_json(const ForestModel& model) {
    json doc;
    doc["format_version"] = 1;
    doc["task"] = model.task == Task::Regression ? "regression" : "probability";
    doc["n_features"] = model.n_features;
    doc["routing"] = "le_left";
    json jtrees = json::array();
    for (const auto& tree : model.trees) {
        json jnodes = json::array();
        for (const auto& node : tree.nodes()) {
            if (node.leaf) {
                jnodes.push_back({{"id", node.id}, {"value", node.value}});
            } else {
                jnodes.push_back({{"id", node.id},
                                  {"feature", node.feature},
                                  {"threshold", node.threshold},
                                  {"left", tree.node(node.left).id},
                                  {"right", tree.node(node.right).id}});
            }
        }
        jtrees.push_back({{"nodes", std::move(jnodes)}, {"root", tree.node(tree.root()).id}});
    }
    doc["trees"] = std::move(jtrees);
    return doc.dump();
}

ForestModel load_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return forest_from_json(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_forest(const ForestModel& model, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write model file " + path.string());
    out << forest_to_json(model) << '\n';
    if (!out) throw InvalidInput("failed writing model file " + path.string());
}

}  // namespace reshape
