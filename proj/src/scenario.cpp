#include "spreadlab/scenario.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace spreadlab {

ScenarioTree ScenarioTree::build(const std::vector<int>& branching,
                                 const std::vector<std::vector<double>>& probabilities) {
    ScenarioTree tree;
    tree.depth_ = static_cast<int>(branching.size());
    for (int b : branching) {
        if (b < 1) throw std::invalid_argument("build_tree: zero branching");
    }

    tree.nodes_.push_back(TreeNode{0, -1, 0, {}, {}});
    tree.layers_.assign(static_cast<std::size_t>(tree.depth_) + 1, {});
    tree.layers_[0] = {0};

    std::size_t prob_index = 0;
    for (int t = 0; t < tree.depth_; ++t) {
        const int width = branching[static_cast<std::size_t>(t)];
        for (int parent_id : tree.layers_[static_cast<std::size_t>(t)]) {
            if (prob_index >= probabilities.size())
                throw std::invalid_argument("build_tree: missing probability vector");
            const std::vector<double>& p = probabilities[prob_index++];
            if (static_cast<int>(p.size()) != width)
                throw std::invalid_argument("build_tree: probability vector size mismatch");
            double sum = 0.0;
            for (double q : p) {
                if (!(q > 0.0)) throw std::invalid_argument("build_tree: non-positive probability");
                sum += q;
            }
            if (std::abs(sum - 1.0) > kProbSumTol)
                throw std::invalid_argument("build_tree: probabilities do not sum to 1");
            TreeNode& parent = tree.nodes_[static_cast<std::size_t>(parent_id)];
            parent.probs = p;
            for (int c = 0; c < width; ++c) {
                const int id = static_cast<int>(tree.nodes_.size());
                tree.nodes_[static_cast<std::size_t>(parent_id)].children.push_back(id);
                tree.nodes_.push_back(TreeNode{id, parent_id, t + 1, {}, {}});
                tree.layers_[static_cast<std::size_t>(t) + 1].push_back(id);
            }
        }
    }
    if (prob_index != probabilities.size())
        throw std::invalid_argument("build_tree: extra probability vectors");

    tree.reach_prob_.assign(tree.nodes_.size(), 1.0);
    for (const TreeNode& n : tree.nodes_) {
        for (std::size_t c = 0; c < n.children.size(); ++c) {
            tree.reach_prob_[static_cast<std::size_t>(n.children[c])] =
                tree.reach_prob_[static_cast<std::size_t>(n.id)] * n.probs[c];
        }
    }
    return tree;
}

ScenarioTree ScenarioTree::build_uniform(const std::vector<int>& branching) {
    std::vector<std::vector<double>> probs;
    std::size_t layer_width = 1;
    for (int b : branching) {
        if (b < 1) throw std::invalid_argument("build_tree: zero branching");
        for (std::size_t i = 0; i < layer_width; ++i)
            probs.emplace_back(static_cast<std::size_t>(b), 1.0 / b);
        layer_width *= static_cast<std::size_t>(b);
    }
    return build(branching, probs);
}

int TreeStoppingTime::value_on_path(const ScenarioTree& tree, int leaf) const {
    // Walk up, remember the earliest Stop.
    int stop_time = kNever;
    for (int v = leaf; v != -1; v = tree.node(v).parent) {
        if (flag[static_cast<std::size_t>(v)] == StopFlag::Stop) stop_time = tree.node(v).time;
    }
    return stop_time;
}

bool TreeStoppingTime::not_stopped_by(const ScenarioTree& tree, int node) const {
    for (int v = node; v != -1; v = tree.node(v).parent) {
        if (flag[static_cast<std::size_t>(v)] == StopFlag::Stop) return false;
    }
    return true;
}

AdaptedProcess conditional_expectation(const ScenarioTree& tree, const AdaptedProcess& x,
                                       int from_time) {
    if (from_time < 1 || from_time > tree.depth())
        throw std::invalid_argument("conditional_expectation: from_time out of range");
    if (static_cast<int>(x.size()) != tree.node_count())
        throw std::invalid_argument("conditional_expectation: process size mismatch");
    AdaptedProcess out = x;
    for (int v : tree.layer(from_time - 1)) {
        const TreeNode& n = tree.node(v);
        double acc = 0.0;
        for (std::size_t c = 0; c < n.children.size(); ++c)
            acc += n.probs[c] * x[static_cast<std::size_t>(n.children[c])];
        out[static_cast<std::size_t>(v)] = acc;
    }
    return out;
}

bool is_predictable(const ScenarioTree& tree, const AdaptedProcess& x) {
    if (static_cast<int>(x.size()) != tree.node_count())
        throw std::invalid_argument("is_predictable: process size mismatch");
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        for (std::size_t c = 1; c < n.children.size(); ++c)
            if (x[static_cast<std::size_t>(n.children[c])] !=
                x[static_cast<std::size_t>(n.children[0])])
                return false;
    }
    return true;
}

double conditional_expectation_at(const ScenarioTree& tree, const AdaptedProcess& x, int node,
                                  int to_time) {
    const TreeNode& n = tree.node(node);
    if (n.time > to_time)
        throw std::invalid_argument("conditional_expectation_at: node after to_time");
    if (n.time == to_time) return x[static_cast<std::size_t>(node)];
    double acc = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c)
        acc += n.probs[c] * conditional_expectation_at(tree, x, n.children[c], to_time);
    return acc;
}

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > std::numeric_limits<std::uint64_t>::max() / b)
        return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
    if (a > std::numeric_limits<std::uint64_t>::max() - b)
        return std::numeric_limits<std::uint64_t>::max();
    return a + b;
}

// Enumerate the subtree stopping times of `node` into flag vectors. For each
// produced variant the callback sees the filled flags; they are reset after.
void enumerate_subtree(const ScenarioTree& tree, int node, std::vector<StopFlag>& flags,
                       std::vector<TreeStoppingTime>& out, std::uint64_t cap) {
    const TreeNode& n = tree.node(node);
    // Variant 1: stop here.
    flags[static_cast<std::size_t>(node)] = StopFlag::Stop;
    if (out.size() >= cap) throw std::runtime_error("enumerate_stopping_times: cap exceeded");
    out.push_back(TreeStoppingTime{flags});
    flags[static_cast<std::size_t>(node)] = StopFlag::Continue;
    if (n.children.empty()) return;

    // Variant 2: continue and combine the children's variants (cartesian
    // product, counting in a mixed radix over per-child choice lists).
    std::vector<std::vector<TreeStoppingTime>> child_variants;
    child_variants.reserve(n.children.size());
    for (int c : n.children) {
        std::vector<TreeStoppingTime> sub;
        std::vector<StopFlag> child_flags(flags.size(), StopFlag::Continue);
        enumerate_subtree(tree, c, child_flags, sub, cap);
        child_variants.push_back(std::move(sub));
    }
    std::vector<std::size_t> pick(n.children.size(), 0);
    while (true) {
        TreeStoppingTime combined{flags};
        for (std::size_t ci = 0; ci < n.children.size(); ++ci) {
            const TreeStoppingTime& sub = child_variants[ci][pick[ci]];
            for (std::size_t i = 0; i < sub.flag.size(); ++i)
                if (sub.flag[i] == StopFlag::Stop) combined.flag[i] = StopFlag::Stop;
        }
        if (out.size() >= cap) throw std::runtime_error("enumerate_stopping_times: cap exceeded");
        out.push_back(std::move(combined));
        std::size_t ci = 0;
        while (ci < pick.size()) {
            if (++pick[ci] < child_variants[ci].size()) break;
            pick[ci] = 0;
            ++ci;
        }
        if (ci == pick.size()) break;
    }
}

}  // namespace

std::uint64_t count_subtree_stopping_times(const ScenarioTree& tree, int node) {
    const TreeNode& n = tree.node(node);
    if (n.children.empty()) return 1;
    std::uint64_t product = 1;
    for (int c : n.children) product = saturating_mul(product, count_subtree_stopping_times(tree, c));
    return saturating_add(1, product);
}

std::uint64_t count_stopping_times(const ScenarioTree& tree, int from_time) {
    if (from_time < 0 || from_time > tree.depth())
        throw std::invalid_argument("count_stopping_times: from_time out of range");
    std::uint64_t product = 1;
    for (int v : tree.layer(from_time))
        product = saturating_mul(product, count_subtree_stopping_times(tree, v));
    return product;
}

std::vector<TreeStoppingTime> enumerate_subtree_stopping_times(const ScenarioTree& tree, int node,
                                                               std::uint64_t cap) {
    if (count_subtree_stopping_times(tree, node) > cap)
        throw std::runtime_error("enumerate_stopping_times: cap exceeded");
    std::vector<TreeStoppingTime> out;
    std::vector<StopFlag> flags(static_cast<std::size_t>(tree.node_count()), StopFlag::Continue);
    enumerate_subtree(tree, node, flags, out, cap);
    return out;
}

std::vector<TreeStoppingTime> enumerate_stopping_times(const ScenarioTree& tree, int from_time,
                                                       std::uint64_t cap) {
    if (count_stopping_times(tree, from_time) > cap)
        throw std::runtime_error("enumerate_stopping_times: cap exceeded");
    const std::vector<int>& anchors = tree.layer(from_time);
    std::vector<std::vector<TreeStoppingTime>> per_anchor;
    per_anchor.reserve(anchors.size());
    for (int v : anchors) per_anchor.push_back(enumerate_subtree_stopping_times(tree, v, cap));

    std::vector<TreeStoppingTime> out;
    std::vector<std::size_t> pick(anchors.size(), 0);
    while (true) {
        TreeStoppingTime combined;
        combined.flag.assign(static_cast<std::size_t>(tree.node_count()), StopFlag::Continue);
        for (std::size_t ai = 0; ai < anchors.size(); ++ai) {
            const TreeStoppingTime& sub = per_anchor[ai][pick[ai]];
            for (std::size_t i = 0; i < sub.flag.size(); ++i)
                if (sub.flag[i] == StopFlag::Stop) combined.flag[i] = StopFlag::Stop;
        }
        if (out.size() >= cap) throw std::runtime_error("enumerate_stopping_times: cap exceeded");
        out.push_back(std::move(combined));
        std::size_t ai = 0;
        while (ai < pick.size()) {
            if (++pick[ai] < per_anchor[ai].size()) break;
            pick[ai] = 0;
            ++ai;
        }
        if (ai == pick.size()) break;
    }
    return out;
}

AdaptedProcess stop_process(const ScenarioTree& tree, const AdaptedProcess& x,
                            const TreeStoppingTime& tau) {
    AdaptedProcess out(x.size(), 0.0);
    // Propagate the stopped value down the tree: once a node stops, all its
    // descendants freeze at that node's value.
    std::vector<char> frozen(x.size(), 0);
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        const std::size_t i = static_cast<std::size_t>(id);
        if (n.parent >= 0 && frozen[static_cast<std::size_t>(n.parent)]) {
            out[i] = out[static_cast<std::size_t>(n.parent)];
            frozen[i] = 1;
        } else {
            out[i] = x[i];
            frozen[i] = (tau.flag[i] == StopFlag::Stop) ? 1 : 0;
        }
    }
    return out;
}

TreeStoppingTime round_up_to_grid(const ScenarioTree& tree, const TreeStoppingTime& tau,
                                  const std::vector<int>& grid) {
    auto on_grid = [&grid](int t) {
        for (int g : grid)
            if (g == t) return true;
        return false;
    };
    TreeStoppingTime out;
    out.flag.assign(tau.flag.size(), StopFlag::Continue);
    // A path stops at the first grid time >= its tau value: mark a node Stop
    // when its time is on the grid and some ancestor-or-self carries a Stop.
    for (int id = 0; id < tree.node_count(); ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        if (on_grid(tree.node(id).time) && !tau.not_stopped_by(tree, id))
            out.flag[i] = StopFlag::Stop;
    }
    return out;
}

std::string tree_to_json(const ScenarioTree& tree) {
    nlohmann::json doc;
    doc["depth"] = tree.depth();
    nlohmann::json nodes = nlohmann::json::array();
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        nlohmann::json jn;
        jn["id"] = n.id;
        jn["parent"] = n.parent;
        jn["time"] = n.time;
        nlohmann::json children = nlohmann::json::array();
        for (std::size_t c = 0; c < n.children.size(); ++c)
            children.push_back({{"id", n.children[c]}, {"prob", n.probs[c]}});
        jn["children"] = children;
        nodes.push_back(jn);
    }
    doc["nodes"] = nodes;
    return doc.dump(2);
}

}  // namespace spreadlab
