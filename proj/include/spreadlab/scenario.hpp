#pragma once

// Finite filtered probability spaces as scenario trees, plus the adapted
// machinery built on top of them: node-indexed processes, stopping times
// (with an explicit "never" state), conditional expectations and exhaustive
// stopping-time enumeration for small trees.
//
// Trees are immutable after construction and node ids are breadth-first,
// so every serialized report is byte-stable.

#include <cstdint>
#include <string>
#include <vector>

namespace spreadlab {

struct TreeNode {
    int id = 0;
    int parent = -1;      // -1 for the root
    int time = 0;         // grid index in {0,...,depth}
    std::vector<int> children;
    std::vector<double> probs;  // transition probabilities, same order as children
};

class ScenarioTree {
public:
    // branching[t] = number of children of every time-t node (t = 0..depth-1),
    // probabilities = one positive, normalized vector per non-terminal node in
    // breadth-first order. Throws std::invalid_argument on bad input.
    static ScenarioTree build(const std::vector<int>& branching,
                              const std::vector<std::vector<double>>& probabilities);

    // Uniform transition probabilities.
    static ScenarioTree build_uniform(const std::vector<int>& branching);

    int depth() const { return depth_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const TreeNode& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
    const std::vector<int>& layer(int t) const { return layers_[static_cast<std::size_t>(t)]; }
    int root() const { return 0; }
    bool is_terminal(int id) const { return node(id).time == depth_; }

    // Unconditional probability of reaching a node.
    double reach_probability(int id) const { return reach_prob_[static_cast<std::size_t>(id)]; }

    static constexpr double kProbSumTol = 1e-12;

private:
    int depth_ = 0;
    std::vector<TreeNode> nodes_;
    std::vector<std::vector<int>> layers_;
    std::vector<double> reach_prob_;
};

// A real value per node. F_t-measurability is structural: the value depends
// only on the node.
using AdaptedProcess = std::vector<double>;

enum class StopFlag : std::uint8_t { Continue = 0, Stop = 1, Infinite = 2 };

// Stopping time as a per-node decision. Along each root-to-leaf path the
// effective value is the time of the first Stop node, Infinite marks "never".
// Flags below the first Stop on a path are ignored.
struct TreeStoppingTime {
    std::vector<StopFlag> flag;  // size = node_count

    // Value of the stopping time along the path from the root to `leaf`;
    // returns kNever when the path never stops.
    static constexpr int kNever = -1;
    int value_on_path(const ScenarioTree& tree, int leaf) const;

    // True iff no node on the path root..node (inclusive) is marked Stop.
    bool not_stopped_by(const ScenarioTree& tree, int node) const;
};

// Weighted average of x over the children of every time-(from_time-1) node;
// all other nodes keep their value.
AdaptedProcess conditional_expectation(const ScenarioTree& tree, const AdaptedProcess& x,
                                       int from_time);

// Structural predictability on trees: the value at every non-root node is
// decided at its parent, i.e. siblings agree.
bool is_predictable(const ScenarioTree& tree, const AdaptedProcess& x);

// E[x_{to_time} | node] for a node with time(node) <= to_time.
double conditional_expectation_at(const ScenarioTree& tree, const AdaptedProcess& x,
                                  int node, int to_time);

// Closed-form recursive count of {time(node),...,depth}-valued stopping times
// on the subtree of `node`: N(leaf)=1, N(v)=1+prod_c N(c). Saturates at
// UINT64_MAX on overflow.
std::uint64_t count_subtree_stopping_times(const ScenarioTree& tree, int node);

// Count of all {from_time,...,depth}-valued stopping times on the whole tree:
// the product of the subtree counts over the time-from_time nodes.
std::uint64_t count_stopping_times(const ScenarioTree& tree, int from_time);

// Exhaustive, duplicate-free enumeration of the finite-valued stopping times
// counted above. Unreached flags are Continue; every reached terminal node is
// Stop. Throws std::runtime_error if the count exceeds `cap`.
std::vector<TreeStoppingTime> enumerate_subtree_stopping_times(const ScenarioTree& tree, int node,
                                                               std::uint64_t cap = 1000000);
std::vector<TreeStoppingTime> enumerate_stopping_times(const ScenarioTree& tree, int from_time,
                                                       std::uint64_t cap = 1000000);

// X stopped at tau: X^tau(v) = X at the first Stop node on the path, if any
// node at time <= time(v) stopped, else X(v).
AdaptedProcess stop_process(const ScenarioTree& tree, const AdaptedProcess& x,
                            const TreeStoppingTime& tau);

// Round a stopping time up to the next grid point in `grid` (sorted subset of
// {0..depth} containing depth). Infinite stays infinite.
TreeStoppingTime round_up_to_grid(const ScenarioTree& tree, const TreeStoppingTime& tau,
                                  const std::vector<int>& grid);

std::string tree_to_json(const ScenarioTree& tree);

}  // namespace spreadlab
