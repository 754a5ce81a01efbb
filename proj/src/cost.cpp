#include "spreadlab/cost.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spreadlab {

double median3(double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

StrategyPath make_strategy(std::vector<double> values) {
    StrategyPath phi;
    phi.values = std::move(values);
    phi.bound = 0.0;
    for (double v : phi.values) phi.bound = std::max(phi.bound, std::abs(v));
    return phi;
}

void AlmostSimpleStrategy::validate(std::size_t grid_size) const {
    for (std::size_t j = 0; j < jumps.size(); ++j) {
        if (jumps[j].time >= grid_size)
            throw std::invalid_argument("almost simple strategy: jump beyond the grid");
        if (j > 0 && jumps[j].time <= jumps[j - 1].time)
            throw std::invalid_argument("almost simple strategy: jump times not increasing");
    }
    if (!jumps.empty() && jumps.front().time == 0 && jumps.front().at != 0.0)
        throw std::invalid_argument("almost simple strategy: nonzero at-value at time 0");
}

double AlmostSimpleStrategy::value_at(std::size_t k) const {
    double ruling = 0.0;
    for (const AsJump& j : jumps) {
        if (j.time == k) return j.at;
        if (j.time > k) break;
        ruling = j.after;
    }
    return ruling;
}

double AlmostSimpleStrategy::value_left(std::size_t k) const {
    if (k == 0) return 0.0;
    double ruling = 0.0;
    for (const AsJump& j : jumps) {
        if (j.time >= k) break;
        ruling = j.after;
    }
    return ruling;
}

StrategyPath AlmostSimpleStrategy::to_path(std::size_t grid_size) const {
    validate(grid_size);
    std::vector<double> values(grid_size, 0.0);
    for (std::size_t k = 0; k < grid_size; ++k) values[k] = value_at(k);
    return make_strategy(std::move(values));
}

namespace {

const std::vector<double>& require_price_system(const BidAskPath& path) {
    if (!path.price_system)
        throw std::invalid_argument("cost: price system required");
    return *path.price_system;
}

// Half-spread weights at a sample.
inline double buy_weight(const BidAskPath& path, const std::vector<double>& s, std::size_t k) {
    return path.ask[k] - s[k];
}
inline double sell_weight(const BidAskPath& path, const std::vector<double>& s, std::size_t k) {
    return s[k] - path.bid[k];
}

inline double trade_cost(const BidAskPath& path, const std::vector<double>& s, std::size_t priced_at,
                         double increment) {
    if (increment > 0.0) return buy_weight(path, s, priced_at) * increment;
    if (increment < 0.0) return sell_weight(path, s, priced_at) * (-increment);
    return 0.0;
}

}  // namespace

double rs_sum(const StrategyPath& phi, const BidAskPath& path, const Partition& partition,
              const Subdivision& tags) {
    const std::vector<double>& s = require_price_system(path);
    const std::vector<std::size_t>& p = partition.points;
    if (p.size() < 2) throw std::invalid_argument("rs_sum: partition needs at least two points");
    if (tags.tags.size() != p.size() - 1)
        throw std::invalid_argument("rs_sum: one tag per partition cell required");
    double acc = 0.0;
    for (std::size_t i = 1; i < p.size(); ++i) {
        if (p[i] < p[i - 1]) throw std::invalid_argument("rs_sum: partition not increasing");
        const std::size_t tag = tags.tags[i - 1];
        if (p[i - 1] == p[i]) {
            if (tag != p[i - 1]) throw std::invalid_argument("rs_sum: tag outside empty cell");
            continue;
        }
        if (tag < p[i - 1] || tag >= p[i])
            throw std::invalid_argument("rs_sum: tag outside half-open cell");
        acc += trade_cost(path, s, tag, phi.values[p[i]] - phi.values[p[i - 1]]);
    }
    return acc;
}

Subdivision left_tags(const Partition& partition) {
    Subdivision tags;
    for (std::size_t i = 1; i < partition.points.size(); ++i)
        tags.tags.push_back(partition.points[i - 1]);
    return tags;
}

ExtReal cost_on_interval(const StrategyPath& phi, const BidAskPath& path, std::size_t a,
                         std::size_t b) {
    const std::vector<double>& s = require_price_system(path);
    if (a > b || b >= path.size()) throw std::invalid_argument("cost_on_interval: bad interval");
    // The full grid is a terminal refinement: step paths have zero oscillation
    // within cells and exact variation, so the Moore-Pollard limit is this sum.
    double acc = 0.0;
    for (std::size_t j = a + 1; j <= b; ++j)
        acc += trade_cost(path, s, j - 1, phi.values[j] - phi.values[j - 1]);
    return ExtReal{acc, false};
}

AdditivityReport interval_additivity_check(const StrategyPath& phi, const BidAskPath& path,
                                           std::size_t a, std::size_t c, std::size_t b) {
    if (!(a <= c && c <= b)) throw std::invalid_argument("interval_additivity_check: bad split");
    AdditivityReport r;
    r.whole = cost_on_interval(phi, path, a, b).value;
    r.left = cost_on_interval(phi, path, a, c).value;
    r.right = cost_on_interval(phi, path, c, b).value;
    r.gap = std::abs(r.whole - (r.left + r.right));
    r.ok = r.gap <= 1e-12;
    return r;
}

CostProcess cost_process(const StrategyPath& phi, const BidAskPath& path) {
    require_price_system(path);
    if (phi.values.size() != path.size())
        throw std::invalid_argument("cost_process: strategy/path size mismatch");
    const std::size_t last = path.size() - 1;
    const int level = certified_threshold_level(path);
    const std::vector<std::size_t> taus = threshold_stopping_times(path, level);

    CostProcess cp;
    cp.level_n_star = level;
    cp.values.assign(path.size(), ExtReal{0.0, false});
    cp.left_jump.assign(path.size(), 0.0);
    cp.right_jump.assign(path.size(), 0.0);

    // C^n_t = sum_k C(phi, [tau_{2k} ^ t, tau_{2k+1} ^ t]); at the certified
    // level the pairs delimit exactly the positive-spread runs, so the sum
    // attains the supremum over interval unions on the grid.
    std::vector<double> increment_cost(path.size(), 0.0);
    for (std::size_t pair = 0; 2 * pair + 1 <= taus.size(); ++pair) {
        const std::size_t lo = taus[2 * pair];
        const std::size_t hi = (2 * pair + 1 < taus.size()) ? taus[2 * pair + 1] : last;
        for (std::size_t j = lo + 1; j <= hi; ++j)
            increment_cost[j] +=
                trade_cost(path, *path.price_system, j - 1, phi.values[j] - phi.values[j - 1]);
    }

    double running = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        if (k > 0) running += increment_cost[k];
        cp.values[k] = ExtReal{running, false};
        // A grid strategy trades by right jumps: the trade phi_k -> phi_{k+1}
        // is the right jump at t_k.
        if (k + 1 <= last) cp.right_jump[k] = increment_cost[k + 1];
    }
    return cp;
}

CostProcess almost_simple_cost(const AlmostSimpleStrategy& phi, const BidAskPath& path) {
    const std::vector<double>& s = require_price_system(path);
    phi.validate(path.size());
    const std::size_t last = path.size() - 1;

    CostProcess cp;
    cp.level_n_star = certified_threshold_level(path);
    cp.values.assign(path.size(), ExtReal{0.0, false});
    cp.left_jump.assign(path.size(), 0.0);
    cp.right_jump.assign(path.size(), 0.0);

    for (const AsJump& j : phi.jumps) {
        const double left_increment = j.at - phi.value_left(j.time);
        if (j.time > 0)
            cp.left_jump[j.time] += trade_cost(path, s, j.time - 1, left_increment);
        cp.right_jump[j.time] += trade_cost(path, s, j.time, j.after - j.at);
    }
    double running = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        running += cp.left_jump[k];                 // left jumps enter at tau <= t
        cp.values[k] = ExtReal{running, false};
        running += cp.right_jump[k];                // right jumps enter for t > tau
    }
    return cp;
}

double variation(const StrategyPath& phi, std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (std::size_t j = a + 1; j <= b; ++j) acc += std::abs(phi.values[j] - phi.values[j - 1]);
    return acc;
}

AlmostSimpleApproximation approximate_by_almost_simple(const StrategyPath& phi,
                                                       const BidAskPath& path, int n,
                                                       std::size_t a, std::size_t b) {
    if (n < 1) throw std::invalid_argument("approximate_by_almost_simple: level must be >= 1");
    if (a >= b || b >= path.size())
        throw std::invalid_argument("approximate_by_almost_simple: bad interval");
    for (std::size_t k = a; k < b; ++k)
        if (path.spread(k) <= 0.0)
            throw std::invalid_argument(
                "approximate_by_almost_simple: spread not bounded away from zero on [a, b)");

    const double threshold = 1.0 / n;
    AlmostSimpleApproximation out;
    // Track phi from the left endpoint; jump whenever the deviation from the
    // last post-jump value reaches 1/n. On a grid the infimum is attained.
    double tracked = (a + 1 <= b) ? phi.values[a + 1] : phi.values[a];
    out.strategy.jumps.push_back(AsJump{a, phi.values[a], tracked});
    std::size_t k = a + 1;
    while (k <= b) {
        if (std::abs(phi.values[k] - tracked) >= threshold) {
            const double at = phi.values[k];
            const double after = (k < b) ? phi.values[k + 1] : at;
            out.strategy.jumps.push_back(AsJump{k, at, after});
            out.ledger.push_back(HittingLedgerEntry{k, true});
            tracked = after;
        }
        ++k;
    }
    return out;
}

LiminfReport liminf_check(const StrategyPath& phi, const std::vector<StrategyPath>& sequence,
                          const BidAskPath& path, std::size_t a, std::size_t b, double tol) {
    LiminfReport r;
    r.limit_cost = cost_on_interval(phi, path, a, b).value;
    for (const StrategyPath& cand : sequence)
        r.costs.push_back(cost_on_interval(cand, path, a, b).value);
    if (r.costs.empty()) throw std::invalid_argument("liminf_check: empty sequence");
    const std::size_t tail_start = r.costs.size() / 2;
    r.tail_min = r.costs[tail_start];
    for (std::size_t i = tail_start; i < r.costs.size(); ++i)
        r.tail_min = std::min(r.tail_min, r.costs[i]);
    r.ok = r.tail_min >= r.limit_cost - tol;
    return r;
}

StrategyPath truncate_strategy(const StrategyPath& phi, double K) {
    std::vector<double> values = phi.values;
    for (double& v : values) v = median3(-K, v, K);
    return make_strategy(std::move(values));
}

}  // namespace spreadlab
