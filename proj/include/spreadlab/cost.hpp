#pragma once

// Pathwise transaction-cost calculus: modified Riemann-Stieltjes sums, the
// cost term on closed intervals, the running cost process realized through
// the certified threshold decomposition, closed-form costs of almost simple
// strategies, and the 1/n hitting-time approximation.
//
// Conventions. A strategy path phi stores phi_k = position held on the
// left-open cell (t_{k-1}, t_k]; phi_k is decided at t_{k-1} (predictable),
// so the trade phi_k -> phi_{k+1} is a right jump at t_k priced at index k.
// Almost simple strategies additionally carry distinct at/after values per
// jump time; a left jump at tau is priced at the previous sample (index
// tau-1), matching left-limit prices on step paths.

#include <cstddef>
#include <vector>

#include "spreadlab/market.hpp"

namespace spreadlab {

struct Partition {
    std::vector<std::size_t> points;  // grid indices, a = p_0 <= ... <= p_n = b
};

struct Subdivision {
    std::vector<std::size_t> tags;  // s_i in [p_{i-1}, p_i), one per cell; s_i = p_{i-1} for empty cells
};

struct StrategyPath {
    std::vector<double> values;  // size N+1; values[k] = holding on (t_{k-1}, t_k]
    double bound = 0.0;          // sup |phi|, maintained by make_strategy

    double at(std::size_t k) const { return values[k]; }
};

StrategyPath make_strategy(std::vector<double> values);

struct AsJump {
    std::size_t time = 0;
    double at = 0.0;     // phi at the jump time
    double after = 0.0;  // phi just after the jump time
};

// Finitely many jumps at strictly increasing grid times, piecewise constant
// in between, initial value 0. A jump at time 0 must have at == 0 (there is
// nothing before 0 to jump from).
struct AlmostSimpleStrategy {
    std::vector<AsJump> jumps;

    void validate(std::size_t grid_size) const;
    double value_at(std::size_t k) const;    // phi(t_k): at-value at a jump, ruling after-value otherwise
    double value_left(std::size_t k) const;  // phi(t_k-)
    // Collapse to a grid path; at-values win at jump indices. Lossless iff the
    // strategy has right jumps only.
    StrategyPath to_path(std::size_t grid_size) const;
};

// Extended real with an explicit infinity marker so downstream ledgers branch
// deterministically instead of doing float-inf arithmetic.
struct ExtReal {
    double value = 0.0;
    bool infinite = false;
};

struct CostProcess {
    std::vector<ExtReal> values;     // C at each grid index
    std::vector<double> left_jump;   // Delta C at t_k (trade priced at left limit)
    std::vector<double> right_jump;  // Delta+ C at t_k (trade priced at t_k)
    int level_n_star = 0;

    double total() const { return values.back().value; }
};

// Modified Riemann-Stieltjes sum R(phi, P, lambda). Requires a price system
// and a subdivision compatible with P (s_i < p_i on non-degenerate cells).
double rs_sum(const StrategyPath& phi, const BidAskPath& path, const Partition& partition,
              const Subdivision& tags);

// Left-endpoint tags for a partition.
Subdivision left_tags(const Partition& partition);

// Cost term of phi on [a, b], the Moore-Pollard limit of the modified sums.
// On a step grid the full grid is a terminal refinement, so the limit is the
// full-grid sum with left-endpoint tags. Requires spread > 0 on [a, b) or
// finite variation of phi on [a, b] (always true on a finite grid).
ExtReal cost_on_interval(const StrategyPath& phi, const BidAskPath& path, std::size_t a,
                         std::size_t b);

struct AdditivityReport {
    double whole = 0.0;
    double left = 0.0;
    double right = 0.0;
    double gap = 0.0;  // |whole - left - right|
    bool ok = false;
};

AdditivityReport interval_additivity_check(const StrategyPath& phi, const BidAskPath& path,
                                           std::size_t a, std::size_t c, std::size_t b);

// Running cost process realized as the threshold-interval sum at the certified
// level n*; exact on the grid.
CostProcess cost_process(const StrategyPath& phi, const BidAskPath& path);

// Closed-form cost of an almost simple strategy: left jumps priced at the
// left-limit spread, right jumps at the current spread.
CostProcess almost_simple_cost(const AlmostSimpleStrategy& phi, const BidAskPath& path);

// Pathwise variation of phi over (a, b]: sum of |phi_j - phi_{j-1}|.
double variation(const StrategyPath& phi, std::size_t a, std::size_t b);

struct HittingLedgerEntry {
    std::size_t time = 0;
    bool attained = true;  // on a grid the infimum is always attained
};

struct AlmostSimpleApproximation {
    AlmostSimpleStrategy strategy;
    std::vector<HittingLedgerEntry> ledger;
};

// 1/n approximation of phi on [a, b] by an almost simple strategy: jump times
// are the hitting times of |phi - tracked| >= 1/n, the approximation equals
// phi at a and stays within 1/n of phi on [a, b]. Requires spread bounded
// away from zero on [a, b).
AlmostSimpleApproximation approximate_by_almost_simple(const StrategyPath& phi,
                                                       const BidAskPath& path, int n,
                                                       std::size_t a, std::size_t b);

struct LiminfReport {
    std::vector<double> costs;  // C(phi^k, I) per sequence element
    double tail_min = 0.0;      // min over the second half of the sequence
    double limit_cost = 0.0;    // C(phi, I)
    bool ok = false;            // tail_min >= limit_cost - tol
};

LiminfReport liminf_check(const StrategyPath& phi, const std::vector<StrategyPath>& sequence,
                          const BidAskPath& path, std::size_t a, std::size_t b,
                          double tol = 1e-9);

// median(-K, phi, K) componentwise.
StrategyPath truncate_strategy(const StrategyPath& phi, double K);

double median3(double a, double b, double c);

}  // namespace spreadlab
