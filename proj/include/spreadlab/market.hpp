#pragma once

// Bid-ask model containers on uniform grids and the spread-structure analysis
// (zeros, excursions, threshold hitting times) that the cost and
// self-financing modules are built on.
//
// A path with N steps stores N+1 samples; values are cadlag step functions,
// constant on [t_k, t_{k+1}). The left limit at index k is the value at k-1;
// the left limit of the spread at index 0 is 0 by convention.

#include <cstddef>
#include <optional>
#include <vector>

namespace spreadlab {

struct BidAskPath {
    double horizon = 1.0;  // T; grid times are k * horizon / steps()
    std::vector<double> bid;
    std::vector<double> ask;
    std::optional<std::vector<double>> price_system;  // S with bid <= S <= ask

    std::size_t size() const { return bid.size(); }          // N+1
    std::size_t steps() const { return bid.size() - 1; }     // N
    double time_of(std::size_t k) const { return horizon * static_cast<double>(k) / static_cast<double>(steps()); }
    double spread(std::size_t k) const { return ask[k] - bid[k]; }
    double spread_left(std::size_t k) const { return k == 0 ? 0.0 : spread(k - 1); }
};

struct ValidationReport {
    std::vector<std::size_t> ordering_violations;  // bid > ask
    std::vector<std::size_t> price_violations;     // S outside [bid, ask]
    bool normalized = false;                       // 0 <= bid <= ask <= 1 everywhere
    bool valid = false;
};

ValidationReport validate_model(const BidAskPath& path);

enum class ZeroKind { ExcursionStart, RightInner };
enum class EndKind { HitZero, LeftLimitZero, Horizon };

struct ExcursionInterval {
    std::size_t start = 0;  // last-zero index before the positive run (or 0 when positive at 0)
    std::size_t end = 0;    // hitting index of the scan, or the final grid index for Horizon
    EndKind end_kind = EndKind::Horizon;
};

struct ZeroRun {
    std::size_t first = 0;
    std::size_t last = 0;  // inclusive; maximal run of spread == 0 samples
};

struct SpreadStructure {
    std::vector<std::size_t> zero_set;
    std::vector<std::pair<std::size_t, ZeroKind>> zero_classification;  // zeros strictly before T
    std::vector<std::size_t> excursion_starts;
    std::vector<ExcursionInterval> excursions;
    std::vector<ZeroRun> zero_regime;
    std::vector<std::size_t> isolated_zeros;  // spread 0 between two positive samples
    bool chatter_flagged = false;
    bool assumption_ok = false;
    int certified_level = 0;  // n*: smallest n with 2^-n <= min positive spread
};

// Classifies every zero of the spread (strictly before T) as excursion start
// or right-inner, and flags isolated-zero chatter: two isolated zeros within
// `chatter_window` samples, the grid-scale proxy for a violated spread
// assumption.
SpreadStructure check_spread_assumption(const BidAskPath& path, std::size_t chatter_window = 8);

// check_spread_assumption plus the zero-regime runs; requires assumption_ok
// and throws std::runtime_error otherwise.
SpreadStructure excursion_cover(const BidAskPath& path, std::size_t chatter_window = 8);

// Alternating hitting-time sequence tau_0 = 0 <= tau_1 < tau_2 < ...:
// odd entries are first times spread <= 2^-(level+1), even entries first
// subsequent times spread >= 2^-level. Infinite entries are dropped, so the
// returned sequence is the finite prefix.
std::vector<std::size_t> threshold_stopping_times(const BidAskPath& path, int level);

// Smallest n with 2^-n <= min positive spread; at this level the threshold
// decomposition is exact (it separates positive runs from exact zeros).
// Returns 0 when the spread never leaves zero.
int certified_threshold_level(const BidAskPath& path);

}  // namespace spreadlab
