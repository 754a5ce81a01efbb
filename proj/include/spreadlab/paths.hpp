#pragma once

// Reproducible synthetic generators: random-walk and fractional Brownian
// bid-ask paths, the reflected-walk model with exact zeros, pattern-driven
// spread fixtures, and random scenario trees. All randomness is counter-based
// and keyed by (seed, stream, counter), so ensembles are order-independent.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spreadlab/cost.hpp"
#include "spreadlab/market.hpp"
#include "spreadlab/scenario.hpp"

namespace spreadlab {

// Stateless counter-based generator (SplitMix64 finalizer, two rounds).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t bits(std::uint64_t counter) const;
    double uniform(std::uint64_t counter) const;          // in [0, 1)
    double gaussian(std::uint64_t counter) const;         // Box-Muller, uses counters 2c, 2c+1
    bool coin(std::uint64_t counter) const;

    // Sequential convenience wrappers advancing an internal cursor.
    std::uint64_t next_bits() { return bits(cursor_++); }
    double next_uniform() { return uniform(cursor_++); }
    double next_gaussian() { return gaussian(cursor_++); }
    bool next_coin() { return coin(cursor_++); }
    std::uint64_t cursor() const { return cursor_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t cursor_ = 0;
};

enum class GeneratorKind { RandomWalk, ReflectedWalk, Fbm, SpreadExcursion, TreeRandom };

struct GeneratorConfig {
    GeneratorKind kind = GeneratorKind::RandomWalk;
    std::size_t steps = 64;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    double volatility = 0.2;
    double hurst = 0.5;            // fbm only, in (0, 1)
    double spread_level = 0.1;     // half-spread is spread_level / 2
    double alpha = 1.0;            // reflected walk price system S = alpha |B|
    double mid0 = 0.5;
    bool clip_to_unit = true;      // clamp bid/ask/S into [0, 1]
    std::string pattern;           // spread_excursion: one of {'0','+'} per step
    // tree_random
    int tree_depth = 3;
    int tree_max_branch = 3;
    double tree_zero_spread_prob = 0.25;
};

struct GeneratedScenario {
    ScenarioTree tree;
    AdaptedProcess bid;
    AdaptedProcess ask;
};

BidAskPath generate(const GeneratorConfig& config);
GeneratedScenario generate_tree(const GeneratorConfig& config);

// Simple +-1 random walk of the reflected model, exposed for the
// counterexample ensembles: walk[k] = W_k, W_0 = 0.
std::vector<int> simple_walk(std::size_t steps, std::uint64_t seed, std::uint64_t path_index);

// Step-function-consistent refinement: every cell is split into `factor`
// copies, so cadlag samples repeat with floor(j / factor) and coarse-grid
// computations embed exactly.
BidAskPath refine(const BidAskPath& path, int factor);

// The matching refinement for holdings on left-open cells: ceil(j / factor).
StrategyPath refine_strategy(const StrategyPath& phi, int factor);

// Fractional Gaussian noise, unit variance per step: Davies-Harte circulant
// embedding (power-of-two FFT) with a Cholesky fallback.
std::vector<double> fractional_gaussian_noise(std::size_t n, double hurst, CounterRng& rng);

}  // namespace spreadlab
