#pragma once

#include "rumdp/model.hpp"
#include "rumdp/rvi.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rumdp {

enum class Family { chain, betting_game, parallel_betting, glider, engagement };

std::string to_string(Family f);
Family parse_family(const std::string& s);

struct BenchmarkSpec {
    Family family = Family::chain;
    /// chain: k; betting games: horizon n; engagement: ladder length L; glider: X.
    std::size_t size = 3;
    /// glider: Y.
    std::size_t size_y = 0;
    std::uint64_t seed = 0;
    /// Overrides the hidden parameters drawn from the seed.
    std::optional<std::vector<double>> true_params;
};

struct Benchmark {
    BenchmarkSpec spec;
    Pmdp model;
    std::vector<double> true_params;
    Mdp truth;
    Objective objective;
    /// Short description of the fixed constants used by the generator.
    std::string notes;
};

/// Hidden parameters: uniform in the box shrunk by 0.05 on every face, keyed by the seed.
std::vector<double> draw_true_params(const ParameterSpace& ps, std::uint64_t seed);

/**
 * Desk-scale benchmark generator.
 *
 * chain(k), k >= 2, theta in [0.5,1]: states s0 .. s{k-1} (target) and a fail sink. Action
 * `risky` moves on with theta and fails otherwise; at odd states it moves on
 * with theta/2, fails with (1-theta)/2 and otherwise enters a bridge state
 * that moves on with theta. `weak` moves on with theta/2 and fails
 * otherwise. Reach value theta^(k-1).
 *
 * betting_game(n): start with 10 coins, n rounds, bets 0/1/2/5/10 bounded by
 * the capital. Bets 1 and 2 win with t1; bets 5 and 10 with
 * t1 + t2 * min(c,100)/100. t1 in [0.4,0.6], t2 in [0,0.2]. After the last
 * round `stop` pays the capital.
 *
 * parallel_betting(n): two games share the bet; game one wins with t1, game
 * two with t2 (small bets) or t2 + t3 * min(c2,100)/100 (large bets). t1, t2 in
 * [0.4,0.6], t3 in [0,0.4]. The joint
 * outcome probabilities are products, hence bilinear. Final reward c1 + c2.
 *
 * glider(X,Y): grid navigation from (0,0) to (X-1,Y-1) with known currents and
 * hazard cells. A horizontal move fails with t1*|h| and drifts vertically
 * with t4*|v|; a vertical move fails with t2*|v| and drifts with t3*|h|;
 * outcome probabilities are products. Maximizes the probability of reaching
 * the goal.
 *
 * engagement(L): ladder 0..L (0 churn, L purchase), zones cold/warm/hot,
 * actions light/medium/aggressive, cooldown after aggressive. Five response
 * types mix with weights t1..t4 in [0,0.25] and t5 = 1 - (t1+..+t4),
 * substituted symbolically; sum t <= 1 is a standing constraint. Maximizes the
 * probability of purchase.
 */
Benchmark generate(const BenchmarkSpec& spec);

} // namespace rumdp
