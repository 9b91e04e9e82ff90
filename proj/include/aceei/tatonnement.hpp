#pragma once

#include <cstdint>

#include "aceei/economy.hpp"
#include "aceei/market.hpp"

namespace aceei {

struct TatonnementConfig {
  Rational step_up = make_rational(1, 20);
  Rational step_down = make_rational(1, 40);
  int max_iters = 2000;
  /// Runs from different starting points; run 0 starts from zero prices, later runs from seeded prices.
  int restart_seeds = 4;
  /// Budgets are drawn from [1, 1 + budget_spread]; must lie in [0, beta].
  Rational budget_spread = make_rational(1, 20);
  std::uint64_t seed = 1;
  /// Move only the course with the largest |z_j| each iteration (lowest index on ties) instead of all of them.
  bool one_course_per_step = false;
};

struct TatonnementResult {
  Solution solution;
  ClearingReport report;
  int restart = 0;    // run that produced the best iterate
  int iteration = 0;  // iteration within that run
  int iterations_total = 0;
};

/// Deterministic in (economy, config, beta). Always returns the best iterate found, verified.
TatonnementResult tatonnement_solve(const Economy& economy, const TatonnementConfig& config, const Rational& beta);

struct RandomEconomySpec {
  std::size_t students = 20;
  std::size_t courses = 10;
  std::size_t max_bundle = 3;   // k
  std::size_t min_list = 1;
  std::size_t max_list = 5;
  std::int64_t min_capacity = 1;
  std::int64_t max_capacity = 4;
};

/// Seeded random economy; lists hold distinct nonempty bundles of size at most max_bundle.
Economy random_economy(const RandomEconomySpec& spec, std::uint64_t seed);

}  // namespace aceei
