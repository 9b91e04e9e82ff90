#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aceei/economy.hpp"
#include "aceei/market.hpp"

namespace aceei {

class GridBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  Rational step;
  Rational price_max;
  /// Courses held at a fixed price. They are treated as exogenous inputs: their price is not searched and
  /// their excess demand is left out of the clearing error.
  std::map<CourseIndex, Rational> pinned;
  /// Budget menu shared by all students. When absent, every budget in [1, 1+beta] is considered.
  std::optional<std::vector<Rational>> budget_levels;
  /// Search-tree node limit; exceeding it throws GridBudgetExceeded.
  std::uint64_t max_nodes = 200'000'000;
  /// Worker count; 0 reads ACEEI_LAB_THREADS (default 1).
  unsigned threads = 0;
};

/// Clearing error squared, skipping pinned courses.
Rational grid_alpha_sq(const Economy& economy, const GridSpec& grid, std::span<const Rational> prices,
                       std::span<const Bundle> allocation);

/// Every grid price vector for which some budget assignment yields clearing error within `alpha_bound`.
/// Each result carries the best budgets found (ties go to the first in search order) and the demanded
/// allocation. Results are sorted by price vector.
std::vector<Solution> grid_price_search(const Economy& economy, const GridSpec& grid, const Rational& beta,
                                        const AlphaBound& alpha_bound);

/// Reference implementation: plain enumeration of grid prices and of each student's distinct budget
/// levels. Only for tiny instances; used to cross-check the main search.
std::vector<Solution> grid_price_search_brute(const Economy& economy, const GridSpec& grid, const Rational& beta,
                                              const AlphaBound& alpha_bound);

/// Budgets in [1, 1+beta] (or in the menu) at which the student's demand changes, plus the lowest one.
std::vector<Rational> critical_budgets(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                                       const Rational& beta, const std::optional<std::vector<Rational>>& menu);

/// Worker count from ACEEI_LAB_THREADS, at least 1.
unsigned lab_threads();

}  // namespace aceei
