#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "aceei/economy.hpp"

namespace aceei {

class EnumerationBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Demand constraints for one fixed allocation, posed as linear feasibility in (p, b).
struct FeasibilityQuery {
  std::vector<Bundle> allocation;
  Rational beta = 0;
  /// Bundles preferred to the allocated one must cost at least b_i + delta.
  Rational delta = make_rational(1, 1000);
  /// Courses forced to price 0.
  std::vector<CourseIndex> zero_priced;
};

struct PricesAndBudgets {
  PriceVector prices;
  std::vector<Rational> budgets;
};

/// Prices p >= 0 and budgets in [1, 1+beta] under which every allocated bundle is affordable and every
/// preferred bundle costs at least b_i + delta. Prices are capped at 1+beta+delta, which loses nothing.
std::optional<PricesAndBudgets> lp_feasible_prices(const Economy& economy, const FeasibilityQuery& query);

struct OracleOptions {
  Rational delta = make_rational(1, 1000);
  /// Upper limit on the product over students of (|list| + 1).
  std::uint64_t max_enumeration = 1'000'000;
};

/// First exactly clearing allocation (depth-first over students, most-preferred bundle first) that is
/// supported by prices and budgets in [1, 1+beta]. Throws EnumerationBudgetExceeded.
std::optional<Solution> enumerate_exact_ceei(const Economy& economy, const Rational& beta,
                                             const OracleOptions& options = {});

/// Every exactly clearing allocation with a supporting (p, b), in the same order.
std::vector<Solution> enumerate_all_exact_ceei(const Economy& economy, const Rational& beta,
                                               const OracleOptions& options = {});

/// Product over students of (|list| + 1), saturating at UINT64_MAX.
std::uint64_t allocation_space_size(const Economy& economy);

}  // namespace aceei
