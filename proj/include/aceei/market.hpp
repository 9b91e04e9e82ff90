#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aceei/economy.hpp"

namespace aceei {

// Demand. Affordability is inclusive: a bundle is affordable when its cost is <= the budget.
// Ranks index the student's preference list; the list length denotes the empty bundle.

std::size_t demand_rank(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                        const Rational& budget);

/// Most-preferred affordable bundle (possibly empty). Throws std::out_of_range for a bad index.
Bundle demand(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
              const Rational& budget);
/// Same, by student id. Throws EconomyError for an unknown id.
Bundle demand(const Economy& economy, std::string_view student_id, std::span<const Rational> prices,
              const Rational& budget);

/// Bundle x is affordable iff p.x - taxes[rank(x)] <= budget. `taxes` is aligned with the
/// student's preference list; a length mismatch throws EconomyError.
std::size_t taxed_demand_rank(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                              const Rational& budget, std::span<const Rational> taxes);
Bundle taxed_demand(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                    const Rational& budget, std::span<const Rational> taxes);

/// Seats taken per course.
std::vector<std::int64_t> enrollment(const Economy& economy, std::span<const Bundle> allocation);

/// Clearing error entry for one course given its price, enrollment and capacity.
std::int64_t course_excess(const Rational& price, std::int64_t enrolled, std::int64_t capacity);

struct ClearingReport {
  std::vector<std::int64_t> z;
  Rational alpha_sq;
  double alpha = 0.0;

  bool condition1 = true;
  bool condition2 = true;
  bool condition3 = true;
  std::optional<StudentIndex> first_demand_violation;
  std::optional<CourseIndex> first_uncleared_course;
  std::optional<StudentIndex> first_budget_violation;

  bool passed() const { return condition1 && condition2 && condition3; }
};

/// Fills z, alpha_sq and alpha; condition fields keep their defaults.
ClearingReport clearing_error(const Economy& economy, std::span<const Rational> prices,
                              std::span<const Bundle> allocation);

/// Bound on the clearing error, held squared so that irrational bounds such as
/// sqrt(kM/2) compare exactly.
class AlphaBound {
 public:
  static AlphaBound of(const Rational& alpha) { return AlphaBound(alpha * alpha); }
  static AlphaBound squared(const Rational& alpha_sq) { return AlphaBound(alpha_sq); }

  const Rational& squared() const { return alpha_sq_; }
  double value() const;
  bool admits(const Rational& alpha_sq) const { return alpha_sq <= alpha_sq_; }

 private:
  explicit AlphaBound(Rational alpha_sq) : alpha_sq_(std::move(alpha_sq)) {}
  Rational alpha_sq_;
};

/// Checks the three (alpha, beta)-CEEI conditions; violations are report fields.
ClearingReport verify_aceei(const Economy& economy, const Solution& solution, const AlphaBound& alpha_bound,
                            const Rational& beta);

/// kM/2, the square of the guaranteed clearing error.
Rational existence_bound_sq(const Economy& economy);
double existence_bound(const Economy& economy);

}  // namespace aceei
