#include "aceei/market.hpp"

#include <cmath>

namespace aceei {

std::size_t demand_rank(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                        const Rational& budget) {
  const auto& prefs = economy.student(student).preferences;
  for (std::size_t r = 0; r < prefs.size(); ++r) {
    if (prefs[r].cost(prices) <= budget) return r;
  }
  return prefs.size();
}

Bundle demand(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
              const Rational& budget) {
  const auto& prefs = economy.student(student).preferences;
  std::size_t r = demand_rank(economy, student, prices, budget);
  return r < prefs.size() ? prefs[r] : Bundle{};
}

Bundle demand(const Economy& economy, std::string_view student_id, std::span<const Rational> prices,
              const Rational& budget) {
  return demand(economy, economy.student_index(student_id), prices, budget);
}

std::size_t taxed_demand_rank(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                              const Rational& budget, std::span<const Rational> taxes) {
  const auto& prefs = economy.student(student).preferences;
  if (taxes.size() != prefs.size()) {
    throw EconomyError("missing tax entries for student '" + economy.student(student).id + "'");
  }
  for (std::size_t r = 0; r < prefs.size(); ++r) {
    if (prefs[r].cost(prices) - taxes[r] <= budget) return r;
  }
  return prefs.size();
}

Bundle taxed_demand(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                    const Rational& budget, std::span<const Rational> taxes) {
  const auto& prefs = economy.student(student).preferences;
  std::size_t r = taxed_demand_rank(economy, student, prices, budget, taxes);
  return r < prefs.size() ? prefs[r] : Bundle{};
}

std::vector<std::int64_t> enrollment(const Economy& economy, std::span<const Bundle> allocation) {
  std::vector<std::int64_t> seats(economy.num_courses(), 0);
  for (const Bundle& b : allocation) {
    for (CourseIndex j : b.courses()) ++seats.at(j);
  }
  return seats;
}

std::int64_t course_excess(const Rational& price, std::int64_t enrolled, std::int64_t capacity) {
  std::int64_t excess = enrolled - capacity;
  if (price == 0 && excess < 0) return 0;
  return excess;
}

ClearingReport clearing_error(const Economy& economy, std::span<const Rational> prices,
                              std::span<const Bundle> allocation) {
  check_prices(economy, prices);
  if (allocation.size() != economy.num_students()) throw EconomyError("allocation length differs from student count");

  ClearingReport report;
  auto seats = enrollment(economy, allocation);
  report.z.resize(economy.num_courses());
  report.alpha_sq = 0;
  for (CourseIndex j = 0; j < economy.num_courses(); ++j) {
    report.z[j] = course_excess(prices[j], seats[j], economy.course(j).capacity);
    report.alpha_sq += Rational(report.z[j]) * report.z[j];
  }
  report.alpha = std::sqrt(report.alpha_sq.get_d());
  return report;
}

double AlphaBound::value() const { return std::sqrt(alpha_sq_.get_d()); }

ClearingReport verify_aceei(const Economy& economy, const Solution& solution, const AlphaBound& alpha_bound,
                            const Rational& beta) {
  check_solution(economy, solution);
  ClearingReport report = clearing_error(economy, solution.prices, solution.allocation);

  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    if (demand(economy, i, solution.prices, solution.budgets[i]) != solution.allocation[i]) {
      report.condition1 = false;
      report.first_demand_violation = i;
      break;
    }
  }

  report.condition2 = alpha_bound.admits(report.alpha_sq);
  for (CourseIndex j = 0; j < report.z.size(); ++j) {
    if (report.z[j] != 0) {
      report.first_uncleared_course = j;
      break;
    }
  }

  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const Rational& b = solution.budgets[i];
    if (b < 1 || b > 1 + beta) {
      report.condition3 = false;
      report.first_budget_violation = i;
      break;
    }
  }
  return report;
}

Rational existence_bound_sq(const Economy& economy) {
  return make_rational(static_cast<long>(economy.max_bundle_size() * economy.num_courses()), 2);
}

double existence_bound(const Economy& economy) { return std::sqrt(existence_bound_sq(economy).get_d()); }

}  // namespace aceei
