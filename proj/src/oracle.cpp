#include "aceei/oracle.hpp"

#include <functional>
#include <limits>

#include "aceei/simplex.hpp"

namespace aceei {

std::optional<PricesAndBudgets> lp_feasible_prices(const Economy& economy, const FeasibilityQuery& query) {
  const std::size_t m = economy.num_courses();
  const std::size_t n = economy.num_students();
  if (query.allocation.size() != n) throw EconomyError("allocation length differs from student count");
  if (query.delta <= 0) throw EconomyError("strictness slack must be positive");
  if (query.beta < 0) throw EconomyError("beta must be nonnegative");

  lp::LinearProgram program(m + n);
  auto b = [m](StudentIndex i) { return m + i; };
  const Rational cap = 1 + query.beta + query.delta;
  for (CourseIndex j = 0; j < m; ++j) program.add({{j, Rational(1)}}, lp::Relation::kLessEqual, cap);
  for (CourseIndex j : query.zero_priced) program.add({{j, Rational(1)}}, lp::Relation::kEqual, Rational(0));

  for (StudentIndex i = 0; i < n; ++i) {
    program.add({{b(i), Rational(1)}}, lp::Relation::kGreaterEqual, Rational(1));
    program.add({{b(i), Rational(1)}}, lp::Relation::kLessEqual, 1 + query.beta);
    const Bundle& held = query.allocation[i];
    auto rank = economy.rank_of(i, held);
    if (!rank) throw EconomyError("allocated bundle not permissible for student '" + economy.student(i).id + "'");

    std::vector<std::pair<std::size_t, Rational>> terms;
    for (CourseIndex j : held.courses()) terms.emplace_back(j, Rational(1));
    terms.emplace_back(b(i), Rational(-1));
    program.add(terms, lp::Relation::kLessEqual, Rational(0));

    const auto& prefs = economy.student(i).preferences;
    for (std::size_t r = 0; r < *rank; ++r) {
      terms.clear();
      for (CourseIndex j : prefs[r].courses()) terms.emplace_back(j, Rational(1));
      terms.emplace_back(b(i), Rational(-1));
      program.add(terms, lp::Relation::kGreaterEqual, query.delta);
    }
  }

  lp::Result result = lp::find_feasible(program);
  if (result.status != lp::Status::kOptimal) return std::nullopt;
  PricesAndBudgets out;
  out.prices.assign(result.values.begin(), result.values.begin() + static_cast<std::ptrdiff_t>(m));
  out.budgets.assign(result.values.begin() + static_cast<std::ptrdiff_t>(m), result.values.end());
  return out;
}

std::uint64_t allocation_space_size(const Economy& economy) {
  std::uint64_t total = 1;
  for (const Student& s : economy.students()) {
    std::uint64_t options = s.preferences.size() + 1;
    if (total > std::numeric_limits<std::uint64_t>::max() / options) return std::numeric_limits<std::uint64_t>::max();
    total *= options;
  }
  return total;
}

namespace {

// True when some student prefers a bundle made only of courses it already holds or courses that must be
// free; such a bundle costs no more than the held one, so no prices can support the allocation.
bool forced_cheaper(const Economy& economy, const std::vector<Bundle>& allocation,
                    const std::vector<std::int64_t>& seats) {
  for (StudentIndex i = 0; i < allocation.size(); ++i) {
    const auto& prefs = economy.student(i).preferences;
    const Bundle& held = allocation[i];
    for (const Bundle& better : prefs) {
      if (better == held) break;
      bool covered = true;
      for (CourseIndex j : better.courses()) {
        if (!held.contains(j) && seats[j] >= economy.course(j).capacity) {
          covered = false;
          break;
        }
      }
      if (covered) return true;
    }
  }
  return false;
}

// Visits allocations with no oversubscribed course and zero clearing error achievable, calling
// `accept` for each supported one; stops when `accept` returns false.
void search(const Economy& economy, const Rational& beta, const OracleOptions& options,
            const std::function<bool(Solution)>& accept) {
  if (allocation_space_size(economy) > options.max_enumeration) {
    throw EnumerationBudgetExceeded("allocation space exceeds enumeration budget of " +
                                    std::to_string(options.max_enumeration));
  }
  const std::size_t n = economy.num_students();
  std::vector<std::int64_t> seats(economy.num_courses(), 0);
  std::vector<Bundle> allocation(n);
  bool stop = false;

  std::function<void(StudentIndex)> visit = [&](StudentIndex i) {
    if (stop) return;
    if (i == n) {
      FeasibilityQuery query;
      query.allocation = allocation;
      query.beta = beta;
      query.delta = options.delta;
      for (CourseIndex j = 0; j < seats.size(); ++j) {
        if (seats[j] < economy.course(j).capacity) query.zero_priced.push_back(j);
      }
      if (forced_cheaper(economy, allocation, seats)) return;
      auto found = lp_feasible_prices(economy, query);
      if (!found) return;
      Solution s{std::move(found->prices), std::move(found->budgets), allocation};
      if (!accept(std::move(s))) stop = true;
      return;
    }
    const auto& prefs = economy.student(i).preferences;
    for (std::size_t r = 0; r <= prefs.size() && !stop; ++r) {
      const Bundle bundle = r < prefs.size() ? prefs[r] : Bundle{};
      bool fits = true;
      for (CourseIndex j : bundle.courses()) {
        if (seats[j] + 1 > economy.course(j).capacity) fits = false;
      }
      if (!fits) continue;
      for (CourseIndex j : bundle.courses()) ++seats[j];
      allocation[i] = bundle;
      visit(i + 1);
      for (CourseIndex j : bundle.courses()) --seats[j];
    }
  };
  visit(0);
}

}  // namespace

std::optional<Solution> enumerate_exact_ceei(const Economy& economy, const Rational& beta,
                                             const OracleOptions& options) {
  std::optional<Solution> first;
  search(economy, beta, options, [&](Solution s) {
    first = std::move(s);
    return false;
  });
  return first;
}

std::vector<Solution> enumerate_all_exact_ceei(const Economy& economy, const Rational& beta,
                                               const OracleOptions& options) {
  std::vector<Solution> all;
  search(economy, beta, options, [&](Solution s) {
    all.push_back(std::move(s));
    return true;
  });
  return all;
}

}  // namespace aceei
