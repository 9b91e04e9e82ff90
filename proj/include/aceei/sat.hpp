#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aceei/economy.hpp"
#include "aceei/json_io.hpp"

namespace aceei {

class SatError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Literal {
  int var = 0;  // 1-based
  bool positive = true;
};

using Clause = std::vector<Literal>;

/// Every clause has exactly three distinct variables; each variable occurs at most five times.
class CnfFormula {
 public:
  CnfFormula() = default;
  /// Throws SatError when an invariant fails.
  CnfFormula(int num_vars, std::vector<Clause> clauses);

  int num_vars() const { return num_vars_; }
  const std::vector<Clause>& clauses() const { return clauses_; }
  int occurrences(int var) const;

 private:
  int num_vars_ = 0;
  std::vector<Clause> clauses_;
};

inline constexpr int kMaxOccurrences = 5;

/// DIMACS: `c` comment lines, `p cnf V C`, clauses as signed integers terminated by 0.
CnfFormula parse_dimacs(std::string_view text);
std::string format_dimacs(const CnfFormula& formula);

/// truth[v-1] is the value of variable v.
bool satisfies(const CnfFormula& formula, const std::vector<bool>& truth);
/// Unassigned variables satisfy no literal.
bool satisfies(const CnfFormula& formula, const std::vector<std::optional<bool>>& partial);

struct VariableCourses {
  CourseIndex d_left, d_center, d_right;
  std::vector<CourseIndex> out_true;   // one per occurrence
  std::vector<CourseIndex> out_false;  // one per occurrence
  StudentIndex s_true, s_false;
};

struct ClauseCourses {
  CourseIndex dilution;
  StudentIndex student;
  /// Truth values (per literal position, of the variable) for each of the seven bundles, in list order.
  std::vector<std::array<bool, 3>> local_assignments;
};

struct CompiledSat {
  CnfFormula formula;
  Economy economy;
  std::vector<VariableCourses> variables;
  std::vector<ClauseCourses> clauses;
  /// occurrence[c][k]: index of clause c's k-th literal among its variable's occurrences.
  std::vector<std::array<std::size_t, 3>> occurrence;
};

/// Variable gadgets (3 + 2d courses for d occurrences), then one dilution course per clause. Capacities 1.
CompiledSat compile_sat(const CnfFormula& formula);

/// Sum over variables of (3 + 2d) plus the clause count.
std::size_t expected_course_count(const CnfFormula& formula);

/// Exact CEEI with unit budgets for a satisfying assignment. Throws SatError otherwise.
Solution build_exact_ceei_from_assignment(const CompiledSat& compiled, const std::vector<bool>& truth);

struct SatExtraction {
  std::vector<std::optional<bool>> assignment;
  std::vector<int> flagged_variables;  // 1-based; gadget courses with nonzero clearing error
  std::vector<std::size_t> flagged_clauses;
};

SatExtraction extract_assignment_from_solution(const CompiledSat& compiled, const Solution& solution);

/// Economy JSON plus the formula and the course names of every gadget.
Json compiled_sat_to_json(const CompiledSat& compiled);
/// Human-readable summary: per-variable occurrence counts and the M= N= totals.
std::string sat_inventory(const CompiledSat& compiled);

/// sqrt(epsilon * n / 5).
double soundness_error_bound(double epsilon_frac, double n_clauses);

}  // namespace aceei
