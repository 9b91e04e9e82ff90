#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "aceei/rational.hpp"

namespace aceei::lp {

enum class Relation { kLessEqual, kGreaterEqual, kEqual };

struct Constraint {
  std::vector<Rational> coefficients;  // dense, one per variable
  Relation relation = Relation::kLessEqual;
  Rational rhs;
};

/// Linear program over nonnegative variables. Dense and exact; meant for tiny instances.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_variables) : num_variables_(num_variables) {}

  std::size_t num_variables() const { return num_variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  void add(std::vector<Rational> coefficients, Relation relation, Rational rhs);
  void add(std::span<const std::pair<std::size_t, Rational>> terms, Relation relation, Rational rhs);
  void add(std::initializer_list<std::pair<std::size_t, Rational>> terms, Relation relation, Rational rhs);

 private:
  std::size_t num_variables_;
  std::vector<Constraint> constraints_;
};

enum class Status { kOptimal, kInfeasible, kUnbounded };

struct Result {
  Status status = Status::kInfeasible;
  std::vector<Rational> values;
  Rational objective;
};

/// Two-phase primal simplex with Bland's rule. Maximizes `objective` (one entry per variable).
Result maximize(const LinearProgram& program, std::span<const Rational> objective);

/// Phase I only: any feasible point, or kInfeasible.
Result find_feasible(const LinearProgram& program);

/// Exact constraint check, independent of the solver.
bool satisfies(const LinearProgram& program, std::span<const Rational> values);

}  // namespace aceei::lp
