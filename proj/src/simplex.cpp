#include "aceei/simplex.hpp"

#include <optional>
#include <stdexcept>

namespace aceei::lp {

void LinearProgram::add(std::vector<Rational> coefficients, Relation relation, Rational rhs) {
  if (coefficients.size() != num_variables_) throw std::invalid_argument("constraint width differs from variable count");
  constraints_.push_back({std::move(coefficients), relation, std::move(rhs)});
}

void LinearProgram::add(std::span<const std::pair<std::size_t, Rational>> terms, Relation relation, Rational rhs) {
  std::vector<Rational> row(num_variables_, Rational(0));
  for (const auto& [var, coef] : terms) row.at(var) += coef;
  add(std::move(row), relation, std::move(rhs));
}

void LinearProgram::add(std::initializer_list<std::pair<std::size_t, Rational>> terms, Relation relation,
                        Rational rhs) {
  add(std::span<const std::pair<std::size_t, Rational>>(terms.begin(), terms.size()), relation, std::move(rhs));
}

namespace {

// Dense tableau: rows_[i] * x = rhs_[i] with basis_[i] basic in row i.
class Tableau {
 public:
  Tableau(const LinearProgram& program) : num_original_(program.num_variables()) {
    const auto& cons = program.constraints();
    std::size_t slack_count = 0;
    std::size_t artificial_count = 0;
    for (const auto& c : cons) {
      bool flip = c.rhs < 0;
      Relation rel = c.relation;
      if (flip && rel != Relation::kEqual) rel = (rel == Relation::kLessEqual) ? Relation::kGreaterEqual : Relation::kLessEqual;
      if (rel != Relation::kEqual) ++slack_count;
      if (rel != Relation::kLessEqual) ++artificial_count;
    }
    first_artificial_ = num_original_ + slack_count;
    width_ = first_artificial_ + artificial_count;

    std::size_t next_slack = num_original_;
    std::size_t next_artificial = first_artificial_;
    for (const auto& c : cons) {
      bool flip = c.rhs < 0;
      Relation rel = c.relation;
      if (flip && rel != Relation::kEqual) rel = (rel == Relation::kLessEqual) ? Relation::kGreaterEqual : Relation::kLessEqual;
      std::vector<Rational> row(width_, Rational(0));
      for (std::size_t j = 0; j < num_original_; ++j) row[j] = flip ? Rational(-c.coefficients[j]) : c.coefficients[j];
      Rational rhs = flip ? Rational(-c.rhs) : c.rhs;
      std::size_t basic = 0;
      if (rel == Relation::kLessEqual) {
        row[next_slack] = 1;
        basic = next_slack++;
      } else if (rel == Relation::kGreaterEqual) {
        row[next_slack++] = -1;
        row[next_artificial] = 1;
        basic = next_artificial++;
      } else {
        row[next_artificial] = 1;
        basic = next_artificial++;
      }
      rows_.push_back(std::move(row));
      rhs_.push_back(std::move(rhs));
      basis_.push_back(basic);
    }
  }

  bool has_artificials() const { return width_ > first_artificial_; }

  // Sets the objective (length width_, zero on columns not mentioned) and prices out the basis.
  void set_objective(std::vector<Rational> cost) {
    cost_ = std::move(cost);
    reduced_ = cost_;
    value_ = 0;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const Rational& cb = cost_[basis_[i]];
      if (cb == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (rows_[i][j] != 0) reduced_[j] -= cb * rows_[i][j];
      }
      value_ += cb * rhs_[i];
    }
  }

  // Runs Bland's rule; `allow` limits entering columns. Returns false when unbounded.
  bool optimize(std::size_t allowed_width) {
    while (true) {
      std::optional<std::size_t> entering;
      for (std::size_t j = 0; j < allowed_width; ++j) {
        if (reduced_[j] > 0) {
          entering = j;
          break;
        }
      }
      if (!entering) return true;
      std::optional<std::size_t> leaving;
      Rational best_ratio;
      for (std::size_t i = 0; i < rows_.size(); ++i) {
        const Rational& a = rows_[i][*entering];
        if (a <= 0) continue;
        Rational ratio = rhs_[i] / a;
        if (!leaving || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[*leaving])) {
          leaving = i;
          best_ratio = ratio;
        }
      }
      if (!leaving) return false;
      pivot(*leaving, *entering);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    Rational a = rows_[row][col];
    for (std::size_t j = 0; j < width_; ++j) {
      if (rows_[row][j] != 0) rows_[row][j] /= a;
    }
    rhs_[row] /= a;
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (i == row) continue;
      Rational f = rows_[i][col];
      if (f == 0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (rows_[row][j] != 0) rows_[i][j] -= f * rows_[row][j];
      }
      rhs_[i] -= f * rhs_[row];
    }
    Rational r = reduced_[col];
    if (r != 0) {
      for (std::size_t j = 0; j < width_; ++j) {
        if (rows_[row][j] != 0) reduced_[j] -= r * rows_[row][j];
      }
      value_ += r * rhs_[row];
    }
    basis_[row] = col;
  }

  // After a successful phase I, pivots remaining zero-valued artificials out or drops redundant rows.
  void expel_artificials() {
    for (std::size_t i = 0; i < rows_.size();) {
      if (basis_[i] < first_artificial_) {
        ++i;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t j = 0; j < first_artificial_; ++j) {
        if (rows_[i][j] != 0) {
          col = j;
          break;
        }
      }
      if (col) {
        pivot(i, *col);
        ++i;
      } else {
        rows_.erase(rows_.begin() + static_cast<std::ptrdiff_t>(i));
        rhs_.erase(rhs_.begin() + static_cast<std::ptrdiff_t>(i));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
      }
    }
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> x(num_original_, Rational(0));
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      if (basis_[i] < num_original_) x[basis_[i]] = rhs_[i];
    }
    return x;
  }

  const Rational& value() const { return value_; }
  std::size_t width() const { return width_; }
  std::size_t first_artificial() const { return first_artificial_; }

 private:
  std::size_t num_original_;
  std::size_t first_artificial_ = 0;
  std::size_t width_ = 0;
  std::vector<std::vector<Rational>> rows_;
  std::vector<Rational> rhs_;
  std::vector<std::size_t> basis_;
  std::vector<Rational> cost_;
  std::vector<Rational> reduced_;
  Rational value_;
};

bool phase_one(Tableau& t) {
  if (!t.has_artificials()) return true;
  std::vector<Rational> cost(t.width(), Rational(0));
  for (std::size_t j = t.first_artificial(); j < t.width(); ++j) cost[j] = -1;
  t.set_objective(std::move(cost));
  t.optimize(t.width());
  if (t.value() < 0) return false;
  t.expel_artificials();
  return true;
}

}  // namespace

Result maximize(const LinearProgram& program, std::span<const Rational> objective) {
  if (objective.size() != program.num_variables()) throw std::invalid_argument("objective width differs from variable count");
  Tableau t(program);
  Result result;
  if (!phase_one(t)) {
    result.status = Status::kInfeasible;
    return result;
  }
  std::vector<Rational> cost(t.width(), Rational(0));
  for (std::size_t j = 0; j < objective.size(); ++j) cost[j] = objective[j];
  t.set_objective(std::move(cost));
  if (!t.optimize(t.first_artificial())) {
    result.status = Status::kUnbounded;
    return result;
  }
  result.status = Status::kOptimal;
  result.values = t.solution();
  result.objective = t.value();
  return result;
}

Result find_feasible(const LinearProgram& program) {
  Tableau t(program);
  Result result;
  if (!phase_one(t)) {
    result.status = Status::kInfeasible;
    return result;
  }
  result.status = Status::kOptimal;
  result.values = t.solution();
  result.objective = 0;
  return result;
}

bool satisfies(const LinearProgram& program, std::span<const Rational> values) {
  if (values.size() != program.num_variables()) return false;
  for (const Rational& v : values) {
    if (v < 0) return false;
  }
  for (const auto& c : program.constraints()) {
    Rational lhs = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (c.coefficients[j] != 0) lhs += c.coefficients[j] * values[j];
    }
    switch (c.relation) {
      case Relation::kLessEqual:
        if (lhs > c.rhs) return false;
        break;
      case Relation::kGreaterEqual:
        if (lhs < c.rhs) return false;
        break;
      case Relation::kEqual:
        if (lhs != c.rhs) return false;
        break;
    }
  }
  return true;
}

}  // namespace aceei::lp
