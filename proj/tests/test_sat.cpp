#include <cmath>
#include <random>

#include "aceei/market.hpp"
#include "aceei/oracle.hpp"
#include "aceei/sat.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace aceei;
using testing_support::q;

namespace {

// All formulas over variables 1..3 built from distinct sign patterns, 1..max_clauses clauses.
std::vector<CnfFormula> small_formulas(std::size_t max_clauses) {
  std::vector<CnfFormula> out;
  for (unsigned subset = 1; subset < 256; ++subset) {
    std::vector<Clause> clauses;
    for (int pattern = 0; pattern < 8; ++pattern) {
      if (!(subset & (1u << pattern))) continue;
      clauses.push_back({{1, (pattern & 4) != 0}, {2, (pattern & 2) != 0}, {3, (pattern & 1) != 0}});
    }
    if (clauses.size() <= max_clauses) out.emplace_back(3, clauses);
  }
  return out;
}

std::vector<std::vector<bool>> all_assignments(int n) {
  std::vector<std::vector<bool>> out;
  for (int mask = 0; mask < (1 << n); ++mask) {
    std::vector<bool> a;
    for (int v = 0; v < n; ++v) a.push_back((mask >> v) & 1);
    out.push_back(a);
  }
  return out;
}

}  // namespace

TEST_CASE("DIMACS parsing") {
  auto f = parse_dimacs("c example\np cnf 3 2\n1 -2 3 0\n-1 2\n 3 0\n");
  CHECK(f.num_vars() == 3);
  REQUIRE(f.clauses().size() == 2);
  CHECK(f.clauses()[0][1].var == 2);
  CHECK_FALSE(f.clauses()[0][1].positive);
  CHECK(f.occurrences(3) == 2);
  auto again = parse_dimacs(format_dimacs(f));
  CHECK(format_dimacs(again) == format_dimacs(f));

  CHECK_THROWS_AS(parse_dimacs("1 2 3 0\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2 0\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 1 2 0\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2 4 0\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 2\n1 2 3 0\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 2 3\n"), SatError);
  CHECK_THROWS_AS(parse_dimacs("p cnf 3 1\n1 x 3 0\n"), SatError);
  std::string six = "p cnf 3 6\n";
  for (int k = 0; k < 6; ++k) six += "1 2 3 0\n";
  CHECK_THROWS_AS(parse_dimacs(six), SatError);
}

TEST_CASE("course and student counts") {
  auto one = compile_sat(parse_dimacs("p cnf 3 1\n1 -2 3 0\n"));
  CHECK(one.economy.num_courses() == 16);
  CHECK(one.economy.num_students() == 7);
  for (const auto& c : one.economy.courses()) CHECK(c.capacity == 1);

  // Every variable in all five clauses.
  std::string text = "p cnf 3 5\n1 2 3 0\n-1 2 3 0\n1 -2 3 0\n1 2 -3 0\n-1 -2 3 0\n";
  auto five = compile_sat(parse_dimacs(text));
  CHECK(five.economy.num_courses() == 44);
  CHECK(five.economy.num_courses() * 5 == 44 * five.formula.clauses().size());

  for (const auto& f : small_formulas(4)) {
    auto cs = compile_sat(f);
    CHECK(cs.economy.num_courses() == expected_course_count(f));
    CHECK(cs.economy.num_students() == 2 * static_cast<std::size_t>(f.num_vars()) + f.clauses().size());
    for (const auto& cc : cs.clauses) CHECK(cs.economy.student(cc.student).preferences.size() == 7);
  }

  auto again = compile_sat(parse_dimacs(text));
  CHECK(again.economy.courses().size() == five.economy.courses().size());
  for (std::size_t i = 0; i < again.economy.num_students(); ++i) {
    CHECK(again.economy.student(i).preferences == five.economy.student(i).preferences);
  }
}

TEST_CASE("gadget preference lists") {
  auto cs = compile_sat(parse_dimacs("p cnf 3 1\n1 -2 3 0\n"));
  const auto& v = cs.variables[0];
  const auto& st = cs.economy.student(v.s_true).preferences;
  REQUIRE(st.size() == 3);
  CHECK(st[0] == Bundle{v.d_left, v.d_center});
  CHECK(st[1] == Bundle{v.d_left, v.out_true[0]});
  CHECK(st[2] == Bundle{v.d_right});
  const auto& sf = cs.economy.student(v.s_false).preferences;
  CHECK(sf[0] == Bundle{v.d_right, v.d_center});
  CHECK(sf[1] == Bundle{v.d_right, v.out_false[0]});
  CHECK(sf[2] == Bundle{v.d_left});
  // The falsifying local assignment (F, T, F) is missing.
  for (const auto& a : cs.clauses[0].local_assignments) CHECK_FALSE((!a[0] && a[1] && !a[2]));
}

TEST_CASE("completeness witness, worked example") {
  auto cs = compile_sat(parse_dimacs("p cnf 3 1\n1 -2 3 0\n"));
  auto s = build_exact_ceei_from_assignment(cs, {true, true, true});
  const auto& x = cs.variables[0];
  CHECK(s.prices[x.out_true[0]] == q(1, 2));
  CHECK(s.prices[x.out_false[0]] == 0);
  CHECK(s.prices[x.d_left] == q(1, 2));
  CHECK(s.prices[x.d_center] == 1);
  CHECK(s.prices[x.d_right] == 0);
  CHECK(s.allocation[x.s_false] == Bundle{x.d_right, x.d_center});
  const auto& cl = cs.clauses[0];
  CHECK(s.allocation[cl.student].cost(s.prices) == 1);
  auto report = verify_aceei(cs.economy, s, AlphaBound::of(0), 0);
  CHECK(report.passed());
  for (auto z : report.z) CHECK(z == 0);
  CHECK_THROWS_AS(build_exact_ceei_from_assignment(cs, {false, true, false}), SatError);
}

TEST_CASE("completeness with five occurrences uses sixths") {
  std::string text = "p cnf 3 5\n1 2 3 0\n-1 2 3 0\n1 -2 3 0\n1 2 -3 0\n-1 -2 3 0\n";
  auto cs = compile_sat(parse_dimacs(text));
  auto s = build_exact_ceei_from_assignment(cs, {true, true, true});
  const auto& v = cs.variables[0];
  for (CourseIndex j : v.out_true) CHECK(s.prices[j] == q(1, 6));
  for (CourseIndex j : v.out_false) CHECK(s.prices[j] == 0);
  CHECK(s.prices[v.d_left] == q(1, 6));
  CHECK(verify_aceei(cs.economy, s, AlphaBound::of(0), 0).passed());
}

TEST_CASE("completeness over every small formula") {
  std::size_t witnesses = 0;
  for (const auto& f : small_formulas(4)) {
    auto cs = compile_sat(f);
    for (const auto& a : all_assignments(3)) {
      if (!satisfies(f, a)) continue;
      auto s = build_exact_ceei_from_assignment(cs, a);
      CHECK(verify_aceei(cs.economy, s, AlphaBound::of(0), 0).passed());
      for (const auto& b : s.budgets) CHECK(b == 1);
      auto back = extract_assignment_from_solution(cs, s);
      CHECK(back.flagged_variables.empty());
      CHECK(back.flagged_clauses.empty());
      for (int v = 0; v < 3; ++v) CHECK(back.assignment[static_cast<std::size_t>(v)] == std::optional<bool>(a[static_cast<std::size_t>(v)]));
      ++witnesses;
    }
  }
  CHECK(witnesses > 500);
}

TEST_CASE("extraction leaves conflicted variables unassigned") {
  auto cs = compile_sat(parse_dimacs("p cnf 3 1\n1 -2 3 0\n"));
  auto s = build_exact_ceei_from_assignment(cs, {true, true, true});
  const auto& v = cs.variables[0];
  s.allocation[v.s_true] = cs.economy.student(v.s_true).preferences[0];
  s.allocation[v.s_false] = cs.economy.student(v.s_false).preferences[0];
  auto out = extract_assignment_from_solution(cs, s);
  CHECK_FALSE(out.assignment[0]);
  CHECK(out.flagged_variables == std::vector<int>{1});
}

TEST_CASE("oracle equilibria extract to satisfying assignments") {
  // A sample that keeps the unit-test run short; the acceptance sweep covers all formulas.
  int checked = 0;
  for (const char* text : {"p cnf 3 1\n1 -2 3 0\n", "p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n"}) {
    auto cs = compile_sat(parse_dimacs(text));
    OracleOptions opts;
    opts.max_enumeration = 1'000'000'000'000ULL;
    auto all = enumerate_all_exact_ceei(cs.economy, 0, opts);
    CHECK_FALSE(all.empty());
    for (const auto& s : all) {
      auto out = extract_assignment_from_solution(cs, s);
      CHECK(satisfies(cs.formula, out.assignment));
      CHECK(verify_aceei(cs.economy, s, AlphaBound::of(0), 0).passed());
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("soundness error bound") {
  CHECK(soundness_error_bound(0.2, 20) == doctest::Approx(std::sqrt(0.8)));
  CHECK(soundness_error_bound(0, 20) == 0);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> eps(0, 1);
  for (int k = 0; k < 50; ++k) {
    double e = eps(rng);
    double n = static_cast<double>(5 * (1 + rng() % 40));
    double m = 44.0 * n / 5.0;
    CHECK(soundness_error_bound(e, n) == doctest::Approx(std::sqrt(e / 44.0 * m)));
  }
  CHECK_THROWS_AS(soundness_error_bound(-1, 3), SatError);
}
