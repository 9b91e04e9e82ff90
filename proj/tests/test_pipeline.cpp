#include <cmath>
#include <random>

#include "aceei/oracle.hpp"
#include "aceei/pipeline.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace aceei;
using testing_support::courses;
using testing_support::q;
using testing_support::student;

namespace {

PipelineConfig default_config() { return PipelineConfig{}; }

// Nearest multiple by integer arithmetic on the scaled value, ties up.
Rational nearest(const Rational& x, const Rational& step) {
  Rational scaled = x / step + q(1, 2);
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
  return Rational(f) * step;
}

std::vector<Economy> micro_sweep(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Economy> out;
  while (out.size() < count) {
    std::size_t m = 1 + rng() % 3, n = 1 + rng() % 3;
    out.push_back(testing_support::random_micro(rng, m, n, 3, 3));
  }
  return out;
}

}  // namespace

TEST_CASE("round_budgets") {
  PipelineConfig cfg;
  cfg.beta = q(1, 2);
  cfg.epsilon = q(1, 2);  // beta_bar 1/4, grid 1/16 at M = 2
  CHECK(cfg.beta_bar() == q(1, 4));
  auto r = round_budgets(std::vector<Rational>{q(103, 100), q(17, 16), q(3, 2), q(1)}, cfg, 2);
  CHECK(r[0] == nearest(q(103, 100), q(1, 16)));
  CHECK(r[0] == 1);  // 16.48 sixteenths
  CHECK(r[1] == q(17, 16));
  CHECK(r[2] == q(3, 2));
  CHECK(r[3] == 1);
  CHECK(round_budgets(r, cfg, 2) == r);
  CHECK_THROWS_AS(round_budgets(std::vector<Rational>{q(2)}, cfg, 2), PipelineError);

  // Grid beta_bar * 3^-3 at M = 3; rounding stays within the bounds.
  std::mt19937_64 rng(5);
  PipelineConfig c3;
  const Rational step = c3.beta_bar() / 27;
  for (int k = 0; k < 200; ++k) {
    Rational b = 1 + c3.beta * q(static_cast<long>(rng() % 1001), 1000);
    auto out = round_budgets(std::vector<Rational>{b}, c3, 3)[0];
    CHECK(out >= 1);
    CHECK(out <= 1 + c3.beta);
    CHECK(is_integer(out / step));
    CHECK(abs(Rational(out - b)) <= step / 2);
  }
}

TEST_CASE("tax magnitudes follow the induction order") {
  Economy e(courses({1, 1}), {student("a", {Bundle{0}, Bundle{1}}), student("b", {Bundle{0, 1}})});
  PipelineConfig cfg;
  std::vector<Rational> b(2, 1 + cfg.beta / 2);
  auto t = select_taxes(e, b, cfg);
  // a: empty (nu=1), {c2} (nu=2), {c1} (nu=3); b: empty (nu=4), {c1,c2} (nu=5).
  CHECK(t.nu[0] == std::vector<std::size_t>{3, 2, 1});
  CHECK(t.nu[1] == std::vector<std::size_t>{5, 4});
  CHECK(t.nu_max() == 5);
  for (StudentIndex i = 0; i < 2; ++i) {
    for (std::size_t r = 0; r < t.tau[i].size(); ++r) {
      CHECK(t.tau[i][r] == -cfg.beta_bar() / pow(Rational(2), 4 * t.nu[i][r]));
    }
  }
  CHECK(t.tau[0][0] > t.tau[0][1]);
  CHECK(t.tau[0][1] > t.tau[0][2]);
  CHECK(check_tax_properties(e, b, t, cfg).all());

  std::vector<Rational> floor_budget{q(1), q(1)};
  CHECK_THROWS_AS(select_taxes(e, floor_budget, cfg), PipelineError);
}

TEST_CASE("tax properties hold on every micro economy") {
  std::size_t dependent = 0;
  for (const auto& e : micro_sweep(150, 21)) {
    PipelineConfig cfg;
    std::vector<Rational> b;
    for (StudentIndex i = 0; i < e.num_students(); ++i) b.push_back(1 + cfg.beta * q(static_cast<long>(i + 1), 4));
    b = round_budgets(b, cfg, e.num_courses());
    auto t = select_taxes(e, b, cfg);
    auto rep = check_tax_properties(e, b, t, cfg);
    CHECK(rep.all());
    CHECK(rep.subsets_checked == (std::size_t{1} << e.num_pairs()) - 1);
    dependent += rep.dependent_subsets;
  }
  CHECK(dependent > 0);
}

TEST_CASE("tax checker catches violations") {
  Economy e(courses({1}), {student("a", {Bundle{0}}), student("b", {Bundle{0}})});
  PipelineConfig cfg;
  std::vector<Rational> b(2, 1 + cfg.beta / 2);
  auto t = select_taxes(e, b, cfg);

  auto same = t;
  same.tau[1] = same.tau[0];  // parallel planes coincide: distinct and general position both fail
  auto rep = check_tax_properties(e, b, same, cfg);
  CHECK_FALSE(rep.distinct);
  CHECK_FALSE(rep.general_position);
  CHECK(rep.small);

  auto flipped = t;
  std::swap(flipped.tau[0][0], flipped.tau[0][1]);
  CHECK_FALSE(check_tax_properties(e, b, flipped, cfg).monotone);

  auto big = t;
  big.tau[0][0] = cfg.epsilon;
  rep = check_tax_properties(e, b, big, cfg);
  CHECK_FALSE(rep.small);
  CHECK_FALSE(rep.bounded);
}

TEST_CASE("scaled taxes are re-checked") {
  for (const auto& e : micro_sweep(40, 4)) {
    PipelineConfig cfg;
    cfg.scaled_taxes = true;
    std::vector<Rational> b(e.num_students(), 1 + cfg.beta / 2);
    auto t = select_taxes(e, b, cfg);
    CHECK(check_tax_properties(e, b, t, cfg).all());
  }
}

TEST_CASE("price adjustment") {
  PipelineConfig cfg;
  Economy two(courses({1}), {student("a", {Bundle{0}}), student("b", {Bundle{0}})});
  std::vector<Rational> b(2, 1 + cfg.beta / 2);
  auto t = select_taxes(two, b, cfg);
  auto f = price_adjustment(two, std::vector<Rational>{q(0)}, b, t, cfg);
  CHECK(f[0] == q(1, 4));
  // Truncation first: -1 is evaluated at 0.
  CHECK(price_adjustment(two, std::vector<Rational>{q(-1)}, b, t, cfg)[0] == q(1, 4));
  // Above every budget nobody buys: z = -1.
  auto hi = price_adjustment(two, std::vector<Rational>{q(3)}, b, t, cfg);
  CHECK(hi[0] == cfg.price_cap() - q(1, 4));

  Economy one(courses({1}), {student("a", {Bundle{0}})});
  std::vector<Rational> b1{1 + cfg.beta / 2};
  auto t1 = select_taxes(one, b1, cfg);
  CHECK(price_adjustment(one, std::vector<Rational>{q(1, 2)}, b1, t1, cfg)[0] == q(1, 2));  // z = 0

  Economy none(courses({2}), {});
  CHECK(price_adjustment(none, std::vector<Rational>{q(1, 3)}, {}, select_taxes(none, {}, cfg), cfg)[0] == q(1, 3));
}

TEST_CASE("correspondence sample") {
  PipelineConfig cfg;
  cfg.grid_step = q(1, 20);
  Economy one(courses({1}), {student("a", {Bundle{0}})});
  std::vector<Rational> b{1 + cfg.beta / 2};
  auto t = select_taxes(one, b, cfg);
  // Off every plane: same demand as at p itself.
  PriceVector p{q(1, 2)};
  auto g = correspondence_sample(one, p, b, t, cfg);
  CHECK(g[0] == q(1, 2) + q(1, 40));
  CHECK(g == correspondence_sample(one, p, b, t, cfg));

  // On the plane: the result is one of the two one-sided limits.
  const Rational level = b[0] + t.of_rank(0, 0);
  auto at = correspondence_sample(one, PriceVector{level}, b, t, cfg);
  auto below = price_adjustment(one, PriceVector{level - q(1, 40)}, b, t, cfg);
  auto above = price_adjustment(one, PriceVector{level + q(1, 40)}, b, t, cfg);
  CHECK((at == below || at == above));
  CHECK(below != above);
}

TEST_CASE("fixed point: one student, one seat") {
  PipelineConfig cfg;
  Economy one(courses({1}), {student("a", {Bundle{0}})});
  std::vector<Rational> b{1 + cfg.beta / 2};
  auto t = select_taxes(one, b, cfg);
  auto fp = find_fixed_point(one, b, t, cfg);
  REQUIRE(fp.meets_threshold());
  const auto& p = *fp.p_star;
  CHECK(p[0] <= b[0] + t.of_rank(0, 0));
  CHECK(taxed_excess_demand(one, p, b, t)[0] == 0);

  // The scan keeps a global minimizer; recompute every displacement independently.
  const Rational h = cfg.desk_grid_step();
  Rational best = -1;
  for (Rational x = 0; x <= cfg.price_cap(); x += h) {
    auto g = correspondence_sample(one, PriceVector{x}, b, t, cfg);
    Rational d = abs(Rational(std::clamp(g[0], Rational(0), cfg.price_cap()) - x));
    if (best < 0 || d < best) best = d;
  }
  CHECK(fp.grid_displacement == best);
}

TEST_CASE("fixed point: no students") {
  PipelineConfig cfg;
  Economy none(courses({1, 2}), {});
  auto t = select_taxes(none, {}, cfg);
  auto fp = find_fixed_point(none, {}, t, cfg);
  REQUIRE(fp.meets_threshold());
  CHECK(*fp.p_star == PriceVector{q(0), q(0)});
  CHECK(fp.fixed_vertices == 1);
  // f(p') = p + h/2 moves every grid point except the top corner, where truncation holds it.
  CHECK(fp.grid_point == PriceVector{cfg.price_cap(), cfg.price_cap()});
  CHECK(fp.grid_displacement == 0);
}

TEST_CASE("rounding LP") {
  PipelineConfig cfg;
  Economy none(courses({1}), {});
  auto trivial = solve_rounding_lp(none, PriceVector{q(0)}, {}, select_taxes(none, {}, cfg));
  CHECK(trivial.pivotal.empty());
  CHECK(trivial.residual == std::vector<std::int64_t>{-1});

  // Not a fixed point: p = 0 with two buyers for one seat.
  Economy two(courses({1}), {student("a", {Bundle{0}}), student("b", {Bundle{0}})});
  std::vector<Rational> b(2, 1 + cfg.beta / 2);
  auto t = select_taxes(two, b, cfg);
  CHECK_THROWS_AS(solve_rounding_lp(two, PriceVector{q(0)}, b, t), PipelineError);

  // On b's plane, a priced out (a's level is lower): b is pivotal with ladder {c}, empty.
  const Rational level_b = b[1] + t.of_rank(1, 0);
  REQUIRE(level_b > b[0] + t.of_rank(0, 0));
  auto prob = solve_rounding_lp(two, PriceVector{level_b}, b, t);
  REQUIRE(prob.pivotal.size() == 1);
  CHECK(prob.pivotal[0].student == 1);
  CHECK(prob.pivotal[0].ladder_ranks == std::vector<std::size_t>{0, 1});
  CHECK(prob.pivotal[0].a == std::vector<Rational>{q(1), q(0)});
  CHECK(prob.residual == std::vector<std::int64_t>{-1});
}

TEST_CASE("derandomization by hand") {
  Economy e(courses({1, 1}), {student("a", {Bundle{0}, Bundle{1}}), student("b", {Bundle{1}, Bundle{0}})});
  RoundingProblem single;
  single.pivotal.push_back({0, {0}, {0, 1}, {q(1), q(0)}});
  single.sigma = 2;
  auto d = derandomize_rounding(e, single);
  CHECK(d.choice == std::vector<std::size_t>{0});
  CHECK(d.final_error_sq == 0);

  // Two students with opposite ladders, each a coin flip: the second choice cancels the first.
  RoundingProblem sym;
  sym.pivotal.push_back({0, {0}, {0, 1}, {q(1, 2), q(1, 2)}});
  sym.pivotal.push_back({1, {0}, {1, 0}, {q(1, 2), q(1, 2)}});
  sym.sigma = 2;
  auto ds = derandomize_rounding(e, sym);
  // Each student contributes variance 2 * 1/4 = 1/2.
  CHECK(ds.expectation_trace.front() == 1);
  CHECK(ds.choice == std::vector<std::size_t>{0, 1});
  CHECK(ds.final_error_sq == 0);
  for (const auto& v : ds.expectation_trace) CHECK(v <= ds.bound);
  // All four outcomes: the error is 0 when the picks cancel, 2 otherwise.
  Rational mean = 0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) mean += q(1, 4) * (x != y ? 0 : 2);
  CHECK(mean == ds.expectation_trace.front());
  auto ex = derandomize_rounding_exhaustive(e, sym);
  CHECK(ex.choice == ds.choice);
  CHECK(ex.expectation_trace == ds.expectation_trace);
}

TEST_CASE("pipeline: one student, one course") {
  PipelineConfig cfg;
  Economy one(courses({1}), {student("a", {Bundle{0}})});
  auto r = run_pipeline(one, cfg);
  REQUIRE(r.certified);
  CHECK(r.report.alpha_sq == 0);
  CHECK(r.solution.allocation[0] == Bundle{0});
  CHECK(enumerate_exact_ceei(one, cfg.beta).has_value());
  REQUIRE(r.trace.size() == 7);
  const auto& props = r.trace[2]["properties"];
  for (const char* key : {"small", "monotone", "bounded", "distinct", "general_position"}) CHECK(props[key] == true);
}

TEST_CASE("pipeline on micro economies") {
  std::size_t certified = 0, pivotal = 0;
  for (const auto& e : micro_sweep(120, 77)) {
    PipelineConfig cfg;
    auto r = run_pipeline(e, cfg);
    REQUIRE(r.certified);
    ++certified;
    pivotal += !r.problem.pivotal.empty();
    CHECK(r.report.passed());
    CHECK(r.report.alpha_sq <= pipeline_bound_sq(e));
    if (2 * e.max_bundle_size() <= e.num_courses()) CHECK(r.report.alpha_sq <= existence_bound_sq(e));
    for (StudentIndex i = 0; i < e.num_students(); ++i) {
      CHECK(abs(Rational(r.solution.budgets[i] - r.rounded_budgets[i])) < cfg.epsilon);
    }
    // Expected clearing is exact for the LP distribution.
    for (CourseIndex j = 0; j < e.num_courses(); ++j) {
      Rational expected = r.problem.residual[j];
      for (const auto& ps : r.problem.pivotal)
        for (std::size_t f = 0; f < ps.a.size(); ++f)
          if (ps.ladder_ranks[f] < e.student(ps.student).preferences.size() &&
              e.student(ps.student).preferences[ps.ladder_ranks[f]].contains(j))
            expected += ps.a[f];
      if ((*r.fixed_point.p_star)[j] > 0) CHECK(expected == 0);
      else CHECK(expected <= 0);
    }
    auto ex = derandomize_rounding_exhaustive(e, r.problem);
    CHECK(ex.final_error_sq == r.derandomization.final_error_sq);
    CHECK(ex.expectation_trace == r.derandomization.expectation_trace);
    for (const auto& v : r.derandomization.expectation_trace) CHECK(v <= r.derandomization.bound);
    CHECK(r.report.alpha_sq <= r.derandomization.final_error_sq);
  }
  CHECK(certified == 120);
  CHECK(pivotal > 10);
}

TEST_CASE("pipeline is deterministic") {
  for (const auto& e : micro_sweep(10, 3)) {
    PipelineConfig cfg;
    auto a = run_pipeline(e, cfg);
    auto b = run_pipeline(e, cfg);
    CHECK(a.solution == b.solution);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].dump() == b.trace[k].dump());
  }
}

TEST_CASE("pipeline config validation") {
  Economy one(courses({1}), {student("a", {Bundle{0}})});
  PipelineConfig cfg;
  cfg.beta = 0;
  CHECK_THROWS_AS(run_pipeline(one, cfg), PipelineError);
  cfg = PipelineConfig{};
  cfg.initial_budgets = {q(1), q(1)};
  CHECK_THROWS_AS(run_pipeline(one, cfg), PipelineError);
  cfg = PipelineConfig{};
  CHECK(cfg.full_grid_step(3, 2) == cfg.beta_bar() / pow(Rational(3), 18));
}

TEST_CASE("pipeline caps") {
  Economy one(courses({1}), {student("a", {Bundle{0}})});
  PipelineConfig cfg;
  cfg.max_vertex_candidates = 1;
  auto r = run_pipeline(one, cfg);
  CHECK_FALSE(r.certified);
  CHECK(r.fixed_point.vertex_cap_hit);
  CHECK_FALSE(r.fixed_point.p_star.has_value());
  REQUIRE(r.trace.size() == 4);
  CHECK(r.trace.back()["step"] == "find_fixed_point");
  CHECK(r.trace.back()["p_star"].is_null());
  cfg = PipelineConfig{};
  cfg.max_grid_points = 3;
  CHECK_THROWS_AS(run_pipeline(one, cfg), PipelineBudgetExceeded);
}
