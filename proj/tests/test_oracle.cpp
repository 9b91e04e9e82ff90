#include <doctest.h>

#include <random>

#include "aceei/market.hpp"
#include "aceei/oracle.hpp"
#include "helpers.hpp"

using namespace aceei;
using namespace testing_support;

TEST_CASE("lp_feasible_prices: single student keeps the only bundle") {
  Economy e(courses({1}), {student("s", {Bundle{0}})});
  FeasibilityQuery query{{Bundle{0}}, q(0)};
  auto r = lp_feasible_prices(e, query);
  REQUIRE(r);
  CHECK(r->prices[0] <= r->budgets[0]);
  CHECK(r->budgets[0] == 1);
}

TEST_CASE("lp_feasible_prices: a less preferred allocation needs the better bundle priced out") {
  Economy e(courses({1, 1}), {student("s", {Bundle{0}, Bundle{1}})});
  FeasibilityQuery query{{Bundle{1}}, q(1, 10)};
  auto r = lp_feasible_prices(e, query);
  REQUIRE(r);
  CHECK(r->prices[0] >= r->budgets[0] + query.delta);
  CHECK(r->prices[1] <= r->budgets[0]);
  Solution s{r->prices, r->budgets, query.allocation};
  CHECK(verify_aceei(e, s, AlphaBound::of(10), q(1, 10)).condition1);
}

TEST_CASE("lp_feasible_prices: variable gadget allocation") {
  // D_L, D_C, D_R, O_T1..5, O_F1..5
  std::vector<Course> cs{{"DL", 1}, {"DC", 1}, {"DR", 1}};
  for (int j = 1; j <= 5; ++j) cs.push_back({"OT" + std::to_string(j), 1});
  for (int j = 1; j <= 5; ++j) cs.push_back({"OF" + std::to_string(j), 1});
  Bundle t_out{0, 3, 4, 5, 6, 7};
  Bundle f_out{2, 8, 9, 10, 11, 12};
  Economy e(cs, {student("sT", {Bundle{0, 1}, t_out, Bundle{2}}), student("sF", {Bundle{1, 2}, f_out, Bundle{0}})});
  FeasibilityQuery query{{t_out, Bundle{1, 2}}, q(0)};
  REQUIRE(lp_feasible_prices(e, query));

  PriceVector witness{q(1, 6), q(1), q(0)};
  for (int j = 0; j < 5; ++j) witness.push_back(q(1, 6));
  for (int j = 0; j < 5; ++j) witness.push_back(q(0));
  CHECK(demand(e, 0, witness, q(1)) == t_out);
  CHECK(demand(e, 1, witness, q(1)) == (Bundle{1, 2}));
}

TEST_CASE("enumerate_exact_ceei small cases") {
  Economy one(courses({1}), {student("s", {Bundle{0}})});
  auto s = enumerate_exact_ceei(one, q(0));
  REQUIRE(s);
  CHECK(s->allocation[0] == Bundle{0});
  CHECK(verify_aceei(one, *s, AlphaBound::of(0), q(0)).passed());

  // Two identical students, one seat: hand enumeration of the four allocations.
  Economy two(courses({1}), {student("a", {Bundle{0}}), student("b", {Bundle{0}})});
  CHECK_FALSE(enumerate_exact_ceei(two, q(0)));
  auto t = enumerate_exact_ceei(two, q(1, 10));
  REQUIRE(t);
  CHECK(t->prices[0] > 1);
  CHECK(t->prices[0] <= q(11, 10));
  CHECK(verify_aceei(two, *t, AlphaBound::of(0), q(1, 10)).passed());
  // Both orientations are found.
  CHECK(enumerate_all_exact_ceei(two, q(1, 10)).size() == 2);
}

TEST_CASE("enumeration budget") {
  std::vector<Student> ss;
  for (int i = 0; i < 20; ++i) ss.push_back(student("s" + std::to_string(i), {Bundle{0}, Bundle{1}, Bundle{0, 1}}));
  Economy big(courses({5, 5}), ss);
  OracleOptions small;
  small.max_enumeration = 1000;
  CHECK_THROWS_AS(enumerate_exact_ceei(big, q(0), small), EnumerationBudgetExceeded);
}

TEST_CASE("oracle soundness on random micro-economies") {
  std::mt19937_64 rng(5);
  int found = 0;
  for (int t = 0; t < 150; ++t) {
    Economy e = random_micro(rng, 1 + rng() % 3, 1 + rng() % 3, 3, 3);
    Rational beta = (t % 2) ? q(1, 10) : q(0);
    for (const Solution& s : enumerate_all_exact_ceei(e, beta)) {
      ++found;
      auto report = verify_aceei(e, s, AlphaBound::of(0), beta);
      CHECK(report.passed());
      CHECK(report.alpha_sq == 0);
    }
  }
  CHECK(found > 0);
}
