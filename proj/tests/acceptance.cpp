// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aceei/gadgets.hpp"
#include "aceei/grid_search.hpp"
#include "aceei/market.hpp"
#include "aceei/oracle.hpp"
#include "aceei/pipeline.hpp"
#include "aceei/sat.hpp"
#include "aceei/tatonnement.hpp"
#include "helpers.hpp"

using namespace aceei;
using testing_support::q;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  std::string first_failure;

  void fail(const std::string& why) {
    if (pass) first_failure = why;
    pass = false;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fixed(double v, int digits = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// M <= 3, N <= 3, lists of at most 3 bundles.
std::vector<Economy> micro_sweep(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Economy> out;
  for (std::size_t t = 0; t < count; ++t) {
    const std::size_t m = 1 + rng() % 3, n = 1 + rng() % 3;
    out.push_back(testing_support::random_micro(rng, m, n, 3, 3));
  }
  return out;
}

// Every formula over variables 1..3 made of distinct full-width clauses, 1..4 clauses.
std::vector<CnfFormula> small_formulas() {
  std::vector<CnfFormula> out;
  for (unsigned subset = 1; subset < 256; ++subset) {
    std::vector<Clause> clauses;
    for (int pattern = 0; pattern < 8; ++pattern) {
      if (!(subset & (1u << pattern))) continue;
      clauses.push_back({{1, (pattern & 4) != 0}, {2, (pattern & 2) != 0}, {3, (pattern & 1) != 0}});
    }
    if (clauses.size() <= 4) out.emplace_back(3, clauses);
  }
  return out;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::size_t economies = 0, with_ceei = 0, solutions = 0;
  for (const auto& e : micro_sweep(240, 1001)) {
    ++economies;
    const Rational beta = economies % 2 ? q(1, 10) : q(0);
    const auto first = enumerate_exact_ceei(e, beta);
    const auto all = enumerate_all_exact_ceei(e, beta);
    if (first.has_value() != !all.empty() || (first && !(*first == all.front()))) {
      o.fail("first/all enumeration disagree");
    }
    with_ceei += first.has_value();
    for (const auto& s : all) {
      ++solutions;
      const auto r = verify_aceei(e, s, AlphaBound::of(0), beta);
      if (!r.passed() || r.alpha_sq != 0) o.fail("oracle solution rejected by verifier");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 120) o.fail("runtime " + fixed(secs) + " s");
  if (with_ceei == 0) o.fail("no economy had an exact CEEI");
  o.detail = std::to_string(economies) + " economies, " + std::to_string(with_ceei) + " with exact CEEI, " +
             std::to_string(solutions) + " solutions verified at alpha=0, " + fixed(secs) + " s";
  return o;
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const Rational beta = q(1, 20), step = q(1, 20);
  std::size_t solutions = 0, inputs = 0;
  for (long k = 0; k <= 20; ++k) {
    const Rational px = k * step;
    EconomyBuilder b;
    const auto x = b.add_course("x", 8);
    const auto out = emit_not_gadget(b, x, 16);
    const Economy e = b.build();
    const auto sols = grid_price_search(e, GridSpec{step, 1 + beta, {{x, px}}}, beta, AlphaBound::of(q(3)));
    ++inputs;
    if (sols.empty()) o.fail("no grid solution at p_x=" + to_string(px));
    for (const auto& s : sols) {
      ++solutions;
      const Rational& p = s.prices[out];
      if (p < 1 - px - step || p > 1 - px + beta + step) {
        o.fail("p_x=" + to_string(px) + " gives p_out=" + to_string(p));
      }
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60) o.fail("runtime " + fixed(secs) + " s");
  o.detail = std::to_string(inputs) + " pinned inputs, " + std::to_string(solutions) +
             " solutions, all within [1-p_x, 1-p_x+beta] +- step, " + fixed(secs) + " s";
  return o;
}

Outcome criterion3() {
  Outcome o;
  const Rational beta = q(1, 20);
  std::size_t value_sols = 0, diff_sols = 0;
  {
    EconomyBuilder b;
    const auto z = emit_gate_gadget(b, GateType::kValue, {}, 16);
    const Economy e = b.build();
    const Rational step = q(1, 80);
    const auto sols = grid_price_search(e, GridSpec{step, 1 + beta}, beta, AlphaBound::of(q(1, 100)));
    if (sols.empty()) o.fail("VALUE: no grid solution");
    for (const auto& s : sols) {
      ++value_sols;
      if (s.prices[z] < q(1, 2) - step || s.prices[z] > q(1, 2) + beta + step) {
        o.fail("VALUE: p_z=" + to_string(s.prices[z]));
      }
    }
  }
  {
    EconomyBuilder b;
    const auto x = b.add_course("x", 8);
    const auto y = b.add_course("y", 2);
    const auto z = emit_gate_gadget(b, GateType::kDiff, {x, y}, 16);
    const Economy e = b.build();
    const Rational step = q(1, 60);
    const GridSpec g{step, 1 + beta, {{x, q(2, 3)}, {y, q(1, 3)}}};
    const auto sols = grid_price_search(e, g, beta, AlphaBound::of(q(1, 16)));
    if (sols.empty()) o.fail("DIFF: no grid solution");
    for (const auto& s : sols) {
      ++diff_sols;
      if (s.prices[z] < q(1, 3) - 2 * beta - step || s.prices[z] > q(1, 3) + 2 * beta + step) {
        o.fail("DIFF: p_z=" + to_string(s.prices[z]));
      }
    }
  }
  o.detail = "VALUE " + std::to_string(value_sols) + " solutions in [1/2, 1/2+beta]; DIFF(2/3, 1/3) " +
             std::to_string(diff_sols) + " solutions in 1/3 +- 2 beta (grid tolerance included)";
  return o;
}

Outcome criterion4() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const std::int64_t n = 20;
  const Rational beta = q(1, 20), step = q(1, 200);
  std::ostringstream per_input;
  for (bool inject : {false, true}) {
    for (const Rational& px : {q(1, 10), q(1, 4), q(1, 2), q(3, 4), q(1)}) {
      EconomyBuilder b;
      const auto x = b.add_course("x", n);
      const auto out = emit_copy_gadget(b, x, n);
      if (inject) b.add_students("extra", 2 * n, {Bundle{out}});
      const Economy e = b.build();
      GridSpec g{step, 1 + beta, {{x, px}}};
      const auto sols = grid_price_search(e, g, beta, AlphaBound::of(q(99, 100)));
      if (sols.empty()) o.fail("no grid solution at p_x=" + to_string(px) + (inject ? " (injected)" : ""));
      for (const auto& s : sols) {
        Rational gap = s.prices[out] - px;
        if (gap < 0) gap = -gap;
        if (gap > beta + step) {
          o.fail("p_x=" + to_string(px) + " gives p_x'=" + to_string(s.prices[out]) + (inject ? " (injected)" : ""));
        }
      }
      per_input << " " << to_string(px) << (inject ? "+" : "") << ":" << sols.size();
    }
  }
  o.detail = "n_x=20, step 1/200, solutions per p_x (+ = 40 injected demanders):" + per_input.str() + ", " +
             fixed(seconds_since(t0)) + " s";
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t formulas = 0, satisfiable = 0, witnesses = 0;
  for (const auto& f : small_formulas()) {
    ++formulas;
    const auto cs = compile_sat(f);
    bool any = false;
    for (unsigned mask = 0; mask < 8; ++mask) {
      const std::vector<bool> a{(mask & 4) != 0, (mask & 2) != 0, (mask & 1) != 0};
      if (!satisfies(f, a)) continue;
      any = true;
      ++witnesses;
      const auto s = build_exact_ceei_from_assignment(cs, a);
      const auto r = verify_aceei(cs.economy, s, AlphaBound::of(0), 0);
      if (!r.passed() || r.alpha_sq != 0) o.fail("witness rejected");
      for (int v = 1; v <= 3; ++v) {
        const auto& vc = cs.variables[static_cast<std::size_t>(v - 1)];
        const Rational share = make_rational(1, f.occurrences(v) + 1);
        const auto& lit = a[static_cast<std::size_t>(v - 1)] ? vc.out_true : vc.out_false;
        const auto& other = a[static_cast<std::size_t>(v - 1)] ? vc.out_false : vc.out_true;
        for (auto j : lit)
          if (s.prices[j] != share) o.fail("literal course price " + to_string(s.prices[j]));
        for (auto j : other)
          if (s.prices[j] != 0) o.fail("negated literal course priced");
      }
    }
    satisfiable += any;
  }
  if (formulas != 162) o.fail("expected 162 formulas, got " + std::to_string(formulas));
  o.detail = std::to_string(formulas) + " formulas (" + std::to_string(satisfiable) + " satisfiable), " +
             std::to_string(witnesses) + " assignments verified at alpha=0, beta=0 with 1/(d+1) literal prices";
  return o;
}

Outcome criterion6() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::size_t formulas = 0, equilibria = 0, counterexamples = 0;
  OracleOptions opts;
  opts.max_enumeration = 1'000'000'000'000ULL;
  for (const auto& f : small_formulas()) {
    ++formulas;
    const auto cs = compile_sat(f);
    for (const auto& s : enumerate_all_exact_ceei(cs.economy, 0, opts)) {
      ++equilibria;
      const auto ex = extract_assignment_from_solution(cs, s);
      if (!satisfies(f, ex.assignment)) {
        ++counterexamples;
        o.fail("unsatisfying extraction");
      }
    }
  }
  if (equilibria == 0) o.fail("oracle found no equilibria");
  o.detail = std::to_string(formulas) + " formulas, " + std::to_string(equilibria) + " oracle equilibria, " +
             std::to_string(counterexamples) + " counterexamples, " + fixed(seconds_since(t0)) + " s";
  return o;
}

Outcome criterion7() {
  Outcome o;
  std::size_t economies = 0, subsets = 0, dependent = 0;
  PipelineConfig cfg;
  for (const auto& e : micro_sweep(240, 1001)) {
    ++economies;
    const auto budgets = round_budgets(std::vector<Rational>(e.num_students(), 1 + cfg.beta / 2), cfg, e.num_courses());
    const auto taxes = select_taxes(e, budgets, cfg);
    const auto r = check_tax_properties(e, budgets, taxes, cfg);
    subsets += r.subsets_checked;
    dependent += r.dependent_subsets;
    if (!r.all()) o.fail(r.first_failure);
  }
  o.detail = std::to_string(economies) + " economies, " + std::to_string(subsets) + " plane subsets checked (" +
             std::to_string(dependent) + " dependent, none meeting in the box)";
  return o;
}

Outcome criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  std::size_t certified = 0, uncertified = 0, pivotal = 0;
  double worst_ratio = 0;
  for (const auto& e : micro_sweep(120, 2024)) {
    PipelineConfig cfg;
    const auto r = run_pipeline(e, cfg);
    if (!r.certified) {
      ++uncertified;
      continue;
    }
    ++certified;
    pivotal += !r.problem.pivotal.empty();
    const Rational bound = pipeline_bound_sq(e);
    if (r.report.alpha_sq > bound) o.fail("alpha^2 " + to_string(r.report.alpha_sq) + " > " + to_string(bound));
    if (bound > 0) worst_ratio = std::max(worst_ratio, to_double(r.report.alpha_sq / bound));
    const auto ex = derandomize_rounding_exhaustive(e, r.problem);
    if (ex.choice != r.derandomization.choice || ex.expectation_trace != r.derandomization.expectation_trace ||
        ex.final_error_sq != r.derandomization.final_error_sq) {
      o.fail("closed form and exhaustive derandomization differ");
    }
    if (r.derandomization.final_error_sq != r.report.alpha_sq) o.fail("derandomized error differs from report");
  }
  if (certified < 50) o.fail("only " + std::to_string(certified) + " certified economies");
  o.detail = std::to_string(certified) + " certified (" + std::to_string(uncertified) + " not), " +
             std::to_string(pivotal) + " with pivotal students, worst alpha^2/(sigma M/4) " + fixed(worst_ratio, 3) +
             ", exhaustive path matches, " + fixed(seconds_since(t0)) + " s";
  return o;
}

Outcome criterion9() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const Rational beta = q(1, 10);
  const RandomEconomySpec spec;  // 20 students, 10 courses, k = 3
  std::ofstream table("acceptance_tatonnement.tsv");
  table << "seed\talpha_sq\talpha\tsqrt(kM/2)\twithin\n";
  std::vector<double> alphas;
  std::size_t within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const Economy e = random_economy(spec, seed);
    TatonnementConfig cfg;
    cfg.seed = seed;
    const auto res = tatonnement_solve(e, cfg, beta);
    const auto& s = res.solution;
    // Self-consistency: demand at the emitted prices and budgets, and an independent re-verification.
    for (StudentIndex i = 0; i < e.num_students(); ++i) {
      if (!(s.allocation[i] == demand(e, i, s.prices, s.budgets[i]))) o.fail("allocation is not demand");
    }
    const auto again = verify_aceei(e, s, AlphaBound::squared(res.report.alpha_sq), beta);
    if (!again.passed() || again.alpha_sq != res.report.alpha_sq || again.z != res.report.z) {
      o.fail("emitted report does not re-verify");
    }
    const bool ok = res.report.alpha_sq <= existence_bound_sq(e);
    within += ok;
    alphas.push_back(res.report.alpha);
    table << seed << '\t' << to_string(res.report.alpha_sq) << '\t' << fixed(res.report.alpha, 4) << '\t'
          << fixed(existence_bound(e), 4) << '\t' << (ok ? "yes" : "no") << '\n';
  }
  std::sort(alphas.begin(), alphas.end());
  const auto zero = static_cast<std::size_t>(std::count(alphas.begin(), alphas.end(), 0.0));
  o.detail = "100 economies self-consistent; alpha min/median/max " + fixed(alphas.front(), 3) + "/" +
             fixed(alphas[alphas.size() / 2], 3) + "/" + fixed(alphas.back(), 3) + " vs sqrt(15)=" +
             fixed(std::sqrt(15.0), 3) + "; " + std::to_string(within) + "/100 within, " + std::to_string(zero) +
             " exact (table: acceptance_tatonnement.tsv), " + fixed(seconds_since(t0)) + " s";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                       criterion6, criterion7, criterion8, criterion9};
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    all = all && o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << (k + 1) << ": " << o.detail;
    if (!o.pass) std::cout << " [first failure: " << o.first_failure << "]";
    std::cout << std::endl;
  }
  return all ? 0 : 1;
}
