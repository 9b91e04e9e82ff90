#include "aceei/tatonnement.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace aceei {

namespace {

constexpr long kDraws = 1024;  // resolution of seeded rationals

Rational draw_unit(std::mt19937_64& rng) { return make_rational(static_cast<long>(rng() % (kDraws + 1)), kDraws); }

std::vector<Bundle> demands(const Economy& e, const PriceVector& p, const std::vector<Rational>& budgets) {
  std::vector<Bundle> out;
  out.reserve(e.num_students());
  for (StudentIndex i = 0; i < e.num_students(); ++i) out.push_back(demand(e, i, p, budgets[i]));
  return out;
}

}  // namespace

TatonnementResult tatonnement_solve(const Economy& economy, const TatonnementConfig& config, const Rational& beta) {
  if (config.max_iters < 1) throw EconomyError("max_iters must be at least 1");
  if (config.restart_seeds < 1) throw EconomyError("restart_seeds must be at least 1");
  if (config.step_up <= 0 || config.step_down <= 0) throw EconomyError("steps must be positive");
  if (config.budget_spread < 0 || config.budget_spread > beta) throw EconomyError("budget_spread must lie in [0, beta]");

  const std::size_t m = economy.num_courses();
  std::mt19937_64 rng(config.seed);
  std::vector<Rational> budgets(economy.num_students());
  for (auto& b : budgets) b = 1 + config.budget_spread * draw_unit(rng);

  std::optional<TatonnementResult> best;
  int total = 0;
  for (int run = 0; run < config.restart_seeds; ++run) {
    PriceVector p(m, Rational(0));
    if (run > 0) {
      for (auto& pj : p) pj = (1 + beta) * draw_unit(rng);
    }
    for (int it = 0; it < config.max_iters; ++it) {
      ++total;
      auto alloc = demands(economy, p, budgets);
      auto report = clearing_error(economy, p, alloc);
      if (!best || report.alpha_sq < best->report.alpha_sq) {
        best = TatonnementResult{Solution{p, budgets, alloc}, report, run, it, 0};
      }
      if (report.alpha_sq == 0) break;
      if (config.one_course_per_step) {
        CourseIndex pick = 0;
        for (CourseIndex j = 1; j < m; ++j) {
          if (std::llabs(report.z[j]) > std::llabs(report.z[pick])) pick = j;
        }
        const auto z = report.z[pick];
        if (z > 0) p[pick] += config.step_up * z;
        if (z < 0) p[pick] = std::max(Rational(0), Rational(p[pick] + config.step_down * z));
      } else {
        for (CourseIndex j = 0; j < m; ++j) {
          const auto z = report.z[j];
          if (z > 0) p[j] += config.step_up * z;
          if (z < 0 && p[j] > 0) p[j] = std::max(Rational(0), Rational(p[j] + config.step_down * z));
        }
      }
    }
    if (best && best->report.alpha_sq == 0) break;
  }
  best->iterations_total = total;
  // Re-verify the returned iterate against its own error.
  best->report = verify_aceei(economy, best->solution, AlphaBound::squared(best->report.alpha_sq), beta);
  return *best;
}

Economy random_economy(const RandomEconomySpec& spec, std::uint64_t seed) {
  if (spec.courses == 0) throw EconomyError("need at least one course");
  if (spec.max_bundle == 0 || spec.min_list > spec.max_list || spec.min_capacity > spec.max_capacity ||
      spec.min_capacity < 0) {
    throw EconomyError("inconsistent random economy spec");
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&](std::uint64_t lo, std::uint64_t hi) { return lo + rng() % (hi - lo + 1); };
  std::vector<Course> courses;
  for (std::size_t j = 0; j < spec.courses; ++j) {
    courses.push_back({"c" + std::to_string(j + 1),
                       static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(spec.min_capacity),
                                                         static_cast<std::uint64_t>(spec.max_capacity)))});
  }
  const std::size_t k = std::min(spec.max_bundle, spec.courses);
  std::vector<Student> students;
  for (std::size_t i = 0; i < spec.students; ++i) {
    std::size_t len = uniform(spec.min_list, spec.max_list);
    std::set<std::vector<CourseIndex>> seen;
    std::vector<Bundle> prefs;
    // Bounded attempts: tiny course sets may not hold `len` distinct bundles.
    for (int attempt = 0; prefs.size() < len && attempt < 100; ++attempt) {
      std::size_t size = uniform(1, k);
      std::vector<CourseIndex> pool(spec.courses);
      for (std::size_t j = 0; j < pool.size(); ++j) pool[j] = j;
      std::shuffle(pool.begin(), pool.end(), rng);
      pool.resize(size);
      std::sort(pool.begin(), pool.end());
      if (seen.insert(pool).second) prefs.emplace_back(pool);
    }
    students.push_back({"s" + std::to_string(i + 1), std::move(prefs)});
  }
  return Economy(std::move(courses), std::move(students));
}

}  // namespace aceei
