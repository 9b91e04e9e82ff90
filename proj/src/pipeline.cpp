#include "aceei/pipeline.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "aceei/simplex.hpp"

namespace aceei {

namespace {

using Matrix = std::vector<std::vector<Rational>>;

// Row echelon in place; returns the rank.
std::size_t eliminate(Matrix& m, std::size_t cols) {
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && m[pivot][c] == 0) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[pivot], m[rank]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][c] == 0) continue;
      const Rational factor = m[r][c] / m[rank][c];
      for (std::size_t k = c; k < m[r].size(); ++k) m[r][k] -= factor * m[rank][k];
    }
    ++rank;
  }
  return rank;
}

std::size_t rank_of(Matrix m, std::size_t cols) { return eliminate(m, cols); }

// Unique solution of a square system, if any.
std::optional<std::vector<Rational>> solve_square(const Matrix& a, const std::vector<Rational>& b) {
  const std::size_t n = a.size();
  Matrix aug = a;
  for (std::size_t r = 0; r < n; ++r) aug[r].push_back(b[r]);
  if (eliminate(aug, n) < n) return std::nullopt;
  std::vector<Rational> x(n);
  for (std::size_t r = 0; r < n; ++r) x[r] = aug[r][n] / aug[r][r];
  return x;
}

std::vector<Rational> indicator(const Bundle& bundle, std::size_t m) {
  std::vector<Rational> row(m, Rational(0));
  for (CourseIndex j : bundle.courses()) row[j] = 1;
  return row;
}

Rational max_abs_diff(std::span<const Rational> a, std::span<const Rational> b) {
  Rational best = 0;
  for (std::size_t j = 0; j < a.size(); ++j) best = std::max(best, Rational(abs(Rational(a[j] - b[j]))));
  return best;
}

void check_budget_length(const Economy& economy, std::span<const Rational> budgets) {
  if (budgets.size() != economy.num_students()) throw PipelineError("budget vector length differs from student count");
}

const Bundle& bundle_at(const Economy& e, StudentIndex i, std::size_t rank) {
  static const Bundle kEmpty;
  const auto& prefs = e.student(i).preferences;
  return rank < prefs.size() ? prefs[rank] : kEmpty;
}

// Is there p in [0, cap]^M with x.p = level for every row?
bool meets_in_box(const Matrix& rows, const std::vector<Rational>& levels, std::size_t m, const Rational& cap) {
  Matrix aug = rows;
  for (std::size_t r = 0; r < rows.size(); ++r) aug[r].push_back(levels[r]);
  Matrix plain = rows;
  if (rank_of(plain, m) != rank_of(aug, m + 1)) return false;
  lp::LinearProgram prog(m);
  for (std::size_t r = 0; r < rows.size(); ++r) prog.add(rows[r], lp::Relation::kEqual, levels[r]);
  for (std::size_t j = 0; j < m; ++j) prog.add({{j, Rational(1)}}, lp::Relation::kLessEqual, cap);
  return lp::find_feasible(prog).status == lp::Status::kOptimal;
}

// Local structure at p: who sits on a plane, their ladders, and the residual of everyone else.
struct LocalView {
  std::vector<PivotalStudent> pivotal;
  std::vector<std::int64_t> residual;
  std::vector<std::vector<Rational>> active_rows;  // plane normals through p
};

LocalView local_view(const Economy& economy, std::span<const Rational> p, std::span<const Rational> budgets,
                     const TaxVector& taxes) {
  const std::size_t m = economy.num_courses();
  LocalView view;
  view.residual.assign(m, 0);
  for (CourseIndex j = 0; j < m; ++j) view.residual[j] = -economy.course(j).capacity;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const auto& prefs = economy.student(i).preferences;
    std::vector<bool> strict(prefs.size(), false);
    PivotalStudent ps;
    ps.student = i;
    for (std::size_t r = 0; r < prefs.size(); ++r) {
      const Rational slack = prefs[r].cost(p) - taxes.of_rank(i, r) - budgets[i];
      if (slack < 0) strict[r] = true;
      if (slack == 0) {
        ps.plane_ranks.push_back(r);
        view.active_rows.push_back(indicator(prefs[r], m));
      }
    }
    auto best_with = [&](std::size_t from) {
      for (std::size_t r = 0; r < prefs.size(); ++r) {
        if (strict[r]) return r;
        auto it = std::find(ps.plane_ranks.begin() + static_cast<std::ptrdiff_t>(from), ps.plane_ranks.end(), r);
        if (it != ps.plane_ranks.end()) return r;
      }
      return prefs.size();
    };
    if (ps.plane_ranks.empty()) {
      for (CourseIndex j : bundle_at(economy, i, best_with(0)).courses()) ++view.residual[j];
      continue;
    }
    for (std::size_t f = 0; f <= ps.plane_ranks.size(); ++f) ps.ladder_ranks.push_back(best_with(f));
    view.pivotal.push_back(std::move(ps));
  }
  return view;
}

// Distribution over ladders that clears in expectation, with undersubscription allowed at price 0.
bool solve_distribution(const Economy& economy, std::span<const Rational> p, LocalView& view) {
  const std::size_t m = economy.num_courses();
  std::vector<std::pair<std::size_t, std::size_t>> var;  // (pivotal index, ladder index)
  for (std::size_t s = 0; s < view.pivotal.size(); ++s) {
    for (std::size_t f = 0; f < view.pivotal[s].ladder_ranks.size(); ++f) var.emplace_back(s, f);
  }
  if (var.empty()) {
    for (CourseIndex j = 0; j < m; ++j) {
      if (view.residual[j] > 0 || (p[j] > 0 && view.residual[j] != 0)) return false;
    }
    return true;
  }
  lp::LinearProgram prog(var.size());
  for (std::size_t s = 0; s < view.pivotal.size(); ++s) {
    std::vector<Rational> row(var.size(), Rational(0));
    for (std::size_t v = 0; v < var.size(); ++v)
      if (var[v].first == s) row[v] = 1;
    prog.add(row, lp::Relation::kEqual, Rational(1));
  }
  for (CourseIndex j = 0; j < m; ++j) {
    std::vector<Rational> row(var.size(), Rational(0));
    for (std::size_t v = 0; v < var.size(); ++v) {
      const auto& ps = view.pivotal[var[v].first];
      if (bundle_at(economy, ps.student, ps.ladder_ranks[var[v].second]).contains(j)) row[v] = 1;
    }
    prog.add(row, p[j] > 0 ? lp::Relation::kEqual : lp::Relation::kLessEqual, Rational(-view.residual[j]));
  }
  auto result = lp::find_feasible(prog);
  if (result.status != lp::Status::kOptimal) return false;
  if (!lp::satisfies(prog, result.values)) throw PipelineError("rounding LP returned an infeasible point");
  for (auto& ps : view.pivotal) ps.a.assign(ps.ladder_ranks.size(), Rational(0));
  for (std::size_t v = 0; v < var.size(); ++v) view.pivotal[var[v].first].a[var[v].second] = result.values[v];
  return true;
}

template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t t = 0; t < k; ++t) idx[t] = t;
  while (true) {
    visit(idx);
    std::size_t t = k;
    while (t > 0 && idx[t - 1] == n - k + t - 1) --t;
    if (t == 0) return;
    ++idx[t - 1];
    for (std::size_t u = t; u < k; ++u) idx[u] = idx[u - 1] + 1;
  }
}

std::size_t binomial_capped(std::size_t n, std::size_t k, std::size_t cap) {
  if (k > n) return 0;
  long double v = 1;
  for (std::size_t t = 1; t <= k; ++t) {
    v = v * static_cast<long double>(n - k + t) / static_cast<long double>(t);
    if (v > static_cast<long double>(cap)) return cap + 1;
  }
  return static_cast<std::size_t>(v + 0.5L);
}

Json prices_json(std::span<const Rational> p) {
  Json out = Json::array();
  for (const auto& v : p) out.push_back(to_string(v));
  return out;
}

}  // namespace

Rational PipelineConfig::beta_bar() const { return std::min(beta, epsilon) / 2; }

Rational PipelineConfig::full_grid_step(std::size_t num_courses, std::size_t nu_max) const {
  // sqrt(M) >= 1 is dropped; a finer grid only strengthens the rounding argument.
  const std::size_t b = exponent_base(num_courses);
  return beta_bar() / pow(Rational(static_cast<long>(b)), 2 * (nu_max + 1) * b);
}

void PipelineConfig::validate() const {
  if (beta <= 0 || epsilon <= 0) throw PipelineError("beta and epsilon must be positive");
  if (grid_step && *grid_step <= 0) throw PipelineError("grid step must be positive");
  if (threshold && *threshold < 0) throw PipelineError("threshold must be nonnegative");
}

std::size_t exponent_base(std::size_t num_courses) { return std::max<std::size_t>(num_courses, 2); }

std::vector<Rational> round_budgets(std::span<const Rational> budgets, const PipelineConfig& config,
                                    std::size_t num_courses) {
  config.validate();
  const std::size_t b = exponent_base(num_courses);
  const Rational grid = config.beta_bar() / pow(Rational(static_cast<long>(b)), b);
  const Rational top = 1 + config.beta;
  std::vector<Rational> out;
  out.reserve(budgets.size());
  for (const auto& v : budgets) {
    if (v < 1 || v > top) throw PipelineError("initial budget " + to_string(v) + " outside [1, 1+beta]");
    Rational r = round_to_multiple(v, grid);
    if (r < 1) r = ceil_to_multiple(Rational(1), grid);
    if (r > top) r = floor_to_multiple(top, grid);
    out.push_back(r);
  }
  return out;
}

std::size_t TaxVector::nu_max() const {
  std::size_t best = 0;
  for (const auto& row : nu)
    for (auto v : row) best = std::max(best, v);
  return best;
}

namespace {

TaxVector build_taxes(const Economy& economy, std::span<const Rational> budgets, const PipelineConfig& config,
                      bool scaled) {
  const std::size_t base = exponent_base(economy.num_courses());
  const Rational m(static_cast<long>(base));
  // Each step shrinks the magnitude by M^(-2M), or M^(-2) when scaled.
  const Rational shrink = 1 / pow(m, scaled ? 2 : 2 * base);
  TaxVector taxes;
  taxes.scaled = scaled;
  Rational magnitude = config.beta_bar();
  std::size_t nu = 0;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const std::size_t len = economy.student(i).preferences.size() + 1;
    taxes.tau.emplace_back(len);
    taxes.nu.emplace_back(len);
    // Least preferred first (the empty bundle), so later, smaller taxes go to better bundles.
    for (std::size_t back = 0; back < len; ++back) {
      const std::size_t rank = len - 1 - back;
      magnitude *= shrink;
      ++nu;
      // Negative keeps the ordering; a budget at the floor leaves no valid sign.
      if (budgets[i] - magnitude < 1) {
        throw PipelineError("budget of student '" + economy.student(i).id +
                            "' is too close to 1 for a negative tax; use interior budgets");
      }
      taxes.tau[i][rank] = -magnitude;
      taxes.nu[i][rank] = nu;
    }
  }
  return taxes;
}

}  // namespace

TaxVector select_taxes(const Economy& economy, std::span<const Rational> budgets, const PipelineConfig& config) {
  config.validate();
  check_budget_length(economy, budgets);
  if (config.scaled_taxes) {
    auto scaled = build_taxes(economy, budgets, config, true);
    if (check_tax_properties(economy, budgets, scaled, config).all()) return scaled;
  }
  return build_taxes(economy, budgets, config, false);
}

TaxPropertyReport check_tax_properties(const Economy& economy, std::span<const Rational> budgets,
                                       const TaxVector& taxes, const PipelineConfig& config) {
  check_budget_length(economy, budgets);
  if (taxes.tau.size() != economy.num_students()) throw PipelineError("tax vector has the wrong number of students");
  TaxPropertyReport rep;
  auto fail = [&](bool& flag, const std::string& why) {
    if (flag && rep.first_failure.empty()) rep.first_failure = why;
    flag = false;
  };
  const Rational top = 1 + config.beta;
  std::vector<Rational> levels;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const auto& row = taxes.tau[i];
    if (row.size() != economy.student(i).preferences.size() + 1) throw PipelineError("tax row has the wrong length");
    for (std::size_t r = 0; r < row.size(); ++r) {
      if (abs(row[r]) >= config.epsilon) fail(rep.small, "tax not smaller than epsilon");
      if (r + 1 < row.size() && !(row[r] > row[r + 1])) fail(rep.monotone, "tax order disagrees with preferences");
      const Rational level = budgets[i] + row[r];
      if (level < 1 || level > top) fail(rep.bounded, "perturbed budget outside [1, 1+beta]");
      levels.push_back(level);
    }
  }
  std::sort(levels.begin(), levels.end());
  if (std::adjacent_find(levels.begin(), levels.end()) != levels.end()) fail(rep.distinct, "two perturbed budgets coincide");

  // Planes of listed bundles.
  const std::size_t m = economy.num_courses();
  Matrix rows;
  std::vector<Rational> plane_levels;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const auto& prefs = economy.student(i).preferences;
    for (std::size_t r = 0; r < prefs.size(); ++r) {
      rows.push_back(indicator(prefs[r], m));
      plane_levels.push_back(budgets[i] + taxes.of_rank(i, r));
    }
  }
  const Rational cap = config.price_cap();
  auto check_subset = [&](const std::vector<std::size_t>& pick) {
    ++rep.subsets_checked;
    Matrix sub;
    std::vector<Rational> lv;
    for (auto k : pick) {
      sub.push_back(rows[k]);
      lv.push_back(plane_levels[k]);
    }
    if (rank_of(sub, m) == sub.size()) return;
    ++rep.dependent_subsets;
    if (meets_in_box(sub, lv, m, cap)) fail(rep.general_position, "dependent planes meet inside the price box");
  };
  const std::size_t planes = rows.size();
  const std::size_t max_size = planes <= 16 ? planes : std::min(planes, m + 1);
  for (std::size_t size = 1; size <= max_size; ++size) {
    for_each_combination(planes, size, check_subset);
  }
  return rep;
}

PriceVector truncate_prices(std::span<const Rational> p_tilde, const Rational& cap) {
  PriceVector out(p_tilde.begin(), p_tilde.end());
  for (auto& v : out) v = std::clamp(v, Rational(0), cap);
  return out;
}

std::vector<std::int64_t> taxed_excess_demand(const Economy& economy, std::span<const Rational> prices,
                                              std::span<const Rational> budgets, const TaxVector& taxes) {
  check_budget_length(economy, budgets);
  std::vector<std::int64_t> z(economy.num_courses());
  for (CourseIndex j = 0; j < z.size(); ++j) z[j] = -economy.course(j).capacity;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const std::size_t r = taxed_demand_rank(economy, i, prices, budgets[i], taxes.listed(i));
    for (CourseIndex j : bundle_at(economy, i, r).courses()) ++z[j];
  }
  return z;
}

PriceVector price_adjustment(const Economy& economy, std::span<const Rational> p_tilde,
                             std::span<const Rational> budgets, const TaxVector& taxes,
                             const PipelineConfig& config) {
  if (p_tilde.size() != economy.num_courses()) throw PipelineError("price vector length differs from course count");
  PriceVector t = truncate_prices(p_tilde, config.price_cap());
  if (economy.num_students() == 0) return t;
  const auto z = taxed_excess_demand(economy, t, budgets, taxes);
  const Rational scale = make_rational(1, 2 * static_cast<long>(economy.num_students()));
  for (CourseIndex j = 0; j < t.size(); ++j) t[j] += scale * Rational(static_cast<long>(z[j]));
  return t;
}

PriceVector correspondence_sample(const Economy& economy, std::span<const Rational> prices,
                                  std::span<const Rational> budgets, const TaxVector& taxes,
                                  const PipelineConfig& config) {
  const std::size_t m = economy.num_courses();
  if (prices.size() != m) throw PipelineError("price vector length differs from course count");
  const Rational half = config.desk_grid_step() / 2;
  const Rational cap = config.price_cap();
  auto on_plane = [&](std::span<const Rational> q) {
    for (StudentIndex i = 0; i < economy.num_students(); ++i) {
      const auto& prefs = economy.student(i).preferences;
      for (std::size_t r = 0; r < prefs.size(); ++r)
        if (prefs[r].cost(q) - taxes.of_rank(i, r) == budgets[i]) return true;
    }
    return false;
  };
  // Directions (1, s, s^2, ...) for s = 1, 1/2, 1/3, ...: all positive, so every plane through p
  // is left on its unaffordable side; the ratio changes until no other plane is hit either.
  for (long s = 1; s <= 64; ++s) {
    PriceVector q(prices.begin(), prices.end());
    Rational w = 1;
    for (std::size_t j = 0; j < m; ++j) {
      q[j] += half * w;
      w /= s;
    }
    if (!on_plane(truncate_prices(q, cap))) return price_adjustment(economy, q, budgets, taxes, config);
  }
  throw PipelineError("no off-plane sample point near the grid point");
}

FixedPointResult find_fixed_point(const Economy& economy, std::span<const Rational> budgets,
                                  const TaxVector& taxes, const PipelineConfig& config) {
  config.validate();
  check_budget_length(economy, budgets);
  const std::size_t m = economy.num_courses();
  const Rational h = config.desk_grid_step();
  const Rational cap = config.price_cap();
  FixedPointResult out;
  out.threshold = config.threshold ? *config.threshold : h;

  // Grid scan over [0, cap]^M in lexicographic order; the first minimizer is kept.
  const Rational top_index = floor_to_multiple(cap, h) / h;
  const std::size_t per_axis = static_cast<std::size_t>(top_index.get_num().get_ui()) + 1;
  std::size_t total = 1;
  for (std::size_t j = 0; j < m; ++j) {
    if (total > config.max_grid_points / per_axis) throw PipelineBudgetExceeded("price grid exceeds max_grid_points");
    total *= per_axis;
  }
  std::vector<std::size_t> idx(m, 0);
  PriceVector p(m, Rational(0));
  bool have = false;
  for (std::size_t n = 0; n < total; ++n) {
    const auto g = correspondence_sample(economy, p, budgets, taxes, config);
    const Rational d = max_abs_diff(truncate_prices(g, cap), p);
    if (!have || d < out.grid_displacement) {
      out.grid_displacement = d;
      out.grid_point = p;
      have = true;
    }
    ++out.grid_points;
    for (std::size_t j = m; j-- > 0;) {
      if (++idx[j] < per_axis) {
        p[j] += h;
        break;
      }
      idx[j] = 0;
      p[j] = 0;
    }
  }
  out.grid_threshold_met = out.grid_displacement <= out.threshold;

  // Exact certification: some vertex of the arrangement of budget planes and box faces is a fixed
  // point of the convexified map whenever one exists, so the vertices are enumerated and tested.
  Matrix rows;
  std::vector<Rational> levels;
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    const auto& prefs = economy.student(i).preferences;
    for (std::size_t r = 0; r < prefs.size(); ++r) {
      rows.push_back(indicator(prefs[r], m));
      levels.push_back(budgets[i] + taxes.of_rank(i, r));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    for (const Rational& bound : {Rational(0), cap}) {
      std::vector<Rational> e(m, Rational(0));
      e[j] = 1;
      rows.push_back(e);
      levels.push_back(bound);
    }
  }
  if (binomial_capped(rows.size(), m, config.max_vertex_candidates) > config.max_vertex_candidates) {
    out.vertex_cap_hit = true;
    return out;
  }
  std::set<PriceVector> vertices;
  if (m == 0) vertices.insert(PriceVector{});
  for_each_combination(rows.size(), m, [&](const std::vector<std::size_t>& pick) {
    Matrix a;
    std::vector<Rational> b;
    for (auto k : pick) {
      a.push_back(rows[k]);
      b.push_back(levels[k]);
    }
    auto x = solve_square(a, b);
    if (!x) return;
    for (const auto& v : *x)
      if (v < 0 || v > cap) return;
    vertices.insert(*x);
  });

  std::optional<Rational> best_dist;
  for (const auto& v : vertices) {
    ++out.vertices_examined;
    auto view = local_view(economy, v, budgets, taxes);
    Matrix active = view.active_rows;
    for (std::size_t j = 0; j < m; ++j) {
      if (v[j] == 0 || v[j] == cap) {
        std::vector<Rational> e(m, Rational(0));
        e[j] = 1;
        active.push_back(e);
      }
    }
    if (rank_of(active, m) < active.size()) {
      ++out.vertices_skipped;
      continue;
    }
    if (!solve_distribution(economy, v, view)) continue;
    ++out.fixed_vertices;
    const Rational dist = max_abs_diff(v, out.grid_point);
    if (!best_dist || dist < *best_dist) {
      best_dist = dist;
      out.p_star = v;
    }
  }
  return out;
}

RoundingProblem solve_rounding_lp(const Economy& economy, std::span<const Rational> p_star,
                                  std::span<const Rational> budgets, const TaxVector& taxes) {
  check_budget_length(economy, budgets);
  if (p_star.size() != economy.num_courses()) throw PipelineError("price vector length differs from course count");
  auto view = local_view(economy, p_star, budgets, taxes);
  if (rank_of(view.active_rows, economy.num_courses()) < view.active_rows.size()) {
    throw PipelineError("budget planes through p* are linearly dependent");
  }
  if (!solve_distribution(economy, p_star, view)) {
    throw PipelineError("no ladder distribution clears in expectation; p* is not a fixed point");
  }
  RoundingProblem prob;
  prob.p_star.assign(p_star.begin(), p_star.end());
  prob.pivotal = std::move(view.pivotal);
  prob.residual = std::move(view.residual);
  prob.sigma = std::min(2 * economy.max_bundle_size(), economy.num_courses());
  return prob;
}

Rational pipeline_bound_sq(const Economy& economy) {
  const std::size_t sigma = std::min(2 * economy.max_bundle_size(), economy.num_courses());
  return make_rational(static_cast<long>(sigma * economy.num_courses()), 4);
}

namespace {

struct LadderVectors {
  std::vector<std::vector<Rational>> d;  // per ladder entry
  std::vector<Rational> mean;
  Rational variance;  // E || mean - d^F ||^2
};

Rational norm_sq(std::span<const Rational> v) {
  Rational s = 0;
  for (const auto& x : v) s += x * x;
  return s;
}

std::vector<LadderVectors> ladder_vectors(const Economy& economy, const RoundingProblem& prob) {
  const std::size_t m = economy.num_courses();
  std::vector<LadderVectors> out;
  for (const auto& ps : prob.pivotal) {
    if (ps.a.size() != ps.ladder_ranks.size()) throw PipelineError("ladder and distribution sizes differ");
    LadderVectors lv;
    lv.mean.assign(m, Rational(0));
    for (std::size_t f = 0; f < ps.ladder_ranks.size(); ++f) {
      lv.d.push_back(indicator(bundle_at(economy, ps.student, ps.ladder_ranks[f]), m));
      for (std::size_t j = 0; j < m; ++j) lv.mean[j] += ps.a[f] * lv.d.back()[j];
    }
    lv.variance = 0;
    for (std::size_t f = 0; f < lv.d.size(); ++f) {
      std::vector<Rational> diff(m);
      for (std::size_t j = 0; j < m; ++j) diff[j] = lv.mean[j] - lv.d[f][j];
      lv.variance += ps.a[f] * norm_sq(diff);
    }
    out.push_back(std::move(lv));
  }
  return out;
}

// Shared driver: `expect(t, f, fixed)` is the conditional expectation after choosing f for student t.
Derandomization derandomize_with(
    const Economy& economy, const RoundingProblem& prob, const std::vector<LadderVectors>& lv,
    const std::function<Rational(std::size_t, std::size_t, const std::vector<Rational>&)>& expect) {
  const std::size_t m = economy.num_courses();
  Derandomization out;
  out.bound = pipeline_bound_sq(economy);
  std::vector<Rational> fixed(m, Rational(0));
  Rational start = 0;
  for (const auto& v : lv) start += v.variance;
  out.expectation_trace.push_back(start);
  for (std::size_t t = 0; t < prob.pivotal.size(); ++t) {
    std::optional<std::size_t> pick;
    Rational best;
    for (std::size_t f = 0; f < lv[t].d.size(); ++f) {
      if (prob.pivotal[t].a[f] <= 0) continue;
      Rational val = expect(t, f, fixed);
      if (!pick || val < best) {
        pick = f;
        best = val;
      }
    }
    if (!pick) throw PipelineError("pivotal student with an empty distribution");
    for (std::size_t j = 0; j < m; ++j) fixed[j] += lv[t].mean[j] - lv[t].d[*pick][j];
    out.choice.push_back(*pick);
    out.expectation_trace.push_back(best);
  }
  out.final_error_sq = norm_sq(fixed);
  return out;
}

}  // namespace

Derandomization derandomize_rounding(const Economy& economy, const RoundingProblem& problem) {
  const std::size_t m = economy.num_courses();
  const auto lv = ladder_vectors(economy, problem);
  std::vector<Rational> tail(lv.size() + 1, Rational(0));  // sum of variances from t on
  for (std::size_t t = lv.size(); t-- > 0;) tail[t] = tail[t + 1] + lv[t].variance;
  return derandomize_with(economy, problem, lv, [&](std::size_t t, std::size_t f, const std::vector<Rational>& fixed) -> Rational {
    std::vector<Rational> v(m);
    for (std::size_t j = 0; j < m; ++j) v[j] = fixed[j] + lv[t].mean[j] - lv[t].d[f][j];
    return norm_sq(v) + tail[t + 1];
  });
}

Derandomization derandomize_rounding_exhaustive(const Economy& economy, const RoundingProblem& problem) {
  const std::size_t m = economy.num_courses();
  const auto lv = ladder_vectors(economy, problem);
  std::size_t outcomes = 1;
  for (const auto& v : lv) {
    outcomes *= v.d.size();
    if (outcomes > 10'000'000) throw PipelineError("too many joint outcomes for exhaustive enumeration");
  }
  return derandomize_with(economy, problem, lv, [&](std::size_t t, std::size_t f, const std::vector<Rational>& fixed) -> Rational {
    std::vector<Rational> base(m);
    for (std::size_t j = 0; j < m; ++j) base[j] = fixed[j] + lv[t].mean[j] - lv[t].d[f][j];
    Rational total = 0;
    // Depth-first over the remaining students' outcomes, weighted by probability.
    std::function<void(std::size_t, std::vector<Rational>&, const Rational&)> walk =
        [&](std::size_t s, std::vector<Rational>& acc, const Rational& prob) {
          if (prob == 0) return;
          if (s == lv.size()) {
            total += prob * norm_sq(acc);
            return;
          }
          for (std::size_t g = 0; g < lv[s].d.size(); ++g) {
            for (std::size_t j = 0; j < m; ++j) acc[j] += lv[s].mean[j] - lv[s].d[g][j];
            walk(s + 1, acc, prob * problem.pivotal[s].a[g]);
            for (std::size_t j = 0; j < m; ++j) acc[j] -= lv[s].mean[j] - lv[s].d[g][j];
          }
        };
    walk(t + 1, base, Rational(1));
    return total;
  });
}

Solution finalize(const Economy& economy, std::span<const Rational> p_star, std::span<const Rational> budgets,
                  const TaxVector& taxes, const RoundingProblem& problem, std::span<const std::size_t> choices,
                  const PipelineConfig& config) {
  check_budget_length(economy, budgets);
  if (choices.size() != problem.pivotal.size()) throw PipelineError("one choice per pivotal student is required");
  Solution s;
  s.prices.assign(p_star.begin(), p_star.end());
  std::vector<std::size_t> ranks(economy.num_students());
  for (StudentIndex i = 0; i < economy.num_students(); ++i)
    ranks[i] = taxed_demand_rank(economy, i, p_star, budgets[i], taxes.listed(i));
  for (std::size_t t = 0; t < problem.pivotal.size(); ++t) {
    const auto& ps = problem.pivotal[t];
    if (choices[t] >= ps.ladder_ranks.size()) throw PipelineError("choice outside the ladder");
    ranks[ps.student] = ps.ladder_ranks[choices[t]];
  }
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    s.allocation.push_back(bundle_at(economy, i, ranks[i]));
    s.budgets.push_back(budgets[i] + taxes.of_rank(i, ranks[i]));
    if (abs(Rational(s.budgets.back() - budgets[i])) >= config.epsilon) throw PipelineError("budget moved by epsilon or more");
  }
  auto report = verify_aceei(economy, s, AlphaBound::squared(pipeline_bound_sq(economy)), config.beta);
  if (!report.passed()) {
    throw PipelineError("final solution fails verification at sqrt(sigma M)/2 (alpha^2 = " +
                        to_string(report.alpha_sq) + ")");
  }
  return s;
}

PipelineResult run_pipeline(const Economy& economy, const PipelineConfig& config) {
  config.validate();
  PipelineResult out;
  std::vector<Rational> initial = config.initial_budgets;
  if (initial.empty()) initial.assign(economy.num_students(), 1 + config.beta / 2);
  check_budget_length(economy, initial);

  out.trace.push_back({{"step", "config"},
                       {"beta", to_string(config.beta)},
                       {"epsilon", to_string(config.epsilon)},
                       {"beta_bar", to_string(config.beta_bar())},
                       {"grid_step", to_string(config.desk_grid_step())},
                       {"initial_budgets", prices_json(initial)}});

  out.rounded_budgets = round_budgets(initial, config, economy.num_courses());
  out.trace.push_back({{"step", "round_budgets"}, {"budgets", prices_json(out.rounded_budgets)}});

  out.taxes = select_taxes(economy, out.rounded_budgets, config);
  out.tax_report = check_tax_properties(economy, out.rounded_budgets, out.taxes, config);
  {
    Json tau = Json::array();
    for (const auto& row : out.taxes.tau) tau.push_back(prices_json(row));
    out.trace.push_back({{"step", "select_taxes"},
                         {"scaled", out.taxes.scaled},
                         {"tau", tau},
                         {"properties",
                          {{"small", out.tax_report.small},
                           {"monotone", out.tax_report.monotone},
                           {"bounded", out.tax_report.bounded},
                           {"distinct", out.tax_report.distinct},
                           {"general_position", out.tax_report.general_position}}},
                         {"subsets_checked", out.tax_report.subsets_checked},
                         {"dependent_subsets", out.tax_report.dependent_subsets}});
  }
  if (!out.tax_report.all()) throw PipelineError("tax properties violated: " + out.tax_report.first_failure);

  out.fixed_point = find_fixed_point(economy, out.rounded_budgets, out.taxes, config);
  {
    Json rec = {{"step", "find_fixed_point"},
                {"grid_point", prices_json(out.fixed_point.grid_point)},
                {"grid_displacement", to_string(out.fixed_point.grid_displacement)},
                {"threshold", to_string(out.fixed_point.threshold)},
                {"grid_threshold_met", out.fixed_point.grid_threshold_met},
                {"grid_points", out.fixed_point.grid_points},
                {"vertices_examined", out.fixed_point.vertices_examined},
                {"vertices_skipped", out.fixed_point.vertices_skipped},
                {"fixed_vertices", out.fixed_point.fixed_vertices},
                {"vertex_cap_hit", out.fixed_point.vertex_cap_hit}};
    rec["p_star"] = out.fixed_point.p_star ? prices_json(*out.fixed_point.p_star) : Json(nullptr);
    out.trace.push_back(rec);
  }
  if (!out.fixed_point.p_star) return out;
  out.certified = true;
  const auto& p_star = *out.fixed_point.p_star;

  out.problem = solve_rounding_lp(economy, p_star, out.rounded_budgets, out.taxes);
  {
    Json piv = Json::array();
    for (const auto& ps : out.problem.pivotal) {
      Json ladder = Json::array();
      for (auto r : ps.ladder_ranks) ladder.push_back(r);
      piv.push_back({{"student", economy.student(ps.student).id}, {"ladder_ranks", ladder}, {"a", prices_json(ps.a)}});
    }
    out.trace.push_back(
        {{"step", "solve_rounding_lp"}, {"pivotal", piv}, {"residual", out.problem.residual}, {"sigma", out.problem.sigma}});
  }

  out.derandomization = derandomize_rounding(economy, out.problem);
  out.trace.push_back({{"step", "derandomize_rounding"},
                       {"choice", out.derandomization.choice},
                       {"expectation_trace", prices_json(out.derandomization.expectation_trace)},
                       {"bound", to_string(out.derandomization.bound)},
                       {"final_error_sq", to_string(out.derandomization.final_error_sq)}});

  out.solution = finalize(economy, p_star, out.rounded_budgets, out.taxes, out.problem, out.derandomization.choice, config);
  out.report = verify_aceei(economy, out.solution, AlphaBound::squared(pipeline_bound_sq(economy)), config.beta);
  out.trace.push_back({{"step", "finalize"},
                       {"solution", solution_to_json(economy, out.solution)},
                       {"alpha_sq", to_string(out.report.alpha_sq)},
                       {"bound_sq", to_string(pipeline_bound_sq(economy))}});
  return out;
}

}  // namespace aceei
