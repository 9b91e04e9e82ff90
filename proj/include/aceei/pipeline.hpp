#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aceei/economy.hpp"
#include "aceei/json_io.hpp"
#include "aceei/market.hpp"

namespace aceei {

/// Failed pipeline step: bad configuration, or a broken internal guarantee.
class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The price grid is larger than max_grid_points.
class PipelineBudgetExceeded : public PipelineError {
 public:
  using PipelineError::PipelineError;
};

struct PipelineConfig {
  Rational beta = make_rational(1, 10);
  Rational epsilon = make_rational(1, 10);
  /// Price grid for the fixed-point scan. Empty means beta_bar (desk scale); the full-fidelity
  /// step is available from full_grid_step() but is far too fine to scan.
  std::optional<Rational> grid_step;
  /// Length N. Empty means 1 + beta/2 for everyone.
  std::vector<Rational> initial_budgets;
  /// Grid displacement accepted by the scan. Empty means one grid step.
  std::optional<Rational> threshold;
  /// Tax magnitudes beta_bar * M^(-2 nu) instead of M^(-2 nu M); re-checked, full fidelity on failure.
  bool scaled_taxes = false;
  /// Caps for the desk-scale searches.
  std::size_t max_grid_points = 2'000'000;
  std::size_t max_vertex_candidates = 2'000'000;

  Rational beta_bar() const;
  /// Upper end of the price box [0, 1 + beta + epsilon].
  Rational price_cap() const { return 1 + beta + epsilon; }
  Rational desk_grid_step() const { return grid_step ? *grid_step : beta_bar(); }
  /// beta_bar * M^(1/2 - 2(nu_max+1)M), rounded down to a rational (the exponent is half-integral).
  Rational full_grid_step(std::size_t num_courses, std::size_t nu_max) const;
  void validate() const;
};

/// M as used in the grid and tax exponents; at least 2 so that magnitudes strictly decrease.
std::size_t exponent_base(std::size_t num_courses);

/// Each b_i goes to the nearest multiple of beta_bar * M^(-M), kept inside [1, 1 + beta].
std::vector<Rational> round_budgets(std::span<const Rational> budgets, const PipelineConfig& config,
                                    std::size_t num_courses);

/// Per-student taxes aligned with preference rank. Entry |Psi_i| is the empty bundle, which gets a
/// tax too so that students ending with nothing still receive a budget below every listed bundle.
struct TaxVector {
  std::vector<std::vector<Rational>> tau;
  /// Induction position nu (1-based) of each entry.
  std::vector<std::vector<std::size_t>> nu;
  bool scaled = false;

  /// The taxes of listed bundles only, in the shape taxed_demand expects.
  std::span<const Rational> listed(StudentIndex i) const {
    return std::span<const Rational>(tau[i].data(), tau[i].size() - 1);
  }
  const Rational& of_rank(StudentIndex i, std::size_t rank) const { return tau[i][rank]; }
  std::size_t nu_max() const;
};

TaxVector select_taxes(const Economy& economy, std::span<const Rational> budgets, const PipelineConfig& config);

struct TaxPropertyReport {
  bool small = true;             // |tau| < epsilon
  bool monotone = true;          // more preferred, larger tax
  bool bounded = true;           // 1 <= b + tau <= 1 + beta
  bool distinct = true;          // all b + tau pairwise different
  bool general_position = true;  // no dependent set of planes meets inside the price box
  std::size_t subsets_checked = 0;
  std::size_t dependent_subsets = 0;
  std::string first_failure;

  bool all() const { return small && monotone && bounded && distinct && general_position; }
};

/// Checks the five tax properties. Plane subsets are enumerated exhaustively when there are at
/// most 16 planes, otherwise all subsets of size <= M + 1 (every dependent set contains one).
TaxPropertyReport check_tax_properties(const Economy& economy, std::span<const Rational> budgets,
                                       const TaxVector& taxes, const PipelineConfig& config);

/// Componentwise clamp into [0, cap].
PriceVector truncate_prices(std::span<const Rational> p_tilde, const Rational& cap);

/// Raw excess demand sum_i d_i - q under taxed demand (no zero-price case split).
std::vector<std::int64_t> taxed_excess_demand(const Economy& economy, std::span<const Rational> prices,
                                              std::span<const Rational> budgets, const TaxVector& taxes);

/// f(p~) = t(p~) + z(t(p~)) / 2N. With no students the step is zero.
PriceVector price_adjustment(const Economy& economy, std::span<const Rational> p_tilde,
                             std::span<const Rational> budgets, const TaxVector& taxes,
                             const PipelineConfig& config);

/// f at a point half a grid step from p that lies on none of the budget planes.
PriceVector correspondence_sample(const Economy& economy, std::span<const Rational> prices,
                                  std::span<const Rational> budgets, const TaxVector& taxes,
                                  const PipelineConfig& config);

struct FixedPointResult {
  // Grid scan.
  PriceVector grid_point;
  Rational grid_displacement;
  Rational threshold;
  bool grid_threshold_met = false;
  std::size_t grid_points = 0;
  // Exact certification over arrangement vertices.
  std::optional<PriceVector> p_star;
  std::size_t vertices_examined = 0;
  std::size_t vertices_skipped = 0;  // active constraints linearly dependent
  std::size_t fixed_vertices = 0;
  /// More than max_vertex_candidates active sets; certification was not attempted.
  bool vertex_cap_hit = false;

  /// A price vector whose local convex hull of f contains it, i.e. zero displacement from F.
  bool meets_threshold() const { return p_star.has_value(); }
};

FixedPointResult find_fixed_point(const Economy& economy, std::span<const Rational> budgets,
                                  const TaxVector& taxes, const PipelineConfig& config);

/// Demand options of one student whose budget planes pass through p*.
struct PivotalStudent {
  StudentIndex student = 0;
  std::vector<std::size_t> plane_ranks;   // ranks of bundles on planes through p*, best first
  std::vector<std::size_t> ladder_ranks;  // d^0..d^w as preference ranks (|Psi_i| = empty)
  std::vector<Rational> a;                // distribution over the ladder
};

struct RoundingProblem {
  PriceVector p_star;
  std::vector<PivotalStudent> pivotal;
  /// Demand of non-pivotal students minus capacity, per course.
  std::vector<std::int64_t> residual;
  std::size_t sigma = 0;
};

/// Throws PipelineError when no distribution clears in expectation (p* is not a fixed point).
RoundingProblem solve_rounding_lp(const Economy& economy, std::span<const Rational> p_star,
                                  std::span<const Rational> budgets, const TaxVector& taxes);

struct Derandomization {
  std::vector<std::size_t> choice;           // ladder index per pivotal student
  std::vector<Rational> expectation_trace;   // conditional expectation before and after each choice
  Rational bound;                            // sigma M / 4
  Rational final_error_sq;                   // ||sum (a - theta) d||^2
};

/// Conditional expectations in closed form; the lowest ladder index wins ties.
Derandomization derandomize_rounding(const Economy& economy, const RoundingProblem& problem);
/// Same path, with each conditional expectation computed by enumerating every joint outcome.
Derandomization derandomize_rounding_exhaustive(const Economy& economy, const RoundingProblem& problem);

/// Allocation and budgets b*_i = b_i + tau_{i, x*_i}; verified at sqrt(sigma M)/2 and beta.
Solution finalize(const Economy& economy, std::span<const Rational> p_star, std::span<const Rational> budgets,
                  const TaxVector& taxes, const RoundingProblem& problem, std::span<const std::size_t> choices,
                  const PipelineConfig& config);

struct PipelineResult {
  /// False when no fixed point was certified; later steps are then absent and the trace ends with the
  /// fixed-point record (which still carries the best grid point).
  bool certified = false;
  Solution solution;
  ClearingReport report;
  std::vector<Rational> rounded_budgets;
  TaxVector taxes;
  TaxPropertyReport tax_report;
  FixedPointResult fixed_point;
  RoundingProblem problem;
  Derandomization derandomization;
  /// One JSON record per step.
  std::vector<Json> trace;
};

/// All steps in order.
PipelineResult run_pipeline(const Economy& economy, const PipelineConfig& config);

/// sigma M / 4.
Rational pipeline_bound_sq(const Economy& economy);

}  // namespace aceei
