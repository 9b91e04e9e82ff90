#include "aceei/grid_search.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

namespace aceei {

unsigned lab_threads() {
  if (const char* env = std::getenv("ACEEI_LAB_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<unsigned>(std::min(v, 256L));
  }
  return 1;
}

Rational grid_alpha_sq(const Economy& economy, const GridSpec& grid, std::span<const Rational> prices,
                       std::span<const Bundle> allocation) {
  ClearingReport r = clearing_error(economy, prices, allocation);
  Rational total = 0;
  for (CourseIndex j = 0; j < r.z.size(); ++j) {
    if (grid.pinned.count(j)) continue;
    total += Rational(r.z[j]) * r.z[j];
  }
  return total;
}

std::vector<Rational> critical_budgets(const Economy& economy, StudentIndex student, std::span<const Rational> prices,
                                       const Rational& beta, const std::optional<std::vector<Rational>>& menu) {
  std::vector<Rational> levels;
  if (menu) {
    levels = *menu;
  } else {
    levels.push_back(Rational(1));
    for (const Bundle& b : economy.student(student).preferences) {
      Rational c = b.cost(prices);
      if (c > 1 && c <= 1 + beta) levels.push_back(c);
    }
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  // Keep only levels where demand changes.
  std::vector<Rational> out;
  std::optional<std::size_t> last;
  for (const Rational& b : levels) {
    std::size_t r = demand_rank(economy, student, prices, b);
    if (!last || r != *last) out.push_back(b);
    last = r;
  }
  return out;
}

namespace {

void validate(const Economy& economy, const GridSpec& grid, const Rational& beta) {
  if (grid.step <= 0) throw EconomyError("grid step must be positive");
  if (grid.price_max < 0) throw EconomyError("price_max must be nonnegative");
  if (!is_integer(grid.price_max / grid.step)) throw EconomyError("price_max must be a multiple of the grid step");
  if (beta < 0) throw EconomyError("beta must be nonnegative");
  for (const auto& [j, p] : grid.pinned) {
    if (j >= economy.num_courses()) throw EconomyError("pinned course out of range");
    if (p < 0) throw EconomyError("pinned price must be nonnegative");
  }
  if (grid.budget_levels) {
    if (grid.budget_levels->empty()) throw EconomyError("budget menu is empty");
    for (const Rational& b : *grid.budget_levels) {
      if (b < 1 || b > 1 + beta) throw EconomyError("budget menu entries must lie in [1, 1+beta]");
    }
  }
}

mpz_class lcm(const mpz_class& a, const mpz_class& b) {
  mpz_class r;
  mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return r;
}

std::int64_t to_units(const Rational& value, const mpz_class& scale) {
  Rational scaled = value * Rational(scale);
  if (!is_integer(scaled) || !scaled.get_num().fits_slong_p()) throw GridBudgetExceeded("price scale overflow");
  return scaled.get_num().get_si();
}

// Branch and bound over grid prices (integers in units of 1/scale), then over budget compositions per
// preference type. Everything below works in those integer units.
class Search {
 public:
  Search(const Economy& economy, const GridSpec& grid, const Rational& beta, const AlphaBound& bound)
      : economy_(economy), grid_(grid), m_(economy.num_courses()) {
    mpz_class scale = grid.step.get_den();
    scale = lcm(scale, grid.price_max.get_den());
    scale = lcm(scale, beta.get_den());
    for (const auto& [j, p] : grid.pinned) scale = lcm(scale, p.get_den());
    if (grid.budget_levels) {
      for (const Rational& b : *grid.budget_levels) scale = lcm(scale, b.get_den());
    }
    if (!scale.fits_slong_p() || scale > 1'000'000'000) throw GridBudgetExceeded("price scale too fine");
    scale_ = scale;
    step_ = to_units(grid.step, scale_);
    price_max_ = to_units(grid.price_max, scale_);
    one_ = to_units(Rational(1), scale_);
    top_ = to_units(1 + beta, scale_);
    if (grid.budget_levels) {
      for (const Rational& b : *grid.budget_levels) menu_.push_back(to_units(b, scale_));
      std::sort(menu_.begin(), menu_.end());
      menu_.erase(std::unique(menu_.begin(), menu_.end()), menu_.end());
      bmin_ = menu_.front();
      bmax_ = menu_.back();
    } else {
      bmin_ = one_;
      bmax_ = top_;
    }
    bound_sq_ = bound.squared();

    pinned_.assign(m_, false);
    base_prices_.assign(m_, 0);
    for (const auto& [j, p] : grid.pinned) {
      pinned_[j] = true;
      base_prices_[j] = to_units(p, scale_);
    }
    capacity_.resize(m_);
    for (CourseIndex j = 0; j < m_; ++j) capacity_[j] = economy.course(j).capacity;

    // Preference types.
    for (StudentIndex i = 0; i < economy.num_students(); ++i) {
      const auto& prefs = economy.student(i).preferences;
      auto it = std::find_if(types_.begin(), types_.end(), [&](const Type& t) { return *t.prefs == prefs; });
      if (it == types_.end()) {
        types_.push_back(Type{&prefs, {i}});
      } else {
        it->members.push_back(i);
      }
    }

    // Free courses ordered by first appearance in the preference lists.
    std::vector<bool> seen(m_, false);
    for (const Student& s : economy.students()) {
      for (const Bundle& b : s.preferences) {
        for (CourseIndex j : b.courses()) {
          if (!seen[j] && !pinned_[j]) order_.push_back(j);
          seen[j] = true;
        }
      }
    }
    for (CourseIndex j = 0; j < m_; ++j) {
      if (!seen[j] && !pinned_[j]) order_.push_back(j);
    }
    for (std::int64_t v = 0; v <= price_max_; v += step_) levels_.push_back(v);
  }

  std::vector<Solution> run(unsigned threads) {
    std::vector<std::vector<Solution>> per_worker;
    if (order_.empty() || threads <= 1) {
      per_worker.emplace_back();
      Worker w(*this, 0, 1);
      w.run(per_worker.back());
    } else {
      per_worker.resize(threads);
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(threads);
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            Worker w(*this, t, threads);
            w.run(per_worker[t]);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      for (auto& th : pool) th.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    std::vector<Solution> all;
    for (auto& v : per_worker) {
      for (auto& s : v) all.push_back(std::move(s));
    }
    std::sort(all.begin(), all.end(), [](const Solution& a, const Solution& b) { return a.prices < b.prices; });
    return all;
  }

 private:
  struct Type {
    const std::vector<Bundle>* prefs;
    std::vector<StudentIndex> members;
  };

  // Budget option for a type: demanded rank and the lowest budget producing it.
  struct Option {
    std::size_t rank;
    std::int64_t level;
  };

  class Worker {
   public:
    Worker(Search& s, unsigned id, unsigned count)
        : s_(s), id_(id), count_(count), prices_(s.base_prices_), assigned_(s.pinned_), counts_(s.m_) {
      // Errors are integers, so comparing against the floor of the bound is exact.
      mpz_class floor_sq = s.bound_sq_.get_num() / s.bound_sq_.get_den();
      bound_int_ = floor_sq.fits_slong_p() ? floor_sq.get_si() : std::numeric_limits<std::int64_t>::max() / 4;
      level_.assign(s.m_, 0);
    }

    void run(std::vector<Solution>& out) {
      out_ = &out;
      price_dfs(0);
    }

   private:
    void tick() {
      if (++s_.nodes_ > s_.grid_.max_nodes) {
        throw GridBudgetExceeded("grid search exceeded " + std::to_string(s_.grid_.max_nodes) + " nodes");
      }
    }

    std::int64_t cost(const Bundle& b, std::int64_t& unassigned) const {
      std::int64_t c = 0;
      unassigned = 0;
      for (CourseIndex j : b.courses()) {
        if (assigned_[j]) {
          c += prices_[j];
        } else {
          ++unassigned;
        }
      }
      return c;
    }

    // Squared-error contribution of course j when its enrollment can be anything in [lo, hi].
    Rational course_lb(CourseIndex j, std::int64_t lo, std::int64_t hi) const {
      if (s_.pinned_[j]) return 0;
      std::int64_t q = s_.capacity_[j];
      std::int64_t d = 0;
      if (assigned_[j] && prices_[j] > 0) {
        if (q < lo) d = lo - q;
        if (q > hi) d = q - hi;
      } else if (lo > q) {
        d = lo - q;
      }
      return Rational(d) * d;
    }

    // Squared error of course j at enrollment e, in the integer form course_lb uses.
    std::int64_t course_err(CourseIndex j, std::int64_t e) const {
      if (s_.pinned_[j]) return 0;
      std::int64_t d = e - s_.capacity_[j];
      if (!(assigned_[j] && prices_[j] > 0) && d < 0) d = 0;
      return d * d;
    }

    std::int64_t course_err_range(CourseIndex j, std::int64_t lo, std::int64_t hi) const {
      std::int64_t q = s_.capacity_[j];
      return course_err(j, std::clamp(q, lo, hi));
    }

    bool viable() {
      const std::size_t m = s_.m_;
      const std::size_t tcount = s_.types_.size();
      lo_.assign(m, 0);
      hi_.assign(m, 0);
      type_counts_.resize(tcount);
      type_options_.assign(tcount, 0);
      type_seated_.assign(tcount, false);
      for (std::size_t t = 0; t < tcount; ++t) {
        const auto& prefs = *s_.types_[t].prefs;
        const std::int64_t n = static_cast<std::int64_t>(s_.types_[t].members.size());
        auto& counts = type_counts_[t];
        counts.assign(m, 0);
        std::int64_t options = 0;
        bool certain = false;
        bool seated = true;  // every possible option holds a seat in some non-pinned course
        // A budget reaching a later bundle must stay below every fully priced earlier one.
        std::int64_t ceiling = s_.bmax_ + 1;
        for (const Bundle& b : prefs) {
          std::int64_t free = 0;
          std::int64_t c = cost(b, free);
          if (c >= ceiling) continue;
          if (free == 0) ceiling = c;
          ++options;
          bool seat = false;
          for (CourseIndex j : b.courses()) {
            ++counts[j];
            seat = seat || !s_.pinned_[j];
          }
          seated = seated && seat;
          if (c + free * s_.price_max_ <= s_.bmin_) {
            certain = true;
            break;
          }
        }
        if (!certain) ++options;  // the empty bundle
        type_options_[t] = options;
        type_seated_[t] = certain && seated;
        for (CourseIndex j = 0; j < m; ++j) {
          if (counts[j] == options) lo_[j] += n;
          if (counts[j] > 0) hi_[j] += n;
        }
      }
      err_.assign(m, 0);
      std::int64_t total = 0;
      for (CourseIndex j = 0; j < m; ++j) {
        err_[j] = course_err_range(j, lo_[j], hi_[j]);
        total += err_[j];
        if (total > bound_int_) return false;
      }
      // Each member of a seated type occupies at least one seat in the union of its options' courses.
      for (std::size_t t = 0; t < tcount; ++t) {
        if (!type_seated_[t]) continue;
        const std::int64_t n = static_cast<std::int64_t>(s_.types_[t].members.size());
        const auto& counts = type_counts_[t];
        std::int64_t need = n;
        std::int64_t rest = total;
        std::int64_t have = 0;
        std::int64_t cost_now = 0;
        union_.clear();
        for (CourseIndex j = 0; j < m; ++j) {
          if (counts[j] == 0 || s_.pinned_[j]) continue;
          union_.push_back(j);
          need += lo_[j] - (counts[j] == type_options_[t] ? n : 0);
          rest -= err_[j];
          level_[j] = std::clamp(s_.capacity_[j], lo_[j], hi_[j]);
          have += level_[j];
          cost_now += course_err(j, level_[j]);
        }
        while (have < need && rest + cost_now <= bound_int_) {
          std::optional<CourseIndex> pick;
          std::int64_t best = 0;
          for (CourseIndex j : union_) {
            if (level_[j] >= hi_[j]) continue;
            std::int64_t step = course_err(j, level_[j] + 1) - course_err(j, level_[j]);
            if (!pick || step < best) {
              pick = j;
              best = step;
            }
          }
          if (!pick) return false;
          ++level_[*pick];
          ++have;
          cost_now += best;
        }
        if (rest + cost_now > bound_int_) return false;
      }
      return true;
    }

    void price_dfs(std::size_t depth) {
      tick();
      if (!viable()) return;
      if (depth == s_.order_.size()) {
        leaf();
        return;
      }
      CourseIndex j = s_.order_[depth];
      assigned_[j] = true;
      for (std::size_t l = 0; l < s_.levels_.size(); ++l) {
        if (depth == 0 && l % count_ != id_) continue;
        prices_[j] = s_.levels_[l];
        price_dfs(depth + 1);
      }
      assigned_[j] = false;
      prices_[j] = 0;
    }

    std::vector<Option> options_for(const Type& t) const {
      const auto& prefs = *t.prefs;
      std::vector<std::int64_t> costs;
      std::int64_t unused = 0;
      for (const Bundle& b : prefs) costs.push_back(cost(b, unused));
      std::vector<std::int64_t> levels;
      if (!s_.menu_.empty()) {
        levels = s_.menu_;
      } else {
        levels.push_back(s_.one_);
        for (std::int64_t c : costs) {
          if (c > s_.one_ && c <= s_.top_) levels.push_back(c);
        }
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      }
      std::vector<Option> out;
      for (std::int64_t b : levels) {
        std::size_t r = prefs.size();
        for (std::size_t k = 0; k < prefs.size(); ++k) {
          if (costs[k] <= b) {
            r = k;
            break;
          }
        }
        if (out.empty() || out.back().rank != r) out.push_back({r, b});
      }
      return out;
    }

    void leaf() {
      const std::size_t m = s_.m_;
      const std::size_t tcount = s_.types_.size();
      // Types with the most budget options go first; measured faster than the reverse on the copy gadget.
      perm_.resize(tcount);
      std::vector<std::vector<Option>> by_type(tcount);
      for (std::size_t t = 0; t < tcount; ++t) {
        perm_[t] = t;
        by_type[t] = options_for(s_.types_[t]);
      }
      std::stable_sort(perm_.begin(), perm_.end(),
                       [&](std::size_t a, std::size_t b) { return by_type[a].size() > by_type[b].size(); });
      opts_.assign(tcount, {});
      // Per type and option index o: indicator of course j in all / any of options o.. (suffix).
      all_from_.assign(tcount, {});
      any_from_.assign(tcount, {});
      for (std::size_t t = 0; t < tcount; ++t) {
        opts_[t] = std::move(by_type[perm_[t]]);
        const auto& prefs = *type_at(t).prefs;
        std::size_t r = opts_[t].size();
        all_from_[t].assign(r + 1, std::vector<char>(m, 1));
        any_from_[t].assign(r + 1, std::vector<char>(m, 0));
        for (std::size_t o = r; o-- > 0;) {
          std::vector<char> here(m, 0);
          if (opts_[t][o].rank < prefs.size()) {
            for (CourseIndex j : prefs[opts_[t][o].rank].courses()) here[j] = 1;
          }
          for (CourseIndex j = 0; j < m; ++j) {
            all_from_[t][o][j] = static_cast<char>(all_from_[t][o + 1][j] && here[j]);
            any_from_[t][o][j] = static_cast<char>(any_from_[t][o + 1][j] || here[j]);
          }
        }
      }
      // Suffix sums over whole types.
      suffix_lo_.assign(tcount + 1, std::vector<std::int64_t>(m, 0));
      suffix_hi_.assign(tcount + 1, std::vector<std::int64_t>(m, 0));
      for (std::size_t t = tcount; t-- > 0;) {
        std::int64_t n = static_cast<std::int64_t>(type_at(t).members.size());
        for (CourseIndex j = 0; j < m; ++j) {
          suffix_lo_[t][j] = suffix_lo_[t + 1][j] + (all_from_[t][0][j] ? n : 0);
          suffix_hi_[t][j] = suffix_hi_[t + 1][j] + (any_from_[t][0][j] ? n : 0);
        }
      }
      enrolled_.assign(m, 0);
      choice_.assign(tcount, {});
      for (std::size_t t = 0; t < tcount; ++t) choice_[t].assign(opts_[t].size(), 0);
      best_.reset();
      if (tcount == 0) {
        evaluate_leaf();
      } else {
        budget_dfs(0, 0, static_cast<std::int64_t>(type_at(0).members.size()));
      }
      if (best_) emit();
    }

    Rational budget_lb(std::size_t t, std::size_t o, std::int64_t left) const {
      Rational total = 0;
      for (CourseIndex j = 0; j < s_.m_; ++j) {
        std::int64_t lo = enrolled_[j] + suffix_lo_[t + 1][j] + (all_from_[t][o][j] ? left : 0);
        std::int64_t hi = enrolled_[j] + suffix_hi_[t + 1][j] + (any_from_[t][o][j] ? left : 0);
        total += course_lb(j, lo, hi);
      }
      return total;
    }

    bool pruned(const Rational& lb) const {
      if (lb > s_.bound_sq_) return true;
      return best_ && lb >= best_value_;
    }

    void add_option(std::size_t t, std::size_t o, std::int64_t count) {
      std::size_t r = opts_[t][o].rank;
      const auto& prefs = *type_at(t).prefs;
      if (r < prefs.size()) {
        for (CourseIndex j : prefs[r].courses()) enrolled_[j] += count;
      }
    }

    void budget_dfs(std::size_t t, std::size_t o, std::int64_t left) {
      tick();
      if (t == s_.types_.size()) {
        evaluate_leaf();
        return;
      }
      if (pruned(budget_lb(t, o, left))) return;
      const std::size_t last = opts_[t].size() - 1;
      if (o == last) {
        choice_[t][o] = left;
        add_option(t, o, left);
        std::size_t nt = t + 1;
        budget_dfs(nt, 0, nt < s_.types_.size() ? static_cast<std::int64_t>(type_at(nt).members.size()) : 0);
        add_option(t, o, -left);
        choice_[t][o] = 0;
        return;
      }
      for (std::int64_t c = left; c >= 0; --c) {
        choice_[t][o] = c;
        add_option(t, o, c);
        budget_dfs(t, o + 1, left - c);
        add_option(t, o, -c);
      }
      choice_[t][o] = 0;
    }

    void evaluate_leaf() {
      Rational total = 0;
      for (CourseIndex j = 0; j < s_.m_; ++j) total += course_lb(j, enrolled_[j], enrolled_[j]);
      if (total > s_.bound_sq_) return;
      if (best_ && total >= best_value_) return;
      best_value_ = total;
      best_ = choice_;
    }

    void emit() {
      Solution s;
      s.prices.resize(s_.m_);
      Rational unit(1);
      unit /= Rational(s_.scale_);
      for (CourseIndex j = 0; j < s_.m_; ++j) s.prices[j] = Rational(prices_[j]) * unit;
      s.budgets.assign(s_.economy_.num_students(), Rational(1));
      s.allocation.assign(s_.economy_.num_students(), Bundle{});
      for (std::size_t t = 0; t < s_.types_.size(); ++t) {
        const Type& type = type_at(t);
        std::size_t next = 0;
        for (std::size_t o = 0; o < opts_[t].size(); ++o) {
          for (std::int64_t c = 0; c < (*best_)[t][o]; ++c) {
            StudentIndex i = type.members[next++];
            s.budgets[i] = Rational(opts_[t][o].level) * unit;
            std::size_t r = opts_[t][o].rank;
            s.allocation[i] = r < type.prefs->size() ? (*type.prefs)[r] : Bundle{};
          }
        }
      }
      out_->push_back(std::move(s));
    }

    const Type& type_at(std::size_t position) const { return s_.types_[perm_[position]]; }

    Search& s_;
    unsigned id_;
    unsigned count_;
    std::vector<std::int64_t> prices_;
    std::vector<bool> assigned_;
    std::vector<std::int64_t> counts_;
    std::vector<Solution>* out_ = nullptr;

    std::vector<std::size_t> perm_;
    std::vector<std::int64_t> lo_, hi_, err_, level_;
    std::vector<std::vector<std::int64_t>> type_counts_;
    std::vector<std::int64_t> type_options_;
    std::vector<bool> type_seated_;
    std::vector<CourseIndex> union_;
    std::int64_t bound_int_ = 0;
    std::vector<std::vector<Option>> opts_;
    std::vector<std::vector<std::vector<char>>> all_from_;
    std::vector<std::vector<std::vector<char>>> any_from_;
    std::vector<std::vector<std::int64_t>> suffix_lo_;
    std::vector<std::vector<std::int64_t>> suffix_hi_;
    std::vector<std::int64_t> enrolled_;
    std::vector<std::vector<std::int64_t>> choice_;
    std::optional<std::vector<std::vector<std::int64_t>>> best_;
    Rational best_value_;
  };

  const Economy& economy_;
  const GridSpec& grid_;
  std::size_t m_;
  mpz_class scale_;
  std::int64_t step_ = 1;
  std::int64_t price_max_ = 0;
  std::int64_t one_ = 1;
  std::int64_t top_ = 1;
  std::int64_t bmin_ = 1;
  std::int64_t bmax_ = 1;
  std::vector<std::int64_t> menu_;
  Rational bound_sq_;
  std::vector<bool> pinned_;
  std::vector<std::int64_t> base_prices_;
  std::vector<std::int64_t> capacity_;
  std::vector<Type> types_;
  std::vector<CourseIndex> order_;
  std::vector<std::int64_t> levels_;
  std::atomic<std::uint64_t> nodes_{0};
};

}  // namespace

std::vector<Solution> grid_price_search(const Economy& economy, const GridSpec& grid, const Rational& beta,
                                        const AlphaBound& alpha_bound) {
  validate(economy, grid, beta);
  Search search(economy, grid, beta, alpha_bound);
  return search.run(grid.threads == 0 ? lab_threads() : grid.threads);
}

std::vector<Solution> grid_price_search_brute(const Economy& economy, const GridSpec& grid, const Rational& beta,
                                              const AlphaBound& alpha_bound) {
  validate(economy, grid, beta);
  const std::size_t m = economy.num_courses();
  const std::size_t n = economy.num_students();
  std::vector<Rational> levels;
  for (Rational v = 0; v <= grid.price_max; v += grid.step) levels.push_back(v);
  std::vector<CourseIndex> free;
  for (CourseIndex j = 0; j < m; ++j) {
    if (!grid.pinned.count(j)) free.push_back(j);
  }
  std::uint64_t total = 1;
  for (std::size_t k = 0; k < free.size(); ++k) {
    total *= levels.size();
    if (total > grid.max_nodes) throw GridBudgetExceeded("brute-force grid too large");
  }

  std::vector<Solution> out;
  PriceVector p(m, Rational(0));
  for (const auto& [j, v] : grid.pinned) p[j] = v;
  for (std::uint64_t code = 0; code < total; ++code) {
    std::uint64_t rest = code;
    for (std::size_t k = free.size(); k-- > 0;) {
      p[free[k]] = levels[rest % levels.size()];
      rest /= levels.size();
    }
    std::vector<std::vector<Rational>> menus(n);
    for (StudentIndex i = 0; i < n; ++i) menus[i] = critical_budgets(economy, i, p, beta, grid.budget_levels);
    std::vector<std::size_t> pick(n, 0);
    std::optional<Solution> best;
    Rational best_sq;
    while (true) {
      Solution s{p, std::vector<Rational>(n), std::vector<Bundle>(n)};
      for (StudentIndex i = 0; i < n; ++i) {
        s.budgets[i] = menus[i][pick[i]];
        s.allocation[i] = demand(economy, i, p, s.budgets[i]);
      }
      Rational sq = grid_alpha_sq(economy, grid, p, s.allocation);
      if (alpha_bound.admits(sq) && (!best || sq < best_sq)) {
        best = s;
        best_sq = sq;
      }
      std::size_t k = 0;
      while (k < n && ++pick[k] == menus[k].size()) pick[k++] = 0;
      if (k == n) break;
    }
    if (best) out.push_back(std::move(*best));
  }
  std::sort(out.begin(), out.end(), [](const Solution& a, const Solution& b) { return a.prices < b.prices; });
  return out;
}

}  // namespace aceei
