#include "aceei/economy.hpp"

#include <algorithm>
#include <set>

namespace aceei {

Bundle::Bundle(std::vector<CourseIndex> courses) : courses_(std::move(courses)) {
  std::sort(courses_.begin(), courses_.end());
  if (std::adjacent_find(courses_.begin(), courses_.end()) != courses_.end()) {
    throw EconomyError("bundle lists the same course twice");
  }
}

bool Bundle::contains(CourseIndex course) const {
  return std::binary_search(courses_.begin(), courses_.end(), course);
}

Rational Bundle::cost(std::span<const Rational> prices) const {
  Rational total = 0;
  for (CourseIndex j : courses_) total += prices[j];
  return total;
}

Economy::Economy(std::vector<Course> courses, std::vector<Student> students)
    : courses_(std::move(courses)), students_(std::move(students)) {
  if (courses_.empty()) throw EconomyError("economy needs at least one course");
  for (CourseIndex j = 0; j < courses_.size(); ++j) {
    const Course& c = courses_[j];
    if (c.capacity < 0) throw EconomyError("course '" + c.id + "' has negative capacity");
    if (!course_by_id_.emplace(c.id, j).second) throw EconomyError("duplicate course id '" + c.id + "'");
  }
  for (StudentIndex i = 0; i < students_.size(); ++i) {
    const Student& s = students_[i];
    if (!student_by_id_.emplace(s.id, i).second) throw EconomyError("duplicate student id '" + s.id + "'");
    std::set<Bundle> seen;
    for (const Bundle& b : s.preferences) {
      if (b.empty()) throw EconomyError("student '" + s.id + "' lists the empty bundle explicitly");
      for (CourseIndex j : b.courses()) {
        if (j >= courses_.size()) throw EconomyError("student '" + s.id + "' lists an unknown course");
      }
      if (!seen.insert(b).second) throw EconomyError("student '" + s.id + "' lists a bundle twice");
      max_bundle_size_ = std::max(max_bundle_size_, b.size());
    }
  }
}

std::optional<CourseIndex> Economy::find_course(std::string_view id) const {
  auto it = course_by_id_.find(std::string(id));
  if (it == course_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<StudentIndex> Economy::find_student(std::string_view id) const {
  auto it = student_by_id_.find(std::string(id));
  if (it == student_by_id_.end()) return std::nullopt;
  return it->second;
}

CourseIndex Economy::course_index(std::string_view id) const {
  if (auto j = find_course(id)) return *j;
  throw EconomyError("unknown course id '" + std::string(id) + "'");
}

StudentIndex Economy::student_index(std::string_view id) const {
  if (auto i = find_student(id)) return *i;
  throw EconomyError("unknown student id '" + std::string(id) + "'");
}

std::optional<std::size_t> Economy::rank_of(StudentIndex i, const Bundle& bundle) const {
  const auto& prefs = student(i).preferences;
  if (bundle.empty()) return prefs.size();
  auto it = std::find(prefs.begin(), prefs.end(), bundle);
  if (it == prefs.end()) return std::nullopt;
  return static_cast<std::size_t>(it - prefs.begin());
}

std::size_t Economy::num_pairs() const {
  std::size_t n = 0;
  for (const Student& s : students_) n += s.preferences.size();
  return n;
}

void check_prices(const Economy& economy, std::span<const Rational> prices, const std::optional<Rational>& p_max) {
  if (prices.size() != economy.num_courses()) throw EconomyError("price vector length differs from course count");
  for (CourseIndex j = 0; j < prices.size(); ++j) {
    if (prices[j] < 0) throw EconomyError("negative price for course '" + economy.course(j).id + "'");
    if (p_max && prices[j] > *p_max) {
      throw EconomyError("price for course '" + economy.course(j).id + "' exceeds the ceiling");
    }
  }
}

Rational default_price_ceiling(const Rational& beta, const Rational& epsilon) { return 1 + beta + epsilon; }

void check_solution(const Economy& economy, const Solution& solution) {
  check_prices(economy, solution.prices);
  if (solution.budgets.size() != economy.num_students()) {
    throw EconomyError("budget vector length differs from student count");
  }
  if (solution.allocation.size() != economy.num_students()) {
    throw EconomyError("allocation length differs from student count");
  }
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    if (!economy.rank_of(i, solution.allocation[i])) {
      throw EconomyError("student '" + economy.student(i).id + "' is allocated a bundle outside her list");
    }
  }
}

}  // namespace aceei
