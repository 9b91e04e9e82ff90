#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aceei/rational.hpp"

namespace aceei {

using CourseIndex = std::size_t;
using StudentIndex = std::size_t;

class EconomyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Course {
  std::string id;
  std::int64_t capacity = 0;
};

/// A set of courses, stored as sorted course indices.
class Bundle {
 public:
  Bundle() = default;
  /// Throws EconomyError on duplicate courses.
  explicit Bundle(std::vector<CourseIndex> courses);
  Bundle(std::initializer_list<CourseIndex> courses) : Bundle(std::vector<CourseIndex>(courses)) {}

  const std::vector<CourseIndex>& courses() const { return courses_; }
  std::size_t size() const { return courses_.size(); }
  bool empty() const { return courses_.empty(); }
  bool contains(CourseIndex course) const;

  Rational cost(std::span<const Rational> prices) const;

  auto operator<=>(const Bundle&) const = default;
  bool operator==(const Bundle&) const = default;

 private:
  std::vector<CourseIndex> courses_;
};

/// `preferences` is most-preferred first. The empty bundle is implicitly last.
struct Student {
  std::string id;
  std::vector<Bundle> preferences;
};

/// Immutable course-allocation economy. Construction validates every invariant.
class Economy {
 public:
  Economy(std::vector<Course> courses, std::vector<Student> students);

  std::size_t num_courses() const { return courses_.size(); }
  std::size_t num_students() const { return students_.size(); }
  /// k: the largest bundle size over all students (0 when no student lists a bundle).
  std::size_t max_bundle_size() const { return max_bundle_size_; }

  const std::vector<Course>& courses() const { return courses_; }
  const std::vector<Student>& students() const { return students_; }
  const Course& course(CourseIndex j) const { return courses_.at(j); }
  const Student& student(StudentIndex i) const { return students_.at(i); }

  std::optional<CourseIndex> find_course(std::string_view id) const;
  std::optional<StudentIndex> find_student(std::string_view id) const;
  /// Throws EconomyError for unknown ids.
  CourseIndex course_index(std::string_view id) const;
  StudentIndex student_index(std::string_view id) const;

  /// Position of `bundle` in the student's list; the list length for the empty bundle.
  std::optional<std::size_t> rank_of(StudentIndex i, const Bundle& bundle) const;

  /// Total number of (student, bundle) pairs.
  std::size_t num_pairs() const;

 private:
  std::vector<Course> courses_;
  std::vector<Student> students_;
  std::unordered_map<std::string, CourseIndex> course_by_id_;
  std::unordered_map<std::string, StudentIndex> student_by_id_;
  std::size_t max_bundle_size_ = 0;
};

using PriceVector = std::vector<Rational>;

/// Throws EconomyError unless `prices` has one entry per course, each in [0, p_max].
void check_prices(const Economy& economy, std::span<const Rational> prices,
                  const std::optional<Rational>& p_max = std::nullopt);

/// Default price ceiling 1 + beta + epsilon.
Rational default_price_ceiling(const Rational& beta, const Rational& epsilon);

struct Solution {
  PriceVector prices;
  std::vector<Rational> budgets;
  std::vector<Bundle> allocation;

  bool operator==(const Solution&) const = default;
};

/// Throws EconomyError if sizes mismatch or an allocated bundle is neither listed nor empty.
void check_solution(const Economy& economy, const Solution& solution);

}  // namespace aceei
