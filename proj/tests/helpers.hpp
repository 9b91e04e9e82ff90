#pragma once

#include <random>
#include <string>
#include <vector>

#include "aceei/economy.hpp"

namespace testing_support {

using aceei::Bundle;
using aceei::Course;
using aceei::Economy;
using aceei::Rational;
using aceei::Student;

inline Rational q(long num, long den = 1) { return aceei::make_rational(num, den); }

inline std::vector<Rational> qs(std::initializer_list<Rational> values) { return std::vector<Rational>(values); }

/// Courses c1..cM with the given capacities.
inline std::vector<Course> courses(std::initializer_list<std::int64_t> capacities) {
  std::vector<Course> out;
  int idx = 1;
  for (auto cap : capacities) out.push_back({"c" + std::to_string(idx++), cap});
  return out;
}

inline Student student(std::string id, std::vector<Bundle> prefs) { return Student{std::move(id), std::move(prefs)}; }

/// Random micro-economy: M courses (capacity 0..2), N students, each with up to `max_list` distinct
/// nonempty bundles of size <= max_k.
inline Economy random_micro(std::mt19937_64& rng, std::size_t m, std::size_t n, std::size_t max_list,
                            std::size_t max_k) {
  std::vector<Course> cs;
  for (std::size_t j = 0; j < m; ++j) cs.push_back({"c" + std::to_string(j + 1), static_cast<std::int64_t>(rng() % 3)});
  std::vector<Bundle> all;
  for (std::size_t mask = 1; mask < (std::size_t{1} << m); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t j = 0; j < m; ++j)
      if (mask & (std::size_t{1} << j)) members.push_back(j);
    if (members.size() <= max_k) all.emplace_back(members);
  }
  std::vector<Student> ss;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Bundle> pool = all;
    std::shuffle(pool.begin(), pool.end(), rng);
    std::size_t len = rng() % (std::min(max_list, pool.size()) + 1);
    pool.resize(len);
    ss.push_back({"s" + std::to_string(i + 1), pool});
  }
  return Economy(std::move(cs), std::move(ss));
}

}  // namespace testing_support
