#include "aceei/json_io.hpp"

#include <fstream>
#include <sstream>

namespace aceei {

namespace {

const Json& require(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  return doc.at(key);
}

std::string require_string(const Json& value, const char* what) {
  if (!value.is_string()) throw FormatError(std::string(what) + " must be a string");
  return value.get<std::string>();
}

Bundle bundle_from_ids(const Economy& economy, const Json& ids) {
  if (!ids.is_array()) throw FormatError("bundle must be an array of course ids");
  std::vector<CourseIndex> courses;
  for (const Json& id : ids) courses.push_back(economy.course_index(require_string(id, "course id")));
  return Bundle(std::move(courses));
}

Json bundle_to_ids(const Economy& economy, const Bundle& bundle) {
  Json ids = Json::array();
  for (CourseIndex j : bundle.courses()) ids.push_back(economy.course(j).id);
  return ids;
}

}  // namespace

Json rational_to_json(const Rational& value) { return to_string(value); }

Rational rational_from_json(const Json& value) {
  if (value.is_string()) {
    try {
      return parse_rational(value.get<std::string>());
    } catch (const RationalParseError& e) {
      throw FormatError(e.what());
    }
  }
  if (value.is_number_integer()) return Rational(value.get<long>());
  throw FormatError("rational must be a \"num/den\" string");
}

Json economy_to_json(const Economy& economy) {
  Json doc;
  Json courses = Json::array();
  for (const Course& c : economy.courses()) courses.push_back({{"id", c.id}, {"capacity", c.capacity}});
  Json students = Json::array();
  for (const Student& s : economy.students()) {
    Json prefs = Json::array();
    for (const Bundle& b : s.preferences) prefs.push_back(bundle_to_ids(economy, b));
    students.push_back({{"id", s.id}, {"preferences", prefs}});
  }
  doc["courses"] = courses;
  doc["students"] = students;
  return doc;
}

Economy economy_from_json(const Json& doc) {
  const Json& courses_json = require(doc, "courses");
  if (!courses_json.is_array()) throw FormatError("'courses' must be an array");
  std::vector<Course> courses;
  std::unordered_map<std::string, CourseIndex> index;
  for (const Json& c : courses_json) {
    Course course;
    course.id = require_string(require(c, "id"), "course id");
    const Json& cap = require(c, "capacity");
    if (!cap.is_number_integer()) throw FormatError("capacity of '" + course.id + "' must be an integer");
    course.capacity = cap.get<std::int64_t>();
    index.emplace(course.id, courses.size());
    courses.push_back(std::move(course));
  }

  std::vector<Student> students;
  if (doc.contains("students")) {
    const Json& students_json = doc.at("students");
    if (!students_json.is_array()) throw FormatError("'students' must be an array");
    for (const Json& s : students_json) {
      Student student;
      student.id = require_string(require(s, "id"), "student id");
      const Json& prefs = require(s, "preferences");
      if (!prefs.is_array()) throw FormatError("preferences of '" + student.id + "' must be an array");
      for (const Json& bundle : prefs) {
        if (!bundle.is_array()) throw FormatError("each preference must be an array of course ids");
        std::vector<CourseIndex> members;
        for (const Json& id : bundle) {
          auto name = require_string(id, "course id");
          auto it = index.find(name);
          if (it == index.end()) throw FormatError("student '" + student.id + "' lists unknown course '" + name + "'");
          members.push_back(it->second);
        }
        try {
          student.preferences.emplace_back(std::move(members));
        } catch (const EconomyError& e) {
          throw FormatError("student '" + student.id + "': " + e.what());
        }
      }
      students.push_back(std::move(student));
    }
  }
  try {
    return Economy(std::move(courses), std::move(students));
  } catch (const EconomyError& e) {
    throw FormatError(e.what());
  }
}

Json solution_to_json(const Economy& economy, const Solution& solution) {
  Json prices = Json::object();
  for (CourseIndex j = 0; j < economy.num_courses(); ++j) prices[economy.course(j).id] = to_string(solution.prices[j]);
  Json budgets = Json::object();
  Json allocation = Json::object();
  for (StudentIndex i = 0; i < economy.num_students(); ++i) {
    budgets[economy.student(i).id] = to_string(solution.budgets[i]);
    allocation[economy.student(i).id] = bundle_to_ids(economy, solution.allocation[i]);
  }
  return Json{{"prices", prices}, {"budgets", budgets}, {"allocation", allocation}};
}

Solution solution_from_json(const Economy& economy, const Json& doc) {
  try {
    Solution s;
    s.prices.assign(economy.num_courses(), Rational(0));
    std::vector<bool> priced(economy.num_courses(), false);
    const Json& prices = require(doc, "prices");
    if (!prices.is_object()) throw FormatError("'prices' must be an object");
    for (const auto& [id, value] : prices.items()) {
      CourseIndex j = economy.course_index(id);
      s.prices[j] = rational_from_json(value);
      priced[j] = true;
    }
    for (CourseIndex j = 0; j < priced.size(); ++j) {
      if (!priced[j]) throw FormatError("no price for course '" + economy.course(j).id + "'");
    }

    s.budgets.assign(economy.num_students(), Rational(0));
    s.allocation.assign(economy.num_students(), Bundle{});
    std::vector<bool> budgeted(economy.num_students(), false);
    const Json& budgets = require(doc, "budgets");
    if (!budgets.is_object()) throw FormatError("'budgets' must be an object");
    for (const auto& [id, value] : budgets.items()) {
      StudentIndex i = economy.student_index(id);
      s.budgets[i] = rational_from_json(value);
      budgeted[i] = true;
    }
    for (StudentIndex i = 0; i < budgeted.size(); ++i) {
      if (!budgeted[i]) throw FormatError("no budget for student '" + economy.student(i).id + "'");
    }
    const Json& allocation = require(doc, "allocation");
    if (!allocation.is_object()) throw FormatError("'allocation' must be an object");
    for (const auto& [id, bundle] : allocation.items()) {
      s.allocation[economy.student_index(id)] = bundle_from_ids(economy, bundle);
    }
    check_solution(economy, s);
    return s;
  } catch (const EconomyError& e) {
    throw FormatError(e.what());
  }
}

Json report_to_json(const Economy& economy, const ClearingReport& report, bool float_view) {
  Json doc;
  doc["z"] = report.z;
  doc["alpha_sq"] = to_string(report.alpha_sq);
  doc["conditions"] = {report.condition1, report.condition2, report.condition3};
  Json diagnostics = Json::object();
  if (report.first_demand_violation) {
    diagnostics["first_demand_violation"] = economy.student(*report.first_demand_violation).id;
  }
  if (report.first_uncleared_course) {
    diagnostics["first_uncleared_course"] = economy.course(*report.first_uncleared_course).id;
  }
  if (report.first_budget_violation) {
    diagnostics["first_budget_violation"] = economy.student(*report.first_budget_violation).id;
  }
  doc["diagnostics"] = diagnostics;
  if (float_view) doc["alpha"] = report.alpha;
  return doc;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace aceei
