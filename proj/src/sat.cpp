#include "aceei/sat.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "aceei/market.hpp"

namespace aceei {

CnfFormula::CnfFormula(int num_vars, std::vector<Clause> clauses) : num_vars_(num_vars), clauses_(std::move(clauses)) {
  if (num_vars_ < 0) throw SatError("negative variable count");
  std::vector<int> count(static_cast<std::size_t>(num_vars_) + 1, 0);
  for (std::size_t c = 0; c < clauses_.size(); ++c) {
    const Clause& cl = clauses_[c];
    if (cl.size() != 3) throw SatError("clause " + std::to_string(c + 1) + " does not have exactly 3 literals");
    std::set<int> vars;
    for (const Literal& l : cl) {
      if (l.var < 1 || l.var > num_vars_) {
        throw SatError("clause " + std::to_string(c + 1) + " uses unknown variable " + std::to_string(l.var));
      }
      vars.insert(l.var);
      ++count[static_cast<std::size_t>(l.var)];
    }
    if (vars.size() != 3) throw SatError("clause " + std::to_string(c + 1) + " repeats a variable");
  }
  for (int v = 1; v <= num_vars_; ++v) {
    if (count[static_cast<std::size_t>(v)] > kMaxOccurrences) {
      throw SatError("variable " + std::to_string(v) + " occurs " + std::to_string(count[static_cast<std::size_t>(v)]) +
                     " times (at most " + std::to_string(kMaxOccurrences) + ")");
    }
  }
}

int CnfFormula::occurrences(int var) const {
  int n = 0;
  for (const Clause& cl : clauses_) {
    for (const Literal& l : cl) n += l.var == var;
  }
  return n;
}

CnfFormula parse_dimacs(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::optional<int> vars;
  std::optional<long> declared;
  std::vector<Clause> clauses;
  Clause current;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "c" || first[0] == 'c' || first[0] == '%') continue;
    if (first == "p") {
      std::string fmt;
      int v = 0;
      long c = 0;
      if (vars || !(ls >> fmt >> v >> c) || fmt != "cnf") {
        throw SatError("line " + std::to_string(line_no) + ": bad problem line");
      }
      vars = v;
      declared = c;
      continue;
    }
    if (!vars) throw SatError("line " + std::to_string(line_no) + ": clause before 'p cnf' line");
    ls.clear();
    ls.seekg(0);
    long lit = 0;
    while (ls >> lit) {
      if (lit == 0) {
        clauses.push_back(current);
        current.clear();
      } else {
        current.push_back({static_cast<int>(std::labs(lit)), lit > 0});
      }
    }
    if (!ls.eof()) throw SatError("line " + std::to_string(line_no) + ": expected integers");
  }
  if (!vars) throw SatError("missing 'p cnf' line");
  if (!current.empty()) throw SatError("last clause is not terminated by 0");
  if (static_cast<long>(clauses.size()) != *declared) {
    throw SatError("header declares " + std::to_string(*declared) + " clauses, found " + std::to_string(clauses.size()));
  }
  return CnfFormula(*vars, std::move(clauses));
}

std::string format_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  out << "p cnf " << f.num_vars() << ' ' << f.clauses().size() << '\n';
  for (const Clause& cl : f.clauses()) {
    for (const Literal& l : cl) out << (l.positive ? l.var : -l.var) << ' ';
    out << "0\n";
  }
  return out.str();
}

bool satisfies(const CnfFormula& f, const std::vector<bool>& truth) {
  std::vector<std::optional<bool>> partial(truth.begin(), truth.end());
  return satisfies(f, partial);
}

bool satisfies(const CnfFormula& f, const std::vector<std::optional<bool>>& partial) {
  if (partial.size() != static_cast<std::size_t>(f.num_vars())) throw SatError("assignment size differs from variable count");
  for (const Clause& cl : f.clauses()) {
    bool ok = false;
    for (const Literal& l : cl) {
      const auto& v = partial[static_cast<std::size_t>(l.var - 1)];
      if (v && *v == l.positive) ok = true;
    }
    if (!ok) return false;
  }
  return true;
}

std::size_t expected_course_count(const CnfFormula& f) {
  std::size_t m = f.clauses().size();
  for (int v = 1; v <= f.num_vars(); ++v) m += 3 + 2 * static_cast<std::size_t>(f.occurrences(v));
  return m;
}

CompiledSat compile_sat(const CnfFormula& f) {
  std::vector<Course> courses;
  std::vector<Student> students;
  auto course = [&](std::string id) {
    courses.push_back({std::move(id), 1});
    return courses.size() - 1;
  };

  std::vector<std::size_t> seen(static_cast<std::size_t>(f.num_vars()), 0);
  std::vector<std::array<std::size_t, 3>> occurrence;
  for (const Clause& cl : f.clauses()) {
    std::array<std::size_t, 3> occ{};
    for (std::size_t k = 0; k < 3; ++k) occ[k] = seen[static_cast<std::size_t>(cl[k].var - 1)]++;
    occurrence.push_back(occ);
  }

  std::vector<VariableCourses> vars;
  for (int v = 1; v <= f.num_vars(); ++v) {
    std::string p = "x" + std::to_string(v) + ".";
    VariableCourses vc{};
    vc.d_left = course(p + "DL");
    vc.d_center = course(p + "DC");
    vc.d_right = course(p + "DR");
    for (std::size_t j = 1; j <= seen[static_cast<std::size_t>(v - 1)]; ++j) {
      vc.out_true.push_back(course(p + "OT" + std::to_string(j)));
      vc.out_false.push_back(course(p + "OF" + std::to_string(j)));
    }
    std::vector<CourseIndex> true_side{vc.d_left}, false_side{vc.d_right};
    true_side.insert(true_side.end(), vc.out_true.begin(), vc.out_true.end());
    false_side.insert(false_side.end(), vc.out_false.begin(), vc.out_false.end());
    vc.s_true = students.size();
    students.push_back({p + "sT", {Bundle{vc.d_left, vc.d_center}, Bundle(true_side), Bundle{vc.d_right}}});
    vc.s_false = students.size();
    students.push_back({p + "sF", {Bundle{vc.d_right, vc.d_center}, Bundle(false_side), Bundle{vc.d_left}}});
    vars.push_back(std::move(vc));
  }

  std::vector<ClauseCourses> cls;
  for (std::size_t c = 0; c < f.clauses().size(); ++c) {
    const Clause& cl = f.clauses()[c];
    ClauseCourses cc{};
    cc.dilution = course("cl" + std::to_string(c + 1) + ".D");
    std::vector<Bundle> prefs;
    for (int mask = 7; mask >= 0; --mask) {
      std::array<bool, 3> a{(mask & 4) != 0, (mask & 2) != 0, (mask & 1) != 0};
      bool sat = false;
      for (std::size_t k = 0; k < 3; ++k) sat = sat || a[k] == cl[k].positive;
      if (!sat) continue;
      std::vector<CourseIndex> b{cc.dilution};
      for (std::size_t k = 0; k < 3; ++k) {
        const auto& vc = vars[static_cast<std::size_t>(cl[k].var - 1)];
        // The clause takes the side opposite to the variable's value.
        b.push_back(a[k] ? vc.out_false[occurrence[c][k]] : vc.out_true[occurrence[c][k]]);
      }
      prefs.emplace_back(std::move(b));
      cc.local_assignments.push_back(a);
    }
    cc.student = students.size();
    students.push_back({"cl" + std::to_string(c + 1) + ".s", std::move(prefs)});
    cls.push_back(std::move(cc));
  }

  return CompiledSat{f, Economy(std::move(courses), std::move(students)), std::move(vars), std::move(cls),
                     std::move(occurrence)};
}

Solution build_exact_ceei_from_assignment(const CompiledSat& cs, const std::vector<bool>& truth) {
  if (!satisfies(cs.formula, truth)) throw SatError("assignment does not satisfy the formula");
  const Economy& e = cs.economy;
  Solution s;
  s.prices.assign(e.num_courses(), Rational(0));
  s.budgets.assign(e.num_students(), Rational(1));
  s.allocation.assign(e.num_students(), Bundle{});
  for (std::size_t v = 0; v < cs.variables.size(); ++v) {
    const auto& vc = cs.variables[v];
    const Rational unit = make_rational(1, static_cast<long>(vc.out_true.size()) + 1);
    s.prices[vc.d_center] = 1;
    const auto& self = e.students();
    if (truth[v]) {
      s.prices[vc.d_left] = unit;
      for (CourseIndex j : vc.out_true) s.prices[j] = unit;
      s.allocation[vc.s_true] = self[vc.s_true].preferences[1];
      s.allocation[vc.s_false] = self[vc.s_false].preferences[0];
    } else {
      s.prices[vc.d_right] = unit;
      for (CourseIndex j : vc.out_false) s.prices[j] = unit;
      s.allocation[vc.s_false] = self[vc.s_false].preferences[1];
      s.allocation[vc.s_true] = self[vc.s_true].preferences[0];
    }
  }
  for (std::size_t c = 0; c < cs.clauses.size(); ++c) {
    const auto& cc = cs.clauses[c];
    s.prices[cc.dilution] = 1;
    const Clause& cl = cs.formula.clauses()[c];
    std::array<bool, 3> local{};
    for (std::size_t k = 0; k < 3; ++k) local[k] = truth[static_cast<std::size_t>(cl[k].var - 1)];
    for (std::size_t b = 0; b < cc.local_assignments.size(); ++b) {
      if (cc.local_assignments[b] == local) s.allocation[cc.student] = e.students()[cc.student].preferences[b];
    }
  }
  return s;
}

SatExtraction extract_assignment_from_solution(const CompiledSat& cs, const Solution& solution) {
  const Economy& e = cs.economy;
  SatExtraction out;
  auto report = clearing_error(e, solution.prices, solution.allocation);
  auto dirty = [&](CourseIndex j) { return report.z[j] != 0; };
  for (std::size_t v = 0; v < cs.variables.size(); ++v) {
    const auto& vc = cs.variables[v];
    const auto& st = e.students()[vc.s_true].preferences;
    const auto& sf = e.students()[vc.s_false].preferences;
    bool t = solution.allocation[vc.s_true] == st[1];
    bool f = solution.allocation[vc.s_false] == sf[1];
    out.assignment.push_back(t != f ? std::optional<bool>(t) : std::nullopt);
    bool flag = dirty(vc.d_left) || dirty(vc.d_center) || dirty(vc.d_right);
    for (CourseIndex j : vc.out_true) flag = flag || dirty(j);
    for (CourseIndex j : vc.out_false) flag = flag || dirty(j);
    if (flag) out.flagged_variables.push_back(static_cast<int>(v + 1));
  }
  for (std::size_t c = 0; c < cs.clauses.size(); ++c) {
    if (dirty(cs.clauses[c].dilution)) out.flagged_clauses.push_back(c);
  }
  return out;
}

double soundness_error_bound(double epsilon_frac, double n_clauses) {
  if (epsilon_frac < 0 || n_clauses < 0) throw SatError("inputs must be nonnegative");
  return std::sqrt(epsilon_frac * n_clauses / 5.0);
}

Json compiled_sat_to_json(const CompiledSat& c) {
  const auto& e = c.economy;
  Json doc = economy_to_json(e);
  doc["formula"] = format_dimacs(c.formula);
  Json vars = Json::array();
  for (const auto& v : c.variables) {
    Json ot = Json::array(), of = Json::array();
    for (auto j : v.out_true) ot.push_back(e.course(j).id);
    for (auto j : v.out_false) of.push_back(e.course(j).id);
    vars.push_back({{"d_left", e.course(v.d_left).id},
                    {"d_center", e.course(v.d_center).id},
                    {"d_right", e.course(v.d_right).id},
                    {"out_true", ot},
                    {"out_false", of},
                    {"s_true", e.student(v.s_true).id},
                    {"s_false", e.student(v.s_false).id}});
  }
  doc["variables"] = vars;
  Json cls = Json::array();
  for (const auto& cl : c.clauses) {
    cls.push_back({{"dilution", e.course(cl.dilution).id}, {"student", e.student(cl.student).id}});
  }
  doc["clauses"] = cls;
  return doc;
}

std::string sat_inventory(const CompiledSat& c) {
  std::ostringstream out;
  out << "variable  occurrences  courses\n";
  for (int v = 1; v <= c.formula.num_vars(); ++v) {
    const int d = c.formula.occurrences(v);
    out << "x" << v;
    for (std::size_t k = std::to_string(v).size() + 1; k < 10; ++k) out << ' ';
    out << d << "            " << 3 + 2 * d << "\n";
  }
  out << "clauses   " << c.formula.clauses().size() << "            " << c.formula.clauses().size() << "\n";
  out << "M=" << c.economy.num_courses() << " N=" << c.economy.num_students()
      << " k=" << c.economy.max_bundle_size() << "\n";
  return out.str();
}

}  // namespace aceei
