#include "aceei/gadgets.hpp"

#include <algorithm>
#include <sstream>

namespace aceei {

CourseIndex EconomyBuilder::add_course(std::string id, std::int64_t capacity) {
  if (capacity < 0) throw GadgetError("negative capacity for '" + id + "'");
  courses_.push_back({std::move(id), capacity});
  headroom_.emplace_back();
  return courses_.size() - 1;
}

void EconomyBuilder::set_capacity(CourseIndex course, std::int64_t capacity) {
  if (capacity < 0) throw GadgetError("negative capacity");
  courses_.at(course).capacity = capacity;
}

void EconomyBuilder::add_students(const std::string& prefix, std::int64_t count, const std::vector<Bundle>& preferences) {
  for (std::int64_t k = 1; k <= count; ++k) students_.push_back({prefix + std::to_string(k), preferences});
}

void EconomyBuilder::declare_headroom(CourseIndex course, std::int64_t n, std::string owner) {
  auto& entry = headroom_.at(course);
  entry.declared = n;
  entry.owner = std::move(owner);
  if (entry.used > n) throw GadgetError("headroom of '" + courses_[course].id + "' already exceeded");
}

void EconomyBuilder::consume(CourseIndex course, std::int64_t count) {
  auto& entry = headroom_.at(course);
  entry.used += count;
  if (entry.declared && entry.used > *entry.declared) {
    throw GadgetError("headroom overrun on '" + courses_[course].id + "': " + std::to_string(entry.used) +
                      " outside students, " + std::to_string(*entry.declared) + " allowed");
  }
}

std::string EconomyBuilder::begin_gadget(const std::string& kind) {
  stack_.push_back({courses_.size(), students_.size()});
  std::string lower = kind;
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return "g" + std::to_string(++next_label_) + "." + lower;
}

void EconomyBuilder::end_gadget(const std::string& kind, const std::string& label, std::int64_t n, CourseIndex output,
                                const Rational& alpha_limit, bool strict) {
  Frame f = stack_.back();
  stack_.pop_back();
  GadgetRecord r;
  r.kind = kind;
  r.label = label;
  r.n = n;
  r.output = output;
  r.courses_added = courses_.size() - f.courses;
  r.students_added = students_.size() - f.students;
  r.depth = static_cast<int>(stack_.size());
  r.alpha_limit = alpha_limit;
  r.strict = strict;
  inventory_.push_back(std::move(r));
}

namespace {

void require_divisible(const char* kind, std::int64_t n, std::int64_t d) {
  if (n <= 0 || n % d != 0) {
    throw GadgetError(std::string(kind) + " gadget needs n_x divisible by " + std::to_string(d) + " (got " +
                      std::to_string(n) + ")");
  }
}

void require_alpha(const EconomyBuilder& b, const char* kind, std::int64_t n, const Rational& limit, bool strict) {
  if (!b.alpha_target()) return;
  const Rational& a = *b.alpha_target();
  bool ok = strict ? a < limit : a <= limit;
  if (!ok) {
    throw GadgetError(std::string(kind) + " gadget with n_x=" + std::to_string(n) + " is too small for alpha_target " +
                      to_string(a));
  }
}

Bundle bundle_of(std::vector<CourseIndex> courses) {
  try {
    return Bundle(std::move(courses));
  } catch (const EconomyError&) {
    throw GadgetError("gadget inputs must be distinct courses");
  }
}

Rational lemma2_limit(std::int64_t n) { return make_rational(n, 256); }

}  // namespace

CourseIndex emit_not_gadget(EconomyBuilder& b, CourseIndex input, std::int64_t n) {
  require_divisible("NOT", n, 4);
  Rational limit = make_rational(n, 4);
  require_alpha(b, "NOT", n, limit, true);
  std::string label = b.begin_gadget("NOT");
  CourseIndex out = b.add_course(label + ".out", n / 2);
  b.add_students(label + ".s", n, {bundle_of({input, out})});
  b.consume(input, n);
  b.declare_headroom(out, n / 4, label);
  b.end_gadget("NOT", label, n, out, limit, true);
  return out;
}

namespace {

CourseIndex emit_half(EconomyBuilder& b, CourseIndex x, std::int64_t n) {
  require_divisible("HALF", n, 16);
  std::string label = b.begin_gadget("HALF");
  CourseIndex xbar = emit_not_gadget(b, x, n);
  CourseIndex z = b.add_course(label + ".z", n / 8);
  CourseIndex c1 = b.add_course(label + ".c1", n / 8);
  CourseIndex c2 = b.add_course(label + ".c2", n / 8);
  b.add_students(label + ".s", n / 4, {bundle_of({z, c1, xbar}), bundle_of({z, c2, xbar}), bundle_of({c1, c2, xbar})});
  b.consume(xbar, n / 4);
  b.declare_headroom(z, n / 16, label);
  b.end_gadget("HALF", label, n, z, lemma2_limit(n), false);
  return z;
}

CourseIndex emit_value(EconomyBuilder& b, std::int64_t n) {
  require_divisible("VALUE", n, 8);
  std::string label = b.begin_gadget("VALUE");
  CourseIndex z = b.add_course(label + ".z", n / 8);
  CourseIndex c1 = b.add_course(label + ".c1", n / 8);
  CourseIndex c2 = b.add_course(label + ".c2", n / 8);
  b.add_students(label + ".s", n, {bundle_of({z, c1}), bundle_of({z, c2}), bundle_of({c1, c2})});
  b.declare_headroom(z, n / 8, label);
  b.end_gadget("VALUE", label, n, z, lemma2_limit(n), false);
  return z;
}

CourseIndex emit_diff(EconomyBuilder& b, CourseIndex x, CourseIndex y, std::int64_t n) {
  require_divisible("DIFF", n, 16);
  std::string label = b.begin_gadget("DIFF");
  CourseIndex xbar = emit_not_gadget(b, x, n);
  CourseIndex z = b.add_course(label + ".z", n / 8);
  b.add_students(label + ".s", n / 4, {bundle_of({xbar, y, z})});
  b.consume(xbar, n / 4);
  b.consume(y, n / 4);
  b.declare_headroom(z, n / 16, label);
  b.end_gadget("DIFF", label, n, z, lemma2_limit(n), false);
  return z;
}

CourseIndex emit_sum(EconomyBuilder& b, CourseIndex x, CourseIndex y, std::int64_t n) {
  require_divisible("SUM", n, 256);
  std::string label = b.begin_gadget("SUM");
  CourseIndex xbar = emit_not_gadget(b, x, n);
  CourseIndex zbar = emit_diff(b, xbar, y, n / 4);
  CourseIndex z = emit_not_gadget(b, zbar, n / 64);
  b.end_gadget("SUM", label, n, z, lemma2_limit(n), false);
  return z;
}

CourseIndex emit_less(EconomyBuilder& b, CourseIndex x, CourseIndex y, std::int64_t n) {
  require_divisible("LESS", n, 16);
  std::string label = b.begin_gadget("LESS");
  CourseIndex xbar = emit_not_gadget(b, x, n);
  CourseIndex z = b.add_course(label + ".z", n / 8);
  b.add_students(label + ".s", n / 4, {bundle_of({xbar, y}), bundle_of({z})});
  b.consume(xbar, n / 4);
  b.consume(y, n / 4);
  b.declare_headroom(z, n / 16, label);
  b.end_gadget("LESS", label, n, z, lemma2_limit(n), false);
  return z;
}

CourseIndex emit_and_or(EconomyBuilder& b, GateType type, CourseIndex x, CourseIndex y, std::int64_t n) {
  const char* kind = type == GateType::kAnd ? "AND" : "OR";
  require_divisible(kind, n, 64);
  std::string label = b.begin_gadget(kind);
  CourseIndex half = emit_value(b, n);
  CourseIndex z = b.add_course(label + ".z", n / 32);
  if (type == GateType::kAnd) {
    b.add_students(label + ".s", n / 16, {bundle_of({x, half}), bundle_of({y, half}), bundle_of({z})});
  } else {
    b.add_students(label + ".s", n / 16, {bundle_of({x, y, half}), bundle_of({z})});
  }
  b.consume(half, n / 16);
  b.consume(x, n / 16);
  b.consume(y, n / 16);
  b.declare_headroom(z, n / 64, label);
  b.end_gadget(kind, label, n, z, lemma2_limit(n), false);
  return z;
}

}  // namespace

CourseIndex emit_gate_gadget(EconomyBuilder& b, GateType type, const std::vector<CourseIndex>& in, std::int64_t n) {
  if (static_cast<int>(in.size()) != gate_arity(type)) {
    throw GadgetError(std::string(gate_name(type)) + " gadget takes " + std::to_string(gate_arity(type)) + " input(s)");
  }
  if (type != GateType::kNot) require_alpha(b, std::string(gate_name(type)).c_str(), n, lemma2_limit(n), false);
  switch (type) {
    case GateType::kNot:
      return emit_not_gadget(b, in[0], n);
    case GateType::kHalf:
      return emit_half(b, in[0], n);
    case GateType::kValue:
      return emit_value(b, n);
    case GateType::kDiff:
      return emit_diff(b, in[0], in[1], n);
    case GateType::kSum:
      return emit_sum(b, in[0], in[1], n);
    case GateType::kLess:
      return emit_less(b, in[0], in[1], n);
    case GateType::kAnd:
    case GateType::kOr:
      return emit_and_or(b, type, in[0], in[1], n);
  }
  throw GadgetError("unknown gate type");
}

CourseIndex emit_copy_gadget(EconomyBuilder& b, CourseIndex input, std::int64_t n, std::optional<CourseIndex> output) {
  require_divisible("COPY", n, 2);
  Rational limit = make_rational(n, 100);
  require_alpha(b, "COPY", n, limit, false);
  std::string label = b.begin_gadget("COPY");
  std::vector<CourseIndex> inner;
  for (int i = 1; i <= 10; ++i) inner.push_back(b.add_course(label + ".c" + std::to_string(i), n / 2));
  CourseIndex out;
  if (output) {
    out = *output;
    b.set_capacity(out, 4 * n);
  } else {
    out = b.add_course(label + ".out", 4 * n);
  }
  std::vector<Bundle> cascade;
  for (CourseIndex c : inner) cascade.push_back(bundle_of({input, c}));
  b.add_students(label + ".s", n, cascade);
  b.consume(input, n);
  const std::int64_t group = 49 * n / 100;  // floor: rounding up can close the interior slack
  for (std::size_t i = 0; i < inner.size(); ++i) {
    std::vector<Bundle> prefs{bundle_of({out, inner[i]})};
    for (std::size_t k = i; k < inner.size(); ++k) prefs.push_back(Bundle{inner[k]});
    b.add_students(label + ".t" + std::to_string(i + 1) + ".", group, prefs);
  }
  b.declare_headroom(out, 2 * n, label);
  b.end_gadget("COPY", label, n, out, limit, false);
  return out;
}

std::vector<std::int64_t> gate_input_demand(GateType type, std::int64_t n) {
  switch (type) {
    case GateType::kNot:
    case GateType::kHalf:
      return {n};
    case GateType::kValue:
      return {};
    case GateType::kDiff:
    case GateType::kLess:
      return {n, n / 4};
    case GateType::kSum:
      return {n, n / 16};
    case GateType::kAnd:
    case GateType::kOr:
      return {n / 16, n / 16};
  }
  return {};
}

std::int64_t gate_output_headroom(GateType type, std::int64_t n) {
  switch (type) {
    case GateType::kNot:
      return n / 4;
    case GateType::kValue:
      return n / 8;
    case GateType::kHalf:
    case GateType::kDiff:
    case GateType::kLess:
      return n / 16;
    case GateType::kSum:
      return n / 256;
    case GateType::kAnd:
    case GateType::kOr:
      return n / 64;
  }
  return 0;
}

CompiledCircuit compile_circuit(const GeneralizedCircuit& circuit, const CircuitScale& scale) {
  if (scale.n_x <= 0) throw GadgetError("n_x must be positive");
  if (scale.beta <= 0) throw GadgetError("beta must be positive");
  if (circuit.nodes().empty()) throw GadgetError("circuit has no nodes");

  std::map<std::string, std::int64_t> demand;
  for (const Gate& g : circuit.gates()) {
    auto d = gate_input_demand(g.type, scale.n_x);
    if (g.in1) demand[*g.in1] += d.at(0);
    if (g.in2) demand[*g.in2] += d.at(1);
  }

  EconomyBuilder b(scale.alpha_target);
  std::map<std::string, CourseIndex> node_course;
  for (const auto& v : circuit.nodes()) {
    std::int64_t cap = circuit.driver(v) ? 0 : demand[v] / 2;
    node_course[v] = b.add_course("node." + v, cap);
  }

  for (const Gate& g : circuit.gates()) {
    std::vector<CourseIndex> in;
    if (g.in1) in.push_back(node_course.at(*g.in1));
    if (g.in2) in.push_back(node_course.at(*g.in2));
    CourseIndex cur = emit_gate_gadget(b, g.type, in, scale.n_x);
    std::int64_t h = gate_output_headroom(g.type, scale.n_x);
    const std::int64_t need = demand[g.out];
    while (true) {
      std::int64_t n = h - h % 2;
      if (n < 2) {
        throw GadgetError("n_x=" + std::to_string(scale.n_x) + " leaves too little headroom after " +
                          std::string(gate_name(g.type)) + " to amplify");
      }
      bool last = 2 * n >= need;
      cur = emit_copy_gadget(b, cur, n, last ? std::optional<CourseIndex>(node_course.at(g.out)) : std::nullopt);
      h = 2 * n;
      if (last) break;
    }
  }

  CompiledCircuit out{circuit, b.build(), node_course, scale.n_x, Rational(0), scale.beta,
                      scale.epsilon.value_or(scale.beta / 2), b.inventory(), b.headroom()};
  if (scale.alpha_target) {
    out.alpha_target = *scale.alpha_target;
  } else {
    std::optional<Rational> best;
    for (const auto& r : out.inventory) {
      Rational lim = r.strict ? Rational(r.alpha_limit / 2) : r.alpha_limit;
      if (!best || lim < *best) best = lim;
    }
    out.alpha_target = best.value_or(Rational(0));
  }
  return out;
}

Assignment extract_assignment(const CompiledCircuit& compiled, const Solution& solution) {
  Assignment x;
  const Rational top = 1 + compiled.epsilon;
  for (const auto& [v, j] : compiled.node_course) {
    if (j >= solution.prices.size()) throw GadgetError("solution has no price for node '" + v + "'");
    Rational p = solution.prices[j];
    if (p < 0) p = 0;
    if (p > top) p = top;
    x[v] = p;
  }
  return x;
}

Json compiled_circuit_to_json(const CompiledCircuit& c) {
  Json doc = economy_to_json(c.economy);
  Json nodes = Json::object();
  for (const auto& v : c.circuit.nodes()) nodes[v] = c.economy.course(c.node_course.at(v)).id;
  doc["node_course"] = nodes;
  doc["scale"] = {{"n_x", c.n_x},
                  {"alpha_target", to_string(c.alpha_target)},
                  {"beta", to_string(c.beta)},
                  {"epsilon", to_string(c.epsilon)}};
  doc["circuit"] = format_circuit(c.circuit);
  Json inv = Json::array();
  for (const auto& r : c.inventory) {
    inv.push_back({{"kind", r.kind},
                   {"label", r.label},
                   {"n", r.n},
                   {"output", c.economy.course(r.output).id},
                   {"courses", r.courses_added},
                   {"students", r.students_added},
                   {"depth", r.depth}});
  }
  doc["inventory"] = inv;
  return doc;
}

std::string gadget_inventory(const CompiledCircuit& c) {
  std::ostringstream out;
  out << "gadget         kind   n_x     courses  students  output\n";
  for (const auto& r : c.inventory) {
    std::string name = std::string(static_cast<std::size_t>(r.depth) * 2, ' ') + r.label;
    out << name;
    for (std::size_t k = name.size(); k < 15; ++k) out << ' ';
    out << r.kind;
    for (std::size_t k = r.kind.size(); k < 7; ++k) out << ' ';
    std::string n = std::to_string(r.n);
    out << n;
    for (std::size_t k = n.size(); k < 8; ++k) out << ' ';
    std::string cs = std::to_string(r.courses_added);
    out << cs;
    for (std::size_t k = cs.size(); k < 9; ++k) out << ' ';
    std::string ss = std::to_string(r.students_added);
    out << ss;
    for (std::size_t k = ss.size(); k < 10; ++k) out << ' ';
    out << c.economy.course(r.output).id << '\n';
  }
  out << "M=" << c.economy.num_courses() << " N=" << c.economy.num_students() << " k=" << c.economy.max_bundle_size()
      << " alpha_target=" << to_string(c.alpha_target) << " beta=" << to_string(c.beta)
      << " epsilon=" << to_string(c.epsilon) << '\n';
  return out.str();
}

}  // namespace aceei
