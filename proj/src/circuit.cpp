#include "aceei/circuit.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>

namespace aceei {

namespace {

constexpr std::array<std::pair<GateType, std::string_view>, 8> kNames{{{GateType::kHalf, "HALF"},
                                                                        {GateType::kValue, "VALUE"},
                                                                        {GateType::kSum, "SUM"},
                                                                        {GateType::kDiff, "DIFF"},
                                                                        {GateType::kLess, "LESS"},
                                                                        {GateType::kAnd, "AND"},
                                                                        {GateType::kOr, "OR"},
                                                                        {GateType::kNot, "NOT"}}};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '\'';
  });
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    auto comma = s.find(',');
    parts.push_back(trim(s.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return parts;
}

}  // namespace

std::string_view gate_name(GateType type) {
  for (const auto& [t, n] : kNames) {
    if (t == type) return n;
  }
  return "?";
}

std::optional<GateType> gate_from_name(std::string_view name) {
  for (const auto& [t, n] : kNames) {
    if (n == name) return t;
  }
  return std::nullopt;
}

int gate_arity(GateType type) {
  switch (type) {
    case GateType::kValue:
      return 0;
    case GateType::kHalf:
    case GateType::kNot:
      return 1;
    default:
      return 2;
  }
}

bool is_brittle(GateType type) {
  return type == GateType::kLess || type == GateType::kAnd || type == GateType::kOr;
}

GeneralizedCircuit::GeneralizedCircuit(std::vector<std::string> nodes, std::vector<Gate> gates)
    : nodes_(std::move(nodes)), gates_(std::move(gates)) {
  std::set<std::string> known;
  for (const auto& n : nodes_) {
    if (!known.insert(n).second) throw CircuitError("duplicate node '" + n + "'");
  }
  std::set<std::string> outputs;
  for (const Gate& g : gates_) {
    int given = (g.in1 ? 1 : 0) + (g.in2 ? 1 : 0);
    if (given != gate_arity(g.type) || (g.in2 && !g.in1)) {
      throw CircuitError(std::string(gate_name(g.type)) + " gate writing '" + g.out + "' expects " +
                         std::to_string(gate_arity(g.type)) + " input(s)");
    }
    for (const auto* in : {&g.in1, &g.in2}) {
      if (*in && !known.count(**in)) throw CircuitError("unknown node '" + **in + "'");
    }
    if (!known.count(g.out)) throw CircuitError("unknown node '" + g.out + "'");
    if (!outputs.insert(g.out).second) throw CircuitError("node '" + g.out + "' is written by two gates");
  }
}

std::optional<std::size_t> GeneralizedCircuit::driver(std::string_view node) const {
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    if (gates_[g].out == node) return g;
  }
  return std::nullopt;
}

GeneralizedCircuit parse_circuit(std::string_view text) {
  std::vector<std::string> nodes;
  std::set<std::string> seen;
  auto note = [&](std::string_view n) {
    if (seen.insert(std::string(n)).second) nodes.emplace_back(n);
  };
  std::vector<Gate> gates;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = [&] { return "line " + std::to_string(line_no) + ": "; };

    if (line.substr(0, 5) == "node " || line.substr(0, 5) == "node\t") {
      for (auto name : split_commas(line.substr(5))) {
        if (!valid_identifier(name)) throw CircuitError(where() + "bad node name '" + std::string(name) + "'");
        note(name);
      }
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw CircuitError(where() + "expected 'out = GATE(...)'");
    std::string_view out = trim(line.substr(0, eq));
    std::string_view rhs = trim(line.substr(eq + 1));
    auto open = rhs.find('(');
    if (open == std::string_view::npos || rhs.back() != ')') throw CircuitError(where() + "expected GATE(...)");
    std::string_view name = trim(rhs.substr(0, open));
    auto type = gate_from_name(name);
    if (!type) throw CircuitError(where() + "unknown gate '" + std::string(name) + "'");
    if (!valid_identifier(out)) throw CircuitError(where() + "bad node name '" + std::string(out) + "'");
    std::string_view args = trim(rhs.substr(open + 1, rhs.size() - open - 2));
    std::vector<std::string_view> inputs;
    if (!args.empty()) inputs = split_commas(args);
    if (static_cast<int>(inputs.size()) != gate_arity(*type)) {
      throw CircuitError(where() + std::string(name) + " takes " + std::to_string(gate_arity(*type)) + " input(s)");
    }
    Gate g{*type, std::nullopt, std::nullopt, std::string(out)};
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      if (!valid_identifier(inputs[k])) throw CircuitError(where() + "bad node name '" + std::string(inputs[k]) + "'");
      note(inputs[k]);
      (k == 0 ? g.in1 : g.in2) = std::string(inputs[k]);
    }
    note(out);
    gates.push_back(std::move(g));
  }
  return GeneralizedCircuit(std::move(nodes), std::move(gates));
}

std::string format_circuit(const GeneralizedCircuit& circuit) {
  std::ostringstream out;
  // Listing every node first pins the node order on re-parse.
  if (!circuit.nodes().empty()) {
    out << "node ";
    for (std::size_t k = 0; k < circuit.nodes().size(); ++k) out << (k ? ", " : "") << circuit.nodes()[k];
    out << '\n';
  }
  for (const Gate& g : circuit.gates()) {
    out << g.out << " = " << gate_name(g.type) << '(';
    if (g.in1) out << *g.in1;
    if (g.in2) out << ", " << *g.in2;
    out << ")\n";
  }
  return out.str();
}

GateValue eval_gate(GateType type, const std::vector<Rational>& in, const Rational& beta) {
  if (static_cast<int>(in.size()) != gate_arity(type)) {
    throw CircuitError(std::string(gate_name(type)) + " takes " + std::to_string(gate_arity(type)) + " input(s)");
  }
  auto point = [](Rational v) { return GateValue{v, v}; };
  const GateValue gap{Rational(0), Rational(1)};
  const Rational half = make_rational(1, 2);
  switch (type) {
    case GateType::kHalf:
      return point(in[0] / 2);
    case GateType::kValue:
      return point(half);
    case GateType::kSum:
      return point(std::min(Rational(in[0] + in[1]), Rational(1)));
    case GateType::kDiff:
      return point(std::max(Rational(in[0] - in[1]), Rational(0)));
    case GateType::kNot:
      return point(1 - in[0]);
    case GateType::kLess:
      if (in[0] > in[1] + beta) return point(1);
      if (in[1] > in[0] + beta) return point(0);
      return gap;
    case GateType::kAnd:
      if (in[0] > half + beta && in[1] > half + beta) return point(1);
      if (in[0] < half - beta || in[1] < half - beta) return point(0);
      return gap;
    case GateType::kOr:
      if (in[0] > half + beta || in[1] > half + beta) return point(1);
      if (in[0] < half - beta && in[1] < half - beta) return point(0);
      return gap;
  }
  return gap;
}

CircuitCheck check_gcircuit(const GeneralizedCircuit& circuit, const Assignment& assignment, const Rational& epsilon,
                            const std::optional<Rational>& beta) {
  CircuitCheck report;
  for (const auto& n : circuit.nodes()) {
    auto it = assignment.find(n);
    if (it == assignment.end()) {
      report.missing.push_back(n);
      continue;
    }
    if (it->second < 0 || it->second > 1 + epsilon) report.out_of_range.push_back(n);
  }
  if (!report.missing.empty()) {
    report.passed = false;
    return report;
  }
  const Rational gap = beta.value_or(epsilon);
  for (std::size_t k = 0; k < circuit.gates().size(); ++k) {
    const Gate& g = circuit.gates()[k];
    std::vector<Rational> in;
    if (g.in1) in.push_back(assignment.at(*g.in1));
    if (g.in2) in.push_back(assignment.at(*g.in2));
    GateValue f = eval_gate(g.type, in, gap);
    if (!f.is_point()) continue;
    Rational diff = abs(assignment.at(g.out) - f.lo);
    bool ok = epsilon > 0 ? diff < epsilon : diff == 0;
    if (!ok) report.violated_gates.push_back(k);
  }
  report.passed = report.out_of_range.empty() && report.violated_gates.empty();
  return report;
}

}  // namespace aceei
