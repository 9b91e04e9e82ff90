#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "aceei/rational.hpp"

namespace aceei {

enum class GateType { kHalf, kValue, kSum, kDiff, kLess, kAnd, kOr, kNot };

std::string_view gate_name(GateType type);
std::optional<GateType> gate_from_name(std::string_view name);
/// Number of inputs: VALUE 0, HALF/NOT 1, the rest 2.
int gate_arity(GateType type);
/// LESS, AND and OR are only constrained outside a beta-gap around their threshold.
bool is_brittle(GateType type);

class CircuitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Gate {
  GateType type;
  std::optional<std::string> in1;
  std::optional<std::string> in2;
  std::string out;
};

/// Nodes keep first-appearance order; no two gates share an output.
class GeneralizedCircuit {
 public:
  GeneralizedCircuit() = default;
  /// Validates arity, unknown nodes and duplicate outputs. Throws CircuitError.
  GeneralizedCircuit(std::vector<std::string> nodes, std::vector<Gate> gates);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Gate>& gates() const { return gates_; }
  /// Index of the gate writing `node`, if any.
  std::optional<std::size_t> driver(std::string_view node) const;

 private:
  std::vector<std::string> nodes_;
  std::vector<Gate> gates_;
};

/// Text format: one gate per line, `out = GATE(in1[, in2])`; `node a, b` declares extra nodes; `#` comments.
GeneralizedCircuit parse_circuit(std::string_view text);
std::string format_circuit(const GeneralizedCircuit& circuit);

/// Gate output: a point (lo == hi) or, for brittle gates inside their gap, the whole interval [0, 1].
struct GateValue {
  Rational lo;
  Rational hi;
  bool is_point() const { return lo == hi; }
};

/// Throws CircuitError when the number of supplied inputs does not match the arity.
GateValue eval_gate(GateType type, const std::vector<Rational>& inputs, const Rational& beta);

using Assignment = std::map<std::string, Rational>;

struct CircuitCheck {
  bool passed = true;
  std::vector<std::string> out_of_range;
  std::vector<std::size_t> violated_gates;
  std::vector<std::string> missing;
};

/// Every node in [0, 1+epsilon] and every gate within epsilon of its function (strictly when epsilon > 0,
/// exactly when epsilon = 0). Brittle gates inside their gap impose nothing. `beta` is the gap width for the
/// brittle gates; it defaults to epsilon.
CircuitCheck check_gcircuit(const GeneralizedCircuit& circuit, const Assignment& assignment, const Rational& epsilon,
                            const std::optional<Rational>& beta = std::nullopt);

}  // namespace aceei
