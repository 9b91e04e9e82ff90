#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aceei/circuit.hpp"
#include "aceei/economy.hpp"
#include "aceei/json_io.hpp"

namespace aceei {

/// Gadget precondition failure (size too small for the target error, bad divisibility, headroom overrun).
class GadgetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GadgetRecord {
  std::string kind;  // NOT, HALF, ..., COPY
  std::string label;
  std::int64_t n = 0;
  CourseIndex output = 0;
  std::size_t courses_added = 0;   // including nested gadgets
  std::size_t students_added = 0;  // including nested gadgets
  int depth = 0;                   // 0 for gadgets emitted directly by the caller
  /// Largest admissible alpha_target for this gadget; `strict` means alpha must stay below it.
  Rational alpha_limit;
  bool strict = false;
};

/// How many outside students may list a course, and how many do.
struct HeadroomEntry {
  std::optional<std::int64_t> declared;
  std::int64_t used = 0;
  std::string owner;
};

class EconomyBuilder {
 public:
  explicit EconomyBuilder(std::optional<Rational> alpha_target = std::nullopt) : alpha_target_(std::move(alpha_target)) {}

  CourseIndex add_course(std::string id, std::int64_t capacity);
  void set_capacity(CourseIndex course, std::int64_t capacity);
  void add_students(const std::string& prefix, std::int64_t count, const std::vector<Bundle>& preferences);

  void declare_headroom(CourseIndex course, std::int64_t n, std::string owner);
  /// Books `count` outside demanders against the course's declared headroom. Throws GadgetError on overrun.
  void consume(CourseIndex course, std::int64_t count);

  const std::optional<Rational>& alpha_target() const { return alpha_target_; }
  std::size_t num_courses() const { return courses_.size(); }
  std::size_t num_students() const { return students_.size(); }
  const std::vector<HeadroomEntry>& headroom() const { return headroom_; }
  const std::vector<GadgetRecord>& inventory() const { return inventory_; }
  const std::string& course_id(CourseIndex j) const { return courses_.at(j).id; }

  Economy build() const { return Economy(courses_, students_); }

  // Gadget bookkeeping, used by the emitters.
  std::string begin_gadget(const std::string& kind);
  void end_gadget(const std::string& kind, const std::string& label, std::int64_t n, CourseIndex output,
                  const Rational& alpha_limit, bool strict);

 private:
  struct Frame {
    std::size_t courses;
    std::size_t students;
  };
  std::optional<Rational> alpha_target_;
  std::vector<Course> courses_;
  std::vector<Student> students_;
  std::vector<HeadroomEntry> headroom_;
  std::vector<GadgetRecord> inventory_;
  std::vector<Frame> stack_;
  std::size_t next_label_ = 0;
};

/// Output course of capacity n/2 plus n students wanting {input, output}; output headroom n/4. Needs n > 4 alpha.
CourseIndex emit_not_gadget(EconomyBuilder& builder, CourseIndex input, std::int64_t n);

/// Gate gadgets (HALF, VALUE, SUM, DIFF, LESS, AND, OR; NOT forwards to emit_not_gadget). `inputs` holds
/// gate_arity(type) courses. Needs n >= 256 alpha.
CourseIndex emit_gate_gadget(EconomyBuilder& builder, GateType type, const std::vector<CourseIndex>& inputs,
                             std::int64_t n);

/// Ten interior courses, the output course, n cascade students and ten groups of floor(0.49 n) students;
/// output headroom 2n. Needs n >= 100 alpha. When `output` is given, that (already created) course becomes the
/// output and receives capacity 4n.
CourseIndex emit_copy_gadget(EconomyBuilder& builder, CourseIndex input, std::int64_t n,
                             std::optional<CourseIndex> output = std::nullopt);

/// Outside demand a gate of size n places on each of its inputs.
std::vector<std::int64_t> gate_input_demand(GateType type, std::int64_t n);
/// Headroom of the gate gadget's raw output course.
std::int64_t gate_output_headroom(GateType type, std::int64_t n);

struct CircuitScale {
  std::int64_t n_x = 512;  // smallest power of two where SUM leaves room for a COPY
  std::optional<Rational> alpha_target;  // derived from the gadget sizes when absent
  Rational beta = make_rational(1, 20);
  std::optional<Rational> epsilon;  // beta/2 when absent
};

struct CompiledCircuit {
  GeneralizedCircuit circuit;
  Economy economy;
  std::map<std::string, CourseIndex> node_course;
  std::int64_t n_x = 0;
  Rational alpha_target;
  Rational beta;
  Rational epsilon;
  std::vector<GadgetRecord> inventory;
  std::vector<HeadroomEntry> headroom;
};

/// One course per node. Each gate becomes its gadget followed by a chain of COPY gadgets whose last output is
/// the node's course, long enough that the node's headroom covers every gadget reading it.
CompiledCircuit compile_circuit(const GeneralizedCircuit& circuit, const CircuitScale& scale);

/// x[v] = clamp(p[node course], 0, 1 + epsilon).
Assignment extract_assignment(const CompiledCircuit& compiled, const Solution& solution);

Json compiled_circuit_to_json(const CompiledCircuit& compiled);
/// Human-readable gadget inventory.
std::string gadget_inventory(const CompiledCircuit& compiled);

}  // namespace aceei
