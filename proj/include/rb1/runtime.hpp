#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rb1/lowering.hpp"

namespace rb1 {

/// One storage cell. Bool, Int and bounded Int hold their integer value;
/// Float holds the IEEE-754 bit pattern.
using Slot = std::int64_t;

using Scalar = std::variant<bool, std::int64_t, double>;

/// A typed copy of some storage: a scalar, an array, or a class value.
struct Value {
  TypeId type = kNoType;
  std::vector<Slot> slots;

  friend bool operator==(const Value&, const Value&) = default;
};

struct ActionValue {
  std::string name;
  std::vector<Scalar> args;  // bool or int64 only

  friend bool operator==(const ActionValue&, const ActionValue&) = default;
};

/// `mark(0, 2)`, `toggle(true)`
std::string to_string(const ActionValue& action);

struct EvalLimits {
  std::int64_t max_steps_per_resume = 1'000'000;
  int max_call_depth = 256;
};

/// Every action of an act with its full argument domain, enumerated in
/// action first-appearance order, then lexicographically with the first
/// argument varying slowest.
class ActionTable {
 public:
  ActionTable() = default;
  ActionTable(const TypedModule& module, const ActInfo& act);

  std::size_t size() const { return size_; }
  ActionValue at(std::size_t index) const;
  /// Table index of a well-typed, in-range action; -1 otherwise.
  std::int64_t index_of(int action, const std::vector<Slot>& args) const;
  /// Offset of the first entry of `action` and its entry count.
  std::size_t base(int action) const { return entries_.at(static_cast<std::size_t>(action)).base; }
  std::size_t count(int action) const { return entries_.at(static_cast<std::size_t>(action)).count; }
  /// Decodes entry `index` into (action, args as slots).
  int decode(std::size_t index, std::vector<Slot>& args) const;

 private:
  struct Dim {
    bool is_bool;
    std::int64_t min;
    std::int64_t width;
  };
  struct Entry {
    std::string name;
    std::vector<Dim> dims;
    std::size_t base = 0;
    std::size_t count = 1;
  };
  std::vector<Entry> entries_;
  std::size_t size_ = 0;
};

/// A compiled module: typed AST, one lowered machine per act, action tables
/// and default values. Immutable and shareable across threads.
class Program {
 public:
  /// Parses, typechecks and lowers. Throws LexError, ParseError or
  /// TypeError.
  static std::shared_ptr<const Program> compile(std::string_view source);
  static std::shared_ptr<const Program> compile_file(const std::string& path);

  const TypedModule& module() const { return *module_; }
  const ActionMachine& machine(int act_index) const { return machines_.at(static_cast<std::size_t>(act_index)); }
  const ActionTable& action_table(int act_index) const { return tables_.at(static_cast<std::size_t>(act_index)); }
  const std::vector<ActionMachine>& machines() const { return machines_; }
  /// Act index by name; throws PathError if absent.
  int act(std::string_view name) const;
  /// Act to use when none is named: the only act, or the first declared.
  int default_act() const;
  std::vector<Diagnostic> warnings() const;

  /// Zero-initialized image of a type; synthesized classes start finished.
  const std::vector<Slot>& default_value(TypeId type) const { return defaults_.at(static_cast<std::size_t>(type)); }

  EvalLimits limits;

 private:
  Program() = default;
  std::unique_ptr<TypedModule> module_;
  std::vector<ActionMachine> machines_;
  std::vector<ActionTable> tables_;
  std::vector<std::vector<Slot>> defaults_;
};

using ProgramPtr = std::shared_ptr<const Program>;

class EnvironmentInstance {
 public:
  /// Runs the act's prologue to its first suspension or completion.
  static EnvironmentInstance instantiate(ProgramPtr program, std::string_view act_name,
                                         const std::vector<Scalar>& ctor_args = {});
  static EnvironmentInstance instantiate(ProgramPtr program, int act_index, const std::vector<Scalar>& ctor_args = {});
  /// Adopts a raw frame. Throws RangeError unless every bounded leaf, Bool
  /// leaf and resume index is valid.
  static EnvironmentInstance from_frame(ProgramPtr program, int act_index, std::vector<Slot> frame);

  const Program& program() const { return *program_; }
  const ProgramPtr& program_ptr() const { return program_; }
  int act_index() const { return act_; }
  const ActionMachine& machine() const { return program_->machine(act_); }
  const ActionTable& action_table() const { return program_->action_table(act_); }
  TypeId type() const;

  std::int64_t resume_idx() const { return frame_[0]; }
  bool is_done() const { return frame_[0] == -1; }
  bool poisoned() const { return poisoned_; }

  bool can_apply(const ActionValue& action) const;
  void apply(const ActionValue& action);
  bool can_apply_index(std::size_t index) const;
  void apply_index(std::size_t index);

  std::vector<ActionValue> legal_actions() const;
  std::vector<std::size_t> legal_indices() const;

  Value get_field(std::string_view path) const;
  void set_field(std::string_view path, const Value& value);
  Scalar get_scalar(std::string_view path) const;
  void set_scalar(std::string_view path, const Scalar& value);

  const std::vector<Slot>& frame() const { return frame_; }
  Value value() const;

  friend bool operator==(const EnvironmentInstance& a, const EnvironmentInstance& b) {
    return a.act_ == b.act_ && a.frame_ == b.frame_;
  }

 private:
  EnvironmentInstance(ProgramPtr program, int act) : program_(std::move(program)), act_(act) {}
  void check_usable() const;
  int resolve_action(const ActionValue& action, std::vector<Slot>& args, bool& in_range) const;
  bool guard(int action, const std::vector<Slot>& args) const;
  void resume(int action, const std::vector<Slot>& args);

  ProgramPtr program_;
  int act_ = -1;
  std::vector<Slot> frame_;
  mutable bool poisoned_ = false;
};

/// Calls a free function. Scalar arguments may be given as Int for bounded
/// parameters (range-checked).
Value run_function(const ProgramPtr& program, std::string_view name, const std::vector<Value>& args);

/// Interprets the act body directly, without the lowered blocks, and
/// returns the frame after construction and after each action.
std::vector<std::vector<Slot>> reference_step(const ProgramPtr& program, std::string_view act_name,
                                              const std::vector<ActionValue>& trace,
                                              const std::vector<Scalar>& ctor_args = {});

/// Scalar helpers.
Value make_int(std::int64_t v);
Value make_bool(bool v);
Value make_float(double v);
Scalar to_scalar(const TypedModule& module, const Value& v);

/// Validates bounded ranges, Bool values and nested resume indices of a
/// value image; returns an empty string if valid, else a reason.
std::string validate_value(const Program& program, TypeId type, const Slot* slots);

}  // namespace rb1
