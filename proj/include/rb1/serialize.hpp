#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rb1/runtime.hpp"

namespace rb1 {

/// Packed little-endian image: resume_idx as i64, then the fields in
/// layout order. Bool is one byte, every other scalar eight.
std::vector<std::uint8_t> to_binary(const EnvironmentInstance& env);
EnvironmentInstance from_binary(ProgramPtr program, int act_index, const std::vector<std::uint8_t>& bytes);
EnvironmentInstance from_binary(ProgramPtr program, std::string_view act_name, const std::vector<std::uint8_t>& bytes);

/// `{resume_idx: 0, board: {cells: [0, 0, ...], current_player: 0}}`
std::string to_text(const EnvironmentInstance& env);
EnvironmentInstance from_text(ProgramPtr program, int act_index, std::string_view text);
EnvironmentInstance from_text(ProgramPtr program, std::string_view act_name, std::string_view text);

/// Text rendering of any value, in the same syntax as to_text.
std::string value_to_text(const TypedModule& module, const Value& value);

/// Shortest decimal that reads back to the same double; always has a '.'
/// or an exponent.
std::string format_double(double v);

std::size_t tensor_size(const Program& program, int act_index);
std::size_t tensor_size_of_type(const Program& program, TypeId type);
/// `observer_id` is accepted for interface compatibility and ignored.
std::vector<double> observation_tensor(const EnvironmentInstance& env, int observer_id = 0);

/// One `name(args)` per line after a `# act: <name>` header.
std::string print_trace(std::string_view act_name, const std::vector<ActionValue>& trace);
/// Validates action names, arity and argument ranges; not preconditions.
/// Throws ParseError carrying the 1-based line.
std::vector<ActionValue> parse_trace(const Program& program, int act_index, std::string_view text);
/// Parses a single `name(args)` action.
ActionValue parse_action(const Program& program, int act_index, std::string_view text);

}  // namespace rb1
