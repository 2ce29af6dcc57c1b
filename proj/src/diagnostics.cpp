#include "rb1/diagnostics.hpp"

namespace rb1 {

namespace {

std::string join_cycle(const std::vector<std::string>& cycle) {
  std::string out;
  for (const auto& name : cycle) out += name + " -> ";
  if (!cycle.empty()) out += cycle.front();
  return out;
}

}  // namespace

ActionCycleError::ActionCycleError(SourcePos pos, std::vector<std::string> cycle)
    : TypeError(pos, "mutually recursive actions are not allowed: " + join_cycle(cycle)),
      cycle_(std::move(cycle)) {}

PreconditionViolated::PreconditionViolated(std::string action, std::int64_t suspension_index)
    : Error("precondition", {},
            "precondition of action '" + action + "' not satisfied at suspension index " +
                std::to_string(suspension_index)),
      action_(std::move(action)),
      suspension_index_(suspension_index) {}

DecodeError::DecodeError(std::size_t offset, const std::string& reason)
    : Error("decode", {}, "at offset " + std::to_string(offset) + ": " + reason), offset_(offset) {}

std::string format_diagnostic(const std::string& file, const Error& error) {
  SourcePos p = error.pos();
  if (!p.valid()) p = {1, 1};
  return file + ":" + std::to_string(p.line) + ":" + std::to_string(p.column) + ": error: " + error.what();
}

std::string format_warning(const std::string& file, const Diagnostic& warning) {
  return file + ":" + std::to_string(warning.pos.line) + ":" + std::to_string(warning.pos.column) +
         ": warning: " + warning.message;
}

}  // namespace rb1
