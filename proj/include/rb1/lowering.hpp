#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rb1/typecheck.hpp"

namespace rb1 {

using BlockId = int;

struct Terminator {
  enum class Kind {
    Jump,     // -> target
    Branch,   // cond ? target : else_target
    Suspend,  // park at `point`
    Finish,   // resume_idx = -1
    Guard,    // preconditions of `point`, then -> target
  };
  Kind kind = Kind::Finish;
  const Expr* cond = nullptr;
  BlockId target = -1;
  BlockId else_target = -1;
  int point = -1;
  SourcePos pos;
};

/// Straight-line run of Let/Frame/Assign/ExprStmt statements.
struct Block {
  std::vector<const Stmt*> stmts;
  Terminator term;
};

struct SuspensionPoint {
  int index = 0;
  std::string action_name;
  int action = 0;  // index into ActInfo::actions
  const Stmt* stmt = nullptr;
  BlockId precondition_block = -1;
  BlockId resume_block = -1;
  bool reachable = true;
};

struct FrameField {
  std::string name;
  TypeId type = kNoType;
  std::int64_t slot_offset = 0;
  std::int64_t byte_offset = 0;
};

struct ActionMachine {
  int act_index = -1;
  int class_index = -1;
  std::string name;
  std::string class_name;
  std::vector<SuspensionPoint> points;
  BlockId prologue = 0;
  std::vector<Block> blocks;
  std::vector<FrameField> frame_layout;  // resume_idx first
  std::int64_t frame_slots = 0;
  std::int64_t frame_bytes = 0;
  std::int64_t locals_slots = 0;
  std::vector<Diagnostic> warnings;
};

struct ActionFlowGraph {
  struct Node {
    int index;
    std::string action;
  };
  std::string name;
  std::vector<Node> nodes;  // by suspension index
  std::set<std::pair<int, int>> edges;
  std::set<int> entry_nodes;
  std::set<int> exit_nodes;
};

/// Lowers one typechecked act into blocks. Unreachable action statements
/// are kept and reported in `warnings`.
ActionMachine lower_action(const TypedModule& module, int act_index);

ActionFlowGraph build_afg(const ActionMachine& machine);

std::string export_dot(const ActionFlowGraph& afg);

}  // namespace rb1
