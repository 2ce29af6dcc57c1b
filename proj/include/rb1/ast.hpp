#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rb1/diagnostics.hpp"

namespace rb1 {

using TypeId = std::int32_t;
inline constexpr TypeId kNoType = -1;

/// Syntactic type: a scalar or named base with optional array dimensions,
/// outermost first. `Int<0,2>[3][3]` has base Bounded and dims {3, 3}.
struct TypeExpr {
  enum class Base { Bool, Int, Float, Bounded, Named };

  Base base = Base::Int;
  std::int64_t min = 0;
  std::int64_t max = 0;
  std::string name;
  std::vector<std::int64_t> dims;
  SourcePos pos;
};

enum class UnaryOp { Not, Neg };
enum class BinaryOp { Mul, Div, Mod, Add, Sub, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* to_string(UnaryOp op);
const char* to_string(BinaryOp op);

enum class ExprKind { IntLit, FloatLit, BoolLit, Name, SelfRef, Field, Index, Call, MethodCall, Unary, Binary };

/// What a name or call resolved to. Filled in by the typechecker.
struct Resolution {
  enum class Kind {
    None,
    Local,        // slot offset in the current activation's locals
    Frame,        // slot offset in the enclosing act's frame
    Function,     // free function index
    Method,       // declared-class method: class index, method index
    ActCtor,      // act constructor: act index
    ActApply,     // synthesized class action: act index, action slot
    ActCan,
    ActIsDone,
    Builtin,      // index into the builtin table
  };
  Kind kind = Kind::None;
  std::int64_t offset = 0;
  int index = 0;
  int sub = 0;
  bool mutates = false;  // method call whose receiver may be written
};

struct Expr {
  ExprKind kind = ExprKind::IntLit;
  SourcePos pos;
  std::int64_t int_value = 0;
  double float_value = 0.0;
  bool bool_value = false;
  std::string name;  // identifier, field, callee or method name
  UnaryOp unary = UnaryOp::Not;
  BinaryOp binary = BinaryOp::Add;
  // Field/Index/MethodCall: operands[0] is the base. Index: operands[1].
  // Call/MethodCall: arguments follow the base (Call has no base).
  std::vector<Expr> operands;

  TypeId type = kNoType;
  Resolution res;
};

struct Param {
  std::string name;
  TypeExpr type;
  SourcePos pos;
  TypeId resolved = kNoType;
  std::int64_t offset = 0;  // storage slot (local or frame)
};

enum class StmtKind { Let, Frame, Assign, If, While, Return, ExprStmt, Action };

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  SourcePos pos;
  std::string name;                  // Let/Frame variable, Action name
  std::optional<TypeExpr> declared;  // Let/Frame
  std::optional<Expr> value;         // Let/Frame init, Assign rhs, Return value
  std::optional<Expr> target;        // Assign lhs; If/While condition; ExprStmt
  std::vector<Param> params;         // Action
  std::vector<Expr> preconditions;   // Action
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;

  // Typechecker annotations.
  TypeId var_type = kNoType;
  std::int64_t var_offset = 0;     // Let: local slot; Frame: frame slot
  int point_index = -1;            // Action: lexical suspension index
};

struct FuncDecl {
  std::string name;
  std::vector<Param> params;
  std::optional<TypeExpr> ret;
  std::vector<Stmt> body;
  SourcePos pos;

  TypeId ret_type = kNoType;
  std::int64_t locals_size = 0;
};

struct FieldDecl {
  std::string name;
  TypeExpr type;
  SourcePos pos;
};

struct ClsDecl {
  std::string name;
  std::vector<FieldDecl> fields;
  std::vector<FuncDecl> methods;
  SourcePos pos;
};

struct ActDecl {
  std::string name;
  std::vector<Param> params;
  std::string return_class;
  std::vector<Stmt> body;
  SourcePos pos;

  std::int64_t locals_size = 0;
};

/// Top-level declarations in source order within each category, plus the
/// interleaved order so printing reproduces the original layout.
struct ModuleAst {
  enum class DeclKind { Function, Action, Class };
  std::vector<FuncDecl> functions;
  std::vector<ActDecl> actions;
  std::vector<ClsDecl> classes;
  std::vector<std::pair<DeclKind, std::size_t>> order;
};

/// Structural equality that ignores source positions and typechecker
/// annotations.
bool structurally_equal(const TypeExpr& a, const TypeExpr& b);
bool structurally_equal(const Expr& a, const Expr& b);
bool structurally_equal(const Stmt& a, const Stmt& b);
bool structurally_equal(const ModuleAst& a, const ModuleAst& b);

}  // namespace rb1
