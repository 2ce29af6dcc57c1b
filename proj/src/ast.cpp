#include <algorithm>
#include <bit>

#include "rb1/ast.hpp"

namespace rb1 {

namespace {

template <typename T, typename F>
bool all_equal(const std::vector<T>& a, const std::vector<T>& b, F eq) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), eq);
}

template <typename T>
bool opt_equal(const std::optional<T>& a, const std::optional<T>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || structurally_equal(*a, *b);
}

bool params_equal(const std::vector<Param>& a, const std::vector<Param>& b) {
  return all_equal(a, b, [](const Param& x, const Param& y) {
    return x.name == y.name && structurally_equal(x.type, y.type);
  });
}

bool exprs_equal(const std::vector<Expr>& a, const std::vector<Expr>& b) {
  return all_equal(a, b, [](const Expr& x, const Expr& y) { return structurally_equal(x, y); });
}

bool body_equal(const std::vector<Stmt>& a, const std::vector<Stmt>& b) {
  return all_equal(a, b, [](const Stmt& x, const Stmt& y) { return structurally_equal(x, y); });
}

bool function_equal(const FuncDecl& a, const FuncDecl& b) {
  return a.name == b.name && params_equal(a.params, b.params) && opt_equal(a.ret, b.ret) &&
         body_equal(a.body, b.body);
}

}  // namespace

bool structurally_equal(const TypeExpr& a, const TypeExpr& b) {
  if (a.base != b.base || a.dims != b.dims) return false;
  switch (a.base) {
    case TypeExpr::Base::Bounded: return a.min == b.min && a.max == b.max;
    case TypeExpr::Base::Named: return a.name == b.name;
    default: return true;
  }
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::IntLit: return a.int_value == b.int_value;
    case ExprKind::FloatLit:
      return std::bit_cast<std::uint64_t>(a.float_value) == std::bit_cast<std::uint64_t>(b.float_value);
    case ExprKind::BoolLit: return a.bool_value == b.bool_value;
    case ExprKind::Name: return a.name == b.name;
    case ExprKind::SelfRef: return true;
    case ExprKind::Unary: return a.unary == b.unary && exprs_equal(a.operands, b.operands);
    case ExprKind::Binary: return a.binary == b.binary && exprs_equal(a.operands, b.operands);
    default: return a.name == b.name && exprs_equal(a.operands, b.operands);
  }
}

bool structurally_equal(const Stmt& a, const Stmt& b) {
  return a.kind == b.kind && a.name == b.name && opt_equal(a.declared, b.declared) &&
         opt_equal(a.value, b.value) && opt_equal(a.target, b.target) && params_equal(a.params, b.params) &&
         exprs_equal(a.preconditions, b.preconditions) && body_equal(a.body, b.body) &&
         body_equal(a.else_body, b.else_body);
}

bool structurally_equal(const ModuleAst& a, const ModuleAst& b) {
  if (a.order != b.order) return false;
  if (!all_equal(a.functions, b.functions, function_equal)) return false;
  if (!all_equal(a.actions, b.actions, [](const ActDecl& x, const ActDecl& y) {
        return x.name == y.name && x.return_class == y.return_class && params_equal(x.params, y.params) &&
               body_equal(x.body, y.body);
      })) {
    return false;
  }
  return all_equal(a.classes, b.classes, [](const ClsDecl& x, const ClsDecl& y) {
    return x.name == y.name &&
           all_equal(x.fields, y.fields,
                     [](const FieldDecl& f, const FieldDecl& g) {
                       return f.name == g.name && structurally_equal(f.type, g.type);
                     }) &&
           all_equal(x.methods, y.methods, function_equal);
  });
}

}  // namespace rb1
