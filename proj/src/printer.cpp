#include <charconv>
#include <sstream>

#include "rb1/frontend.hpp"

namespace rb1 {

const char* to_string(UnaryOp op) { return op == UnaryOp::Not ? "!" : "-"; }

const char* to_string(BinaryOp op) {
  switch (op) {
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
  }
  return "?";
}

namespace {

int precedence(const Expr& e) {
  if (e.kind == ExprKind::Unary) return 6;
  if (e.kind != ExprKind::Binary) return 7;
  switch (e.binary) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq: case BinaryOp::Ne: case BinaryOp::Lt:
    case BinaryOp::Le: case BinaryOp::Gt: case BinaryOp::Ge:
      return 3;
    case BinaryOp::Add: case BinaryOp::Sub: return 4;
    default: return 5;
  }
}

std::string format_float(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

void print_expr(std::ostream& os, const Expr& e);

void print_operand(std::ostream& os, const Expr& child, bool parens) {
  if (parens) os << '(';
  print_expr(os, child);
  if (parens) os << ')';
}

void print_args(std::ostream& os, const std::vector<Expr>& ops, std::size_t from) {
  os << '(';
  for (std::size_t i = from; i < ops.size(); ++i) {
    if (i > from) os << ", ";
    print_expr(os, ops[i]);
  }
  os << ')';
}

void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::IntLit: os << e.int_value; return;
    case ExprKind::FloatLit: os << format_float(e.float_value); return;
    case ExprKind::BoolLit: os << (e.bool_value ? "true" : "false"); return;
    case ExprKind::Name: os << e.name; return;
    case ExprKind::SelfRef: os << "self"; return;
    case ExprKind::Field:
      print_operand(os, e.operands[0], precedence(e.operands[0]) < 7);
      os << '.' << e.name;
      return;
    case ExprKind::Index:
      print_operand(os, e.operands[0], precedence(e.operands[0]) < 7);
      os << '[';
      print_expr(os, e.operands[1]);
      os << ']';
      return;
    case ExprKind::Call:
      os << e.name;
      print_args(os, e.operands, 0);
      return;
    case ExprKind::MethodCall:
      print_operand(os, e.operands[0], precedence(e.operands[0]) < 7);
      os << '.' << e.name;
      print_args(os, e.operands, 1);
      return;
    case ExprKind::Unary:
      os << to_string(e.unary);
      print_operand(os, e.operands[0], precedence(e.operands[0]) < 6);
      return;
    case ExprKind::Binary: {
      int p = precedence(e);
      // Comparisons do not chain; other operators associate left.
      bool lhs_paren = precedence(e.operands[0]) < p || (p == 3 && precedence(e.operands[0]) == 3);
      print_operand(os, e.operands[0], lhs_paren);
      os << ' ' << to_string(e.binary) << ' ';
      print_operand(os, e.operands[1], precedence(e.operands[1]) <= p);
      return;
    }
  }
}

void print_type(std::ostream& os, const TypeExpr& t) {
  switch (t.base) {
    case TypeExpr::Base::Bool: os << "Bool"; break;
    case TypeExpr::Base::Int: os << "Int"; break;
    case TypeExpr::Base::Float: os << "Float"; break;
    case TypeExpr::Base::Bounded: os << "Int<" << t.min << ", " << t.max << '>'; break;
    case TypeExpr::Base::Named: os << t.name; break;
  }
  for (auto d : t.dims) os << '[' << d << ']';
}

void print_params(std::ostream& os, const std::vector<Param>& ps) {
  os << '(';
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) os << ", ";
    print_type(os, ps[i].type);
    os << ' ' << ps[i].name;
  }
  os << ')';
}

void indent(std::ostream& os, int depth) {
  for (int i = 0; i < depth; ++i) os << "  ";
}

void print_body(std::ostream& os, const std::vector<Stmt>& body, int depth);

void print_stmt(std::ostream& os, const Stmt& s, int depth) {
  indent(os, depth);
  switch (s.kind) {
    case StmtKind::Let:
    case StmtKind::Frame:
      os << (s.kind == StmtKind::Let ? "let " : "frm ") << s.name;
      if (s.declared) {
        os << " : ";
        print_type(os, *s.declared);
      }
      if (s.value) {
        os << " = ";
        print_expr(os, *s.value);
      }
      os << '\n';
      return;
    case StmtKind::Assign:
      print_expr(os, *s.target);
      os << " = ";
      print_expr(os, *s.value);
      os << '\n';
      return;
    case StmtKind::ExprStmt:
      print_expr(os, *s.target);
      os << '\n';
      return;
    case StmtKind::Return:
      os << "return";
      if (s.value) {
        os << ' ';
        print_expr(os, *s.value);
      }
      os << '\n';
      return;
    case StmtKind::Action:
      os << "act " << s.name;
      print_params(os, s.params);
      if (!s.preconditions.empty()) {
        os << " {";
        for (std::size_t i = 0; i < s.preconditions.size(); ++i) {
          os << (i ? ", " : " ");
          print_expr(os, s.preconditions[i]);
        }
        os << " }";
      }
      os << '\n';
      return;
    case StmtKind::While:
      os << "while ";
      print_expr(os, *s.target);
      os << ":\n";
      print_body(os, s.body, depth + 1);
      return;
    case StmtKind::If:
      os << "if ";
      print_expr(os, *s.target);
      os << ":\n";
      print_body(os, s.body, depth + 1);
      if (!s.else_body.empty()) {
        indent(os, depth);
        os << "else:\n";
        print_body(os, s.else_body, depth + 1);
      }
      return;
  }
}

void print_body(std::ostream& os, const std::vector<Stmt>& body, int depth) {
  for (const Stmt& s : body) print_stmt(os, s, depth);
}

void print_function(std::ostream& os, const FuncDecl& f, int depth) {
  indent(os, depth);
  os << "fun " << f.name;
  print_params(os, f.params);
  if (f.ret) {
    os << " -> ";
    print_type(os, *f.ret);
  }
  os << ":\n";
  print_body(os, f.body, depth + 1);
}

}  // namespace

std::string pretty_print(const Expr& expr) {
  std::ostringstream os;
  print_expr(os, expr);
  return os.str();
}

std::string pretty_print(const TypeExpr& type) {
  std::ostringstream os;
  print_type(os, type);
  return os.str();
}

std::string pretty_print(const ModuleAst& module) {
  std::ostringstream os;
  bool first = true;
  for (auto [kind, index] : module.order) {
    if (!first) os << '\n';
    first = false;
    switch (kind) {
      case ModuleAst::DeclKind::Function:
        print_function(os, module.functions[index], 0);
        break;
      case ModuleAst::DeclKind::Action: {
        const ActDecl& a = module.actions[index];
        os << "act " << a.name;
        print_params(os, a.params);
        os << " -> " << a.return_class << ":\n";
        print_body(os, a.body, 1);
        break;
      }
      case ModuleAst::DeclKind::Class: {
        const ClsDecl& c = module.classes[index];
        os << "cls " << c.name << ":\n";
        for (const FieldDecl& f : c.fields) {
          indent(os, 1);
          print_type(os, f.type);
          os << ' ' << f.name << '\n';
        }
        for (const FuncDecl& m : c.methods) {
          os << '\n';
          print_function(os, m, 1);
        }
        break;
      }
    }
  }
  return os.str();
}

}  // namespace rb1
