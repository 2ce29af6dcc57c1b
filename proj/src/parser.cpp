#include <charconv>
#include <set>

#include "rb1/frontend.hpp"

namespace rb1 {

namespace {

class Parser {
 public:
  explicit Parser(const std::vector<Token>& tokens) : toks_(tokens) {
    if (toks_.empty() || toks_.back().kind != TokenKind::Eof) {
      throw ParseError({1, 1}, "token stream ending in EOF", "unterminated stream");
    }
  }

  ModuleAst module() {
    ModuleAst m;
    std::set<std::string> names;
    auto declare = [&](const std::string& name, SourcePos pos) {
      if (!names.insert(name).second) throw TypeError(pos, "duplicate top-level name '" + name + "'");
    };
    while (!at(TokenKind::Eof)) {
      if (accept(TokenKind::Newline)) continue;
      if (at_keyword("fun")) {
        m.functions.push_back(function());
        declare(m.functions.back().name, m.functions.back().pos);
        m.order.emplace_back(ModuleAst::DeclKind::Function, m.functions.size() - 1);
      } else if (at_keyword("act")) {
        m.actions.push_back(action());
        declare(m.actions.back().name, m.actions.back().pos);
        declare(m.actions.back().return_class, m.actions.back().pos);
        m.order.emplace_back(ModuleAst::DeclKind::Action, m.actions.size() - 1);
      } else if (at_keyword("cls")) {
        m.classes.push_back(class_decl());
        declare(m.classes.back().name, m.classes.back().pos);
        m.order.emplace_back(ModuleAst::DeclKind::Class, m.classes.size() - 1);
      } else {
        fail("'fun', 'act' or 'cls'");
      }
    }
    return m;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_keyword(std::string_view kw) const { return at(TokenKind::Keyword) && cur().text == kw; }
  bool at_punct(std::string_view p) const { return at(TokenKind::Punctuation) && cur().text == p; }
  bool at_op(std::string_view p) const { return at(TokenKind::Operator) && cur().text == p; }

  const Token& next() {
    const Token& t = toks_[i_];
    if (t.kind != TokenKind::Eof) ++i_;
    return t;
  }
  bool accept(TokenKind k) {
    if (!at(k)) return false;
    next();
    return true;
  }
  bool accept_punct(std::string_view p) {
    if (!at_punct(p)) return false;
    next();
    return true;
  }
  bool accept_op(std::string_view p) {
    if (!at_op(p)) return false;
    next();
    return true;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::Indent:
      case TokenKind::Dedent:
      case TokenKind::Newline:
      case TokenKind::Eof:
        return to_string(t.kind);
      default:
        return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(const std::string& expected) const {
    throw ParseError(cur().pos(), expected, describe(cur()));
  }

  void expect_punct(std::string_view p) {
    if (!accept_punct(p)) fail("'" + std::string(p) + "'");
  }
  void expect_op(std::string_view p) {
    if (!accept_op(p)) fail("'" + std::string(p) + "'");
  }
  void expect(TokenKind k) {
    if (!accept(k)) fail(to_string(k));
  }
  std::string identifier() {
    if (!at(TokenKind::Identifier)) fail("identifier");
    return next().text;
  }

  std::int64_t signed_int() {
    bool neg = accept_op("-");
    if (!at(TokenKind::IntLiteral)) fail("integer literal");
    std::int64_t v = 0;
    const std::string& text = next().text;
    std::from_chars(text.data(), text.data() + text.size(), v);
    return neg ? -v : v;
  }

  TypeExpr type() {
    TypeExpr t;
    t.pos = cur().pos();
    std::string name = identifier();
    if (name == "Bool") {
      t.base = TypeExpr::Base::Bool;
    } else if (name == "Float") {
      t.base = TypeExpr::Base::Float;
    } else if (name == "Int") {
      t.base = TypeExpr::Base::Int;
      if (accept_op("<")) {
        t.base = TypeExpr::Base::Bounded;
        t.min = signed_int();
        expect_punct(",");
        t.max = signed_int();
        expect_op(">");
        if (t.min > t.max) throw TypeError(t.pos, "bounded integer requires min <= max");
      }
    } else {
      t.base = TypeExpr::Base::Named;
      t.name = name;
    }
    while (accept_punct("[")) {
      SourcePos p = cur().pos();
      std::int64_t len = signed_int();
      if (len < 1) throw TypeError(p, "array length must be at least 1");
      t.dims.push_back(len);
      expect_punct("]");
    }
    return t;
  }

  std::vector<Param> params() {
    std::vector<Param> ps;
    expect_punct("(");
    if (!at_punct(")")) {
      do {
        Param p;
        p.pos = cur().pos();
        p.type = type();
        p.name = identifier();
        ps.push_back(std::move(p));
      } while (accept_punct(","));
    }
    expect_punct(")");
    return ps;
  }

  FuncDecl function() {
    FuncDecl f;
    f.pos = cur().pos();
    next();  // fun
    f.name = identifier();
    f.params = params();
    if (accept_op("->")) f.ret = type();
    expect_punct(":");
    f.body = block();
    return f;
  }

  ActDecl action() {
    ActDecl a;
    a.pos = cur().pos();
    next();  // act
    a.name = identifier();
    a.params = params();
    expect_op("->");
    a.return_class = identifier();
    expect_punct(":");
    a.body = block();
    return a;
  }

  ClsDecl class_decl() {
    ClsDecl c;
    c.pos = cur().pos();
    next();  // cls
    c.name = identifier();
    expect_punct(":");
    expect(TokenKind::Newline);
    expect(TokenKind::Indent);
    while (!accept(TokenKind::Dedent)) {
      if (at_keyword("fun")) {
        c.methods.push_back(function());
      } else {
        FieldDecl fd;
        fd.pos = cur().pos();
        fd.type = type();
        fd.name = identifier();
        expect(TokenKind::Newline);
        c.fields.push_back(std::move(fd));
      }
    }
    return c;
  }

  std::vector<Stmt> block() {
    std::vector<Stmt> body;
    if (!accept(TokenKind::Newline)) {
      body.push_back(simple_statement());
      return body;
    }
    expect(TokenKind::Indent);
    while (!accept(TokenKind::Dedent)) body.push_back(statement());
    return body;
  }

  Stmt statement() {
    if (at_keyword("if")) return if_statement();
    if (at_keyword("while")) {
      Stmt s;
      s.kind = StmtKind::While;
      s.pos = next().pos();
      s.target = expr();
      expect_punct(":");
      s.body = block();
      return s;
    }
    return simple_statement();
  }

  Stmt if_statement() {
    Stmt s;
    s.kind = StmtKind::If;
    s.pos = next().pos();
    s.target = expr();
    expect_punct(":");
    s.body = block();
    if (at_keyword("else")) {
      next();
      if (at_keyword("if")) {
        s.else_body.push_back(if_statement());
      } else {
        expect_punct(":");
        s.else_body = block();
      }
    }
    return s;
  }

  Stmt simple_statement() {
    Stmt s;
    s.pos = cur().pos();
    if (at_keyword("let") || at_keyword("frm")) {
      s.kind = cur().text == "let" ? StmtKind::Let : StmtKind::Frame;
      next();
      s.name = identifier();
      if (accept_punct(":")) s.declared = type();
      if (accept_op("=")) s.value = expr();
      if (!s.declared && !s.value) fail("':' type or '=' initializer");
    } else if (at_keyword("return")) {
      s.kind = StmtKind::Return;
      next();
      if (!at(TokenKind::Newline)) s.value = expr();
    } else if (at_keyword("act")) {
      s.kind = StmtKind::Action;
      next();
      s.name = identifier();
      s.params = params();
      if (accept_punct("{")) {
        if (!at_punct("}")) {
          do {
            if (at_punct("}")) break;  // trailing comma
            s.preconditions.push_back(expr());
          } while (accept_punct(","));
        }
        expect_punct("}");
      }
    } else {
      Expr e = expr();
      if (accept_op("=")) {
        s.kind = StmtKind::Assign;
        s.target = std::move(e);
        s.value = expr();
      } else {
        s.kind = StmtKind::ExprStmt;
        s.target = std::move(e);
      }
    }
    expect(TokenKind::Newline);
    return s;
  }

  Expr binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.binary = op;
    e.pos = pos;
    e.operands.push_back(std::move(lhs));
    e.operands.push_back(std::move(rhs));
    return e;
  }

  Expr expr() { return or_expr(); }

  Expr or_expr() {
    Expr lhs = and_expr();
    while (at_keyword("or") || at_op("||")) {
      SourcePos p = next().pos();
      lhs = binary(BinaryOp::Or, std::move(lhs), and_expr(), p);
    }
    return lhs;
  }

  Expr and_expr() {
    Expr lhs = comparison();
    while (at_keyword("and") || at_op("&&")) {
      SourcePos p = next().pos();
      lhs = binary(BinaryOp::And, std::move(lhs), comparison(), p);
    }
    return lhs;
  }

  Expr comparison() {
    Expr lhs = additive();
    static const std::pair<const char*, BinaryOp> ops[] = {
        {"==", BinaryOp::Eq}, {"!=", BinaryOp::Ne}, {"<", BinaryOp::Lt},
        {"<=", BinaryOp::Le}, {">", BinaryOp::Gt}, {">=", BinaryOp::Ge}};
    for (auto [text, op] : ops) {
      if (at_op(text)) {
        SourcePos p = next().pos();
        return binary(op, std::move(lhs), additive(), p);
      }
    }
    return lhs;
  }

  Expr additive() {
    Expr lhs = multiplicative();
    while (at_op("+") || at_op("-")) {
      BinaryOp op = cur().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
      SourcePos p = next().pos();
      lhs = binary(op, std::move(lhs), multiplicative(), p);
    }
    return lhs;
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (at_op("*") || at_op("/") || at_op("%")) {
      BinaryOp op = cur().text == "*" ? BinaryOp::Mul : cur().text == "/" ? BinaryOp::Div : BinaryOp::Mod;
      SourcePos p = next().pos();
      lhs = binary(op, std::move(lhs), unary(), p);
    }
    return lhs;
  }

  Expr unary() {
    if (at_op("!") || at_keyword("not") || at_op("-")) {
      Expr e;
      e.kind = ExprKind::Unary;
      e.unary = cur().text == "-" ? UnaryOp::Neg : UnaryOp::Not;
      e.pos = next().pos();
      e.operands.push_back(unary());
      return e;
    }
    return postfix();
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect_punct("(");
    if (!at_punct(")")) {
      do {
        args.push_back(expr());
      } while (accept_punct(","));
    }
    expect_punct(")");
    return args;
  }

  Expr postfix() {
    Expr e = primary();
    for (;;) {
      if (at_punct(".")) {
        SourcePos p = next().pos();
        std::string name = identifier();
        Expr n;
        n.pos = p;
        n.name = std::move(name);
        n.operands.push_back(std::move(e));
        if (at_punct("(")) {
          n.kind = ExprKind::MethodCall;
          for (Expr& a : arguments()) n.operands.push_back(std::move(a));
        } else {
          n.kind = ExprKind::Field;
        }
        e = std::move(n);
      } else if (at_punct("[")) {
        SourcePos p = next().pos();
        Expr n;
        n.kind = ExprKind::Index;
        n.pos = p;
        n.operands.push_back(std::move(e));
        n.operands.push_back(expr());
        expect_punct("]");
        e = std::move(n);
      } else if (at_punct("(") && e.kind == ExprKind::Name) {
        e.kind = ExprKind::Call;
        e.operands = arguments();
      } else {
        return e;
      }
    }
  }

  Expr primary() {
    Expr e;
    e.pos = cur().pos();
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::IntLiteral: {
        e.kind = ExprKind::IntLit;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.int_value);
        next();
        return e;
      }
      case TokenKind::FloatLiteral: {
        e.kind = ExprKind::FloatLit;
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), e.float_value);
        next();
        return e;
      }
      case TokenKind::BoolLiteral:
        e.kind = ExprKind::BoolLit;
        e.bool_value = t.text == "true";
        next();
        return e;
      case TokenKind::Identifier:
        e.kind = ExprKind::Name;
        e.name = t.text;
        next();
        return e;
      case TokenKind::Keyword:
        if (t.text == "self") {
          e.kind = ExprKind::SelfRef;
          e.name = "self";
          next();
          return e;
        }
        break;
      case TokenKind::Punctuation:
        if (t.text == "(") {
          next();
          Expr inner = expr();
          expect_punct(")");
          return inner;
        }
        break;
      default:
        break;
    }
    fail("expression");
  }

  const std::vector<Token>& toks_;
  std::size_t i_ = 0;
};

}  // namespace

ModuleAst parse(const std::vector<Token>& tokens) { return Parser(tokens).module(); }

}  // namespace rb1
