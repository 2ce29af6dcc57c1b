#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rb1/ast.hpp"

namespace rb1 {

enum class TokenKind {
  Keyword,
  Identifier,
  IntLiteral,
  FloatLiteral,
  BoolLiteral,
  Operator,
  Punctuation,
  Indent,
  Dedent,
  Newline,
  Eof,
};

const char* to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Eof;
  std::string text;
  int line = 1;
  int column = 1;

  SourcePos pos() const { return {line, column}; }
};

/// Splits source text into tokens. Newlines inside (), [] and {} are
/// joined; blank and comment-only lines produce nothing.
std::vector<Token> tokenize(std::string_view source);

ModuleAst parse(const std::vector<Token>& tokens);

inline ModuleAst parse_source(std::string_view source) { return parse(tokenize(source)); }

/// Canonical 2-space rendering; parse(pretty_print(m)) is structurally
/// equal to m.
std::string pretty_print(const ModuleAst& module);
std::string pretty_print(const Expr& expr);
std::string pretty_print(const TypeExpr& type);

}  // namespace rb1
