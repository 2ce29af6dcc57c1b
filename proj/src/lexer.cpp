#include <array>
#include <charconv>
#include <string>

#include "rb1/frontend.hpp"

namespace rb1 {

namespace {

constexpr std::array kKeywords = {"act", "fun", "cls", "frm", "let", "if", "else",
                                  "while", "return", "and", "or", "not", "self"};

bool is_keyword(std::string_view word) {
  for (const char* kw : kKeywords) {
    if (word == kw) return true;
  }
  return false;
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      if (at_line_start_) {
        if (!handle_indentation()) continue;
      }
      char c = src_[pos_];
      if (c == '\n') {
        newline();
        continue;
      }
      if (c == ' ' || c == '\r') {
        advance();
        continue;
      }
      if (c == '\t') throw LexError(here(), "tab characters are not allowed");
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
        continue;
      }
      lex_token();
    }
    if (depth_ > 0) throw LexError(here(), "unterminated bracket at end of input");
    if (line_has_tokens_) emit(TokenKind::Newline, "");
    while (indents_.size() > 1) {
      indents_.pop_back();
      emit(TokenKind::Dedent, "");
    }
    emit(TokenKind::Eof, "");
    return std::move(tokens_);
  }

 private:
  SourcePos here() const { return {line_, column_}; }

  void advance() {
    ++pos_;
    ++column_;
  }

  void emit(TokenKind kind, std::string text, SourcePos at) {
    tokens_.push_back(Token{kind, std::move(text), at.line, at.column});
  }
  void emit(TokenKind kind, std::string text) { emit(kind, std::move(text), here()); }

  void newline() {
    if (depth_ == 0 && line_has_tokens_) emit(TokenKind::Newline, "");
    ++pos_;
    ++line_;
    column_ = 1;
    if (depth_ == 0) {
      at_line_start_ = true;
      line_has_tokens_ = false;
    }
  }

  // Measures leading whitespace; returns false when the line is blank or
  // comment-only (nothing to emit).
  bool handle_indentation() {
    std::size_t width = 0;
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) {
      if (src_[pos_] == '\t') throw LexError(here(), "tab characters are not allowed in indentation");
      ++width;
      advance();
    }
    if (pos_ >= src_.size()) return false;
    char c = src_[pos_];
    if (c == '\n' || c == '#' || c == '\r') {
      at_line_start_ = false;
      return false;
    }
    at_line_start_ = false;
    if (width > indents_.back()) {
      indents_.push_back(width);
      emit(TokenKind::Indent, "");
    } else {
      while (width < indents_.back()) {
        indents_.pop_back();
        emit(TokenKind::Dedent, "");
      }
      if (width != indents_.back()) throw LexError(here(), "inconsistent indentation");
    }
    return true;
  }

  void lex_token() {
    SourcePos start = here();
    char c = src_[pos_];
    line_has_tokens_ = true;
    if (is_ident_start(c)) {
      std::size_t b = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      std::string word(src_.substr(b, pos_ - b));
      if (word == "true" || word == "false") {
        emit(TokenKind::BoolLiteral, word, start);
      } else {
        emit(is_keyword(word) ? TokenKind::Keyword : TokenKind::Identifier, word, start);
      }
      return;
    }
    if (is_digit(c)) {
      lex_number(start);
      return;
    }
    auto peek = [&](std::size_t k) { return pos_ + k < src_.size() ? src_[pos_ + k] : '\0'; };
    std::string two{c, peek(1)};
    if (two == "->" || two == "==" || two == "!=" || two == "<=" || two == ">=" || two == "&&" ||
        two == "||") {
      advance();
      advance();
      emit(TokenKind::Operator, two, start);
      return;
    }
    switch (c) {
      case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '=': case '!':
        advance();
        emit(TokenKind::Operator, std::string(1, c), start);
        return;
      case '(': case '[': case '{':
        ++depth_;
        advance();
        emit(TokenKind::Punctuation, std::string(1, c), start);
        return;
      case ')': case ']': case '}':
        if (depth_ > 0) --depth_;
        advance();
        emit(TokenKind::Punctuation, std::string(1, c), start);
        return;
      case ',': case ':': case '.':
        advance();
        emit(TokenKind::Punctuation, std::string(1, c), start);
        return;
      default:
        break;
    }
    throw LexError(start, std::string("illegal character '") +
                              (static_cast<unsigned char>(c) < 0x80 ? std::string(1, c) : "\\x" + hex(c)) + "'");
  }

  static std::string hex(char c) {
    static const char* digits = "0123456789abcdef";
    auto u = static_cast<unsigned char>(c);
    return {digits[u >> 4], digits[u & 15]};
  }

  void lex_number(SourcePos start) {
    std::size_t b = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    bool is_float = false;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && is_digit(src_[pos_ + 1])) {
      is_float = true;
      advance();
      while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      is_float = true;
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ >= src_.size() || !is_digit(src_[pos_])) throw LexError(start, "unterminated float literal exponent");
      while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && is_ident_start(src_[pos_])) {
      throw LexError(here(), "invalid suffix on numeric literal");
    }
    std::string text(src_.substr(b, pos_ - b));
    if (is_float) {
      emit(TokenKind::FloatLiteral, text, start);
    } else {
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
      if (ec != std::errc{}) throw LexError(start, "integer literal out of 64-bit range");
      emit(TokenKind::IntLiteral, text, start);
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
  int depth_ = 0;
  bool at_line_start_ = true;
  bool line_has_tokens_ = false;
  std::vector<std::size_t> indents_{0};
  std::vector<Token> tokens_;
};

}  // namespace

const char* to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Keyword: return "keyword";
    case TokenKind::Identifier: return "identifier";
    case TokenKind::IntLiteral: return "integer-literal";
    case TokenKind::FloatLiteral: return "float-literal";
    case TokenKind::BoolLiteral: return "bool-literal";
    case TokenKind::Operator: return "operator";
    case TokenKind::Punctuation: return "punctuation";
    case TokenKind::Indent: return "INDENT";
    case TokenKind::Dedent: return "DEDENT";
    case TokenKind::Newline: return "NEWLINE";
    case TokenKind::Eof: return "EOF";
  }
  return "?";
}

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace rb1
