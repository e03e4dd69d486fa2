#include <cctype>
#include <cstdlib>
#include <string>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

namespace {

enum class Tok { number, ident, plus, minus, star, slash, caret, lparen,
                 rparen, comma, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  std::size_t line = 1;
  std::size_t column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_space();
    Token t;
    t.line = line_;
    t.column = column_;
    if (pos_ >= src_.size()) return t;
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      return number(t);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_')) {
        advance();
      }
      t.kind = Tok::ident;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    advance();
    t.text = std::string(1, c);
    switch (c) {
      case '+': t.kind = Tok::plus; break;
      case '-': t.kind = Tok::minus; break;
      case '*': t.kind = Tok::star; break;
      case '/': t.kind = Tok::slash; break;
      case '^': t.kind = Tok::caret; break;
      case '(': t.kind = Tok::lparen; break;
      case ')': t.kind = Tok::rparen; break;
      case ',': t.kind = Tok::comma; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         t.line, t.column);
    }
    return t;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size() &&
           std::isspace(static_cast<unsigned char>(src_[pos_]))) {
      advance();
    }
  }

  bool digit_at(std::size_t i) const {
    return i < src_.size() && std::isdigit(static_cast<unsigned char>(src_[i]));
  }

  Token number(Token t) {
    const std::size_t start = pos_;
    while (digit_at(pos_)) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (digit_at(pos_)) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) {
        ++look;
      }
      if (!digit_at(look)) {
        throw ParseError("malformed exponent in number", line_, column_);
      }
      while (pos_ < look) advance();
      while (digit_at(pos_)) advance();
    }
    t.kind = Tok::number;
    t.text = std::string(src_.substr(start, pos_ - start));
    t.number = std::strtod(t.text.c_str(), nullptr);
    return t;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

// expr   := term (('+'|'-') term)*
// term   := factor (('*'|'/') factor)*
// factor := unary ('^' unary)?
// unary  := '-' unary | atom
// atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'
class Parser {
 public:
  Parser(std::string_view src, const Chart& chart) : lex_(src), chart_(chart) {
    tok_ = lex_.next();
  }

  Expr parse() {
    Expr e = expr();
    if (tok_.kind != Tok::end) fail("unexpected '" + tok_.text + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.column);
  }

  void expect(Tok kind, const char* what) {
    if (tok_.kind != kind) {
      fail(std::string("expected ") + what +
           (tok_.kind == Tok::end ? " before end of input"
                                  : ", found '" + tok_.text + "'"));
    }
    tok_ = lex_.next();
  }

  Expr expr() {
    Expr lhs = term();
    while (tok_.kind == Tok::plus || tok_.kind == Tok::minus) {
      const NodeKind k = tok_.kind == Tok::plus ? NodeKind::add : NodeKind::sub;
      tok_ = lex_.next();
      lhs = Expr::raw_binary(k, lhs, term());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = factor();
    while (tok_.kind == Tok::star || tok_.kind == Tok::slash) {
      const NodeKind k = tok_.kind == Tok::star ? NodeKind::mul : NodeKind::div;
      tok_ = lex_.next();
      lhs = Expr::raw_binary(k, lhs, factor());
    }
    return lhs;
  }

  Expr factor() {
    Expr base = unary();
    if (tok_.kind != Tok::caret) return base;
    tok_ = lex_.next();
    Expr exponent = unary();
    if (tok_.kind == Tok::caret) fail("chained '^' needs parentheses");
    return Expr::raw_binary(NodeKind::pow, base, exponent);
  }

  Expr unary() {
    if (tok_.kind == Tok::minus) {
      tok_ = lex_.next();
      return Expr::raw_unary(NodeKind::negate, unary());
    }
    return atom();
  }

  Expr atom() {
    const Token t = tok_;
    switch (t.kind) {
      case Tok::number:
        tok_ = lex_.next();
        return Expr::constant(t.number);
      case Tok::lparen: {
        tok_ = lex_.next();
        Expr e = expr();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::ident:
        tok_ = lex_.next();
        if (tok_.kind == Tok::lparen) return call(t);
        if (auto slot = chart_.slot(t.text)) {
          return Expr::variable(*slot, t.text);
        }
        if (auto v = chart_.param(t.text)) return Expr::parameter(t.text, *v);
        if (func_from_name(t.text)) {
          throw ParseError("function '" + t.text + "' needs an argument",
                           t.line, t.column);
        }
        throw ParseError("unknown identifier '" + t.text + "'", t.line,
                         t.column);
      case Tok::end:
        fail("unexpected end of input");
      default:
        fail("unexpected '" + t.text + "'");
    }
  }

  Expr call(const Token& name) {
    const auto f = func_from_name(name.text);
    if (!f) {
      throw ParseError("unknown function '" + name.text + "'", name.line,
                       name.column);
    }
    tok_ = lex_.next();  // '('
    if (tok_.kind == Tok::rparen) {
      throw ParseError("function '" + name.text + "' takes 1 argument, got 0",
                       name.line, name.column);
    }
    Expr arg = expr();
    if (tok_.kind == Tok::comma) {
      throw ParseError(
          "function '" + name.text + "' takes 1 argument, got more",
          name.line, name.column);
    }
    expect(Tok::rparen, "')'");
    return Expr::call(*f, std::move(arg));
  }

  Lexer lex_;
  const Chart& chart_;
  Token tok_;
};

}  // namespace

Expr parse_expr(std::string_view source, const Chart& chart) {
  return Parser(source, chart).parse();
}

}  // namespace mechforce
