#pragma once

// Coordinate expressions for metric coefficients: parsing, generic
// evaluation (double, long double, jets) and symbolic differentiation.
//
// Grammar:
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative, binds tightest
//   primary := number | 'x'<k> | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | sqrt | log

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "finsler/errors.hpp"
#include "finsler/jets.hpp"

namespace finsler::expr {

enum class Kind { Const, Var, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp, Sqrt, Log };

class Expr {
 public:
  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double v) { return Expr(std::make_shared<Node>(Node{Kind::Const, v, 0, {}})); }
  /// Variable x^(index+1); index is zero-based.
  static Expr variable(int index) {
    return Expr(std::make_shared<Node>(Node{Kind::Var, 0.0, index, {}}));
  }
  static Expr unary(Kind k, Expr a) { return Expr(std::make_shared<Node>(Node{k, 0.0, 0, {std::move(a)}})); }
  static Expr binary(Kind k, Expr a, Expr b) {
    return Expr(std::make_shared<Node>(Node{k, 0.0, 0, {std::move(a), std::move(b)}}));
  }

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  int var() const { return node_->var; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }
  std::size_t arity() const { return node_->args.size(); }

  bool is_constant() const { return kind() == Kind::Const; }
  bool is_constant(double v) const { return is_constant() && value() == v; }

  bool depends_on(int v) const {
    if (kind() == Kind::Var) return var() == v;
    for (const auto& a : node_->args)
      if (a.depends_on(v)) return true;
    return false;
  }
  int max_var() const {
    int m = kind() == Kind::Var ? var() : -1;
    for (const auto& a : node_->args) m = std::max(m, a.max_var());
    return m;
  }

  std::string str() const;

 private:
  struct Node {
    Kind kind;
    double value;
    int var;
    std::vector<Expr> args;
  };
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

namespace detail {

inline int precedence(const Expr& e) {
  switch (e.kind()) {
    case Kind::Add:
    case Kind::Sub:
      return 1;
    case Kind::Mul:
    case Kind::Div:
      return 2;
    case Kind::Neg:
      return 3;
    case Kind::Pow:
      return 4;
    case Kind::Const:
      return e.value() < 0 || std::signbit(e.value()) ? 3 : 5;
    default:
      return 5;
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that round-trips.
  for (int p = 1; p <= 17; ++p) {
    char shortbuf[32];
    std::snprintf(shortbuf, sizeof shortbuf, "%.*g", p, v);
    if (std::strtod(shortbuf, nullptr) == v) return shortbuf;
  }
  return buf;
}

inline std::string wrap(const Expr& e, bool parens) { return parens ? "(" + e.str() + ")" : e.str(); }

inline const char* func_name(Kind k) {
  switch (k) {
    case Kind::Sin:
      return "sin";
    case Kind::Cos:
      return "cos";
    case Kind::Exp:
      return "exp";
    case Kind::Sqrt:
      return "sqrt";
    case Kind::Log:
      return "log";
    default:
      return "?";
  }
}

}  // namespace detail

inline std::string Expr::str() const {
  using detail::precedence;
  using detail::wrap;
  switch (kind()) {
    case Kind::Const:
      return detail::format_number(value());
    case Kind::Var:
      return "x" + std::to_string(var() + 1);
    case Kind::Neg:
      return "-" + wrap(arg(0), precedence(arg(0)) < 3);
    case Kind::Add:
      return arg(0).str() + " + " + wrap(arg(1), precedence(arg(1)) < 2);
    case Kind::Sub:
      return arg(0).str() + " - " + wrap(arg(1), precedence(arg(1)) < 2 || precedence(arg(1)) == 3);
    case Kind::Mul:
      return wrap(arg(0), precedence(arg(0)) < 2) + "*" + wrap(arg(1), precedence(arg(1)) < 4);
    case Kind::Div:
      return wrap(arg(0), precedence(arg(0)) < 2) + "/" + wrap(arg(1), precedence(arg(1)) < 4);
    case Kind::Pow:
      return wrap(arg(0), precedence(arg(0)) < 5) + "^" + wrap(arg(1), precedence(arg(1)) < 4);
    default:
      return std::string(detail::func_name(kind())) + "(" + arg(0).str() + ")";
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, int dim) : text_(text), dim_(dim) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", pos_);
    return e;
  }

 private:
  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = Expr::binary(Kind::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(Kind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }
  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        lhs = Expr::binary(Kind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(Kind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }
  Expr parse_unary() {
    skip_ws();
    if (accept('-')) return Expr::unary(Kind::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }
  Expr parse_power() {
    Expr base = parse_primary();
    skip_ws();
    if (accept('^')) return Expr::binary(Kind::Pow, base, parse_unary());
    return base;
  }
  Expr parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("expected operand, found end of input", pos_);
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      skip_ws();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_identifier();
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }
  Expr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && std::isdigit(static_cast<unsigned char>(text_[p]))) {
        pos_ = p;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw ParseError("malformed number", start);
    return Expr::constant(v);
  }
  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view id = text_.substr(start, pos_ - start);
    if (id.size() >= 2 && id[0] == 'x' &&
        id.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      int k = 0;
      std::from_chars(id.data() + 1, id.data() + id.size(), k);
      if (k < 1) throw ParseError("variable index must start at 1", start);
      if (k > dim_)
        throw ParseError("variable x" + std::to_string(k) + " exceeds dimension " + std::to_string(dim_), start);
      return Expr::variable(k - 1);
    }
    Kind fn;
    if (id == "sin") {
      fn = Kind::Sin;
    } else if (id == "cos") {
      fn = Kind::Cos;
    } else if (id == "exp") {
      fn = Kind::Exp;
    } else if (id == "sqrt") {
      fn = Kind::Sqrt;
    } else if (id == "log") {
      fn = Kind::Log;
    } else {
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    skip_ws();
    if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
    Expr a = parse_expr();
    skip_ws();
    if (!accept(')')) throw ParseError("expected ')'", pos_);
    return Expr::unary(fn, a);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string_view text_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses an expression in variables x1..x{dim}.
inline Expr parse(std::string_view text, int dim) { return detail::Parser(text, dim).parse(); }

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline double ipow(double b, int e) { return std::pow(b, e); }
inline long double ipow(long double b, int e) { return std::pow(b, e); }
inline jets::Jet ipow(const jets::Jet& b, int e) { return pow(b, e); }

template <typename T>
T eval_node(const Expr& e, std::span<const T> env) {
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  using jets::lift;
  using jets::value_of;
  switch (e.kind()) {
    case Kind::Const:
      return lift(env[0], e.value());
    case Kind::Var:
      return env[e.var()];
    case Kind::Neg:
      return -eval_node(e.arg(0), env);
    case Kind::Add:
      return eval_node(e.arg(0), env) + eval_node(e.arg(1), env);
    case Kind::Sub:
      return eval_node(e.arg(0), env) - eval_node(e.arg(1), env);
    case Kind::Mul:
      return eval_node(e.arg(0), env) * eval_node(e.arg(1), env);
    case Kind::Div: {
      T den = eval_node(e.arg(1), env);
      if (value_of(den) == 0.0) throw EvaluationError("division by zero in '" + e.str() + "'");
      return eval_node(e.arg(0), env) / den;
    }
    case Kind::Pow: {
      T base = eval_node(e.arg(0), env);
      const Expr& ex = e.arg(1);
      if (ex.is_constant() && std::floor(ex.value()) == ex.value() && std::abs(ex.value()) < 64) {
        const int p = static_cast<int>(ex.value());
        if (p < 0 && value_of(base) == 0.0) throw EvaluationError("division by zero in '" + e.str() + "'");
        return ipow(base, p);
      }
      if (value_of(base) <= 0.0) throw EvaluationError("non-integer power of non-positive base in '" + e.str() + "'");
      return exp(eval_node(ex, env) * log(base));
    }
    case Kind::Sin:
      return sin(eval_node(e.arg(0), env));
    case Kind::Cos:
      return cos(eval_node(e.arg(0), env));
    case Kind::Exp:
      return exp(eval_node(e.arg(0), env));
    case Kind::Sqrt: {
      T a = eval_node(e.arg(0), env);
      if (value_of(a) < 0.0) throw EvaluationError("sqrt of negative value in '" + e.str() + "'");
      return sqrt(a);
    }
    case Kind::Log: {
      T a = eval_node(e.arg(0), env);
      if (value_of(a) <= 0.0) throw EvaluationError("log of non-positive value in '" + e.str() + "'");
      return log(a);
    }
  }
  throw EvaluationError("corrupt expression node");
}

}  // namespace detail

/// Evaluates e with x^(i+1) = env[i]. env must be non-empty (it also
/// supplies the scalar type's context for constants).
template <typename T>
T eval(const Expr& e, std::span<const T> env) {
  if (env.empty()) throw ArgumentError("empty evaluation environment");
  if (e.max_var() >= static_cast<int>(env.size())) throw ArgumentError("environment shorter than expression dimension");
  return detail::eval_node(e, env);
}

inline double eval_expr(const Expr& e, std::span<const double> env) {
  const double v = eval(e, env);
  if (!std::isfinite(v)) throw EvaluationError("non-finite value of '" + e.str() + "'");
  return v;
}

// ---------------------------------------------------------------------------
// Symbolic differentiation with constant folding and 0/1 identities only.

namespace simplify {

inline Expr neg(const Expr& a) {
  if (a.is_constant()) return Expr::constant(-a.value());
  if (a.kind() == Kind::Neg) return a.arg(0);
  return Expr::unary(Kind::Neg, a);
}
inline Expr add(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() + b.value());
  return Expr::binary(Kind::Add, a, b);
}
inline Expr sub(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return neg(b);
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() - b.value());
  return Expr::binary(Kind::Sub, a, b);
}
inline Expr mul(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant()) return Expr::constant(a.value() * b.value());
  return Expr::binary(Kind::Mul, a, b);
}
inline Expr div(const Expr& a, const Expr& b) {
  if (a.is_constant(0.0) && !b.is_constant(0.0)) return Expr::constant(0.0);
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant() && b.value() != 0.0) return Expr::constant(a.value() / b.value());
  return Expr::binary(Kind::Div, a, b);
}
inline Expr pow(const Expr& a, const Expr& b) {
  if (b.is_constant(0.0)) return Expr::constant(1.0);
  if (b.is_constant(1.0)) return a;
  if (a.is_constant() && b.is_constant()) {
    const double v = std::pow(a.value(), b.value());
    if (std::isfinite(v)) return Expr::constant(v);
  }
  return Expr::binary(Kind::Pow, a, b);
}
inline Expr fn(Kind k, const Expr& a) { return Expr::unary(k, a); }

}  // namespace simplify

/// d e / d x^(var+1).
inline Expr diff(const Expr& e, int var) {
  namespace s = simplify;
  if (!e.depends_on(var)) return Expr::constant(0.0);
  switch (e.kind()) {
    case Kind::Const:
      return Expr::constant(0.0);
    case Kind::Var:
      return Expr::constant(e.var() == var ? 1.0 : 0.0);
    case Kind::Neg:
      return s::neg(diff(e.arg(0), var));
    case Kind::Add:
      return s::add(diff(e.arg(0), var), diff(e.arg(1), var));
    case Kind::Sub:
      return s::sub(diff(e.arg(0), var), diff(e.arg(1), var));
    case Kind::Mul:
      return s::add(s::mul(diff(e.arg(0), var), e.arg(1)), s::mul(e.arg(0), diff(e.arg(1), var)));
    case Kind::Div: {
      const Expr& u = e.arg(0);
      const Expr& v = e.arg(1);
      return s::div(s::sub(s::mul(diff(u, var), v), s::mul(u, diff(v, var))),
                    s::pow(v, Expr::constant(2.0)));
    }
    case Kind::Pow: {
      const Expr& u = e.arg(0);
      const Expr& p = e.arg(1);
      if (!p.depends_on(var)) {
        const Expr lowered = p.is_constant() ? Expr::constant(p.value() - 1.0) : s::sub(p, Expr::constant(1.0));
        return s::mul(s::mul(p, s::pow(u, lowered)), diff(u, var));
      }
      // u^p (p' log u + p u'/u)
      return s::mul(e, s::add(s::mul(diff(p, var), s::fn(Kind::Log, u)),
                              s::div(s::mul(p, diff(u, var)), u)));
    }
    case Kind::Sin:
      return s::mul(s::fn(Kind::Cos, e.arg(0)), diff(e.arg(0), var));
    case Kind::Cos:
      return s::neg(s::mul(s::fn(Kind::Sin, e.arg(0)), diff(e.arg(0), var)));
    case Kind::Exp:
      return s::mul(e, diff(e.arg(0), var));
    case Kind::Sqrt:
      return s::div(diff(e.arg(0), var), s::mul(Expr::constant(2.0), e));
    case Kind::Log:
      return s::div(diff(e.arg(0), var), e.arg(0));
  }
  return Expr::constant(0.0);
}

inline Expr diff_expr(const Expr& e, int var) { return diff(e, var); }

}  // namespace finsler::expr
