#pragma once

// Arithmetic expressions for inline initial data, e.g.
//   f1 = 0.35*sin(x1)
// Variables x1, x2 (x aliases x1), constants pi and e, the usual
// operators with ^ for powers, and a fixed set of unary functions.

#include <cctype>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>

#include "graphflow/errors.hpp"

namespace graphflow {

using Expr = std::function<double(double, double)>;

namespace detail {

struct ExprParser {
  const std::string& src;
  size_t pos = 0;

  explicit ExprParser(const std::string& s) : src(s) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("expression error at position " + std::to_string(pos) +
                      " in '" + src + "': " + what);
  }

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  Expr parse() {
    Expr e = sum();
    skip_ws();
    if (pos != src.size()) fail("trailing input");
    return e;
  }

  Expr sum() {
    Expr lhs = product();
    for (;;) {
      if (eat('+')) {
        Expr rhs = product();
        lhs = [lhs, rhs](double a, double b) { return lhs(a, b) + rhs(a, b); };
      } else if (eat('-')) {
        Expr rhs = product();
        lhs = [lhs, rhs](double a, double b) { return lhs(a, b) - rhs(a, b); };
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = power();
    for (;;) {
      if (eat('*')) {
        Expr rhs = power();
        lhs = [lhs, rhs](double a, double b) { return lhs(a, b) * rhs(a, b); };
      } else if (eat('/')) {
        Expr rhs = power();
        lhs = [lhs, rhs](double a, double b) { return lhs(a, b) / rhs(a, b); };
      } else {
        return lhs;
      }
    }
  }

  Expr power() {
    Expr base = unary();
    if (eat('^')) {
      Expr exp = power();  // right associative
      return [base, exp](double a, double b) {
        return std::pow(base(a, b), exp(a, b));
      };
    }
    return base;
  }

  Expr unary() {
    if (eat('-')) {
      Expr e = unary();
      return [e](double a, double b) { return -e(a, b); };
    }
    return primary();
  }

  Expr primary() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of expression");
    const char c = src[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v;
      try {
        v = std::stod(src.substr(pos), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += used;
      return [v](double, double) { return v; };
    }
    if (c == '(') {
      ++pos;
      Expr e = sum();
      if (!eat(')')) fail("missing ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[pos])) ||
              src[pos] == '_'))
        ++pos;
      const std::string name = src.substr(start, pos - start);
      if (name == "x" || name == "x1")
        return [](double a, double) { return a; };
      if (name == "x2") return [](double, double b) { return b; };
      if (name == "pi") return [](double, double) { return M_PI; };
      if (name == "e") return [](double, double) { return M_E; };
      static const std::map<std::string, double (*)(double)> funcs = {
          {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
          {"tanh", std::tanh}, {"sinh", std::sinh}, {"cosh", std::cosh},
          {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
          {"abs", std::fabs},  {"atan", std::atan},
      };
      auto it = funcs.find(name);
      if (it == funcs.end()) fail("unknown identifier '" + name + "'");
      if (!eat('(')) fail("function '" + name + "' needs an argument list");
      Expr arg = sum();
      if (!eat(')')) fail("missing ')'");
      auto fn = it->second;
      return [fn, arg](double a, double b) { return fn(arg(a, b)); };
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace detail

inline Expr parse_expr(const std::string& src) {
  detail::ExprParser p(src);
  return p.parse();
}

}  // namespace graphflow
