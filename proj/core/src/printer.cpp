#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

namespace {

// Binding strength of the printed form; higher binds tighter.
enum Prec : int { kSum = 1, kProduct = 2, kUnary = 3, kPower = 4, kAtom = 5 };

struct Printed {
  std::string text;
  int prec;
};

std::string format_number(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : "inf";
  char buf[40];
  for (int digits : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string wrap(const Printed& p, bool parens) {
  return parens ? "(" + p.text + ")" : p.text;
}

Printed print(const Expr& e) {
  const Node& n = e.node();
  switch (n.kind) {
    case NodeKind::constant:
      if (std::signbit(n.value) && !std::isnan(n.value)) {
        return {"-" + format_number(-n.value), kUnary};
      }
      return {format_number(n.value), kAtom};
    case NodeKind::variable:
    case NodeKind::parameter:
      return {n.name, kAtom};
    case NodeKind::negate: {
      const Printed a = print(n.args[0]);
      return {"-" + wrap(a, a.prec < kUnary || a.prec == kPower), kUnary};
    }
    case NodeKind::add:
    case NodeKind::sub: {
      const Printed a = print(n.args[0]);
      const Printed b = print(n.args[1]);
      const char* op = n.kind == NodeKind::add ? " + " : " - ";
      return {wrap(a, a.prec < kSum) + op + wrap(b, b.prec <= kSum), kSum};
    }
    case NodeKind::mul:
    case NodeKind::div: {
      const Printed a = print(n.args[0]);
      const Printed b = print(n.args[1]);
      const char* op = n.kind == NodeKind::mul ? "*" : "/";
      return {wrap(a, a.prec < kProduct) + op + wrap(b, b.prec <= kProduct),
              kProduct};
    }
    case NodeKind::pow: {
      const Printed a = print(n.args[0]);
      const Printed b = print(n.args[1]);
      return {wrap(a, a.prec < kAtom) + "^" + wrap(b, b.prec < kAtom), kPower};
    }
    case NodeKind::call:
      return {std::string(to_string(n.func)) + "(" + print(n.args[0]).text +
                  ")",
              kAtom};
    case NodeKind::primitive: {
      std::string s = n.primitive->name() + "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) s += ", ";
        s += print(n.args[i]).text;
      }
      return {s + ")", kAtom};
    }
  }
  return {"?", kAtom};
}

}  // namespace

std::string to_string(const Expr& e) { return print(e).text; }

}  // namespace mechforce
