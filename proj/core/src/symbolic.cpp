#include <unordered_map>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

namespace {

class Differentiator {
 public:
  explicit Differentiator(std::size_t slot) : slot_(slot) {}

  Expr operator()(const Expr& e) {
    if (e.is_constant()) return Expr::constant(0.0);
    if (auto it = memo_.find(e.identity()); it != memo_.end()) {
      return it->second;
    }
    Expr d = compute(e);
    memo_.emplace(e.identity(), d);
    return d;
  }

 private:
  Expr compute(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
      case NodeKind::constant:
      case NodeKind::parameter:
        return Expr::constant(0.0);
      case NodeKind::variable:
        return Expr::constant(n.slot == slot_ ? 1.0 : 0.0);
      case NodeKind::negate:
        return -(*this)(n.args[0]);
      case NodeKind::add:
        return (*this)(n.args[0]) + (*this)(n.args[1]);
      case NodeKind::sub:
        return (*this)(n.args[0]) - (*this)(n.args[1]);
      case NodeKind::mul: {
        const Expr& a = n.args[0];
        const Expr& b = n.args[1];
        return (*this)(a) * b + a * (*this)(b);
      }
      case NodeKind::div: {
        const Expr& a = n.args[0];
        const Expr& b = n.args[1];
        const Expr db = (*this)(b);
        const Expr first = (*this)(a) / b;
        if (db.is_zero()) return first;
        return first - (a * db) / (b * b);
      }
      case NodeKind::pow: {
        const Expr& base = n.args[0];
        const Expr& exponent = n.args[1];
        const Expr dbase = (*this)(base);
        if (exponent.is_constant()) {
          if (dbase.is_zero()) return Expr::constant(0.0);
          const Expr lowered = exponent.constant_value()
                                   ? Expr::constant(*exponent.constant_value() -
                                                    1.0)
                                   : exponent - Expr::constant(1.0);
          return exponent * pow(base, lowered) * dbase;
        }
        const Expr dw = (*this)(exponent);
        return e * (dw * Expr::call(Func::log, base) +
                    exponent * dbase / base);
      }
      case NodeKind::call: {
        const Expr& u = n.args[0];
        const Expr du = (*this)(u);
        if (du.is_zero()) return Expr::constant(0.0);
        switch (n.func) {
          case Func::sin:
            return Expr::call(Func::cos, u) * du;
          case Func::cos:
            return -(Expr::call(Func::sin, u) * du);
          case Func::tan:
            return du / pow(Expr::call(Func::cos, u), Expr::constant(2.0));
          case Func::exp:
            return e * du;
          case Func::log:
            return du / u;
          case Func::sqrt:
            return du / (Expr::constant(2.0) * e);
          case Func::abs:
            return Expr::call(Func::sign, u) * du;
          case Func::sign:
            return Expr::constant(0.0);
        }
        return Expr::constant(0.0);
      }
      case NodeKind::primitive: {
        std::vector<Expr> terms;
        for (std::size_t k = 0; k < n.args.size(); ++k) {
          const Expr dk = (*this)(n.args[k]);
          if (dk.is_zero()) continue;
          terms.push_back(n.primitive->partial(k, n.args) * dk);
        }
        return sum(terms);
      }
    }
    return Expr::constant(0.0);
  }

  std::size_t slot_;
  std::unordered_map<const void*, Expr> memo_;
};

class Rewriter {
 public:
  using Leaf = std::function<std::optional<Expr>(const Node&)>;

  explicit Rewriter(Leaf leaf) : leaf_(std::move(leaf)) {}

  Expr operator()(const Expr& e) {
    if (auto it = memo_.find(e.identity()); it != memo_.end()) {
      return it->second;
    }
    Expr r = compute(e);
    memo_.emplace(e.identity(), r);
    return r;
  }

 private:
  Expr compute(const Expr& e) {
    const Node& n = e.node();
    switch (n.kind) {
      case NodeKind::constant:
        return e;
      case NodeKind::variable:
      case NodeKind::parameter:
        if (auto r = leaf_(n)) return *r;
        return e;
      case NodeKind::negate:
        return -(*this)(n.args[0]);
      case NodeKind::add:
        return (*this)(n.args[0]) + (*this)(n.args[1]);
      case NodeKind::sub:
        return (*this)(n.args[0]) - (*this)(n.args[1]);
      case NodeKind::mul:
        return (*this)(n.args[0]) * (*this)(n.args[1]);
      case NodeKind::div:
        return (*this)(n.args[0]) / (*this)(n.args[1]);
      case NodeKind::pow:
        return pow((*this)(n.args[0]), (*this)(n.args[1]));
      case NodeKind::call:
        return Expr::call(n.func, (*this)(n.args[0]));
      case NodeKind::primitive: {
        std::vector<Expr> args;
        args.reserve(n.args.size());
        for (const auto& a : n.args) args.push_back((*this)(a));
        return Expr::primitive(n.primitive, std::move(args));
      }
    }
    return e;
  }

  Leaf leaf_;
  std::unordered_map<const void*, Expr> memo_;
};

bool depends_impl(const Node& n, std::size_t slot,
                  std::unordered_map<const void*, bool>& memo) {
  if (n.is_constant) return false;
  if (n.kind == NodeKind::variable) return n.slot == slot;
  if (auto it = memo.find(&n); it != memo.end()) return it->second;
  bool r = false;
  for (const auto& a : n.args) {
    if (depends_impl(a.node(), slot, memo)) {
      r = true;
      break;
    }
  }
  memo.emplace(&n, r);
  return r;
}

}  // namespace

Expr differentiate(const Expr& e, std::size_t slot) {
  return Differentiator(slot)(e);
}

Expr substitute(const Expr& e, std::span<const Expr> replacement) {
  Rewriter rw([&](const Node& n) -> std::optional<Expr> {
    if (n.kind != NodeKind::variable) return std::nullopt;
    if (n.slot >= replacement.size()) {
      throw DimensionError("substitution has no replacement for slot " +
                           std::to_string(n.slot) + " ('" + n.name + "')");
    }
    return replacement[n.slot];
  });
  return rw(e);
}

Expr substitute_parameters(
    const Expr& e,
    const std::function<std::optional<Expr>(const std::string&)>& lookup) {
  Rewriter rw([&](const Node& n) -> std::optional<Expr> {
    if (n.kind != NodeKind::parameter) return std::nullopt;
    return lookup(n.name);
  });
  return rw(e);
}

bool depends_on(const Expr& e, std::size_t slot) {
  std::unordered_map<const void*, bool> memo;
  return depends_impl(e.node(), slot, memo);
}

}  // namespace mechforce
