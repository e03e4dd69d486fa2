#include <cmath>
#include <string>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

namespace {

std::shared_ptr<Node> new_node(NodeKind kind) {
  auto n = std::make_shared<Node>();
  n->kind = kind;
  return n;
}

bool all_constant(const std::vector<Expr>& args) {
  for (const auto& a : args) {
    if (!a.is_constant()) return false;
  }
  return true;
}

std::optional<double> as_integer(double c) {
  if (std::isfinite(c) && std::floor(c) == c && std::fabs(c) < 1e9) return c;
  return std::nullopt;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw NonFiniteError(std::string("non-finite value in ") + what);
  }
}

// ---- value-only evaluation -------------------------------------------------

double pow_value(double base, double exponent, bool constant_exponent) {
  if (constant_exponent && as_integer(exponent)) {
    return std::pow(base, exponent);
  }
  if (!(base > 0.0)) {
    throw NonFiniteError("'^' with non-integer or variable exponent needs a "
                         "positive base, got " + std::to_string(base));
  }
  return std::pow(base, exponent);
}

double call_value(Func f, double u) {
  switch (f) {
    case Func::sin:
      return std::sin(u);
    case Func::cos:
      return std::cos(u);
    case Func::tan:
      return std::tan(u);
    case Func::exp:
      return std::exp(u);
    case Func::log:
      if (!(u > 0.0)) {
        throw NonFiniteError("log of non-positive value " + std::to_string(u));
      }
      return std::log(u);
    case Func::sqrt:
      if (u < 0.0) {
        throw NonFiniteError("sqrt of negative value " + std::to_string(u));
      }
      return std::sqrt(u);
    case Func::abs:
      return std::fabs(u);
    case Func::sign:
      return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  }
  return 0.0;
}

double eval_value(const Node& n, std::span<const double> x) {
  double r = 0.0;
  switch (n.kind) {
    case NodeKind::constant:
    case NodeKind::parameter:
      return n.value;
    case NodeKind::variable:
      if (n.slot >= x.size()) {
        throw DimensionError("variable slot " + std::to_string(n.slot) +
                             " outside point of size " +
                             std::to_string(x.size()));
      }
      return x[n.slot];
    case NodeKind::negate:
      return -eval_value(n.args[0].node(), x);
    case NodeKind::add:
      r = eval_value(n.args[0].node(), x) + eval_value(n.args[1].node(), x);
      break;
    case NodeKind::sub:
      r = eval_value(n.args[0].node(), x) - eval_value(n.args[1].node(), x);
      break;
    case NodeKind::mul:
      r = eval_value(n.args[0].node(), x) * eval_value(n.args[1].node(), x);
      break;
    case NodeKind::div:
      r = eval_value(n.args[0].node(), x) / eval_value(n.args[1].node(), x);
      break;
    case NodeKind::pow:
      r = pow_value(eval_value(n.args[0].node(), x),
                    eval_value(n.args[1].node(), x), n.args[1].is_constant());
      break;
    case NodeKind::call:
      r = call_value(n.func, eval_value(n.args[0].node(), x));
      break;
    case NodeKind::primitive: {
      std::vector<double> a(n.args.size());
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = eval_value(n.args[i].node(), x);
      }
      r = n.primitive->evaluate(a, 0).value;
      break;
    }
  }
  require_finite(r, "expression");
  return r;
}

// ---- jet evaluation -------------------------------------------------------

struct JetContext {
  std::span<const double> x;
  int order;
  Eigen::Index dim;
};

Jet constant_jet(double v, const JetContext& c) {
  Jet j;
  j.value = v;
  if (c.order >= 1) j.gradient = Vector::Zero(c.dim);
  if (c.order >= 2) j.hessian = Matrix::Zero(c.dim, c.dim);
  return j;
}

// u -> f(u) with f1 = f'(u), f2 = f''(u).
Jet apply_unary(const Jet& u, double f, double f1, double f2,
                const JetContext& c) {
  Jet j;
  j.value = f;
  if (c.order >= 1) j.gradient = f1 * u.gradient;
  if (c.order >= 2) {
    j.hessian = f1 * u.hessian;
    if (f2 != 0.0) j.hessian += f2 * (u.gradient * u.gradient.transpose());
  }
  return j;
}

Jet jet_mul(const Jet& a, const Jet& b, const JetContext& c) {
  Jet j;
  j.value = a.value * b.value;
  if (c.order >= 1) j.gradient = b.value * a.gradient + a.value * b.gradient;
  if (c.order >= 2) {
    j.hessian = b.value * a.hessian + a.value * b.hessian;
    j.hessian += a.gradient * b.gradient.transpose();
    j.hessian += b.gradient * a.gradient.transpose();
  }
  return j;
}

Jet jet_call(Func f, const Jet& u, const JetContext& c) {
  const double v = u.value;
  const double fv = call_value(f, v);
  if (c.order == 0) return apply_unary(u, fv, 0, 0, c);
  switch (f) {
    case Func::sin:
      return apply_unary(u, fv, std::cos(v), -fv, c);
    case Func::cos:
      return apply_unary(u, fv, -std::sin(v), -fv, c);
    case Func::tan: {
      const double s = 1.0 + fv * fv;
      return apply_unary(u, fv, s, 2.0 * fv * s, c);
    }
    case Func::exp:
      return apply_unary(u, fv, fv, fv, c);
    case Func::log:
      return apply_unary(u, fv, 1.0 / v, -1.0 / (v * v), c);
    case Func::sqrt:
      if (!(v > 0.0)) {
        throw NonFiniteError("derivative of sqrt at non-positive value");
      }
      return apply_unary(u, fv, 0.5 / fv, -0.25 / (v * fv), c);
    case Func::abs:
      return apply_unary(u, fv, call_value(Func::sign, v), 0.0, c);
    case Func::sign:
      return apply_unary(u, fv, 0.0, 0.0, c);
  }
  return apply_unary(u, fv, 0, 0, c);
}

Jet eval_jet(const Node& n, const JetContext& c);

Jet jet_pow(const Node& n, const JetContext& c) {
  const Jet base = eval_jet(n.args[0].node(), c);
  if (n.args[1].is_constant()) {
    const double e = eval_value(n.args[1].node(), {});
    const double v = pow_value(base.value, e, true);
    if (c.order == 0) return apply_unary(base, v, 0, 0, c);
    const double b = base.value;
    if (as_integer(e)) {
      const double f1 = e == 0.0 ? 0.0 : e * std::pow(b, e - 1.0);
      const double f2 =
          (e == 0.0 || e == 1.0) ? 0.0 : e * (e - 1.0) * std::pow(b, e - 2.0);
      return apply_unary(base, v, f1, f2, c);
    }
    return apply_unary(base, v, e * std::pow(b, e - 1.0),
                       e * (e - 1.0) * std::pow(b, e - 2.0), c);
  }
  // u^w = exp(w log u), u > 0
  const Jet w = eval_jet(n.args[1].node(), c);
  const double v = pow_value(base.value, w.value, false);
  const Jet logu =
      apply_unary(base, std::log(base.value), 1.0 / base.value,
                  -1.0 / (base.value * base.value), c);
  const Jet prod = jet_mul(w, logu, c);
  return apply_unary(prod, v, v, v, c);
}

Jet jet_primitive(const Node& n, const JetContext& c) {
  const auto& prim = *n.primitive;
  if (c.order > prim.max_order()) {
    throw Error("primitive '" + prim.name() + "' provides derivatives up to "
                "order " + std::to_string(prim.max_order()) + ", " +
                std::to_string(c.order) + " requested");
  }
  std::vector<Jet> args;
  args.reserve(n.args.size());
  std::vector<double> values(n.args.size());
  for (std::size_t i = 0; i < n.args.size(); ++i) {
    args.push_back(eval_jet(n.args[i].node(), c));
    values[i] = args.back().value;
  }
  const Primitive::Local local = prim.evaluate(values, c.order);
  Jet j = constant_jet(local.value, c);
  if (c.order >= 1) {
    for (std::size_t k = 0; k < args.size(); ++k) {
      j.gradient += local.gradient[static_cast<Eigen::Index>(k)] *
                    args[k].gradient;
    }
  }
  if (c.order >= 2) {
    for (std::size_t k = 0; k < args.size(); ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      j.hessian += local.gradient[ki] * args[k].hessian;
      for (std::size_t l = 0; l < args.size(); ++l) {
        const double h = local.hessian(ki, static_cast<Eigen::Index>(l));
        if (h != 0.0) {
          j.hessian += h * (args[k].gradient * args[l].gradient.transpose());
        }
      }
    }
    const Matrix sym = 0.5 * (j.hessian + j.hessian.transpose());
    j.hessian = sym;
  }
  return j;
}

Jet eval_jet(const Node& n, const JetContext& c) {
  switch (n.kind) {
    case NodeKind::constant:
    case NodeKind::parameter:
      return constant_jet(n.value, c);
    case NodeKind::variable: {
      if (n.slot >= c.x.size()) {
        throw DimensionError("variable slot " + std::to_string(n.slot) +
                             " outside point of size " +
                             std::to_string(c.x.size()));
      }
      Jet j = constant_jet(c.x[n.slot], c);
      if (c.order >= 1) j.gradient[static_cast<Eigen::Index>(n.slot)] = 1.0;
      return j;
    }
    case NodeKind::negate: {
      Jet j = eval_jet(n.args[0].node(), c);
      j.value = -j.value;
      if (c.order >= 1) j.gradient = -j.gradient;
      if (c.order >= 2) j.hessian = -j.hessian;
      return j;
    }
    case NodeKind::add:
    case NodeKind::sub: {
      Jet a = eval_jet(n.args[0].node(), c);
      const Jet b = eval_jet(n.args[1].node(), c);
      const double s = n.kind == NodeKind::add ? 1.0 : -1.0;
      a.value = n.kind == NodeKind::add ? a.value + b.value : a.value - b.value;
      require_finite(a.value, "sum");
      if (c.order >= 1) a.gradient += s * b.gradient;
      if (c.order >= 2) a.hessian += s * b.hessian;
      return a;
    }
    case NodeKind::mul: {
      Jet j = jet_mul(eval_jet(n.args[0].node(), c),
                      eval_jet(n.args[1].node(), c), c);
      require_finite(j.value, "product");
      return j;
    }
    case NodeKind::div: {
      const Jet a = eval_jet(n.args[0].node(), c);
      const Jet b = eval_jet(n.args[1].node(), c);
      const double bv = b.value;
      if (bv == 0.0) throw NonFiniteError("division by zero");
      const Jet inv = apply_unary(b, 1.0 / bv, -1.0 / (bv * bv),
                                  2.0 / (bv * bv * bv), c);
      Jet j = jet_mul(a, inv, c);
      j.value = a.value / bv;
      require_finite(j.value, "quotient");
      return j;
    }
    case NodeKind::pow: {
      Jet j = jet_pow(n, c);
      require_finite(j.value, "power");
      return j;
    }
    case NodeKind::call: {
      Jet j = jet_call(n.func, eval_jet(n.args[0].node(), c), c);
      require_finite(j.value, "function call");
      return j;
    }
    case NodeKind::primitive:
      return jet_primitive(n, c);
  }
  return constant_jet(0.0, c);
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(Func f) {
  switch (f) {
    case Func::sin:
      return "sin";
    case Func::cos:
      return "cos";
    case Func::tan:
      return "tan";
    case Func::exp:
      return "exp";
    case Func::log:
      return "log";
    case Func::sqrt:
      return "sqrt";
    case Func::abs:
      return "abs";
    case Func::sign:
      return "sign";
  }
  return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
  // sign is internal: produced by differentiating abs, not parseable.
  static constexpr std::pair<std::string_view, Func> table[] = {
      {"sin", Func::sin}, {"cos", Func::cos},   {"tan", Func::tan},
      {"exp", Func::exp}, {"log", Func::log},   {"sqrt", Func::sqrt},
      {"abs", Func::abs},
  };
  for (const auto& [n, f] : table) {
    if (n == name) return f;
  }
  return std::nullopt;
}

Expr::Expr() : Expr(constant(0.0)) {}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

std::optional<double> Expr::constant_value() const {
  if (node_->kind == NodeKind::constant) return node_->value;
  return std::nullopt;
}

bool Expr::is_zero() const {
  const auto v = constant_value();
  return v && *v == 0.0;
}

bool Expr::is_one() const {
  const auto v = constant_value();
  return v && *v == 1.0;
}

Expr Expr::constant(double v) {
  auto n = new_node(NodeKind::constant);
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::variable(std::size_t slot, std::string name) {
  auto n = new_node(NodeKind::variable);
  n->slot = slot;
  n->name = std::move(name);
  n->is_constant = false;
  return Expr(std::move(n));
}

Expr Expr::parameter(std::string name, double v) {
  auto n = new_node(NodeKind::parameter);
  n->name = std::move(name);
  n->value = v;
  return Expr(std::move(n));
}

Expr Expr::call(Func f, Expr arg) {
  auto n = new_node(NodeKind::call);
  n->func = f;
  n->is_constant = arg.is_constant();
  n->args.push_back(std::move(arg));
  return Expr(std::move(n));
}

Expr Expr::primitive(std::shared_ptr<const Primitive> prim,
                     std::vector<Expr> args) {
  if (args.size() != prim->arity()) {
    throw DimensionError("primitive '" + prim->name() + "' expects " +
                         std::to_string(prim->arity()) + " arguments, got " +
                         std::to_string(args.size()));
  }
  auto n = new_node(NodeKind::primitive);
  n->primitive = std::move(prim);
  n->args = std::move(args);
  n->is_constant = false;
  return Expr(std::move(n));
}

Expr Expr::raw_unary(NodeKind kind, Expr a) {
  auto n = new_node(kind);
  n->is_constant = a.is_constant();
  n->args.push_back(std::move(a));
  return Expr(std::move(n));
}

Expr Expr::raw_binary(NodeKind kind, Expr a, Expr b) {
  auto n = new_node(kind);
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  n->is_constant = all_constant(n->args);
  return Expr(std::move(n));
}

Expr Primitive::partial(std::size_t, std::span<const Expr>) const {
  throw Error("primitive '" + name() + "' cannot be differentiated further");
}

// ---- folding builders ------------------------------------------------------

Expr operator-(const Expr& a) {
  if (auto v = a.constant_value()) return Expr::constant(*v == 0.0 ? 0.0 : -*v);
  if (a.kind() == NodeKind::negate) return a.node().args[0];
  return Expr::raw_unary(NodeKind::negate, a);
}

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.constant_value() && b.constant_value()) {
    return Expr::constant(*a.constant_value() + *b.constant_value());
  }
  if (b.kind() == NodeKind::negate) {
    return Expr::raw_binary(NodeKind::sub, a, b.node().args[0]);
  }
  if (a.kind() == NodeKind::negate) {
    return Expr::raw_binary(NodeKind::sub, b, a.node().args[0]);
  }
  return Expr::raw_binary(NodeKind::add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (b.is_zero()) return a;
  if (a.is_zero()) return -b;
  if (a.constant_value() && b.constant_value()) {
    return Expr::constant(*a.constant_value() - *b.constant_value());
  }
  if (b.kind() == NodeKind::negate) return a + b.node().args[0];
  return Expr::raw_binary(NodeKind::sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.is_zero() || b.is_zero()) return Expr::constant(0.0);
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  if (a.constant_value() && b.constant_value()) {
    return Expr::constant(*a.constant_value() * *b.constant_value());
  }
  if (auto v = a.constant_value(); v && *v == -1.0) return -b;
  if (auto v = b.constant_value(); v && *v == -1.0) return -a;
  if (a.kind() == NodeKind::negate) return -(a.node().args[0] * b);
  if (b.kind() == NodeKind::negate) return -(a * b.node().args[0]);
  return Expr::raw_binary(NodeKind::mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_zero()) throw NonFiniteError("division by constant zero");
  if (a.is_zero()) return Expr::constant(0.0);
  if (b.is_one()) return a;
  if (a.constant_value() && b.constant_value()) {
    return Expr::constant(*a.constant_value() / *b.constant_value());
  }
  if (a.kind() == NodeKind::negate) return -(a.node().args[0] / b);
  if (b.kind() == NodeKind::negate) return -(a / b.node().args[0]);
  return Expr::raw_binary(NodeKind::div, a, b);
}

Expr pow(const Expr& base, const Expr& exponent) {
  if (exponent.is_zero()) return Expr::constant(1.0);
  if (exponent.is_one()) return base;
  if (base.constant_value() && exponent.constant_value()) {
    return Expr::constant(
        pow_value(*base.constant_value(), *exponent.constant_value(), true));
  }
  return Expr::raw_binary(NodeKind::pow, base, exponent);
}

Expr operator*(double a, const Expr& b) { return Expr::constant(a) * b; }

Expr operator+(const Expr& a, double b) { return a + Expr::constant(b); }

Expr sum(const std::vector<Expr>& terms) {
  Expr acc = Expr::constant(0.0);
  for (const auto& t : terms) acc = acc + t;
  return acc;
}

// ---- evaluation entry points ------------------------------------------------

double evaluate(const Expr& e, std::span<const double> x) {
  return eval_value(e.node(), x);
}

Jet evaluate_jet(const Expr& e, std::span<const double> x, int order) {
  if (order < 0 || order > 2) throw Error("jet order must be 0, 1 or 2");
  if (order == 0) {
    Jet j;
    j.value = eval_value(e.node(), x);
    return j;
  }
  const JetContext ctx{x, order, static_cast<Eigen::Index>(x.size())};
  Jet j = eval_jet(e.node(), ctx);
  require_finite(j.value, "expression");
  if (!j.gradient.allFinite()) throw NonFiniteError("non-finite gradient");
  if (order >= 2 && !j.hessian.allFinite()) {
    throw NonFiniteError("non-finite hessian");
  }
  return j;
}

}  // namespace mechforce
