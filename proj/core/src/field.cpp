#include <cmath>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

namespace {

std::span<const double> as_span(const Vector& x) {
  return {x.data(), static_cast<std::size_t>(x.size())};
}

Vector to_vector(std::span<const double> x) {
  return Eigen::Map<const Vector>(x.data(), static_cast<Eigen::Index>(x.size()));
}

// Callable-backed leaf. Its arguments are the chart coordinates in order.
class CallablePrimitive final : public Primitive {
 public:
  CallablePrimitive(EvalFn eval, GradFn grad, HessFn hess, std::size_t arity,
                    std::string name)
      : eval_(std::move(eval)),
        grad_(std::move(grad)),
        hess_(std::move(hess)),
        arity_(arity),
        name_(std::move(name)) {}

  std::string name() const override { return name_; }
  std::size_t arity() const override { return arity_; }
  int max_order() const override { return 2; }

  Local evaluate(std::span<const double> args, int order) const override {
    const Vector x = to_vector(args);
    Local out;
    out.value = eval_(x);
    if (order >= 1) {
      out.gradient = grad_(x);
      if (out.gradient.size() != static_cast<Eigen::Index>(arity_)) {
        throw DimensionError("callable gradient has wrong size");
      }
    }
    if (order >= 2) {
      out.hessian = hess_(x);
      if (out.hessian.rows() != static_cast<Eigen::Index>(arity_) ||
          out.hessian.cols() != static_cast<Eigen::Index>(arity_)) {
        throw DimensionError("callable hessian has wrong shape");
      }
    }
    return out;
  }

  Expr partial(std::size_t k, std::span<const Expr> args) const override;

 private:
  EvalFn eval_;
  GradFn grad_;
  HessFn hess_;
  std::size_t arity_;
  std::string name_;
};

// d/d(arg k) of a callable leaf: value from the gradient, first derivatives
// from the hessian row.
class CallablePartial final : public Primitive {
 public:
  CallablePartial(GradFn grad, HessFn hess, std::size_t k, std::size_t arity,
                  std::string name)
      : grad_(std::move(grad)),
        hess_(std::move(hess)),
        k_(k),
        arity_(arity),
        name_(std::move(name)) {}

  std::string name() const override {
    return "d" + std::to_string(k_) + "_" + name_;
  }
  std::size_t arity() const override { return arity_; }
  int max_order() const override { return 1; }

  Local evaluate(std::span<const double> args, int order) const override {
    const Vector x = to_vector(args);
    Local out;
    out.value = grad_(x)[static_cast<Eigen::Index>(k_)];
    if (order >= 1) {
      out.gradient = hess_(x).row(static_cast<Eigen::Index>(k_)).transpose();
    }
    return out;
  }

 private:
  GradFn grad_;
  HessFn hess_;
  std::size_t k_;
  std::size_t arity_;
  std::string name_;
};

Expr CallablePrimitive::partial(std::size_t k,
                                std::span<const Expr> args) const {
  auto p = std::make_shared<CallablePartial>(grad_, hess_, k, arity_, name_);
  return Expr::primitive(std::move(p), {args.begin(), args.end()});
}

}  // namespace

// ---------------------------------------------------------------------------

ScalarField::ScalarField(ChartPtr chart, Expr expr)
    : chart_(std::move(chart)), expr_(std::move(expr)) {
  if (!chart_) throw DimensionError("scalar field without chart");
}

void ScalarField::check_point(std::size_t n) const {
  if (n != chart_->size()) {
    throw DimensionError("point of size " + std::to_string(n) +
                         " on chart with " + std::to_string(chart_->size()) +
                         " coordinates");
  }
}

double ScalarField::operator()(const Vector& x) const {
  return value(as_span(x));
}

double ScalarField::value(std::span<const double> x) const {
  check_point(x.size());
  return evaluate(expr_, x);
}

Vector ScalarField::gradient(const Vector& x) const {
  return jet(x, 1).gradient;
}

Matrix ScalarField::hessian(const Vector& x) const {
  return jet(x, 2).hessian;
}

Jet ScalarField::jet(const Vector& x, int order) const {
  check_point(static_cast<std::size_t>(x.size()));
  return evaluate_jet(expr_, as_span(x), order);
}

ScalarField ScalarField::derivative(std::size_t slot) const {
  if (slot >= chart_->size()) throw DimensionError("slot outside chart");
  return ScalarField(chart_, differentiate(expr_, slot));
}

ScalarField ScalarField::derivative(std::string_view name) const {
  const auto slot = chart_->slot(name);
  if (!slot) {
    throw DimensionError("no coordinate '" + std::string(name) + "' in chart");
  }
  return derivative(*slot);
}

ScalarField constant_field(ChartPtr chart, double v) {
  return ScalarField(std::move(chart), Expr::constant(v));
}

ScalarField coordinate_field(ChartPtr chart, std::size_t slot) {
  const std::string name = chart->name(slot);
  return ScalarField(std::move(chart), Expr::variable(slot, name));
}

ScalarField parse_field(std::string_view source, ChartPtr chart) {
  Expr e = parse_expr(source, *chart);
  return ScalarField(std::move(chart), std::move(e));
}

ScalarField field_from_callable(EvalFn eval, GradFn grad, HessFn hess,
                                ChartPtr chart, std::string name) {
  if (!eval || !grad || !hess) {
    throw DimensionError("field_from_callable needs eval, grad and hess");
  }
  const std::size_t n = chart->size();
  std::vector<Expr> args;
  args.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    args.push_back(Expr::variable(i, chart->name(i)));
  }
  auto prim = std::make_shared<CallablePrimitive>(
      std::move(eval), std::move(grad), std::move(hess), n, std::move(name));
  return ScalarField(std::move(chart),
                     Expr::primitive(std::move(prim), std::move(args)));
}

// ---------------------------------------------------------------------------
// Finite differences

namespace {

double checked(double v) {
  if (!std::isfinite(v)) {
    throw NonFiniteError("non-finite evaluation in finite-difference stencil");
  }
  return v;
}

}  // namespace

Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::fabs(x[i]));
    xp[i] = x[i] + step;
    const double fp = checked(f(xp));
    xp[i] = x[i] - step;
    const double fm = checked(f(xp));
    xp[i] = x[i];
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

Vector fd_gradient(const ScalarField& f, const Vector& x, double h) {
  return fd_gradient([&](const Vector& y) { return f(y); }, x, h);
}

Matrix fd_hessian(const std::function<double(const Vector&)>& f,
                  const Vector& x, double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  const Eigen::Index n = x.size();
  Matrix H(n, n);
  Vector y = x;
  const double f0 = checked(f(x));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = h * (1.0 + std::fabs(x[i]));
    y[i] = x[i] + hi;
    const double fp = checked(f(y));
    y[i] = x[i] - hi;
    const double fm = checked(f(y));
    y[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double hj = h * (1.0 + std::fabs(x[j]));
      auto at = [&](double si, double sj) {
        y[i] = x[i] + si * hi;
        y[j] = x[j] + sj * hj;
        const double v = checked(f(y));
        y[i] = x[i];
        y[j] = x[j];
        return v;
      };
      const double v =
          (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

Matrix fd_hessian(const ScalarField& f, const Vector& x, double h) {
  return fd_hessian([&](const Vector& y) { return f(y); }, x, h);
}

Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                   const Vector& x, double h) {
  if (!(h > 0.0)) throw Error("finite-difference step must be positive");
  const Vector f0 = f(x);
  Matrix J(f0.size(), x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double step = h * (1.0 + std::fabs(x[i]));
    y[i] = x[i] + step;
    const Vector fp = f(y);
    y[i] = x[i] - step;
    const Vector fm = f(y);
    y[i] = x[i];
    if (!fp.allFinite() || !fm.allFinite()) {
      throw NonFiniteError("non-finite evaluation in Jacobian stencil");
    }
    J.col(i) = (fp - fm) / (2.0 * step);
  }
  return J;
}

}  // namespace mechforce
