#include "mechforce/lagrangian.hpp"

#include <cmath>
#include <sstream>

namespace mechforce {

namespace {

using Index = Eigen::Index;

std::string format_point(const Vector& x) {
  std::ostringstream os;
  os << "(";
  for (Index i = 0; i < x.size(); ++i) {
    if (i) os << ", ";
    os << x[i];
  }
  os << ")";
  return os.str();
}

void require_tangent(const Chart& c, const char* what) {
  if (c.fiber_kind() != FiberKind::velocities) {
    throw DimensionError(std::string(what) + " needs a tangent chart");
  }
}

void require_square(const std::vector<std::vector<ScalarField>>& m,
                    std::size_t n, const char* what) {
  if (m.size() != n) {
    throw DimensionError(std::string(what) + " has wrong number of rows");
  }
  for (const auto& row : m) {
    if (row.size() != n) {
      throw DimensionError(std::string(what) + " has wrong number of columns");
    }
  }
}

std::vector<Expr> base_variables(const Chart& chart) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < chart.dim(); ++i) {
    out.push_back(Expr::variable(i, chart.name(i)));
  }
  return out;
}

Matrix solve_checked(const Matrix& w, const Matrix& rhs, const Vector& x) {
  const double det = w.determinant();
  if (!std::isfinite(det)) {
    throw NonFiniteError("non-finite Hessian W at " + format_point(x));
  }
  if (!(std::fabs(det) > kRegularityThreshold)) {
    throw SingularError("Hessian W is singular at " + format_point(x));
  }
  return w.partialPivLu().solve(rhs);
}

struct LagrangianJet {
  Vector lq, lv;
  Matrix w, lvq, lqq;  // lvq(i, j) = d^2 L / dv^i dq^j
};

LagrangianJet lagrangian_jet(const ScalarField& l, const Vector& x) {
  const auto n = static_cast<Index>(l.chart().dim());
  const Jet j = l.jet(x, 2);
  if (!j.gradient.allFinite() || !j.hessian.allFinite()) {
    throw NonFiniteError("non-finite Lagrangian derivatives at " +
                         format_point(x));
  }
  LagrangianJet out;
  out.lq = j.gradient.head(n);
  out.lv = j.gradient.tail(n);
  out.w = j.hessian.bottomRightCorner(n, n);
  out.lvq = j.hessian.bottomLeftCorner(n, n);
  out.lqq = j.hessian.topLeftCorner(n, n);
  return out;
}

// ---------------------------------------------------------------------------
// Inverse of a matrix of expressions, entry by entry.

class InverseEntry final : public Primitive {
 public:
  InverseEntry(std::size_t n, std::size_t i, std::size_t j)
      : n_(n), i_(i), j_(j) {}

  std::string name() const override {
    return "inv" + std::to_string(i_ + 1) + std::to_string(j_ + 1);
  }
  std::size_t arity() const override { return n_ * n_; }
  int max_order() const override { return 2; }

  Local evaluate(std::span<const double> args, int order) const override {
    const auto n = static_cast<Index>(n_);
    Matrix g(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        g(a, b) = args[static_cast<std::size_t>(a * n + b)];
      }
    }
    const double det = g.determinant();
    if (!(std::fabs(det) > kRegularityThreshold) || !std::isfinite(det)) {
      throw SingularError("metric is singular");
    }
    const Matrix e = g.inverse();
    const auto i = static_cast<Index>(i_);
    const auto j = static_cast<Index>(j_);
    Local out;
    out.value = e(i, j);
    if (order >= 1) {
      out.gradient.resize(n * n);
      for (Index k = 0; k < n; ++k) {
        for (Index l = 0; l < n; ++l) {
          out.gradient[k * n + l] = -e(i, k) * e(l, j);
        }
      }
    }
    if (order >= 2) {
      out.hessian.resize(n * n, n * n);
      for (Index k = 0; k < n; ++k) {
        for (Index l = 0; l < n; ++l) {
          for (Index m = 0; m < n; ++m) {
            for (Index r = 0; r < n; ++r) {
              out.hessian(k * n + l, m * n + r) =
                  e(i, m) * e(r, k) * e(l, j) + e(i, k) * e(l, m) * e(r, j);
            }
          }
        }
      }
    }
    return out;
  }

  Expr partial(std::size_t k, std::span<const Expr> args) const override {
    const std::size_t a = k / n_;
    const std::size_t b = k % n_;
    std::vector<Expr> list(args.begin(), args.end());
    auto left = Expr::primitive(std::make_shared<InverseEntry>(n_, i_, a), list);
    auto right =
        Expr::primitive(std::make_shared<InverseEntry>(n_, b, j_), list);
    return -(left * right);
  }

 private:
  std::size_t n_, i_, j_;
};

std::vector<std::vector<Expr>> inverse_exprs(
    const std::vector<std::vector<Expr>>& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<Expr>> out(n, std::vector<Expr>(n));

  bool all_constant = true;
  bool diagonal = true;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!g[i][j].is_constant()) all_constant = false;
      if (i != j && !g[i][j].is_zero()) diagonal = false;
    }
  }

  if (all_constant) {
    const auto m = static_cast<Index>(n);
    Matrix gm(m, m);
    for (Index i = 0; i < m; ++i) {
      for (Index j = 0; j < m; ++j) {
        gm(i, j) = evaluate(g[static_cast<std::size_t>(i)]
                             [static_cast<std::size_t>(j)],
                            {});
      }
    }
    if (!(std::fabs(gm.determinant()) > kRegularityThreshold)) {
      throw SingularError("metric is singular");
    }
    const Matrix e = gm.inverse();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        out[i][j] = Expr::constant(
            e(static_cast<Index>(i), static_cast<Index>(j)));
      }
    }
    return out;
  }

  if (diagonal) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i][i] = Expr::constant(1.0) / g[i][i];
    }
    return out;
  }

  std::vector<Expr> args;
  for (const auto& row : g) {
    for (const auto& e : row) args.push_back(e);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out[i][j] =
          Expr::primitive(std::make_shared<InverseEntry>(n, i, j), args);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Newton-backed transport to T*Q. Arguments are (q, p).

class LegendreSolver {
 public:
  explicit LegendreSolver(ScalarField l) : l_(std::move(l)) {}

  std::size_t dim() const { return l_.chart().dim(); }
  const ScalarField& lagrangian() const { return l_; }

  Vector velocity(std::span<const double> args) const {
    const Vector y = Eigen::Map<const Vector>(
        args.data(), static_cast<Index>(args.size()));
    const auto n = static_cast<Index>(dim());
    return legendre_inverse(l_, y).tail(n);
  }

  Vector tangent_point(std::span<const double> args, const Vector& v) const {
    const auto n = static_cast<Index>(dim());
    Vector x(2 * n);
    for (Index i = 0; i < n; ++i) x[i] = args[static_cast<std::size_t>(i)];
    x.tail(n) = v;
    return x;
  }

 private:
  ScalarField l_;
};

using SolverPtr = std::shared_ptr<const LegendreSolver>;

// F(q, v(q, p)) for a field F on TQ. Exact first derivatives.
class PulledBack final : public Primitive {
 public:
  PulledBack(SolverPtr solver, ScalarField f, std::string name)
      : solver_(std::move(solver)), f_(std::move(f)), name_(std::move(name)) {}

  std::string name() const override { return name_; }
  std::size_t arity() const override { return 2 * solver_->dim(); }
  int max_order() const override { return 1; }

  Local evaluate(std::span<const double> args, int order) const override {
    const auto n = static_cast<Index>(solver_->dim());
    const Vector v = solver_->velocity(args);
    const Vector x = solver_->tangent_point(args, v);
    Local out;
    if (order == 0) {
      out.value = f_(x);
      return out;
    }
    const Jet fj = f_.jet(x, 1);
    const LagrangianJet lj = lagrangian_jet(solver_->lagrangian(), x);
    const Vector fv = fj.gradient.tail(n);
    // dv/dp = W^{-1}, dv/dq = -W^{-1} L_vq
    const Vector winv_fv = solve_checked(lj.w, fv, x);
    out.value = fj.value;
    out.gradient.resize(2 * n);
    out.gradient.head(n) =
        fj.gradient.head(n) - lj.lvq.transpose() * winv_fv;
    out.gradient.tail(n) = winv_fv;
    return out;
  }

 private:
  SolverPtr solver_;
  ScalarField f_;
  std::string name_;
};

// E_L(q, v(q, p)) with exact derivatives up to order 2.
class EnergyOnCotangent final : public Primitive {
 public:
  explicit EnergyOnCotangent(SolverPtr solver) : solver_(std::move(solver)) {}

  std::string name() const override { return "H"; }
  std::size_t arity() const override { return 2 * solver_->dim(); }
  int max_order() const override { return 2; }

  Local evaluate(std::span<const double> args, int order) const override {
    const auto n = static_cast<Index>(solver_->dim());
    const Vector v = solver_->velocity(args);
    const Vector x = solver_->tangent_point(args, v);
    const ScalarField& l = solver_->lagrangian();
    Vector p(n);
    for (Index i = 0; i < n; ++i) p[i] = args[static_cast<std::size_t>(n + i)];
    Local out;
    out.value = p.dot(v) - l(x);
    if (order == 0) return out;
    const LagrangianJet lj = lagrangian_jet(l, x);
    out.gradient.resize(2 * n);
    out.gradient.head(n) = -lj.lq;
    out.gradient.tail(n) = v;
    if (order >= 2) {
      const Matrix winv = solve_checked(lj.w, Matrix::Identity(n, n), x);
      const Matrix dvdq = -winv * lj.lvq;
      out.hessian.resize(2 * n, 2 * n);
      out.hessian.topLeftCorner(n, n) = -lj.lqq - lj.lvq.transpose() * dvdq;
      out.hessian.bottomRightCorner(n, n) = winv;
      out.hessian.bottomLeftCorner(n, n) = dvdq;
      out.hessian.topRightCorner(n, n) = dvdq.transpose();
    }
    return out;
  }

  Expr partial(std::size_t k, std::span<const Expr> args) const override {
    const std::size_t n = solver_->dim();
    const auto& chart = solver_->lagrangian().chart_ptr();
    std::vector<Expr> list(args.begin(), args.end());
    if (k < n) {
      auto dl = solver_->lagrangian().derivative(k);
      auto prim = std::make_shared<PulledBack>(
          solver_, dl, "dH/d" + chart->name(k) + "_neg");
      return -Expr::primitive(std::move(prim), std::move(list));
    }
    auto vk = coordinate_field(chart, k);
    auto prim = std::make_shared<PulledBack>(solver_, vk,
                                             "v_of_p_" + chart->name(k));
    return Expr::primitive(std::move(prim), std::move(list));
  }

 private:
  SolverPtr solver_;
};

std::vector<Expr> cotangent_variables(const Chart& p) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back(Expr::variable(i, p.name(i)));
  }
  return out;
}

ChartPtr resolve_momentum_chart(const Chart& tangent, ChartPtr momentum) {
  if (!momentum) return cotangent_chart(tangent);
  if (momentum->fiber_kind() != FiberKind::momenta ||
      momentum->base_names() != tangent.base_names()) {
    throw DimensionError("momentum chart does not match the tangent chart");
  }
  return momentum;
}

}  // namespace

// ---------------------------------------------------------------------------

ForcedLagrangianSystem::ForcedLagrangianSystem(ScalarField lagrangian,
                                               SemibasicForm force)
    : lagrangian_(std::move(lagrangian)), force_(std::move(force)) {
  require_tangent(lagrangian_.chart(), "Lagrangian");
  if (!force_.chart().same_coordinates(lagrangian_.chart())) {
    throw DimensionError("Lagrangian and force live on different charts");
  }
}

ForcedLagrangianSystem ForcedLagrangianSystem::unforced(
    ScalarField lagrangian) {
  auto zero = SemibasicForm::zero(lagrangian.chart_ptr());
  return ForcedLagrangianSystem(std::move(lagrangian), std::move(zero));
}

LinearRayleighTensor::LinearRayleighTensor(
    ChartPtr chart, std::vector<std::vector<ScalarField>> entries)
    : chart_(std::move(chart)), entries_(std::move(entries)) {
  require_tangent(*chart_, "Rayleigh tensor");
  require_square(entries_, chart_->dim(), "Rayleigh tensor");
}

LinearRayleighTensor LinearRayleighTensor::constant(ChartPtr chart,
                                                    const Matrix& r) {
  std::vector<std::vector<ScalarField>> e(static_cast<std::size_t>(r.rows()));
  for (Index i = 0; i < r.rows(); ++i) {
    for (Index j = 0; j < r.cols(); ++j) {
      e[static_cast<std::size_t>(i)].push_back(constant_field(chart, r(i, j)));
    }
  }
  return LinearRayleighTensor(std::move(chart), std::move(e));
}

Matrix LinearRayleighTensor::at(const Vector& x) const {
  const auto n = static_cast<Index>(dim());
  Matrix r(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      r(i, j) = entries_[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(j)](x);
    }
  }
  return r;
}

bool LinearRayleighTensor::symmetric_at(const std::vector<Vector>& points,
                                        double tol) const {
  for (const auto& x : points) {
    const Matrix r = at(x);
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  }
  return true;
}

RayleighPotential LinearRayleighTensor::potential() const {
  const std::size_t n = dim();
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      terms.push_back(entries_[i][j].expr() *
                      Expr::variable(n + i, chart_->name(n + i)) *
                      Expr::variable(n + j, chart_->name(n + j)));
    }
  }
  return {ScalarField(chart_, 0.5 * sum(terms))};
}

SemibasicForm LinearRayleighTensor::force() const {
  const std::size_t n = dim();
  std::vector<ScalarField> comps;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < n; ++i) {
      terms.push_back(entries_[i][j].expr() *
                      Expr::variable(n + i, chart_->name(n + i)));
    }
    comps.emplace_back(chart_, sum(terms));
  }
  return SemibasicForm(chart_, std::move(comps));
}

NaturalLagrangian::NaturalLagrangian(ChartPtr chart,
                                     std::vector<std::vector<ScalarField>> g,
                                     ScalarField potential)
    : chart_(std::move(chart)),
      g_(std::move(g)),
      potential_(std::move(potential)) {
  require_tangent(*chart_, "natural Lagrangian");
  require_square(g_, chart_->dim(), "metric");
  const std::size_t n = chart_->dim();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = n; k < 2 * n; ++k) {
        if (depends_on(g_[i][j].expr(), k)) {
          throw DimensionError("metric entries must depend on q only");
        }
      }
    }
  }
}

NaturalLagrangian NaturalLagrangian::constant_metric(ChartPtr chart,
                                                     const Matrix& g,
                                                     ScalarField potential) {
  std::vector<std::vector<ScalarField>> e(static_cast<std::size_t>(g.rows()));
  for (Index i = 0; i < g.rows(); ++i) {
    for (Index j = 0; j < g.cols(); ++j) {
      e[static_cast<std::size_t>(i)].push_back(constant_field(chart, g(i, j)));
    }
  }
  return NaturalLagrangian(std::move(chart), std::move(e),
                           std::move(potential));
}

Matrix NaturalLagrangian::metric(const Vector& x) const {
  const auto n = static_cast<Index>(dim());
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      g(i, j) = g_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)](x);
    }
  }
  return g;
}

ScalarField NaturalLagrangian::lagrangian() const {
  const std::size_t n = dim();
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      terms.push_back(g_[i][j].expr() *
                      Expr::variable(n + i, chart_->name(n + i)) *
                      Expr::variable(n + j, chart_->name(n + j)));
    }
  }
  return ScalarField(chart_, 0.5 * sum(terms) - potential_.expr());
}

std::vector<std::vector<Expr>> NaturalLagrangian::inverse_metric() const {
  std::vector<std::vector<Expr>> g(dim());
  for (std::size_t i = 0; i < dim(); ++i) {
    for (const auto& e : g_[i]) g[i].push_back(e.expr());
  }
  return inverse_exprs(g);
}

// ---------------------------------------------------------------------------

ScalarField energy(const ScalarField& lagrangian) {
  const Chart& c = lagrangian.chart();
  require_tangent(c, "energy");
  const std::size_t n = c.dim();
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i) {
    terms.push_back(Expr::variable(n + i, c.name(n + i)) *
                    differentiate(lagrangian.expr(), n + i));
  }
  return ScalarField(lagrangian.chart_ptr(),
                     sum(terms) - lagrangian.expr());
}

HessianW hessian_W(const ScalarField& lagrangian, const Vector& x) {
  require_tangent(lagrangian.chart(), "hessian_W");
  const auto n = static_cast<Index>(lagrangian.chart().dim());
  HessianW out;
  out.w = lagrangian.hessian(x).bottomRightCorner(n, n);
  if (!out.w.allFinite()) {
    throw NonFiniteError("non-finite Hessian W at " + format_point(x));
  }
  out.determinant = out.w.determinant();
  out.regular = std::fabs(out.determinant) > kRegularityThreshold;
  return out;
}

Vector forced_el_field(const ForcedLagrangianSystem& sys, const Vector& x) {
  const auto n = static_cast<Index>(sys.dim());
  const LagrangianJet lj = lagrangian_jet(sys.lagrangian(), x);
  const Vector v = x.tail(n);
  const Vector rhs = lj.lq - lj.lvq * v - sys.force().values(x);
  Vector out(2 * n);
  out.head(n) = v;
  out.tail(n) = solve_checked(lj.w, rhs, x);
  return out;
}

VectorField forced_el_field(const ForcedLagrangianSystem& sys) {
  return [sys](const Vector& x) { return forced_el_field(sys, x); };
}

SemibasicForm rayleigh_force(const RayleighPotential& potential) {
  const ScalarField& r = potential.function;
  require_tangent(r.chart(), "Rayleigh potential");
  const std::size_t n = r.chart().dim();
  std::vector<ScalarField> comps;
  for (std::size_t i = 0; i < n; ++i) comps.push_back(r.derivative(n + i));
  return SemibasicForm(r.chart_ptr(), std::move(comps));
}

double dissipative_bracket(const ScalarField& lagrangian, const ScalarField& f,
                           const ScalarField& g, const Vector& x) {
  require_tangent(lagrangian.chart(), "dissipative bracket");
  const auto n = static_cast<Index>(lagrangian.chart().dim());
  const Matrix w = lagrangian.hessian(x).bottomRightCorner(n, n);
  const Vector fv = f.gradient(x).tail(n);
  const Vector gv = g.gradient(x).tail(n);
  return gv.dot(solve_checked(w, fv, x).col(0));
}

double motion_constant_residual(const ScalarField& lagrangian,
                                const RayleighPotential& potential,
                                const ScalarField& f, const Vector& x) {
  const auto sys = ForcedLagrangianSystem::unforced(lagrangian);
  const double xi_l = f.gradient(x).dot(forced_el_field(sys, x));
  return xi_l - dissipative_bracket(lagrangian, f, potential.function, x);
}

Vector legendre(const ScalarField& lagrangian, const Vector& x) {
  require_tangent(lagrangian.chart(), "legendre");
  const auto n = static_cast<Index>(lagrangian.chart().dim());
  Vector out(2 * n);
  out.head(n) = x.head(n);
  out.tail(n) = lagrangian.gradient(x).tail(n);
  return out;
}

Vector legendre_inverse(const ScalarField& lagrangian, const Vector& y,
                        const LegendreOptions& options) {
  require_tangent(lagrangian.chart(), "legendre_inverse");
  const auto n = static_cast<Index>(lagrangian.chart().dim());
  if (y.size() != 2 * n) {
    throw DimensionError("legendre_inverse: point of size " +
                         std::to_string(y.size()));
  }
  const Vector p = y.tail(n);
  const double tol = options.tolerance * (1.0 + p.cwiseAbs().maxCoeff());
  Vector x(2 * n);
  x.head(n) = y.head(n);
  if (options.warm_start) {
    if (options.warm_start->size() != n) {
      throw DimensionError("legendre_inverse: warm start has wrong size");
    }
    x.tail(n) = *options.warm_start;
  } else {
    x.tail(n).setZero();
  }
  double residual = 0.0;
  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const Jet j = lagrangian.jet(x, 2);
    const Vector r = p - j.gradient.tail(n);
    if (!r.allFinite()) {
      throw NonFiniteError("legendre_inverse: non-finite residual at " +
                           format_point(x));
    }
    residual = r.cwiseAbs().maxCoeff();
    if (residual <= tol) return x;
    if (it == options.max_iterations) break;
    const Matrix w = j.hessian.bottomRightCorner(n, n);
    x.tail(n) += solve_checked(w, r, x).col(0);
  }
  throw ConvergenceError("legendre_inverse did not converge at " +
                             format_point(y),
                         residual);
}

Vector legendre_inverse(const NaturalLagrangian& lagrangian, const Vector& y) {
  const auto n = static_cast<Index>(lagrangian.dim());
  if (y.size() != 2 * n) {
    throw DimensionError("legendre_inverse: point of size " +
                         std::to_string(y.size()));
  }
  Vector x(2 * n);
  x.head(n) = y.head(n);
  x.tail(n).setZero();
  const Matrix g = lagrangian.metric(x);
  x.tail(n) = solve_checked(g, y.tail(n), x).col(0);
  return x;
}

ChartPtr cotangent_chart(const Chart& tangent_chart) {
  const auto& base = tangent_chart.base_names();
  std::vector<std::string> momenta;
  for (const auto& name : base) {
    std::string m;
    if (name.size() > 1 && name[0] == 'q') {
      m = "p" + name.substr(1);
    } else if (name == "q") {
      m = "p";
    } else {
      m = "p_" + name;
    }
    bool clash = false;
    for (const auto& b : base) clash = clash || b == m;
    if (clash) m = "p_" + name;
    momenta.push_back(std::move(m));
  }
  return make_chart(base, FiberKind::momenta, std::move(momenta),
                    tangent_chart.params());
}

ForcedHamiltonianSystem to_hamiltonian(const ForcedLagrangianSystem& sys,
                                       ChartPtr momentum_chart) {
  ChartPtr pc = resolve_momentum_chart(sys.chart(), std::move(momentum_chart));
  auto solver = std::make_shared<const LegendreSolver>(sys.lagrangian());
  const std::vector<Expr> args = cotangent_variables(*pc);
  ScalarField h(pc, Expr::primitive(
                        std::make_shared<EnergyOnCotangent>(solver), args));
  std::vector<ScalarField> beta;
  for (std::size_t i = 0; i < sys.dim(); ++i) {
    const auto& a = sys.force().components()[i];
    if (a.expr().is_zero()) {
      beta.push_back(constant_field(pc, 0.0));
      continue;
    }
    auto prim = std::make_shared<PulledBack>(solver, a,
                                             "beta" + std::to_string(i + 1));
    beta.emplace_back(pc, Expr::primitive(std::move(prim), args));
  }
  return ForcedHamiltonianSystem(std::move(h),
                                 SemibasicForm(pc, std::move(beta)));
}

ScalarField transport_to_cotangent(const NaturalLagrangian& lagrangian,
                                   const ScalarField& f,
                                   ChartPtr momentum_chart) {
  const std::size_t n = lagrangian.dim();
  const auto ginv = lagrangian.inverse_metric();
  const std::vector<Expr> vars = cotangent_variables(*momentum_chart);
  std::vector<Expr> repl(vars.begin(), vars.begin() + static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Expr> terms;
    for (std::size_t j = 0; j < n; ++j) {
      terms.push_back(ginv[i][j] * vars[n + j]);
    }
    repl.push_back(sum(terms));
  }
  return ScalarField(momentum_chart, substitute(f.expr(), repl));
}

ForcedHamiltonianSystem to_hamiltonian(const NaturalLagrangian& lagrangian,
                                       const SemibasicForm& force,
                                       ChartPtr momentum_chart) {
  if (!force.chart().same_coordinates(*lagrangian.chart_ptr())) {
    throw DimensionError("natural Lagrangian and force live on different charts");
  }
  ChartPtr pc =
      resolve_momentum_chart(*lagrangian.chart_ptr(), std::move(momentum_chart));
  const std::size_t n = lagrangian.dim();
  const auto ginv = lagrangian.inverse_metric();
  const std::vector<Expr> vars = cotangent_variables(*pc);
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      terms.push_back(ginv[i][j] * vars[n + i] * vars[n + j]);
    }
  }
  const Expr v = transport_to_cotangent(lagrangian, lagrangian.potential(), pc)
                     .expr();
  ScalarField h(pc, 0.5 * sum(terms) + v);
  std::vector<ScalarField> beta;
  for (const auto& a : force.components()) {
    beta.push_back(transport_to_cotangent(lagrangian, a, pc));
  }
  return ForcedHamiltonianSystem(std::move(h),
                                 SemibasicForm(pc, std::move(beta)));
}

HamiltonianRayleighData hamiltonian_rayleigh_data(
    const NaturalLagrangian& lagrangian, const LinearRayleighTensor& rayleigh,
    ChartPtr momentum_chart) {
  if (!rayleigh.chart_ptr()->same_coordinates(*lagrangian.chart_ptr())) {
    throw DimensionError("metric and Rayleigh tensor live on different charts");
  }
  ChartPtr pc =
      resolve_momentum_chart(*lagrangian.chart_ptr(), std::move(momentum_chart));
  const std::size_t n = lagrangian.dim();
  const auto ginv = lagrangian.inverse_metric();
  const auto& r = rayleigh.entries();
  const std::vector<Expr> vars = cotangent_variables(*pc);
  std::vector<Expr> base(vars.begin(), vars.begin() + static_cast<long>(n));
  for (std::size_t i = 0; i < n; ++i) base.push_back(Expr());
  auto on_base = [&](const Expr& e) { return substitute(e, base); };

  // R^i_j = g^{ik} R_kj
  std::vector<std::vector<Expr>> mixed(n, std::vector<Expr>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      for (std::size_t k = 0; k < n; ++k) {
        terms.push_back(ginv[i][k] * on_base(r[k][j].expr()));
      }
      mixed[i][j] = sum(terms);
    }
  }
  // R^{ij} = R^i_l g^{jl}
  std::vector<Expr> pot;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<Expr> terms;
      for (std::size_t l = 0; l < n; ++l) {
        terms.push_back(mixed[i][l] * ginv[j][l]);
      }
      pot.push_back(sum(terms) * vars[n + i] * vars[n + j]);
    }
  }
  std::vector<std::vector<ScalarField>> entries(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) entries[i].emplace_back(pc, mixed[i][j]);
  }
  LinearHamiltonianRayleigh tensor(pc, std::move(entries));
  SemibasicForm force = tensor.force();
  return {ScalarField(pc, 0.5 * sum(pot)), std::move(force),
          std::move(tensor)};
}

double rayleigh_consistency_defect(const HamiltonianRayleighData& data,
                                   const NaturalLagrangian& lagrangian,
                                   const std::vector<Vector>& points) {
  const auto n = static_cast<Index>(lagrangian.dim());
  double worst = 0.0;
  for (const auto& y : points) {
    Vector x(2 * n);
    x.head(n) = y.head(n);
    x.tail(n).setZero();
    const Matrix g = lagrangian.metric(x);
    const Vector dp = data.potential.gradient(y).tail(n);
    const Vector defect = data.force.values(y) - g * dp;
    worst = std::max(worst, defect.cwiseAbs().maxCoeff());
  }
  return worst;
}

std::optional<NaturalLagrangian> as_natural(const ScalarField& lagrangian,
                                            const SampleDomain& base_domain,
                                            std::size_t samples,
                                            double tolerance,
                                            double velocity_bound) {
  const Chart& c = lagrangian.chart();
  require_tangent(c, "as_natural");
  const std::size_t n = c.dim();
  if (base_domain.dim() != n) {
    throw DimensionError("as_natural: domain dimension differs from chart");
  }
  std::vector<Expr> at_rest = base_variables(c);
  for (std::size_t i = 0; i < n; ++i) at_rest.push_back(Expr::constant(0.0));

  std::vector<std::vector<ScalarField>> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Expr li = differentiate(lagrangian.expr(), n + i);
    for (std::size_t j = 0; j < n; ++j) {
      const Expr lij = differentiate(li, n + j);
      g[i].emplace_back(lagrangian.chart_ptr(), substitute(lij, at_rest));
    }
  }
  ScalarField v(lagrangian.chart_ptr(),
                -substitute(lagrangian.expr(), at_rest));
  NaturalLagrangian candidate(lagrangian.chart_ptr(), std::move(g),
                              std::move(v));

  const auto domain = base_domain.product(
      SampleDomain::cube(n, -velocity_bound, velocity_bound));
  const ScalarField rebuilt = candidate.lagrangian();
  try {
    for (const auto& x : quasi_random_points(domain, samples)) {
      const double a = lagrangian(x);
      const double b = rebuilt(x);
      if (!(std::fabs(a - b) <= tolerance * (1.0 + std::fabs(a)))) {
        return std::nullopt;
      }
    }
  } catch (const NonFiniteError&) {
    return std::nullopt;
  }
  return candidate;
}

Section legendre_section(const ScalarField& lagrangian, const Section& x,
                         ChartPtr momentum_chart) {
  const Chart& c = lagrangian.chart();
  require_tangent(c, "legendre_section");
  if (x.target() != SectionTarget::vectors) {
    throw DimensionError("legendre_section expects a vector field");
  }
  if (x.chart().base_names() != c.base_names()) {
    throw DimensionError("legendre_section: base coordinates differ");
  }
  ChartPtr pc = resolve_momentum_chart(c, std::move(momentum_chart));
  const std::size_t n = c.dim();
  const std::vector<Expr> vars = cotangent_variables(*pc);
  std::vector<Expr> repl(vars.begin(), vars.begin() + static_cast<long>(n));
  // Components of X reference base slots only, which coincide on every chart
  // over the same base.
  for (const auto& comp : x.components()) repl.push_back(comp.expr());
  std::vector<ScalarField> comps;
  for (std::size_t i = 0; i < n; ++i) {
    comps.emplace_back(
        pc, substitute(differentiate(lagrangian.expr(), n + i), repl));
  }
  return Section(pc, SectionTarget::covectors, std::move(comps));
}

}  // namespace mechforce
