#include "mechforce/reduction.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mechforce {

namespace {

using Index = Eigen::Index;

double sup(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double sup(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

// sum_j c_j e_j, skipping zero coefficients.
Expr combination(const Vector& c, const std::vector<Expr>& e) {
  std::vector<Expr> terms;
  for (Index j = 0; j < c.size(); ++j) {
    if (c[j] == 0.0) continue;
    const auto& ej = e[static_cast<std::size_t>(j)];
    if (c[j] == 1.0) {
      terms.push_back(ej);
    } else if (c[j] == -1.0) {
      terms.push_back(-ej);
    } else {
      terms.push_back(c[j] * ej);
    }
  }
  return sum(terms);
}

std::vector<Expr> chart_variables(const Chart& c) {
  std::vector<Expr> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    out.push_back(Expr::variable(i, c.name(i)));
  }
  return out;
}

Vector pad(const Chart& c, const Vector& q) {
  if (q.size() != static_cast<Index>(c.dim())) {
    throw DimensionError("configuration point has " + std::to_string(q.size()) +
                         " coordinates, expected " + std::to_string(c.dim()));
  }
  Vector x = Vector::Zero(static_cast<Index>(c.size()));
  x.head(q.size()) = q;
  return x;
}

// Parameters the target chart does not know are frozen to their values.
Expr freeze_parameters_except(const Expr& e, const Chart& target,
                              const std::vector<std::pair<std::string, double>>&
                                  frozen) {
  return substitute_parameters(e, [&](const std::string& name)
                                      -> std::optional<Expr> {
    if (target.param(name)) return std::nullopt;
    for (const auto& [n, v] : frozen) {
      if (n == name) return Expr::constant(v);
    }
    return std::nullopt;
  });
}

std::vector<std::string> mu_names(std::size_t k) {
  if (k == 1) return {"mu"};
  return numbered_names("mu", k);
}

std::size_t rank_of(const Matrix& m) {
  if (m.rows() == 0) return 0;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-12);
  return static_cast<std::size_t>(lu.rank());
}

}  // namespace

// ---------------------------------------------------------------------------

Vector complete_lift(const Section& x, const Vector& y) {
  const auto n = static_cast<Index>(x.dim());
  if (y.size() != 2 * n) {
    throw DimensionError("complete_lift: phase point has wrong size");
  }
  const Vector q = y.head(n);
  const Matrix j = x.jacobian(q);  // j(k, i) = dX^k / dq^i
  Vector out(2 * n);
  out.head(n) = x.values(q);
  out.tail(n) = -j.transpose() * y.tail(n);
  return out;
}

VectorField complete_lift(const Section& x) {
  return [x](const Vector& y) { return complete_lift(x, y); };
}

Vector lie_bracket(const Section& x, const Section& z, const Vector& q) {
  return z.jacobian(q) * x.values(q) - x.jacobian(q) * z.values(q);
}

Vector lie_bracket(const VectorField& a, const VectorField& b, const Vector& y) {
  return fd_jacobian(b, y) * a(y) - fd_jacobian(a, y) * b(y);
}

ScalarField momentum_function(ChartPtr cotangent, const Vector& xi) {
  if (cotangent->fiber_kind() != FiberKind::momenta) {
    throw DimensionError("momentum function needs a cotangent chart");
  }
  const auto n = static_cast<Index>(cotangent->dim());
  if (xi.size() != n) throw DimensionError("generator has wrong size");
  const auto vars = chart_variables(*cotangent);
  std::vector<Expr> p(vars.begin() + n, vars.end());
  return ScalarField(cotangent, combination(xi, p));
}

ScalarField momentum_function(ChartPtr cotangent, const Section& z) {
  if (cotangent->fiber_kind() != FiberKind::momenta) {
    throw DimensionError("momentum function needs a cotangent chart");
  }
  if (z.chart().base_names() != cotangent->base_names()) {
    throw DimensionError("momentum function: base coordinates differ");
  }
  const std::size_t n = cotangent->dim();
  std::vector<Expr> terms;
  for (std::size_t i = 0; i < n; ++i) {
    terms.push_back(z.components()[i].expr() *
                    Expr::variable(n + i, cotangent->name(n + i)));
  }
  return ScalarField(std::move(cotangent), sum(terms));
}

// ---------------------------------------------------------------------------

TranslationAction::TranslationAction(Matrix generators,
                                     std::optional<Matrix> complement,
                                     std::optional<Matrix> group_coordinates)
    : xi_(std::move(generators)) {
  const Index n = xi_.cols();
  const Index k = xi_.rows();
  if (n == 0) throw std::invalid_argument("translation action on R^0");
  if (k > n || rank_of(xi_) != static_cast<std::size_t>(k)) {
    throw std::invalid_argument("generators must be linearly independent");
  }
  if (complement) {
    c_ = *complement;
    if (c_.rows() != n - k || c_.cols() != n) {
      throw std::invalid_argument("complement must be an (n-k) x n matrix");
    }
    if (k > 0 && sup(Matrix(c_ * xi_.transpose())) > 1e-12) {
      throw std::invalid_argument(
          "complement rows must annihilate every generator");
    }
  } else if (k == 0) {
    c_ = Matrix::Identity(n, n);
  } else {
    Eigen::JacobiSVD<Matrix> svd(xi_, Eigen::ComputeFullV);
    c_ = svd.matrixV().rightCols(n - k).transpose();
  }
  if (rank_of(c_) != static_cast<std::size_t>(n - k)) {
    throw std::invalid_argument("complement rows must be independent");
  }

  if (group_coordinates) {
    k_ = *group_coordinates;
    if (k_.rows() != k || k_.cols() != n) {
      throw std::invalid_argument("group coordinates must be a k x n matrix");
    }
  } else {
    k_.resize(0, n);
    Matrix stacked = c_;
    for (Index j = n - 1; j >= 0 && k_.rows() < k; --j) {
      Matrix trial(stacked.rows() + 1, n);
      trial << stacked, Matrix::Identity(n, n).row(j);
      if (rank_of(trial) == static_cast<std::size_t>(trial.rows())) {
        stacked = trial;
        Matrix grown(k_.rows() + 1, n);
        grown << k_, Matrix::Identity(n, n).row(j);
        k_ = grown;
      }
    }
  }
  m_.resize(n, n);
  if (k == 0) {
    m_ = c_;
  } else {
    m_ << c_, k_;
  }
  if (!(std::fabs(m_.determinant()) > 1e-12)) {
    throw std::invalid_argument(
        "generators and complement do not form a basis");
  }
  if (k > 0) {
    const Matrix kx = k_ * xi_.transpose();
    k_ = kx.inverse() * k_;
    m_ << c_, k_;
  }
  m_inv_ = m_.inverse();
}

InvarianceReport invariance_report(const ForcedHamiltonianSystem& sys,
                                   const Vector& xi,
                                   const InvarianceOptions& options) {
  const auto n = static_cast<Index>(sys.dim());
  if (xi.size() != n) throw DimensionError("generator has wrong size");
  const SampleDomain domain = options.phase_domain.dim() == 0
                                  ? SampleDomain::cube(2 * sys.dim())
                                  : options.phase_domain;
  if (domain.dim() != 2 * sys.dim()) {
    throw DimensionError("phase sample box has wrong dimension");
  }
  const auto points = quasi_random_points(domain, options.samples, options.seed);
  std::vector<std::array<double, 3>> values(points.size());
  parallel_for(points.size(), [&](std::size_t s) {
    const Vector& y = points[s];
    const double dh = xi.dot(sys.hamiltonian().gradient(y).head(n));
    const double bx = xi.dot(sys.force().values(y));
    Matrix db(n, 2 * n);  // db(j, .) = grad beta_j
    for (Index j = 0; j < n; ++j) {
      db.row(j) = sys.force().components()[static_cast<std::size_t>(j)]
                      .gradient(y)
                      .transpose();
    }
    const Matrix dq = db.leftCols(n);  // dq(j, i) = d beta_j / d q^i
    const Vector on_q = (dq - dq.transpose()) * xi;
    const Vector on_p = db.rightCols(n).transpose() * xi;
    values[s] = {std::fabs(dh), std::fabs(bx), std::max(sup(on_q), sup(on_p))};
  });
  InvarianceReport out;
  out.n_samples = points.size();
  for (const auto& v : values) {
    out.hamiltonian_sup = std::max(out.hamiltonian_sup, v[0]);
    out.force_sup = std::max(out.force_sup, v[1]);
    out.dforce_sup = std::max(out.dforce_sup, v[2]);
  }
  return out;
}

ReducedSystem reduce_translation(const ForcedHamiltonianSystem& sys,
                                 const TranslationAction& action,
                                 const Vector& mu, ReducedNames names,
                                 const InvarianceOptions& options) {
  const std::size_t n = sys.dim();
  const std::size_t k = action.k();
  const std::size_t m = n - k;
  if (action.n() != n) {
    throw DimensionError("action and system dimensions differ");
  }
  if (static_cast<std::size_t>(mu.size()) != k) {
    throw DimensionError("momentum value needs one entry per generator");
  }
  for (std::size_t a = 0; a < k; ++a) {
    const Vector xi = action.generators().row(static_cast<Index>(a)).transpose();
    const InvarianceReport r = invariance_report(sys, xi, options);
    const std::string which = "generator " + std::to_string(a + 1);
    if (r.hamiltonian_sup > options.tolerance) {
      throw InvarianceError(which + ": xi^c(H) != 0 (sup " +
                            std::to_string(r.hamiltonian_sup) + ")");
    }
    if (r.force_sup > options.tolerance) {
      throw InvarianceError(which + ": beta(xi^c) != 0 (sup " +
                            std::to_string(r.force_sup) + ")");
    }
    if (r.dforce_sup > options.tolerance) {
      throw InvarianceError(which + ": i_{xi^c} d beta != 0 (sup " +
                            std::to_string(r.dforce_sup) + ")");
    }
  }

  if (names.coordinates.empty()) names.coordinates = numbered_names("s", m);
  if (names.momenta.empty()) {
    for (const auto& s : names.coordinates) names.momenta.push_back("p_" + s);
  }
  if (names.coordinates.size() != m || names.momenta.size() != m) {
    throw DimensionError("reduced chart needs " + std::to_string(m) +
                         " coordinate and momentum names");
  }
  const auto mnames = mu_names(k);
  std::vector<Chart::Param> params;
  for (const auto& prm : sys.chart().params()) {
    if (std::find(mnames.begin(), mnames.end(), prm.first) == mnames.end()) {
      params.push_back(prm);
    }
  }
  for (std::size_t a = 0; a < k; ++a) {
    params.emplace_back(mnames[a], mu[static_cast<Index>(a)]);
  }
  if (m == 0) throw DimensionError("reduction leaves no coordinates");
  ChartPtr rc = make_chart(names.coordinates, FiberKind::momenta, names.momenta,
                           std::move(params));

  const auto rv = chart_variables(*rc);
  std::vector<Expr> s(rv.begin(), rv.begin() + static_cast<long>(m));
  std::vector<Expr> y(rv.begin() + static_cast<long>(m), rv.end());
  for (std::size_t a = 0; a < k; ++a) {
    y.push_back(Expr::parameter(mnames[a], mu[static_cast<Index>(a)]));
  }
  const Matrix& mm = action.coordinate_matrix();
  const Matrix& minv = action.coordinate_inverse();
  std::vector<Expr> repl;
  for (std::size_t i = 0; i < n; ++i) {
    repl.push_back(combination(
        minv.row(static_cast<Index>(i)).head(static_cast<Index>(m)).transpose(),
        s));
  }
  for (std::size_t i = 0; i < n; ++i) {
    repl.push_back(combination(mm.col(static_cast<Index>(i)), y));
  }

  ScalarField h(rc, substitute(sys.hamiltonian().expr(), repl));
  std::vector<ScalarField> r;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<Expr> beta;
    for (const auto& b : sys.force().components()) {
      beta.push_back(substitute(b.expr(), repl));
    }
    r.emplace_back(rc, combination(minv.col(static_cast<Index>(j)), beta));
  }
  return {ForcedHamiltonianSystem(std::move(h), SemibasicForm(rc, std::move(r))),
          action, mu};
}

Section reconstruct_solution(const TranslationAction& action, const Vector& mu,
                             const Section& reduced, ChartPtr full_chart) {
  const std::size_t n = action.n();
  const std::size_t k = action.k();
  const std::size_t m = n - k;
  if (full_chart->dim() != n || reduced.dim() != m) {
    throw DimensionError("reconstruct_solution: dimensions do not match");
  }
  if (static_cast<std::size_t>(mu.size()) != k) {
    throw DimensionError("momentum value needs one entry per generator");
  }
  const auto fv = chart_variables(*full_chart);
  std::vector<Expr> q(fv.begin(), fv.begin() + static_cast<long>(n));
  std::vector<Expr> repl;
  for (std::size_t j = 0; j < m; ++j) {
    repl.push_back(
        combination(action.complement().row(static_cast<Index>(j)).transpose(), q));
  }
  while (repl.size() < reduced.chart().size()) repl.push_back(Expr());

  std::vector<std::pair<std::string, double>> frozen =
      reduced.chart().params();
  const auto mnames = mu_names(k);
  for (std::size_t a = 0; a < k; ++a) {
    frozen.emplace_back(mnames[a], mu[static_cast<Index>(a)]);
  }
  std::vector<Expr> y;
  for (const auto& c : reduced.components()) {
    y.push_back(freeze_parameters_except(substitute(c.expr(), repl),
                                         *full_chart, frozen));
  }
  for (std::size_t a = 0; a < k; ++a) {
    y.push_back(Expr::constant(mu[static_cast<Index>(a)]));
  }
  std::vector<ScalarField> comps;
  for (std::size_t i = 0; i < n; ++i) {
    comps.emplace_back(full_chart, combination(action.coordinate_matrix().col(
                                                   static_cast<Index>(i)),
                                               y));
  }
  return Section(std::move(full_chart), SectionTarget::covectors,
                 std::move(comps));
}

ScalarField reconstruct_generating_function(const TranslationAction& action,
                                            const Vector& mu,
                                            const ScalarField& reduced,
                                            ChartPtr full_chart) {
  const std::size_t n = action.n();
  const std::size_t k = action.k();
  const std::size_t m = n - k;
  const auto fv = chart_variables(*full_chart);
  std::vector<Expr> q(fv.begin(), fv.begin() + static_cast<long>(n));
  std::vector<Expr> repl;
  for (std::size_t j = 0; j < m; ++j) {
    repl.push_back(
        combination(action.complement().row(static_cast<Index>(j)).transpose(), q));
  }
  while (repl.size() < reduced.chart().size()) repl.push_back(Expr());
  std::vector<std::pair<std::string, double>> frozen = reduced.chart().params();
  const auto mnames = mu_names(k);
  for (std::size_t a = 0; a < k; ++a) {
    frozen.emplace_back(mnames[a], mu[static_cast<Index>(a)]);
  }
  std::vector<Expr> terms{freeze_parameters_except(
      substitute(reduced.expr(), repl), *full_chart, frozen)};
  for (std::size_t a = 0; a < k; ++a) {
    const Vector coeff =
        mu[static_cast<Index>(a)] *
        action.group_coordinates().row(static_cast<Index>(a)).transpose();
    terms.push_back(combination(coeff, q));
  }
  return ScalarField(std::move(full_chart), sum(terms));
}

// ---------------------------------------------------------------------------

EhresmannConnection::EhresmannConnection(
    ChartPtr config_chart, std::vector<std::string> base,
    std::vector<std::string> fiber,
    std::vector<std::vector<ScalarField>> christoffel)
    : chart_(std::move(config_chart)), gamma_(std::move(christoffel)) {
  const std::size_t n = chart_->dim();
  std::vector<bool> used(n, false);
  auto resolve = [&](const std::string& name) {
    const auto slot = chart_->slot(name);
    if (!slot || *slot >= n) {
      throw std::invalid_argument("connection: unknown coordinate '" + name + "'");
    }
    if (used[*slot]) {
      throw std::invalid_argument("connection: coordinate '" + name +
                                  "' listed twice");
    }
    used[*slot] = true;
    return *slot;
  };
  for (const auto& b : base) base_.push_back(resolve(b));
  for (const auto& f : fiber) fiber_.push_back(resolve(f));
  if (base_.size() + fiber_.size() != n) {
    throw std::invalid_argument(
        "connection: base and fiber must partition the coordinates");
  }
  if (base_.empty()) throw std::invalid_argument("connection: empty base");
  if (gamma_.size() != fiber_.size()) {
    throw DimensionError("connection needs one Christoffel row per fiber");
  }
  for (const auto& row : gamma_) {
    if (row.size() != base_.size()) {
      throw DimensionError("connection needs one Christoffel entry per base");
    }
    for (const auto& g : row) {
      if (!g.chart().same_coordinates(*chart_)) {
        throw DimensionError("Christoffel component on a different chart");
      }
      for (std::size_t s = n; s < chart_->size(); ++s) {
        if (depends_on(g.expr(), s)) {
          throw DimensionError("Christoffel components must depend on q only");
        }
      }
    }
  }
}

Matrix EhresmannConnection::at(const Vector& q) const {
  const Vector x = pad(*chart_, q);
  Matrix g(static_cast<Index>(fiber_dim()), static_cast<Index>(base_dim()));
  for (std::size_t i = 0; i < fiber_dim(); ++i) {
    for (std::size_t a = 0; a < base_dim(); ++a) {
      g(static_cast<Index>(i), static_cast<Index>(a)) = gamma_[i][a](x);
    }
  }
  return g;
}

Matrix EhresmannConnection::horizontal_basis(const Vector& q) const {
  const Matrix g = at(q);
  Matrix h = Matrix::Zero(static_cast<Index>(chart_->dim()),
                          static_cast<Index>(base_dim()));
  for (std::size_t a = 0; a < base_dim(); ++a) {
    h(static_cast<Index>(base_[a]), static_cast<Index>(a)) = 1.0;
    for (std::size_t i = 0; i < fiber_dim(); ++i) {
      h(static_cast<Index>(fiber_[i]), static_cast<Index>(a)) =
          -g(static_cast<Index>(i), static_cast<Index>(a));
    }
  }
  return h;
}

std::vector<std::vector<std::vector<Expr>>>
EhresmannConnection::curvature_exprs() const {
  const std::size_t m = base_dim();
  const std::size_t f = fiber_dim();
  auto d = [&](std::size_t i, std::size_t a, std::size_t slot) {
    return differentiate(gamma_[i][a].expr(), slot);
  };
  std::vector<std::vector<std::vector<Expr>>> out(
      f, std::vector<std::vector<Expr>>(m, std::vector<Expr>(m)));
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t a = 0; a < m; ++a) {
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        std::vector<Expr> terms{d(i, a, base_[b]), -d(i, b, base_[a])};
        for (std::size_t j = 0; j < f; ++j) {
          terms.push_back(gamma_[j][a].expr() * d(i, b, fiber_[j]));
          terms.push_back(-(gamma_[j][b].expr() * d(i, a, fiber_[j])));
        }
        out[i][a][b] = sum(terms);
      }
    }
  }
  return out;
}

std::vector<Matrix> caplygin_curvature(const EhresmannConnection& conn,
                                       const Vector& q) {
  const Vector x = pad(*conn.chart_ptr(), q);
  const auto exprs = conn.curvature_exprs();
  const auto m = static_cast<Index>(conn.base_dim());
  std::vector<Matrix> out;
  for (const auto& plane : exprs) {
    Matrix r(m, m);
    for (Index a = 0; a < m; ++a) {
      for (Index b = 0; b < m; ++b) {
        r(a, b) = evaluate(plane[static_cast<std::size_t>(a)]
                                [static_cast<std::size_t>(b)],
                           {x.data(), static_cast<std::size_t>(x.size())});
      }
    }
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

CaplyginSystem::CaplyginSystem(ScalarField lagrangian,
                               EhresmannConnection connection,
                               Vector fiber_reference)
    : l_(std::move(lagrangian)),
      conn_(std::move(connection)),
      fiber_ref_(std::move(fiber_reference)) {
  if (l_.chart().fiber_kind() != FiberKind::velocities) {
    throw DimensionError("Caplygin Lagrangian must live on a tangent chart");
  }
  if (l_.chart().base_names() != conn_.chart_ptr()->base_names()) {
    throw DimensionError("Lagrangian and connection use different coordinates");
  }
  if (fiber_ref_.size() == 0) {
    fiber_ref_ = Vector::Zero(static_cast<Index>(conn_.fiber_dim()));
  }
  if (fiber_ref_.size() != static_cast<Index>(conn_.fiber_dim())) {
    throw DimensionError("fiber reference has wrong size");
  }
}

double CaplyginSystem::invariance_defect(const SampleDomain& config_domain,
                                         std::size_t samples,
                                         std::uint64_t seed) const {
  const std::size_t n = l_.chart().dim();
  const std::size_t m = conn_.base_dim();
  const std::size_t f = conn_.fiber_dim();
  if (config_domain.dim() != n) {
    throw DimensionError("configuration box has wrong dimension");
  }
  const auto domain = config_domain.product(SampleDomain::cube(m))
                          .product(SampleDomain::cube(f));
  auto value = [&](const Vector& q, const Vector& vb) {
    const Matrix g = conn_.at(q);
    Vector x(2 * static_cast<Index>(n));
    x.head(static_cast<Index>(n)) = q;
    const Vector vf = -g * vb;
    for (std::size_t a = 0; a < m; ++a) {
      x[static_cast<Index>(n + conn_.base_slots()[a])] = vb[static_cast<Index>(a)];
    }
    for (std::size_t i = 0; i < f; ++i) {
      x[static_cast<Index>(n + conn_.fiber_slots()[i])] = vf[static_cast<Index>(i)];
    }
    return l_(x);
  };
  double worst = 0.0;
  for (const auto& z : quasi_random_points(domain, samples, seed)) {
    const Vector q = z.head(static_cast<Index>(n));
    const Vector vb = z.segment(static_cast<Index>(n), static_cast<Index>(m));
    Vector shifted = q;
    for (std::size_t i = 0; i < f; ++i) {
      shifted[static_cast<Index>(conn_.fiber_slots()[i])] +=
          z[static_cast<Index>(n + m + i)];
    }
    worst = std::max(worst, std::fabs(value(q, vb) - value(shifted, vb)));
  }
  return worst;
}

ChartPtr reduced_tangent_chart(const CaplyginSystem& cs) {
  const Chart& c = cs.lagrangian().chart();
  const std::size_t n = c.dim();
  std::vector<std::string> base, vel;
  for (std::size_t s : cs.connection().base_slots()) {
    base.push_back(c.name(s));
    vel.push_back(c.name(n + s));
  }
  return make_chart(std::move(base), FiberKind::velocities, std::move(vel),
                    c.params());
}

CaplyginReduction caplygin_reduce(const CaplyginSystem& cs,
                                  const SampleDomain& base_domain) {
  const auto& conn = cs.connection();
  const ScalarField& l = cs.lagrangian();
  const Chart& tq = l.chart();
  const std::size_t n = tq.dim();
  const std::size_t m = conn.base_dim();
  const std::size_t f = conn.fiber_dim();
  ChartPtr tn = reduced_tangent_chart(cs);
  const auto rv = chart_variables(*tn);

  // Configuration substitution, then velocities along the horizontal.
  std::vector<Expr> qsub(conn.chart_ptr()->size());
  for (std::size_t a = 0; a < m; ++a) qsub[conn.base_slots()[a]] = rv[a];
  for (std::size_t i = 0; i < f; ++i) {
    qsub[conn.fiber_slots()[i]] =
        Expr::constant(cs.fiber_reference()[static_cast<Index>(i)]);
  }
  auto on_base = [&](const Expr& e) { return substitute(e, qsub); };

  std::vector<Expr> repl(2 * n);
  for (std::size_t s = 0; s < n; ++s) repl[s] = qsub[s];
  for (std::size_t a = 0; a < m; ++a) repl[n + conn.base_slots()[a]] = rv[m + a];
  for (std::size_t i = 0; i < f; ++i) {
    std::vector<Expr> terms;
    for (std::size_t a = 0; a < m; ++a) {
      terms.push_back(on_base(conn.christoffel()[i][a].expr()) * rv[m + a]);
    }
    repl[n + conn.fiber_slots()[i]] = -sum(terms);
  }

  ScalarField ell(tn, substitute(l.expr(), repl));
  const auto curv = conn.curvature_exprs();
  std::vector<ScalarField> alpha;
  for (std::size_t a = 0; a < m; ++a) {
    std::vector<Expr> terms;
    for (std::size_t i = 0; i < f; ++i) {
      const Expr li =
          substitute(differentiate(l.expr(), n + conn.fiber_slots()[i]), repl);
      for (std::size_t b = 0; b < m; ++b) {
        if (a == b) continue;
        const Expr r = on_base(curv[i][a][b]);
        if (r.is_zero()) continue;
        terms.push_back(li * rv[m + b] * r);
      }
    }
    alpha.emplace_back(tn, sum(terms));
  }
  ForcedLagrangianSystem reduced(ell, SemibasicForm(tn, alpha));
  const SampleDomain box =
      base_domain.dim() == 0 ? SampleDomain::cube(m) : base_domain;
  const auto natural = as_natural(ell, box);
  ForcedHamiltonianSystem ham = natural
                                    ? to_hamiltonian(*natural, reduced.force())
                                    : to_hamiltonian(reduced);
  return {std::move(reduced), std::move(ham)};
}

Section horizontal_lift(const CaplyginSystem& cs, const Section& y) {
  const auto& conn = cs.connection();
  const ChartPtr& tq = cs.lagrangian().chart_ptr();
  const std::size_t n = tq->dim();
  const std::size_t m = conn.base_dim();
  const std::size_t f = conn.fiber_dim();
  if (y.dim() != m) throw DimensionError("horizontal_lift: wrong base dimension");
  for (std::size_t a = 0; a < m; ++a) {
    if (y.chart().name(a) != tq->name(conn.base_slots()[a])) {
      throw DimensionError("horizontal_lift: base coordinate '" +
                           y.chart().name(a) + "' does not match");
    }
  }
  std::vector<Expr> repl(y.chart().size());
  for (std::size_t a = 0; a < m; ++a) {
    repl[a] = Expr::variable(conn.base_slots()[a], tq->name(conn.base_slots()[a]));
  }
  std::vector<Expr> ya;
  for (const auto& c : y.components()) ya.push_back(substitute(c.expr(), repl));
  std::vector<Expr> comps(n);
  for (std::size_t a = 0; a < m; ++a) comps[conn.base_slots()[a]] = ya[a];
  for (std::size_t i = 0; i < f; ++i) {
    std::vector<Expr> terms;
    for (std::size_t a = 0; a < m; ++a) {
      terms.push_back(conn.christoffel()[i][a].expr() * ya[a]);
    }
    comps[conn.fiber_slots()[i]] = -sum(terms);
  }
  std::vector<ScalarField> fields;
  for (auto& c : comps) fields.emplace_back(tq, std::move(c));
  return Section(tq, SectionTarget::vectors, std::move(fields));
}

NonholonomicReport nonholonomic_hj_checks(const CaplyginSystem& cs,
                                          const Section& x,
                                          const SampleDomain& config_domain,
                                          std::size_t samples, double tolerance,
                                          std::uint64_t seed) {
  const auto& conn = cs.connection();
  const auto sys = ForcedLagrangianSystem::unforced(cs.lagrangian());
  const auto points = quasi_random_points(config_domain, samples, seed);
  std::vector<std::array<double, 3>> values(points.size());
  parallel_for(points.size(), [&](std::size_t s) {
    const Vector& q = points[s];
    const Vector xv = x.values(q);
    const Matrix g = conn.at(q);
    Vector xb(static_cast<Index>(conn.base_dim()));
    for (std::size_t a = 0; a < conn.base_dim(); ++a) {
      xb[static_cast<Index>(a)] = xv[static_cast<Index>(conn.base_slots()[a])];
    }
    Vector constraint = g * xb;
    for (std::size_t i = 0; i < conn.fiber_dim(); ++i) {
      constraint[static_cast<Index>(i)] +=
          xv[static_cast<Index>(conn.fiber_slots()[i])];
    }
    const Matrix h = conn.horizontal_basis(q);
    const Matrix dp = legendre_closedness(cs.lagrangian(), x, q);
    const Vector de = lagrangian_hj_residual(sys, x, q);
    values[s] = {sup(constraint), sup(Matrix(h.transpose() * dp * h)),
                 sup(Vector(h.transpose() * de))};
  });
  NonholonomicReport out;
  for (const auto& v : values) {
    out.horizontal_sup = std::max(out.horizontal_sup, v[0]);
    out.ideal_sup = std::max(out.ideal_sup, v[1]);
    out.energy_sup = std::max(out.energy_sup, v[2]);
  }
  out.horizontal = out.horizontal_sup <= tolerance;
  out.ideal_membership = out.ideal_sup <= tolerance;
  out.energy_annihilation = out.energy_sup <= tolerance;
  return out;
}

}  // namespace mechforce
