#include "mechforce/hamiltonian.hpp"

#include <cmath>

namespace mechforce {

ForcedHamiltonianSystem::ForcedHamiltonianSystem(ScalarField hamiltonian,
                                                 SemibasicForm force)
    : hamiltonian_(std::move(hamiltonian)), force_(std::move(force)) {
  if (hamiltonian_.chart().fiber_kind() != FiberKind::momenta) {
    throw DimensionError("Hamiltonian must live on a cotangent chart");
  }
  if (!force_.chart().same_coordinates(hamiltonian_.chart())) {
    throw DimensionError("Hamiltonian and force live on different charts");
  }
}

ForcedHamiltonianSystem ForcedHamiltonianSystem::conservative(
    ScalarField hamiltonian) {
  auto zero = SemibasicForm::zero(hamiltonian.chart_ptr());
  return ForcedHamiltonianSystem(std::move(hamiltonian), std::move(zero));
}

LinearHamiltonianRayleigh::LinearHamiltonianRayleigh(
    ChartPtr chart, std::vector<std::vector<ScalarField>> entries)
    : chart_(std::move(chart)), entries_(std::move(entries)) {
  if (chart_->fiber_kind() != FiberKind::momenta) {
    throw DimensionError("Hamiltonian Rayleigh tensor needs a cotangent chart");
  }
  if (entries_.size() != chart_->dim()) {
    throw DimensionError("Rayleigh tensor has wrong number of rows");
  }
  for (const auto& row : entries_) {
    if (row.size() != chart_->dim()) {
      throw DimensionError("Rayleigh tensor has wrong number of columns");
    }
  }
}

LinearHamiltonianRayleigh LinearHamiltonianRayleigh::constant(ChartPtr chart,
                                                              const Matrix& r) {
  std::vector<std::vector<ScalarField>> e(static_cast<std::size_t>(r.rows()));
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      e[static_cast<std::size_t>(i)].push_back(constant_field(chart, r(i, j)));
    }
  }
  return LinearHamiltonianRayleigh(std::move(chart), std::move(e));
}

Matrix LinearHamiltonianRayleigh::at(const Vector& x) const {
  const auto n = static_cast<Eigen::Index>(dim());
  Matrix r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      r(i, j) = entries_[static_cast<std::size_t>(i)]
                        [static_cast<std::size_t>(j)](x);
    }
  }
  return r;
}

SemibasicForm LinearHamiltonianRayleigh::force() const {
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

bool LinearHamiltonianRayleigh::nondegenerate_at(
    const std::vector<Vector>& points) const {
  for (const auto& x : points) {
    if (!(std::fabs(at(x).determinant()) > kNondegeneracyThreshold)) {
      return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------

Vector hamiltonian_vector_field(const ScalarField& h, const Vector& x) {
  const Vector g = h.gradient(x);
  const auto n = static_cast<Eigen::Index>(h.chart().dim());
  Vector out(2 * n);
  out.head(n) = g.tail(n);
  out.tail(n) = -g.head(n);
  return out;
}

VectorField hamiltonian_vector_field(const ScalarField& h) {
  return [h](const Vector& x) { return hamiltonian_vector_field(h, x); };
}

Vector forced_vector_field(const ForcedHamiltonianSystem& sys,
                           const Vector& x) {
  Vector out = hamiltonian_vector_field(sys.hamiltonian(), x);
  const auto n = static_cast<Eigen::Index>(sys.dim());
  out.tail(n) -= sys.force().values(x);
  return out;
}

VectorField forced_vector_field(const ForcedHamiltonianSystem& sys) {
  return [sys](const Vector& x) { return forced_vector_field(sys, x); };
}

double poisson_bracket(const ScalarField& f, const ScalarField& g,
                       const Vector& x) {
  if (!f.chart().same_coordinates(g.chart())) {
    throw DimensionError("Poisson bracket of fields on different charts");
  }
  if (f.chart().fiber_kind() != FiberKind::momenta) {
    throw DimensionError("Poisson bracket needs a cotangent chart");
  }
  const auto n = static_cast<Eigen::Index>(f.chart().dim());
  const Vector df = f.gradient(x);
  const Vector dg = g.gradient(x);
  return df.head(n).dot(dg.tail(n)) - df.tail(n).dot(dg.head(n));
}

double directional_derivative(const ScalarField& f, const Vector& x,
                              const Vector& v) {
  return f.gradient(x).dot(v);
}

ExteriorMatrix rayleigh_exterior_matrix(const LinearHamiltonianRayleigh& r,
                                        const Vector& x) {
  const auto n = static_cast<Eigen::Index>(r.dim());
  const Vector p = x.tail(n);
  // a(i, j) = dR^k_j / dq^i p_k
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vector g = r.entries()[static_cast<std::size_t>(k)]
                                  [static_cast<std::size_t>(j)]
                                      .gradient(x);
      for (Eigen::Index i = 0; i < n; ++i) a(i, j) += g[i] * p[k];
    }
  }
  const Matrix rq = r.at(x);  // rq(j, i) = R^j_i
  ExteriorMatrix out;
  out.matrix = Matrix::Zero(2 * n, 2 * n);
  out.matrix.topLeftCorner(n, n) = a - a.transpose();
  // -R^j_i dq^i ^ dp_j
  out.matrix.topRightCorner(n, n) = -rq.transpose();
  out.matrix.bottomLeftCorner(n, n) = rq;
  if (!out.matrix.allFinite()) {
    throw NonFiniteError("non-finite entries in d(R-tilde)");
  }
  out.determinant = out.matrix.determinant();
  out.nondegenerate = std::fabs(out.determinant) > kNondegeneracyThreshold;
  return out;
}

Matrix canonical_symplectic_matrix(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  Matrix w = Matrix::Zero(2 * m, 2 * m);
  w.topRightCorner(m, m) = Matrix::Identity(m, m);
  w.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return w;
}

}  // namespace mechforce
