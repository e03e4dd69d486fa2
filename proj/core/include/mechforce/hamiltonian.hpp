#pragma once

// Forced Hamiltonian dynamics on T*Q with the canonical form dq^i ^ dp_i.

#include <functional>
#include <vector>

#include "mechforce/geometry.hpp"

namespace mechforce {

/// Autonomous vector field on a chart, x -> dx/dt.
using VectorField = std::function<Vector(const Vector&)>;

/// (H, beta) on T*Q.
class ForcedHamiltonianSystem {
 public:
  ForcedHamiltonianSystem(ScalarField hamiltonian, SemibasicForm force);
  static ForcedHamiltonianSystem conservative(ScalarField hamiltonian);

  std::size_t dim() const noexcept { return hamiltonian_.chart().dim(); }
  const ChartPtr& chart_ptr() const noexcept {
    return hamiltonian_.chart_ptr();
  }
  const Chart& chart() const noexcept { return hamiltonian_.chart(); }
  const ScalarField& hamiltonian() const noexcept { return hamiltonian_; }
  const SemibasicForm& force() const noexcept { return force_; }

 private:
  ScalarField hamiltonian_;
  SemibasicForm force_;
};

/// R^i_j(q) with R-tilde = R^i_j p_i dq^j. Row i, column j.
class LinearHamiltonianRayleigh {
 public:
  LinearHamiltonianRayleigh(ChartPtr chart,
                            std::vector<std::vector<ScalarField>> entries);
  static LinearHamiltonianRayleigh constant(ChartPtr chart, const Matrix& r);

  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return chart_->dim(); }
  const std::vector<std::vector<ScalarField>>& entries() const noexcept {
    return entries_;
  }
  Matrix at(const Vector& x) const;
  /// R-tilde as a semibasic form.
  SemibasicForm force() const;
  /// |det R| > 1e-12 at every point.
  bool nondegenerate_at(const std::vector<Vector>& points) const;

 private:
  ChartPtr chart_;
  std::vector<std::vector<ScalarField>> entries_;
};

/// (dH/dp, -dH/dq)
Vector hamiltonian_vector_field(const ScalarField& h, const Vector& x);
VectorField hamiltonian_vector_field(const ScalarField& h);

/// (dH/dp, -dH/dq - beta)
Vector forced_vector_field(const ForcedHamiltonianSystem& sys,
                           const Vector& x);
VectorField forced_vector_field(const ForcedHamiltonianSystem& sys);

/// sum_i df/dq^i dg/dp_i - df/dp_i dg/dq^i
double poisson_bracket(const ScalarField& f, const ScalarField& g,
                       const Vector& x);

/// Derivative of a function along a phase vector: grad f . v
double directional_derivative(const ScalarField& f, const Vector& x,
                              const Vector& v);

inline constexpr double kNondegeneracyThreshold = 1e-12;

struct ExteriorMatrix {
  Matrix matrix;  // 2n x 2n, basis (d/dq, d/dp)
  double determinant = 0.0;
  bool nondegenerate = false;
};

/// Matrix of d(R-tilde) = dR^k_j/dq^i p_k dq^i^dq^j - R^j_i dq^i^dp_j.
ExteriorMatrix rayleigh_exterior_matrix(const LinearHamiltonianRayleigh& r,
                                        const Vector& x);

/// Matrix of dq^i ^ dp_i: [[0, I], [-I, 0]].
Matrix canonical_symplectic_matrix(std::size_t n);

}  // namespace mechforce
