#pragma once

// Forced Lagrangian dynamics on TQ, Rayleigh forces, the dissipative
// bracket and the Legendre transform to T*Q.

#include <optional>
#include <vector>

#include "mechforce/hamiltonian.hpp"
#include "mechforce/sampling.hpp"

namespace mechforce {

/// (L, alpha) on TQ.
class ForcedLagrangianSystem {
 public:
  ForcedLagrangianSystem(ScalarField lagrangian, SemibasicForm force);
  static ForcedLagrangianSystem unforced(ScalarField lagrangian);

  std::size_t dim() const noexcept { return lagrangian_.chart().dim(); }
  const ChartPtr& chart_ptr() const noexcept {
    return lagrangian_.chart_ptr();
  }
  const Chart& chart() const noexcept { return lagrangian_.chart(); }
  const ScalarField& lagrangian() const noexcept { return lagrangian_; }
  const SemibasicForm& force() const noexcept { return force_; }

 private:
  ScalarField lagrangian_;
  SemibasicForm force_;
};

/// A dissipation function R(q, v); its force is dR/dv^i dq^i.
struct RayleighPotential {
  ScalarField function;
};

/// R_ij(q), symmetric, with R = 1/2 R_ij v^i v^j.
class LinearRayleighTensor {
 public:
  LinearRayleighTensor(ChartPtr chart,
                       std::vector<std::vector<ScalarField>> entries);
  static LinearRayleighTensor constant(ChartPtr chart, const Matrix& r);

  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return chart_->dim(); }
  const std::vector<std::vector<ScalarField>>& entries() const noexcept {
    return entries_;
  }
  Matrix at(const Vector& x) const;
  bool symmetric_at(const std::vector<Vector>& points,
                    double tol = 1e-14) const;
  RayleighPotential potential() const;
  /// R_ij v^i dq^j
  SemibasicForm force() const;

 private:
  ChartPtr chart_;
  std::vector<std::vector<ScalarField>> entries_;
};

/// L = 1/2 g_ij(q) v^i v^j - V(q).
class NaturalLagrangian {
 public:
  NaturalLagrangian(ChartPtr chart, std::vector<std::vector<ScalarField>> g,
                    ScalarField potential);
  static NaturalLagrangian constant_metric(ChartPtr chart, const Matrix& g,
                                           ScalarField potential);

  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return chart_->dim(); }
  const std::vector<std::vector<ScalarField>>& metric_entries() const noexcept {
    return g_;
  }
  const ScalarField& potential() const noexcept { return potential_; }

  Matrix metric(const Vector& x) const;
  ScalarField lagrangian() const;
  /// g^{ij} as expressions over the base slots (exact derivatives).
  std::vector<std::vector<Expr>> inverse_metric() const;

 private:
  ChartPtr chart_;
  std::vector<std::vector<ScalarField>> g_;
  ScalarField potential_;
};

/// E_L = v^i dL/dv^i - L
ScalarField energy(const ScalarField& lagrangian);

inline constexpr double kRegularityThreshold = 1e-12;

struct HessianW {
  Matrix w;
  double determinant = 0.0;
  bool regular = false;
};

/// W_ij = d^2 L / dv^i dv^j; regular iff |det W| > 1e-12.
HessianW hessian_W(const ScalarField& lagrangian, const Vector& x);

/// (v, a) with W a = dL/dq - (d^2L/dv dq) v - alpha. Throws SingularError
/// when W is singular at x.
Vector forced_el_field(const ForcedLagrangianSystem& sys, const Vector& x);
VectorField forced_el_field(const ForcedLagrangianSystem& sys);

/// alpha_i = dR/dv^i
SemibasicForm rayleigh_force(const RayleighPotential& potential);

/// [f, g] = W^{ij} df/dv^j dg/dv^i
double dissipative_bracket(const ScalarField& lagrangian, const ScalarField& f,
                           const ScalarField& g, const Vector& x);

/// xi_{L,R}(f) = {f, E_L} - [f, R], with {f, E_L} evaluated as xi_L(f).
double motion_constant_residual(const ScalarField& lagrangian,
                                const RayleighPotential& potential,
                                const ScalarField& f, const Vector& x);

/// (q, v) -> (q, dL/dv)
Vector legendre(const ScalarField& lagrangian, const Vector& x);

struct LegendreOptions {
  std::size_t max_iterations = 50;
  double tolerance = 1e-12;  // on |p - dL/dv|_inf, relative to 1 + |p|_inf
  std::optional<Vector> warm_start;
};

/// Newton on W dv = p - dL/dv, starting from v = 0 or the warm start.
Vector legendre_inverse(const ScalarField& lagrangian, const Vector& y,
                        const LegendreOptions& options = {});
/// (q, g^{-1}(q) p)
Vector legendre_inverse(const NaturalLagrangian& lagrangian, const Vector& y);

/// Cotangent chart over the base of a tangent chart. Momentum names are
/// p<k> for base names q<k>, p_<name> otherwise.
ChartPtr cotangent_chart(const Chart& tangent_chart);

/// Legendre transport with H(q,p) = E_L(q, v(q,p)) and beta = alpha(q, v),
/// where v(q,p) is computed by Newton at every evaluation. H has exact first
/// and second derivatives, beta exact first derivatives.
ForcedHamiltonianSystem to_hamiltonian(const ForcedLagrangianSystem& sys,
                                       ChartPtr momentum_chart = nullptr);

/// Closed-form transport for natural Lagrangians: v = g^{-1} p.
ForcedHamiltonianSystem to_hamiltonian(const NaturalLagrangian& lagrangian,
                                       const SemibasicForm& force,
                                       ChartPtr momentum_chart = nullptr);

/// Rewrite a field on TQ along v = g^{-1} p.
ScalarField transport_to_cotangent(const NaturalLagrangian& lagrangian,
                                   const ScalarField& f,
                                   ChartPtr momentum_chart);

struct HamiltonianRayleighData {
  ScalarField potential;             // 1/2 R^{ij} p_i p_j
  SemibasicForm force;               // R^i_j p_i dq^j
  LinearHamiltonianRayleigh tensor;  // R^i_j = g^{ik} R_kj
};

HamiltonianRayleighData hamiltonian_rayleigh_data(
    const NaturalLagrangian& lagrangian, const LinearRayleighTensor& rayleigh,
    ChartPtr momentum_chart = nullptr);

/// sup over points of |R-tilde_j - g_jk dR/dp_k|.
double rayleigh_consistency_defect(const HamiltonianRayleighData& data,
                                   const NaturalLagrangian& lagrangian,
                                   const std::vector<Vector>& points);

/// Reads g_ij = d^2L/dv^i dv^j at v = 0 and V = -L(q, 0), then checks
/// L = 1/2 g v v - V at sample points of `base_domain` with random
/// velocities in [-velocity_bound, velocity_bound].
std::optional<NaturalLagrangian> as_natural(const ScalarField& lagrangian,
                                            const SampleDomain& base_domain,
                                            std::size_t samples = 50,
                                            double tolerance = 1e-10,
                                            double velocity_bound = 2.0);

/// Leg o X as a covector section on `momentum_chart`.
Section legendre_section(const ScalarField& lagrangian, const Section& x,
                         ChartPtr momentum_chart = nullptr);

}  // namespace mechforce
