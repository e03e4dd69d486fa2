#pragma once

// Symmetry reduction: translation actions on R^n acting on forced
// Hamiltonian systems, and Caplygin systems reduced through an Ehresmann
// connection.

#include <optional>
#include <string>
#include <vector>

#include "mechforce/hj.hpp"

namespace mechforce {

// ---------------------------------------------------------------------------
// Lifts and brackets

/// X^c at y = (q, p): (X^i, -p_j dX^j/dq^i).
Vector complete_lift(const Section& x, const Vector& y);
VectorField complete_lift(const Section& x);

/// [X, Z]^i = X^j dZ^i/dq^j - Z^j dX^i/dq^j, exact.
Vector lie_bracket(const Section& x, const Section& z, const Vector& q);

/// [A, B] = DB.A - DA.B with finite-difference Jacobians.
Vector lie_bracket(const VectorField& a, const VectorField& b, const Vector& y);

/// J^xi = xi^i p_i on a cotangent chart.
ScalarField momentum_function(ChartPtr cotangent, const Vector& xi);
/// i_Z theta = Z^i(q) p_i; Z's components must reference base slots only.
ScalarField momentum_function(ChartPtr cotangent, const Section& z);

// ---------------------------------------------------------------------------
// Translation actions

/// Generators xi_(1..k) (rows) acting by q -> q + t^a xi_(a), quotient
/// coordinates s = C q (rows of C annihilate every generator) and group
/// coordinates g = K q with K xi^T = I.
class TranslationAction {
 public:
  /// Missing complement: an orthonormal basis of the annihilator of the
  /// generators. Missing group coordinates: unit rows (last coordinates
  /// first) that complete C, normalized so that K xi^T = I.
  TranslationAction(Matrix generators, std::optional<Matrix> complement = {},
                    std::optional<Matrix> group_coordinates = {});

  std::size_t n() const noexcept { return static_cast<std::size_t>(xi_.cols()); }
  std::size_t k() const noexcept { return static_cast<std::size_t>(xi_.rows()); }
  const Matrix& generators() const noexcept { return xi_; }
  const Matrix& complement() const noexcept { return c_; }
  const Matrix& group_coordinates() const noexcept { return k_; }
  /// M = [C; K], (s, g) = M q.
  const Matrix& coordinate_matrix() const noexcept { return m_; }
  const Matrix& coordinate_inverse() const noexcept { return m_inv_; }

 private:
  Matrix xi_, c_, k_, m_, m_inv_;
};

struct InvarianceReport {
  double hamiltonian_sup = 0.0;  // |xi^c(H)|
  double force_sup = 0.0;        // |beta(xi^c)|
  double dforce_sup = 0.0;       // |i_{xi^c} d beta|
  std::size_t n_samples = 0;

  bool invariant(double tol) const {
    return hamiltonian_sup <= tol && force_sup <= tol && dforce_sup <= tol;
  }
};

struct InvarianceOptions {
  SampleDomain phase_domain;  // over (q, p); empty means [-1, 1]^{2n}
  std::size_t samples = 200;
  double tolerance = 1e-10;
  std::uint64_t seed = kDefaultSeed;
};

InvarianceReport invariance_report(const ForcedHamiltonianSystem& sys,
                                   const Vector& xi,
                                   const InvarianceOptions& options = {});

struct ReducedSystem {
  ForcedHamiltonianSystem system;  // (h, r) on T*(Q/G)
  TranslationAction action;
  Vector mu;
};

/// Names of the reduced chart; defaults are s1.. and p_s1...
struct ReducedNames {
  std::vector<std::string> coordinates;
  std::vector<std::string> momenta;
};

/// Restricts to J = mu and passes to quotient coordinates. mu enters the
/// reduced expressions as parameters mu (k = 1) or mu1..muk. Throws
/// InvarianceError naming the generator and the violated condition.
ReducedSystem reduce_translation(const ForcedHamiltonianSystem& sys,
                                 const TranslationAction& action,
                                 const Vector& mu, ReducedNames names = {},
                                 const InvarianceOptions& options = {});

/// gamma_q = M^T (gamma~(C q), mu) on `full_chart`.
Section reconstruct_solution(const TranslationAction& action, const Vector& mu,
                             const Section& reduced, ChartPtr full_chart);

/// S(q) = S~(C q) + mu . K q
ScalarField reconstruct_generating_function(const TranslationAction& action,
                                            const Vector& mu,
                                            const ScalarField& reduced,
                                            ChartPtr full_chart);

// ---------------------------------------------------------------------------
// Caplygin systems

/// Gamma^i_a(q) over a configuration chart that lists base coordinates q^a
/// and fiber coordinates q^i in any order. Constraints:
/// v^i + Gamma^i_a v^a = 0.
class EhresmannConnection {
 public:
  EhresmannConnection(ChartPtr config_chart, std::vector<std::string> base,
                      std::vector<std::string> fiber,
                      std::vector<std::vector<ScalarField>> christoffel);

  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t base_dim() const noexcept { return base_.size(); }
  std::size_t fiber_dim() const noexcept { return fiber_.size(); }
  const std::vector<std::size_t>& base_slots() const noexcept { return base_; }
  const std::vector<std::size_t>& fiber_slots() const noexcept { return fiber_; }
  /// [i][a]
  const std::vector<std::vector<ScalarField>>& christoffel() const noexcept {
    return gamma_;
  }

  /// Gamma(i, a) at a configuration point.
  Matrix at(const Vector& q) const;
  /// Columns h_a = e_a - Gamma^i_a e_i.
  Matrix horizontal_basis(const Vector& q) const;
  /// Curvature components as expressions: [i][a][b].
  std::vector<std::vector<std::vector<Expr>>> curvature_exprs() const;

 private:
  ChartPtr chart_;
  std::vector<std::size_t> base_, fiber_;
  std::vector<std::vector<ScalarField>> gamma_;
};

/// R^i_ab = dG^i_a/dq^b - dG^i_b/dq^a + G^j_a dG^i_b/dq^j - G^j_b dG^i_a/dq^j,
/// returned as one (a, b) matrix per fiber index i.
std::vector<Matrix> caplygin_curvature(const EhresmannConnection& conn,
                                       const Vector& q);

class CaplyginSystem {
 public:
  /// The Lagrangian lives on T Q over the connection's configuration chart.
  CaplyginSystem(ScalarField lagrangian, EhresmannConnection connection,
                 Vector fiber_reference = {});

  const ScalarField& lagrangian() const noexcept { return l_; }
  const EhresmannConnection& connection() const noexcept { return conn_; }
  /// Fiber coordinates used when restricting to the base.
  const Vector& fiber_reference() const noexcept { return fiber_ref_; }

  /// sup |L(q, v^H) - L(q + d, v^H(q + d))| over sampled base points, base
  /// velocities and fiber displacements d.
  double invariance_defect(const SampleDomain& config_domain,
                           std::size_t samples = 100,
                           std::uint64_t seed = kDefaultSeed) const;

 private:
  ScalarField l_;
  EhresmannConnection conn_;
  Vector fiber_ref_;
};

struct CaplyginReduction {
  ForcedLagrangianSystem lagrangian;   // (ell, upsilon alpha) on TN
  ForcedHamiltonianSystem hamiltonian;
};

/// Builds ell and upsilon-alpha along v^i = -Gamma^i_a v^a. The Hamiltonian
/// image uses the closed-form transport when ell is natural on `base_domain`.
CaplyginReduction caplygin_reduce(const CaplyginSystem& cs,
                                  const SampleDomain& base_domain = {});

/// The tangent chart of N used by caplygin_reduce.
ChartPtr reduced_tangent_chart(const CaplyginSystem& cs);

/// (Y^H)^a = Y^a, (Y^H)^i = -Gamma^i_a Y^a, as a vector section on the chart
/// of the Lagrangian. Y lives on a chart whose base names are the base
/// coordinates of the connection.
Section horizontal_lift(const CaplyginSystem& cs, const Section& y);

struct NonholonomicReport {
  double horizontal_sup = 0.0;  // |X^i + Gamma^i_a X^a|
  double ideal_sup = 0.0;       // |d(Leg o X)(h_a, h_b)|
  double energy_sup = 0.0;      // |d(E_L o X)(h_a)|
  bool horizontal = false;
  bool ideal_membership = false;
  bool energy_annihilation = false;
  bool all() const { return horizontal && ideal_membership && energy_annihilation; }
};

NonholonomicReport nonholonomic_hj_checks(const CaplyginSystem& cs,
                                          const Section& x,
                                          const SampleDomain& config_domain,
                                          std::size_t samples = 200,
                                          double tolerance = 1e-9,
                                          std::uint64_t seed = kDefaultSeed);

}  // namespace mechforce
