#pragma once

// Verification of forced Hamilton-Jacobi problems on both sides of the
// Legendre transform, and handling of complete solutions.

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mechforce/hamiltonian.hpp"
#include "mechforce/lagrangian.hpp"
#include "mechforce/sampling.hpp"

namespace mechforce {

enum class Verdict { strict, weak, none };

std::string_view to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct VerifyOptions {
  SampleDomain domain;  // empty means [-1, 1]^n
  std::size_t samples = 200;
  double tolerance = 1e-9;
  std::uint64_t seed = kDefaultSeed;
};

struct HJReport {
  double closedness_sup = 0.0;
  double residual_sup = 0.0;
  double weak_residual_sup = 0.0;
  SampleDomain sample_box;
  std::size_t n_samples = 0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::none;
};

/// strict if closed and the residual vanishes, weak if only the weak
/// residual vanishes, none otherwise.
Verdict classify(double closedness, double residual, double weak_residual,
                 double tolerance);

/// dH/dp at (q, gamma(q)).
Vector projected_field(const ForcedHamiltonianSystem& sys, const Section& gamma,
                       const Vector& q);

/// d(H o gamma) + gamma* beta
Vector hj_residual(const ForcedHamiltonianSystem& sys, const Section& gamma,
                   const Vector& q);

/// d(H o gamma) + gamma* beta + i_{X^gamma} d gamma
Vector weak_hj_residual(const ForcedHamiltonianSystem& sys,
                        const Section& gamma, const Vector& q);

/// X_{H,beta}(gamma(q)) - T gamma (X^gamma(q)), a vector of size 2n.
Vector tangency_check(const ForcedHamiltonianSystem& sys, const Section& gamma,
                      const Vector& q);

/// d(E_L o X) + X* alpha
Vector lagrangian_hj_residual(const ForcedLagrangianSystem& sys,
                              const Section& x, const Vector& q);

/// d(E_L o X) + X* alpha + i_X d(Leg o X)
Vector weak_lagrangian_hj_residual(const ForcedLagrangianSystem& sys,
                                   const Section& x, const Vector& q);

/// Exterior derivative of the 1-form Leg o X at q.
Matrix legendre_closedness(const ScalarField& lagrangian, const Section& x,
                           const Vector& q);

HJReport verify_hamiltonian(const ForcedHamiltonianSystem& sys,
                            const Section& gamma,
                            const VerifyOptions& options = {});

HJReport verify_lagrangian(const ForcedLagrangianSystem& sys, const Section& x,
                           const VerifyOptions& options = {});

struct TransportReport {
  HJReport lagrangian;
  HJReport hamiltonian;
  bool agree = false;
};

/// Verifies X on TQ and Leg o X against the transported system on T*Q.
/// Natural Lagrangians are transported in closed form.
TransportReport legendre_transport_check(const ForcedLagrangianSystem& sys,
                                         const Section& x,
                                         const VerifyOptions& options = {});

// ---------------------------------------------------------------------------
// Complete solutions

/// gamma_i(q; lambda) over a chart whose fiber holds the family parameters.
class CompleteSolution {
 public:
  CompleteSolution(ChartPtr family_chart, std::vector<ScalarField> components,
                   SampleDomain lambda_box);

  /// Builds the family chart from `base` and parses the components.
  static CompleteSolution parse(const std::vector<std::string>& base,
                                const std::vector<std::string>& lambdas,
                                const std::vector<std::string>& sources,
                                SampleDomain lambda_box,
                                std::vector<Chart::Param> params = {});

  std::size_t dim() const noexcept { return family_chart_->dim(); }
  const ChartPtr& chart_ptr() const noexcept { return family_chart_; }
  const std::vector<ScalarField>& components() const noexcept {
    return components_;
  }
  const SampleDomain& lambda_box() const noexcept { return lambda_box_; }

  Vector gamma(const Vector& q, const Vector& lambda) const;
  /// d gamma_i / d q^j and d gamma_i / d lambda_j.
  std::pair<Matrix, Matrix> jacobians(const Vector& q,
                                      const Vector& lambda) const;
  /// The member of the family at lambda, as a covector section.
  Section member(const Vector& lambda) const;

 private:
  ChartPtr family_chart_;
  std::vector<ScalarField> components_;
  SampleDomain lambda_box_;
};

/// lambda with gamma(q; lambda) = p, by Newton (warm start or the centre of
/// lambda_box). Throws ConvergenceError outside the covered region.
Vector complete_solution_functions(const CompleteSolution& cs, const Vector& y,
                                   const std::optional<Vector>& warm_start = {});

struct InvolutionReport {
  Vector lambda;        // f_a(y)
  Matrix brackets;      // {f_a, f_b}
  Vector conservation;  // X_{H,beta}(f_a)
};

/// Derivatives of f_a come from implicit differentiation of gamma(q; f) = p.
InvolutionReport involution_matrix(const CompleteSolution& cs,
                                   const ForcedHamiltonianSystem& sys,
                                   const Vector& y,
                                   const std::optional<Vector>& warm_start = {});

struct CompleteSolutionReport {
  std::size_t members = 0;
  bool all_strict = false;
  double residual_sup = 0.0;
  double closedness_sup = 0.0;
  double min_abs_det = 0.0;        // of d gamma / d lambda
  double bracket_sup = 0.0;
  double conservation_sup = 0.0;
  double roundtrip_sup = 0.0;      // |f(q, gamma(q; lambda)) - lambda|
};

/// Samples `members` parameter values from lambda_box and checks each member
/// on `options.domain`, plus the diffeomorphism, involution and roundtrip
/// properties at the same points.
CompleteSolutionReport verify_complete_solution(
    const CompleteSolution& cs, const ForcedHamiltonianSystem& sys,
    const VerifyOptions& options = {}, std::size_t members = 5);

/// Default domain [-1, 1]^n when `options.domain` is empty.
SampleDomain resolve_domain(const VerifyOptions& options, std::size_t n);

}  // namespace mechforce
