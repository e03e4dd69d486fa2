#include "mechforce/hj.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace mechforce {

namespace {

using Index = Eigen::Index;

void require_base(const Chart& a, const Chart& b, const char* what) {
  if (a.base_names() != b.base_names()) {
    throw DimensionError(std::string(what) + ": base coordinates differ");
  }
}

struct HamiltonianAt {
  Vector hq, hp, beta;
  Matrix j;  // j(i, k) = d gamma_i / d q^k
};

HamiltonianAt hamiltonian_at(const ForcedHamiltonianSystem& sys,
                             const Section& gamma, const Vector& q) {
  require_base(sys.chart(), gamma.chart(), "Hamilton-Jacobi check");
  const auto n = static_cast<Index>(sys.dim());
  const Vector y = gamma.lift(q);
  const Vector g = sys.hamiltonian().gradient(y);
  HamiltonianAt out;
  out.hq = g.head(n);
  out.hp = g.tail(n);
  out.beta = sys.force().values(y);
  out.j = gamma.jacobian(q);
  if (!g.allFinite() || !out.j.allFinite()) {
    throw NonFiniteError("non-finite derivatives along the section");
  }
  return out;
}

struct LagrangianAt {
  Vector eq, ev, alpha, x;
  Matrix jx;  // d X^i / d q^k
  Matrix jp;  // d (Leg o X)_i / d q^k
};

LagrangianAt lagrangian_at(const ForcedLagrangianSystem& sys, const Section& x,
                           const Vector& q) {
  require_base(sys.chart(), x.chart(), "Lagrangian Hamilton-Jacobi check");
  const auto n = static_cast<Index>(sys.dim());
  LagrangianAt out;
  out.x = x.values(q);
  out.jx = x.jacobian(q);
  Vector z(2 * n);
  z.head(n) = q;
  z.tail(n) = out.x;
  const Jet j = sys.lagrangian().jet(z, 2);
  const Matrix w = j.hessian.bottomRightCorner(n, n);
  if (!(std::fabs(w.determinant()) > kRegularityThreshold)) {
    throw SingularError("Hessian W is singular along X");
  }
  const Matrix lvq = j.hessian.bottomLeftCorner(n, n);
  // E_L = v.L_v - L
  out.eq = lvq.transpose() * out.x - j.gradient.head(n);
  out.ev = w * out.x;
  out.alpha = sys.force().values(z);
  out.jp = lvq + w * out.jx;
  return out;
}

double sup(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double sup(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

template <class Eval>
HJReport run_report(std::size_t n, const VerifyOptions& options, Eval eval) {
  HJReport report;
  report.sample_box = resolve_domain(options, n);
  report.tolerance = options.tolerance;
  const auto points =
      quasi_random_points(report.sample_box, options.samples, options.seed);
  report.n_samples = points.size();
  std::vector<std::array<double, 3>> values(points.size());
  parallel_for(points.size(), [&](std::size_t i) { values[i] = eval(points[i]); });
  for (const auto& v : values) {
    report.closedness_sup = std::max(report.closedness_sup, v[0]);
    report.residual_sup = std::max(report.residual_sup, v[1]);
    report.weak_residual_sup = std::max(report.weak_residual_sup, v[2]);
  }
  report.verdict = classify(report.closedness_sup, report.residual_sup,
                            report.weak_residual_sup, options.tolerance);
  return report;
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::strict:
      return "strict";
    case Verdict::weak:
      return "weak";
    case Verdict::none:
      return "none";
  }
  return "none";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "strict") return Verdict::strict;
  if (s == "weak") return Verdict::weak;
  if (s == "none") return Verdict::none;
  return std::nullopt;
}

Verdict classify(double closedness, double residual, double weak_residual,
                 double tolerance) {
  if (closedness <= tolerance && residual <= tolerance) return Verdict::strict;
  if (weak_residual <= tolerance) return Verdict::weak;
  return Verdict::none;
}

SampleDomain resolve_domain(const VerifyOptions& options, std::size_t n) {
  if (options.domain.dim() == 0) return SampleDomain::cube(n);
  if (options.domain.dim() != n) {
    throw DimensionError("sample box has dimension " +
                         std::to_string(options.domain.dim()) + ", expected " +
                         std::to_string(n));
  }
  return options.domain;
}

Vector projected_field(const ForcedHamiltonianSystem& sys, const Section& gamma,
                       const Vector& q) {
  require_base(sys.chart(), gamma.chart(), "projected_field");
  const auto n = static_cast<Index>(sys.dim());
  return sys.hamiltonian().gradient(gamma.lift(q)).tail(n);
}

Vector hj_residual(const ForcedHamiltonianSystem& sys, const Section& gamma,
                   const Vector& q) {
  const HamiltonianAt h = hamiltonian_at(sys, gamma, q);
  return h.hq + h.j.transpose() * h.hp + h.beta;
}

Vector weak_hj_residual(const ForcedHamiltonianSystem& sys,
                        const Section& gamma, const Vector& q) {
  const HamiltonianAt h = hamiltonian_at(sys, gamma, q);
  return h.hq + h.j * h.hp + h.beta;
}

Vector tangency_check(const ForcedHamiltonianSystem& sys, const Section& gamma,
                      const Vector& q) {
  const HamiltonianAt h = hamiltonian_at(sys, gamma, q);
  const auto n = static_cast<Index>(sys.dim());
  Vector out(2 * n);
  out.head(n).setZero();
  out.tail(n) = -h.hq - h.beta - h.j * h.hp;
  return out;
}

Vector lagrangian_hj_residual(const ForcedLagrangianSystem& sys,
                              const Section& x, const Vector& q) {
  const LagrangianAt l = lagrangian_at(sys, x, q);
  return l.eq + l.jx.transpose() * l.ev + l.alpha;
}

Vector weak_lagrangian_hj_residual(const ForcedLagrangianSystem& sys,
                                   const Section& x, const Vector& q) {
  const LagrangianAt l = lagrangian_at(sys, x, q);
  return l.eq + l.jx.transpose() * l.ev + l.alpha +
         (l.jp - l.jp.transpose()) * l.x;
}

Matrix legendre_closedness(const ScalarField& lagrangian, const Section& x,
                           const Vector& q) {
  const auto sys = ForcedLagrangianSystem::unforced(lagrangian);
  const LagrangianAt l = lagrangian_at(sys, x, q);
  return l.jp.transpose() - l.jp;
}

HJReport verify_hamiltonian(const ForcedHamiltonianSystem& sys,
                            const Section& gamma,
                            const VerifyOptions& options) {
  require_base(sys.chart(), gamma.chart(), "verify");
  return run_report(sys.dim(), options, [&](const Vector& q) {
    const HamiltonianAt h = hamiltonian_at(sys, gamma, q);
    const Vector dhg = h.hq + h.j.transpose() * h.hp;
    const Vector r = dhg + h.beta;
    const Vector weak = h.hq + h.j * h.hp + h.beta;
    return std::array<double, 3>{sup(Matrix(h.j.transpose() - h.j)), sup(r),
                                 sup(weak)};
  });
}

HJReport verify_lagrangian(const ForcedLagrangianSystem& sys, const Section& x,
                           const VerifyOptions& options) {
  require_base(sys.chart(), x.chart(), "verify");
  return run_report(sys.dim(), options, [&](const Vector& q) {
    const LagrangianAt l = lagrangian_at(sys, x, q);
    const Vector r = l.eq + l.jx.transpose() * l.ev + l.alpha;
    const Matrix dp = l.jp.transpose() - l.jp;
    const Vector weak = r - dp * l.x;
    return std::array<double, 3>{sup(dp), sup(r), sup(weak)};
  });
}

TransportReport legendre_transport_check(const ForcedLagrangianSystem& sys,
                                         const Section& x,
                                         const VerifyOptions& options) {
  TransportReport out;
  out.lagrangian = verify_lagrangian(sys, x, options);
  const SampleDomain box = resolve_domain(options, sys.dim());
  const auto natural = as_natural(sys.lagrangian(), box);
  const ForcedHamiltonianSystem ham =
      natural ? to_hamiltonian(*natural, sys.force()) : to_hamiltonian(sys);
  const Section gamma = legendre_section(sys.lagrangian(), x, ham.chart_ptr());
  out.hamiltonian = verify_hamiltonian(ham, gamma, options);
  out.agree = out.lagrangian.verdict == out.hamiltonian.verdict;
  return out;
}

// ---------------------------------------------------------------------------

CompleteSolution::CompleteSolution(ChartPtr family_chart,
                                   std::vector<ScalarField> components,
                                   SampleDomain lambda_box)
    : family_chart_(std::move(family_chart)),
      components_(std::move(components)),
      lambda_box_(std::move(lambda_box)) {
  if (family_chart_->fiber_kind() != FiberKind::parameters) {
    throw DimensionError("complete solution needs a parameter chart");
  }
  if (components_.size() != family_chart_->dim()) {
    throw DimensionError("complete solution has wrong number of components");
  }
  for (const auto& c : components_) {
    if (!c.chart().same_coordinates(*family_chart_)) {
      throw DimensionError("complete solution component on a different chart");
    }
  }
  if (lambda_box_.dim() != family_chart_->dim()) {
    throw DimensionError("lambda box has wrong dimension");
  }
}

CompleteSolution CompleteSolution::parse(
    const std::vector<std::string>& base, const std::vector<std::string>& lambdas,
    const std::vector<std::string>& sources, SampleDomain lambda_box,
    std::vector<Chart::Param> params) {
  auto chart = make_chart(base, FiberKind::parameters, lambdas,
                          std::move(params));
  std::vector<ScalarField> comps;
  for (const auto& s : sources) comps.push_back(parse_field(s, chart));
  return CompleteSolution(std::move(chart), std::move(comps),
                          std::move(lambda_box));
}

Vector CompleteSolution::gamma(const Vector& q, const Vector& lambda) const {
  const auto n = static_cast<Index>(dim());
  Vector x(2 * n);
  x.head(n) = q;
  x.tail(n) = lambda;
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = components_[static_cast<std::size_t>(i)](x);
  }
  return out;
}

std::pair<Matrix, Matrix> CompleteSolution::jacobians(
    const Vector& q, const Vector& lambda) const {
  const auto n = static_cast<Index>(dim());
  Vector x(2 * n);
  x.head(n) = q;
  x.tail(n) = lambda;
  Matrix gq(n, n), gl(n, n);
  for (Index i = 0; i < n; ++i) {
    const Vector g = components_[static_cast<std::size_t>(i)].gradient(x);
    gq.row(i) = g.head(n).transpose();
    gl.row(i) = g.tail(n).transpose();
  }
  return {gq, gl};
}

Section CompleteSolution::member(const Vector& lambda) const {
  const std::size_t n = dim();
  std::vector<Expr> repl;
  for (std::size_t i = 0; i < n; ++i) {
    repl.push_back(Expr::variable(i, family_chart_->name(i)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    repl.push_back(Expr::constant(lambda[static_cast<Index>(i)]));
  }
  std::vector<ScalarField> comps;
  for (const auto& c : components_) {
    comps.emplace_back(family_chart_, substitute(c.expr(), repl));
  }
  return Section(family_chart_, SectionTarget::covectors, std::move(comps));
}

Vector complete_solution_functions(const CompleteSolution& cs, const Vector& y,
                                   const std::optional<Vector>& warm_start) {
  const auto n = static_cast<Index>(cs.dim());
  if (y.size() != 2 * n) {
    throw DimensionError("complete_solution_functions: point has wrong size");
  }
  const Vector q = y.head(n);
  const Vector p = y.tail(n);
  Vector lambda = warm_start ? *warm_start : cs.lambda_box().center();
  const double tol = 1e-12 * (1.0 + p.cwiseAbs().maxCoeff());
  double residual = 0.0;
  constexpr int kMaxIterations = 50;
  for (int it = 0; it <= kMaxIterations; ++it) {
    const Vector r = p - cs.gamma(q, lambda);
    if (!r.allFinite()) {
      throw NonFiniteError("complete_solution_functions: non-finite residual");
    }
    residual = r.cwiseAbs().maxCoeff();
    if (residual <= tol) return lambda;
    if (it == kMaxIterations) break;
    const Matrix gl = cs.jacobians(q, lambda).second;
    if (!(std::fabs(gl.determinant()) > 1e-14)) {
      throw SingularError("complete solution: singular lambda-Jacobian");
    }
    lambda += gl.partialPivLu().solve(r);
  }
  throw ConvergenceError("point is outside the complete solution's coverage",
                         residual);
}

InvolutionReport involution_matrix(const CompleteSolution& cs,
                                   const ForcedHamiltonianSystem& sys,
                                   const Vector& y,
                                   const std::optional<Vector>& warm_start) {
  if (cs.chart_ptr()->base_names() != sys.chart().base_names()) {
    throw DimensionError("complete solution and system: base coordinates differ");
  }
  const auto n = static_cast<Index>(cs.dim());
  InvolutionReport out;
  out.lambda = complete_solution_functions(cs, y, warm_start);
  const auto [gq, gl] = cs.jacobians(y.head(n), out.lambda);
  if (!(std::fabs(gl.determinant()) > 1e-14)) {
    throw SingularError("complete solution: singular lambda-Jacobian");
  }
  // gamma(q, f(q, p)) = p
  const auto lu = gl.partialPivLu();
  const Matrix dp = lu.inverse();   // df_a / dp_i
  const Matrix dq = -lu.solve(gq);  // df_a / dq^i
  out.brackets = dq * dp.transpose() - dp * dq.transpose();
  const Vector xf = forced_vector_field(sys, y);
  out.conservation = dq * xf.head(n) + dp * xf.tail(n);
  return out;
}

CompleteSolutionReport verify_complete_solution(
    const CompleteSolution& cs, const ForcedHamiltonianSystem& sys,
    const VerifyOptions& options, std::size_t members) {
  const std::size_t n = cs.dim();
  const SampleDomain box = resolve_domain(options, n);
  CompleteSolutionReport out;
  out.min_abs_det = std::numeric_limits<double>::infinity();
  out.all_strict = true;
  const auto lambdas =
      quasi_random_points(cs.lambda_box(), members, options.seed ^ 0x5bd1e995);
  const auto points = quasi_random_points(box, options.samples, options.seed);
  out.members = lambdas.size();
  for (const auto& lambda : lambdas) {
    const Section member = cs.member(lambda);
    VerifyOptions o = options;
    o.domain = box;
    const HJReport r = verify_hamiltonian(sys, member, o);
    out.all_strict = out.all_strict && r.verdict == Verdict::strict;
    out.residual_sup = std::max(out.residual_sup, r.residual_sup);
    out.closedness_sup = std::max(out.closedness_sup, r.closedness_sup);
    for (const auto& q : points) {
      const auto gl = cs.jacobians(q, lambda).second;
      out.min_abs_det = std::min(out.min_abs_det, std::fabs(gl.determinant()));
      const Vector y = member.lift(q);
      const InvolutionReport inv = involution_matrix(cs, sys, y);
      out.bracket_sup = std::max(out.bracket_sup, sup(inv.brackets));
      out.conservation_sup = std::max(out.conservation_sup, sup(inv.conservation));
      out.roundtrip_sup =
          std::max(out.roundtrip_sup, sup(Vector(inv.lambda - lambda)));
    }
  }
  return out;
}

}  // namespace mechforce
