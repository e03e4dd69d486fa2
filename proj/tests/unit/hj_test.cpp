#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/hj.hpp"
#include "random_fields.hpp"

using namespace mechforce;
using mechforce::testing::fmt;

namespace {

ChartPtr cot(std::size_t n, std::vector<Chart::Param> params = {}) {
  return make_chart(numbered_names("q", n), FiberKind::momenta, numbered_names("p", n),
                    std::move(params));
}
ChartPtr tan_chart(std::size_t n, std::vector<Chart::Param> params = {}) {
  return make_chart(numbered_names("q", n), FiberKind::velocities, numbered_names("v", n),
                    std::move(params));
}

ForcedHamiltonianSystem drag2() {
  auto c = cot(2, {{"k1", 1.0}, {"k2", 0.5}});
  return {parse_field("(p1^2 + p2^2)/2", c), SemibasicForm::parse(c, {"k1*p1^2", "k2*p2^2"})};
}

Section drag2_gamma(const ForcedHamiltonianSystem& s, const std::string& l1 = "1",
                    const std::string& l2 = "2") {
  return Section::parse(s.chart_ptr(), SectionTarget::covectors,
                        {l1 + "*exp(-k1*q1)", l2 + "*exp(-k2*q2)"});
}

}  // namespace

TEST(Verdict, StringsRoundTrip) {
  for (auto v : {Verdict::strict, Verdict::weak, Verdict::none}) {
    EXPECT_EQ(verdict_from_string(to_string(v)), v);
  }
  EXPECT_FALSE(verdict_from_string("maybe"));
  EXPECT_EQ(classify(0, 0, 0, 1e-9), Verdict::strict);
  EXPECT_EQ(classify(1, 1, 0, 1e-9), Verdict::weak);
  EXPECT_EQ(classify(1, 1, 1, 1e-9), Verdict::none);
  EXPECT_EQ(classify(0, 1e-3, 1e-3, 1e-9), Verdict::none);
}

TEST(ProjectedField, Drag) {
  const auto s = drag2();
  const auto g = drag2_gamma(s);
  Vector q(2);
  q << 0.3, -0.4;
  const Vector x = projected_field(s, g, q);
  EXPECT_NEAR(x[0], std::exp(-0.3), 1e-15);
  EXPECT_NEAR(x[1], 2 * std::exp(0.2), 1e-15);
  auto c = cot(1);
  const auto free_h = ForcedHamiltonianSystem::conservative(parse_field("p1^2/2", c));
  EXPECT_EQ(projected_field(free_h, Section::parse(c, SectionTarget::covectors, {"0"}), q.head(1))[0], 0.0);
}

TEST(Residual, SolutionAndConstantCandidate) {
  const auto s = drag2();
  const auto pts = quasi_random_points(SampleDomain::cube(2), 50);
  for (const auto& q : pts) {
    EXPECT_LE(hj_residual(s, drag2_gamma(s), q).cwiseAbs().maxCoeff(), 1e-14);
  }
  auto c = cot(1, {{"kappa", 0.7}});
  const ForcedHamiltonianSystem one(parse_field("p1^2/2", c), SemibasicForm::parse(c, {"kappa*p1^2"}));
  const auto cst = Section::parse(c, SectionTarget::covectors, {"1.5"});
  Vector q(1);
  q << 0.2;
  EXPECT_NEAR(hj_residual(one, cst, q)[0], 0.7 * 2.25, 1e-15);
  const Vector tc = tangency_check(one, cst, q);
  EXPECT_NEAR(std::fabs(tc[1]), 0.7 * 2.25, 1e-15);
}

TEST(Residual, WeakEqualsStrictWhenClosed) {
  const auto s = drag2();
  const auto g = drag2_gamma(s, "1.3", "-0.4");
  for (const auto& q : quasi_random_points(SampleDomain::cube(2), 50)) {
    EXPECT_LE((weak_hj_residual(s, g, q) - hj_residual(s, g, q)).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Verify, DragIsStrictConstantIsNone) {
  const auto s = drag2();
  const auto r = verify_hamiltonian(s, drag2_gamma(s));
  EXPECT_EQ(r.verdict, Verdict::strict);
  EXPECT_EQ(r.n_samples, 200u);
  EXPECT_EQ(r.sample_box.bounds().size(), 2u);
  const auto bad = Section::parse(s.chart_ptr(), SectionTarget::covectors, {"1", "1"});
  EXPECT_EQ(verify_hamiltonian(s, bad).verdict, Verdict::none);
  for (const auto& q : quasi_random_points(SampleDomain::cube(2), 20)) {
    EXPECT_LE(tangency_check(s, drag2_gamma(s), q).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Verify, WeakNonClosedSolution) {
  // H = p1^2/2 + p2^2/2 with no force; gamma = (q2, 0) is not closed but
  // X^gamma = (q2, 0) kills i_X d gamma and d(H o gamma) = (0, q2) is
  // cancelled by i_X d gamma as well.
  auto c = cot(2);
  const auto s = ForcedHamiltonianSystem::conservative(parse_field("(p1^2 + p2^2)/2", c));
  const auto g = Section::parse(c, SectionTarget::covectors, {"q2", "0"});
  const auto r = verify_hamiltonian(s, g);
  EXPECT_GT(r.closedness_sup, 0.5);
  EXPECT_EQ(r.verdict, Verdict::weak);
  for (const auto& q : quasi_random_points(SampleDomain::cube(2), 20)) {
    EXPECT_LE(tangency_check(s, g, q).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Verify, DeterministicSampling) {
  const auto s = drag2();
  const auto g = Section::parse(s.chart_ptr(), SectionTarget::covectors, {"1", "q1"});
  VerifyOptions a;
  a.seed = 42;
  const auto r1 = verify_hamiltonian(s, g, a);
  const auto r2 = verify_hamiltonian(s, g, a);
  EXPECT_EQ(r1.residual_sup, r2.residual_sup);
  EXPECT_EQ(r1.closedness_sup, r2.closedness_sup);
}

TEST(Lagrangian, FluidResistance) {
  auto t = tan_chart(1, {{"m", 2.0}, {"k", 0.5}, {"l", 1.5}});
  const ForcedLagrangianSystem sys(parse_field("m/2*v1^2", t),
                                   rayleigh_force({parse_field("k*v1^3/3", t)}));
  const auto x = Section::parse(t, SectionTarget::vectors, {"l/m*exp(-k*q1/m)"});
  for (const auto& q : quasi_random_points(SampleDomain::cube(1), 20)) {
    EXPECT_LE(lagrangian_hj_residual(sys, x, q).cwiseAbs().maxCoeff(), 1e-14);
    // X* alpha = (k l^2/m^2) e^{-2kq/m}
    const double xa = 0.5 * 2.25 / 4 * std::exp(-2 * 0.25 * q[0]);
    EXPECT_NEAR(sys.force().values(x.lift(q))[0], xa, 1e-14);
  }
  const auto t1 = legendre_transport_check(sys, x);
  EXPECT_TRUE(t1.agree);
  EXPECT_EQ(t1.lagrangian.verdict, Verdict::strict);
  const auto nx = Section::parse(t, SectionTarget::vectors, {"1 + q1"});
  const auto t2 = legendre_transport_check(sys, nx);
  EXPECT_TRUE(t2.agree);
  EXPECT_EQ(t2.hamiltonian.verdict, Verdict::none);
}

TEST(Lagrangian, FreeParticleTensor) {
  auto t = tan_chart(2);
  Matrix r(2, 2);
  r << 1.0, 0.4, 0.4, 2.0;
  const ForcedLagrangianSystem sys(parse_field("(v1^2 + v2^2)/2", t),
                                   LinearRayleighTensor::constant(t, r).force());
  const auto x = Section::parse(t, SectionTarget::vectors,
                                {"0.5 - (q1 + 0.4*q2)", "-1 - (0.4*q1 + 2*q2)"});
  EXPECT_EQ(verify_lagrangian(sys, x).verdict, Verdict::strict);
  const auto zero = Section::parse(t, SectionTarget::vectors, {"0", "0"});
  const auto free_sys = ForcedLagrangianSystem::unforced(sys.lagrangian());
  EXPECT_EQ(verify_lagrangian(free_sys, zero).verdict, Verdict::strict);
  EXPECT_LE(legendre_closedness(sys.lagrangian(), x, Vector::Zero(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Lagrangian, MixedMassesTransport) {
  auto t = tan_chart(3);
  const double m[3] = {1.0, 2.0, 0.5}, k[3] = {0.5, 1.0, 2.0}, l[3] = {1.0, -0.5, 0.8};
  std::string lag, ray;
  std::vector<std::string> comps;
  for (int i = 0; i < 3; ++i) {
    const std::string v = "v" + std::to_string(i + 1), q = "q" + std::to_string(i + 1);
    lag += (i ? " + " : "") + fmt(m[i] / 2) + "*" + v + "^2";
    ray += (i ? " + " : "") + fmt(k[i] / 3) + "*" + v + "^3";
    comps.push_back("(" + fmt(l[i] / m[i]) + ")*exp(-" + fmt(k[i] / m[i]) + "*" + q + ")");
  }
  const ForcedLagrangianSystem sys(parse_field(lag, t), rayleigh_force({parse_field(ray, t)}));
  const auto rep = legendre_transport_check(sys, Section::parse(t, SectionTarget::vectors, comps));
  EXPECT_EQ(rep.lagrangian.verdict, Verdict::strict);
  EXPECT_EQ(rep.hamiltonian.verdict, Verdict::strict);
}

TEST(CompleteSolution, DragFamily) {
  const auto s = drag2();
  const auto cs = CompleteSolution::parse({"q1", "q2"}, {"l1", "l2"},
                                          {"l1*exp(-k1*q1)", "l2*exp(-k2*q2)"},
                                          SampleDomain::cube(2, 0.5, 2.0), s.chart().params());
  const auto rep = verify_complete_solution(cs, s);
  EXPECT_EQ(rep.members, 5u);
  EXPECT_TRUE(rep.all_strict);
  EXPECT_LE(rep.bracket_sup, 1e-9);
  EXPECT_LE(rep.conservation_sup, 1e-9);
  EXPECT_LE(rep.roundtrip_sup, 1e-10);
  EXPECT_GT(rep.min_abs_det, 0.0);
  Vector y(4);
  y << 0.2, -0.3, 0.9, 1.4;
  const Vector lam = complete_solution_functions(cs, y);
  EXPECT_NEAR(lam[0], std::exp(0.2) * 0.9, 1e-12);
  EXPECT_NEAR(lam[1], std::exp(-0.15) * 1.4, 1e-12);
  const auto inv = involution_matrix(cs, s, y);
  EXPECT_LE(inv.brackets.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE(inv.conservation.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CompleteSolution, RayleighFamily) {
  auto c = cot(2);
  Matrix rh(2, 2);
  rh << 0.5, 0.1, 0.2, 0.8;  // R^i_j = R_ij / m_i with m = (2, 1), R = [[1, .2], [.2, .8]]
  const ForcedHamiltonianSystem s(parse_field("p1^2/4 + p2^2/2", c),
                                  LinearHamiltonianRayleigh::constant(c, rh).force());
  const auto cs = CompleteSolution::parse({"q1", "q2"}, {"l1", "l2"},
                                          {"l1 - q1 - 0.2*q2", "l2 - 0.2*q1 - 0.8*q2"},
                                          SampleDomain::cube(2));
  const auto rep = verify_complete_solution(cs, s);
  EXPECT_TRUE(rep.all_strict);
  EXPECT_LE(rep.bracket_sup, 1e-9);
  EXPECT_LE(rep.conservation_sup, 1e-9);
}

TEST(CompleteSolution, OneDimensional) {
  auto c = cot(1);
  const ForcedHamiltonianSystem s(parse_field("p1^2/2", c), SemibasicForm::parse(c, {"p1^2"}));
  const auto cs = CompleteSolution::parse({"q1"}, {"l1"}, {"l1*exp(-q1)"}, SampleDomain::cube(1, 0.5, 2));
  Vector y(2);
  y << 0.1, 1.0;
  const auto inv = involution_matrix(cs, s, y);
  EXPECT_EQ(inv.brackets.rows(), 1);
  EXPECT_EQ(inv.brackets(0, 0), 0.0);
}

TEST(Verify, VerdictInvariants) {
  const auto s = drag2();
  const std::vector<std::vector<std::string>> cands{
      {"exp(-k1*q1)", "2*exp(-k2*q2)"}, {"1", "q1"}, {"q2", "0"}, {"exp(-k1*q1) + 1e-3", "0"}};
  for (const auto& c : cands) {
    VerifyOptions o;
    o.tolerance = 1e-9;
    const auto r = verify_hamiltonian(s, Section::parse(s.chart_ptr(), SectionTarget::covectors, c), o);
    if (r.verdict == Verdict::strict) {
      EXPECT_LE(r.closedness_sup, o.tolerance);
      EXPECT_LE(r.residual_sup, o.tolerance);
    }
    if (r.verdict == Verdict::weak) {
      EXPECT_LE(r.weak_residual_sup, o.tolerance);
    }
  }
}

TEST(CompleteSolution, CoversOnlyItsRegion) {
  const auto s = drag2();
  const auto cs = CompleteSolution::parse({"q1", "q2"}, {"l1", "l2"},
                                          {"l1^2*exp(-k1*q1)", "l2*exp(-k2*q2)"},
                                          SampleDomain::cube(2, 0.5, 2.0), s.chart().params());
  Vector y(4);
  y << 0.0, 0.0, -1.0, 1.0;  // l1^2 = -1 has no solution
  EXPECT_THROW(complete_solution_functions(cs, y), ConvergenceError);
}
