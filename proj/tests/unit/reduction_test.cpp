#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/reduction.hpp"

using namespace mechforce;

namespace {

ChartPtr cot(std::size_t n, std::vector<Chart::Param> params = {}) {
  return make_chart(numbered_names("q", n), FiberKind::momenta, numbered_names("p", n),
                    std::move(params));
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

ForcedHamiltonianSystem calogero(double mu, bool potential = true, bool force = true) {
  auto c = cot(2, {{"mu", mu}});
  Matrix rh(2, 2);
  rh << 1, -1, 1, -1;
  const auto h = parse_field(potential ? "(p1^2 + p2^2 + 1/(q1 - q2)^2)/2" : "(p1^2 + p2^2)/2", c);
  return {h, force ? LinearHamiltonianRayleigh::constant(c, rh).force() : SemibasicForm::zero(c)};
}

TranslationAction diagonal() {
  return TranslationAction((Matrix(1, 2) << 1, 1).finished(), (Matrix(1, 2) << 1, -1).finished());
}

SampleDomain off_collision() {
  return SampleDomain({{-1, 1}, {-1, 1}}, {ExclusionBand{vec({1, -1}), 0.0, 0.2}});
}

}  // namespace

TEST(CompleteLift, TranslationAndScaling) {
  auto c = cot(2);
  const auto t = Section::parse(c, SectionTarget::vectors, {"1", "0"});
  const Vector y = vec({0.3, 0.4, 1.5, -2});
  EXPECT_EQ(complete_lift(t, y), vec({1, 0, 0, 0}));
  const auto s = Section::parse(c, SectionTarget::vectors, {"q1", "0"});
  EXPECT_EQ(complete_lift(s, y), vec({0.3, 0, -1.5, 0}));
}

TEST(LieBracket, ExactAndFiniteDifference) {
  auto c = cot(2);
  const auto x = Section::parse(c, SectionTarget::vectors, {"q2", "0"});
  const auto z = Section::parse(c, SectionTarget::vectors, {"0", "q1"});
  const Vector q = vec({0.5, -0.2});
  // [X, Z] = X^j dZ/dq^j - Z^j dX/dq^j = (-q1, q2)
  EXPECT_EQ(lie_bracket(x, z, q), vec({-0.5, -0.2}));
  const Vector fd = lie_bracket(complete_lift(x), complete_lift(z), vec({0.5, -0.2, 1, 2}));
  EXPECT_NEAR(fd[0], -0.5, 1e-8);
  EXPECT_NEAR(fd[1], -0.2, 1e-8);
}

TEST(MomentumMap, LinearInGenerator) {
  auto c = cot(2);
  const Vector y = vec({0.3, 0.4, 1.5, -2});
  EXPECT_DOUBLE_EQ(momentum_function(c, vec({1, 1}))(y), -0.5);
  EXPECT_EQ(momentum_function(c, vec({0, 0}))(y), 0.0);
  EXPECT_DOUBLE_EQ(momentum_function(c, vec({2, 0}))(y), 3.0);
  const auto z = Section::parse(c, SectionTarget::vectors, {"q2", "1"});
  EXPECT_DOUBLE_EQ(momentum_function(c, z)(y), 0.4 * 1.5 - 2);
}

TEST(Invariance, CalogeroAndDrag) {
  InvarianceOptions o;
  o.phase_domain = off_collision().product(SampleDomain::cube(2));
  const auto r = invariance_report(calogero(1.0), vec({1, 1}), o);
  EXPECT_TRUE(r.invariant(1e-10));
  auto c = cot(2);
  const ForcedHamiltonianSystem drag(parse_field("(p1^2 + p2^2)/2", c),
                                     SemibasicForm::parse(c, {"p1^2", "p2^2"}));
  const auto d = invariance_report(drag, vec({1, 0}));
  EXPECT_GT(d.force_sup, 0.1);
  EXPECT_LE(d.hamiltonian_sup, 1e-15);
  EXPECT_THROW(reduce_translation(drag, TranslationAction((Matrix(1, 2) << 1, 0).finished()), vec({1})),
               InvarianceError);
  EXPECT_TRUE(invariance_report(calogero(1.0, false, false), vec({1, 1})).invariant(1e-12));
}

TEST(TranslationAction, DefaultCoordinates) {
  const TranslationAction a((Matrix(1, 2) << 1, 1).finished());
  EXPECT_LE((a.complement() * a.generators().transpose()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((a.group_coordinates() * a.generators().transpose() - Matrix::Identity(1, 1))
                .cwiseAbs()
                .maxCoeff(),
            1e-15);
  EXPECT_LE((a.coordinate_matrix() * a.coordinate_inverse() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(),
            1e-15);
  const auto d = diagonal();
  EXPECT_EQ(d.group_coordinates(), (Matrix(1, 2) << 0, 1).finished());
}

TEST(Reduce, CalogeroDisplays) {
  for (double mu : {1.0, -0.5, 2.0}) {
    const auto red = reduce_translation(calogero(mu), diagonal(), vec({mu}), {{"q"}, {"p"}});
    const auto& rc = red.system.chart_ptr();
    ASSERT_EQ(rc->base_names(), std::vector<std::string>{"q"});
    const auto hd = parse_field("((mu - p)^2 + p^2 + 1/q^2)/2", rc);
    for (const auto& y : quasi_random_points(SampleDomain({{0.3, 2}, {-2, 2}}), 50)) {
      EXPECT_NEAR(red.system.hamiltonian()(y), hd(y), 1e-12 * (1 + std::fabs(hd(y))));
      EXPECT_NEAR(red.system.force().values(y)[0], mu, 1e-14);
    }
  }
}

TEST(Reduce, FreeCase) {
  const double mu = 0.7;
  const auto red = reduce_translation(calogero(mu, false, false), diagonal(), vec({mu}), {{"q"}, {"p"}});
  const auto hd = parse_field("((mu - p)^2 + p^2)/2", red.system.chart_ptr());
  for (const auto& y : quasi_random_points(SampleDomain::cube(2), 20)) {
    EXPECT_NEAR(red.system.hamiltonian()(y), hd(y), 1e-14);
    EXPECT_EQ(red.system.force().values(y)[0], 0.0);
  }
}

TEST(Reduce, ReconstructedExactFamilyIsStrict) {
  const double mu = 1.0;
  const auto sys = calogero(mu);
  auto c = cot(2, {{"mu", mu}, {"lambda", 4.0}});
  const ForcedHamiltonianSystem full(parse_field(sys.hamiltonian().to_string(), c),
                                     SemibasicForm::parse(c, {"p1 + p2", "-(p1 + p2)"}));
  const auto red = reduce_translation(full, diagonal(), vec({mu}), {{"q"}, {"p"}});
  const auto ge = Section::parse(
      red.system.chart_ptr(), SectionTarget::covectors,
      {"mu/2 + sqrt((1 + 1/(2*mu) + lambda - mu/2)^2 + mu*(1 - q) + (1 - 1/q^2)/2)"});
  VerifyOptions ro;
  ro.domain = SampleDomain({{-2, 2}}, {ExclusionBand{vec({1}), 0, 0.2}});
  EXPECT_EQ(verify_hamiltonian(red.system, ge, ro).verdict, Verdict::strict);
  const auto g = reconstruct_solution(red.action, red.mu, ge, c);
  VerifyOptions fo;
  fo.domain = off_collision();
  EXPECT_EQ(verify_hamiltonian(full, g, fo).verdict, Verdict::strict);
  // second component is mu - first
  for (const auto& q : quasi_random_points(off_collision(), 10)) {
    const Vector v = g.values(q);
    EXPECT_NEAR(v[0] + v[1], mu, 1e-14);
  }
}

TEST(Reduce, PrintedFamilyIsClosedButNotASolution) {
  const double mu = 1.0;
  auto c = cot(2, {{"mu", mu}, {"lambda", 0.0}});
  const ForcedHamiltonianSystem full(parse_field("(p1^2 + p2^2 + 1/(q1 - q2)^2)/2", c),
                                     SemibasicForm::parse(c, {"p1 + p2", "-(p1 + p2)"}));
  const auto red = reduce_translation(full, diagonal(), vec({mu}), {{"q"}, {"p"}});
  const auto gp = Section::parse(red.system.chart_ptr(), SectionTarget::covectors,
                                 {"q + 1/(2*mu*q^2) + lambda"});
  const auto g = reconstruct_solution(red.action, red.mu, gp, c);
  VerifyOptions fo;
  fo.domain = off_collision();
  const auto r = verify_hamiltonian(full, g, fo);
  EXPECT_LE(r.closedness_sup, 1e-12);
  EXPECT_EQ(r.verdict, Verdict::none);
  const auto s = reconstruct_generating_function(
      red.action, red.mu, parse_field("q^2/2 - 1/(2*mu*q) + lambda*q", red.system.chart_ptr()), c);
  const auto ds = differential(s);
  for (const auto& q : quasi_random_points(off_collision(), 20)) {
    EXPECT_LE((ds.values(q) - g.values(q)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Reduce, KeepsUnrelatedParameters) {
  auto c = cot(2, {{"a", 3.0}, {"mu", 9.0}});
  const auto sys = ForcedHamiltonianSystem::conservative(parse_field("a*(p1^2 + p2^2)/2", c));
  const auto red = reduce_translation(sys, diagonal(), vec({0.5}));
  EXPECT_EQ(*red.system.chart().param("a"), 3.0);
  EXPECT_EQ(*red.system.chart().param("mu"), 0.5);
  EXPECT_EQ(red.system.chart().base_names(), std::vector<std::string>{"s1"});
}

// ---------------------------------------------------------------------------

namespace {

struct Robot {
  ChartPtr tq, qc;
  ScalarField lag;
  EhresmannConnection conn;
};

Robot robot() {
  std::vector<Chart::Param> p{{"m", 2.0}, {"R", 0.5}, {"J", 0.3}, {"Jw", 0.1}};
  auto tq = make_chart({"theta", "psi", "x", "y"}, FiberKind::velocities,
                       {"v_theta", "v_psi", "v_x", "v_y"}, p);
  auto qc = make_chart({"theta", "psi", "x", "y"}, FiberKind::none, {}, p);
  EhresmannConnection conn(qc, {"theta", "psi"}, {"x", "y"},
                           {{parse_field("0", qc), parse_field("-R*cos(theta)", qc)},
                            {parse_field("0", qc), parse_field("-R*sin(theta)", qc)}});
  return {tq, qc, parse_field("m/2*(v_x^2 + v_y^2) + J/2*v_theta^2 + 3*Jw/2*v_psi^2", tq), conn};
}

}  // namespace

TEST(Connection, RobotCurvature) {
  const auto r = robot();
  const Vector q = vec({0.7, 0.1, 0.2, 0.3});
  const auto k = caplygin_curvature(r.conn, q);
  ASSERT_EQ(k.size(), 2u);
  // R^i_{theta psi} = d_psi G^i_theta - d_theta G^i_psi + (G . d) terms (zero here)
  EXPECT_NEAR(k[0](0, 1), -0.5 * std::sin(0.7), 1e-15);
  EXPECT_NEAR(k[1](0, 1), 0.5 * std::cos(0.7), 1e-15);
  EXPECT_NEAR(k[0](1, 0), -k[0](0, 1), 1e-15);
  const Matrix h = r.conn.horizontal_basis(q);
  EXPECT_NEAR(h(2, 1), 0.5 * std::cos(0.7), 1e-15);
}

TEST(Connection, FlatAndOneDimensionalBase) {
  auto qc = make_chart({"a", "i"}, FiberKind::none, {});
  EhresmannConnection flat(qc, {"a"}, {"i"}, {{parse_field("2", qc)}});
  EXPECT_EQ(caplygin_curvature(flat, vec({0.1, 0.2}))[0](0, 0), 0.0);
  EhresmannConnection one(qc, {"a"}, {"i"}, {{parse_field("sin(a)", qc)}});
  EXPECT_EQ(caplygin_curvature(one, vec({0.1, 0.2}))[0].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Connection, ToyCurvatureAndForce) {
  auto qc = make_chart({"a", "b", "i"}, FiberKind::none, {});
  auto tq = make_chart({"a", "b", "i"}, FiberKind::velocities, {"v_a", "v_b", "v_i"});
  EhresmannConnection conn(qc, {"a", "b"}, {"i"}, {{parse_field("b", qc), parse_field("0", qc)}});
  const Vector q = vec({0.3, -0.6, 0.2});
  EXPECT_NEAR(caplygin_curvature(conn, q)[0](0, 1), 1.0, 1e-15);
  const CaplyginSystem cs(parse_field("(v_a^2 + v_b^2 + v_i^2)/2", tq), conn);
  const auto red = caplygin_reduce(cs, SampleDomain::cube(2));
  // v^i = -b v^a; upsilon alpha_a = p_i R^i_ab v^b, p_i = v^i
  const Vector x = vec({0.3, -0.6, 1.5, 0.8});
  const double pi = 0.6 * 1.5;
  const Vector ua = red.lagrangian.force().values(x);
  const double sign_a = ua[0] / (pi * 0.8);
  EXPECT_NEAR(std::fabs(sign_a), 1.0, 1e-14);
  EXPECT_NEAR(ua[1], -sign_a * pi * 1.5, 1e-14);
  EXPECT_NEAR(red.lagrangian.lagrangian()(x), (1.5 * 1.5 * (1 + 0.36) + 0.64) / 2, 1e-14);
}

TEST(Caplygin, RobotReduction) {
  const auto r = robot();
  const CaplyginSystem cs(r.lag, r.conn);
  EXPECT_LE(cs.invariance_defect(SampleDomain::cube(4)), 1e-12);
  const auto red = caplygin_reduce(cs, SampleDomain::cube(2, -3, 3));
  for (const auto& x : quasi_random_points(SampleDomain::cube(4, -2, 2), 30)) {
    EXPECT_NEAR(red.lagrangian.lagrangian()(x), 0.15 * x[2] * x[2] + 0.5 * (0.5 + 0.3) * x[3] * x[3], 1e-14);
    EXPECT_LE(red.lagrangian.force().values(x).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_EQ(reduced_tangent_chart(cs)->base_names(), (std::vector<std::string>{"theta", "psi"}));
}

TEST(Caplygin, HorizontalLiftAndChecks) {
  const auto r = robot();
  const CaplyginSystem cs(r.lag, r.conn);
  const auto nc = reduced_tangent_chart(cs);
  const auto y = Section::parse(nc, SectionTarget::vectors, {"1.2", "0.5"});
  const auto yh = horizontal_lift(cs, y);
  const Vector q = vec({0.4, 0, 0, 0});
  const Vector v = yh.values(q);
  EXPECT_EQ(v[0], 1.2);
  EXPECT_EQ(v[1], 0.5);
  EXPECT_NEAR(v[2], 0.5 * 0.5 * std::cos(0.4), 1e-15);
  EXPECT_NEAR(v[3], 0.5 * 0.5 * std::sin(0.4), 1e-15);
  const SampleDomain box({{-3, 3}, {-3, 3}, {-1, 1}, {-1, 1}});
  EXPECT_TRUE(nonholonomic_hj_checks(cs, yh, box).all());
  const auto zero = horizontal_lift(cs, Section::parse(nc, SectionTarget::vectors, {"0", "0"}));
  EXPECT_EQ(zero.values(q).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(nonholonomic_hj_checks(cs, zero, box).all());
  const auto dx = Section::parse(r.tq, SectionTarget::vectors, {"0", "0", "1", "0"});
  const auto rep = nonholonomic_hj_checks(cs, dx, box);
  EXPECT_FALSE(rep.horizontal);
  EXPECT_FALSE(rep.all());
}

TEST(Caplygin, NonConstantBaseFieldFailsEnergy) {
  const auto r = robot();
  const CaplyginSystem cs(r.lag, r.conn);
  const auto nc = reduced_tangent_chart(cs);
  const auto y = Section::parse(nc, SectionTarget::vectors, {"theta", "0"});
  const auto rep = nonholonomic_hj_checks(cs, horizontal_lift(cs, y), SampleDomain::cube(4));
  EXPECT_TRUE(rep.horizontal);
  EXPECT_FALSE(rep.energy_annihilation);
}

TEST(TranslationAction, SingularCoordinatesRejected) {
  EXPECT_ANY_THROW(TranslationAction((Matrix(1, 2) << 1, 1).finished(), (Matrix(1, 2) << 2, 2).finished()));
}

TEST(Caplygin, NonInvariantLagrangianDetected) {
  const auto r = robot();
  const CaplyginSystem cs(parse_field("m/2*(v_x^2 + v_y^2) + J/2*v_theta^2 + x^2*v_psi^2", r.tq), r.conn);
  EXPECT_GT(cs.invariance_defect(SampleDomain::cube(4)), 1e-3);
}
