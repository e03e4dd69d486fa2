#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/lagrangian.hpp"

using namespace mechforce;

namespace {

ChartPtr tan_chart(std::size_t n, std::vector<Chart::Param> params = {}) {
  return make_chart(numbered_names("q", n), FiberKind::velocities, numbered_names("v", n),
                    std::move(params));
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST(Energy, KineticAndPotential) {
  auto t = tan_chart(2);
  const auto pts = quasi_random_points(SampleDomain::cube(4), 20);
  const auto kin = parse_field("1.5*v1^2", t);
  const auto pot = parse_field("-cos(q1)*q2", t);
  const auto nat = parse_field("(2*v1^2 + 2*v1*v2 + 2*v2^2)/2 + q1^2*q2", t);
  const auto nat_e = parse_field("(2*v1^2 + 2*v1*v2 + 2*v2^2)/2 - q1^2*q2", t);
  for (const auto& x : pts) {
    EXPECT_NEAR(energy(kin)(x), kin(x), 1e-15);
    EXPECT_NEAR(energy(pot)(x), -pot(x), 1e-15);
    EXPECT_NEAR(energy(nat)(x), nat_e(x), 1e-14);
  }
}

TEST(HessianW, RegularAndSingular) {
  auto t = tan_chart(2);
  const Vector x = vec({0.1, 0.2, 0.3, 0.4});
  const auto w = hessian_W(parse_field("v1^2 + 1.5*v2^2", t), x);
  EXPECT_EQ(w.w, (Matrix(2, 2) << 2, 0, 0, 3).finished());
  EXPECT_TRUE(w.regular);
  EXPECT_FALSE(hessian_W(parse_field("v1 + q2", t), x).regular);
  const auto g = hessian_W(parse_field("(2*v1^2 + 2*v1*v2 + 2*v2^2)/2", t), x);
  EXPECT_NEAR(g.determinant, 3.0, 1e-14);
}

TEST(ForcedEL, FreeAndHarmonic) {
  auto t = tan_chart(1);
  const auto free_sys = ForcedLagrangianSystem::unforced(parse_field("v1^2/2", t));
  EXPECT_EQ(forced_el_field(free_sys, vec({0.3, 1.2})), vec({1.2, 0}));
  const auto osc = ForcedLagrangianSystem::unforced(parse_field("v1^2/2 - q1^2/2", t));
  EXPECT_EQ(forced_el_field(osc, vec({1, 0})), vec({0, -1}));
  const auto sing = ForcedLagrangianSystem::unforced(parse_field("v1", t));
  EXPECT_THROW(forced_el_field(sing, vec({0, 1})), SingularError);
}

TEST(ForcedEL, PendulumWithDrag) {
  auto t = tan_chart(1);
  const ForcedLagrangianSystem sys(parse_field("2*v1^2/2 + cos(q1)", t),
                                   rayleigh_force({parse_field("0.3*v1^2/2", t)}));
  const Vector a = forced_el_field(sys, vec({0.4, 1.5}));
  EXPECT_NEAR(a[1], (-std::sin(0.4) - 0.3 * 1.5) / 2, 1e-15);
}

TEST(Rayleigh, ForcesFromPotentials) {
  auto t = tan_chart(2, {{"k", 2.0}});
  const Vector x = vec({0.1, -0.5, 1.5, -2.0});
  const auto cubic = rayleigh_force({parse_field("k*v1^3/3", t)});
  EXPECT_NEAR(cubic.values(x)[0], 2 * 2.25, 1e-15);
  EXPECT_EQ(cubic.values(x)[1], 0.0);
  EXPECT_EQ(rayleigh_force({parse_field("sin(q1)*q2", t)}).values(x).cwiseAbs().maxCoeff(), 0.0);
  Matrix r(2, 2);
  r << 2, 0.5, 0.5, 1;
  const auto tensor = LinearRayleighTensor::constant(t, r);
  const Vector v = x.tail(2);
  EXPECT_LE((tensor.force().values(x) - r * v).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((rayleigh_force(tensor.potential()).values(x) - r * v).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_TRUE(tensor.symmetric_at({x}));
  Matrix a = r;
  a(0, 1) = 0.0;
  EXPECT_FALSE(LinearRayleighTensor::constant(t, a).symmetric_at({x}));
}

TEST(DissipativeBracket, Examples) {
  auto t = tan_chart(1);
  const auto l = parse_field("v1^2/2", t);
  const Vector x = vec({0.7, -1.2});
  const auto f = coordinate_field(t, 1);
  EXPECT_DOUBLE_EQ(dissipative_bracket(l, f, f, x), 1.0);
  EXPECT_EQ(dissipative_bracket(l, parse_field("sin(q1)", t), parse_field("v1^3", t), x), 0.0);
  auto t3 = tan_chart(1, {{"m", 2.0}, {"k", 0.5}});
  const auto l3 = parse_field("m/2*v1^2", t3);
  const auto fa = parse_field("m*exp(k*q1/m)*v1", t3);
  const auto ray = parse_field("k*v1^3/3", t3);
  EXPECT_NEAR(dissipative_bracket(l3, fa, ray, x), 0.5 * 1.44 * std::exp(0.5 * 0.7 / 2), 1e-14);
  EXPECT_NEAR(motion_constant_residual(l3, {ray}, fa, x), 0.0, 1e-14);
}

TEST(MotionConstant, EnergyAndCoordinate) {
  auto t = tan_chart(1);
  const auto l = parse_field("v1^2/2 - q1^4", t);
  const RayleighPotential none{parse_field("0", t)};
  const Vector x = vec({0.3, 0.9});
  EXPECT_NEAR(motion_constant_residual(l, none, energy(l), x), 0.0, 1e-15);
  const auto free_l = parse_field("v1^2/2", t);
  EXPECT_DOUBLE_EQ(motion_constant_residual(free_l, none, coordinate_field(t, 0), x), 0.9);
}

TEST(Legendre, QuadraticAndInverse) {
  auto t = tan_chart(2);
  const auto l = parse_field("(2*v1^2 + 2*v1*v2 + 2*v2^2)/2", t);
  const Vector y = legendre(l, vec({0, 0, 1, 0}));
  EXPECT_EQ(y, vec({0, 0, 2, 1}));
  EXPECT_LE((legendre_inverse(l, y) - vec({0, 0, 1, 0})).cwiseAbs().maxCoeff(), 1e-14);
  auto t1 = tan_chart(1);
  const auto lm = parse_field("3*v1^2/2", t1);
  EXPECT_EQ(legendre(lm, vec({0.5, 2})), vec({0.5, 6}));
}

TEST(Legendre, NonQuadraticNewton) {
  auto t = tan_chart(1);
  const auto l = parse_field("v1^2/2 + v1^4/4 + q1*v1", t);
  for (double v : {-2.0, -0.1, 0.7, 3.0}) {
    const Vector y = legendre(l, vec({0.2, v}));
    EXPECT_NEAR(legendre_inverse(l, y)[1], v, 1e-12);
  }
}

TEST(Transport, DragLagrangian) {
  auto t = tan_chart(1, {{"m", 2.0}, {"k", 0.5}});
  const ForcedLagrangianSystem sys(parse_field("m/2*v1^2", t),
                                   rayleigh_force({parse_field("k*v1^3/3", t)}));
  const auto ham = to_hamiltonian(sys);
  const auto nat = as_natural(sys.lagrangian(), SampleDomain::cube(1));
  ASSERT_TRUE(nat.has_value());
  const auto cf = to_hamiltonian(*nat, sys.force());
  for (const auto& y : quasi_random_points(SampleDomain::cube(2), 20)) {
    const double p = y[1];
    EXPECT_NEAR(ham.hamiltonian()(y), p * p / 4, 1e-13);
    EXPECT_NEAR(ham.force().values(y)[0], 0.5 / 4 * p * p, 1e-13);
    EXPECT_NEAR(cf.hamiltonian()(y), p * p / 4, 1e-15);
    EXPECT_NEAR(cf.hamiltonian().hessian(y)(1, 1), 0.5, 1e-15);
  }
  const auto zero = to_hamiltonian(ForcedLagrangianSystem::unforced(sys.lagrangian()));
  EXPECT_EQ(zero.force().values(vec({0.1, 0.3})).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Transport, NaturalWithTensor) {
  auto t = tan_chart(2);
  Matrix g(2, 2), r(2, 2);
  g << 2, 0, 0, 2;
  r << 1, 0, 0, 1;
  const NaturalLagrangian nl = NaturalLagrangian::constant_metric(t, g, parse_field("q1*q2", t));
  const auto data = hamiltonian_rayleigh_data(nl, LinearRayleighTensor::constant(t, r));
  const Vector y = vec({0.2, 0.3, 1.0, -2.0});
  EXPECT_LE((data.tensor.at(y) - 0.5 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_NEAR(data.potential(y), 0.25 * 5 / 2, 1e-15);
  EXPECT_LE(rayleigh_consistency_defect(data, nl, {y}), 1e-15);
  const auto h = to_hamiltonian(nl, LinearRayleighTensor::constant(t, r).force());
  EXPECT_NEAR(h.hamiltonian()(y), 0.25 * 5 + 0.06, 1e-15);
  EXPECT_LE((h.force().values(y) - 0.5 * y.tail(2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Transport, IdentityRaising) {
  auto t = tan_chart(2);
  const NaturalLagrangian nl =
      NaturalLagrangian::constant_metric(t, Matrix::Identity(2, 2), parse_field("0", t));
  const auto data = hamiltonian_rayleigh_data(nl, LinearRayleighTensor::constant(t, Matrix::Identity(2, 2)));
  const Vector y = vec({0.2, 0.3, 1.0, -2.0});
  EXPECT_NEAR(data.potential(y), 2.5, 1e-15);
  EXPECT_EQ(data.force.values(y), y.tail(2));
  EXPECT_EQ(legendre_inverse(nl, y), y);
}

TEST(Natural, Detection) {
  auto t = tan_chart(2);
  EXPECT_TRUE(as_natural(parse_field("(1 + q1^2)*v1^2/2 + v2^2 - cos(q2)", t), SampleDomain::cube(2)));
  EXPECT_FALSE(as_natural(parse_field("v1^2/2 + v1^4", t), SampleDomain::cube(2)));
  EXPECT_FALSE(as_natural(parse_field("v1^2/2 + q1*v1", t), SampleDomain::cube(2)));
}

TEST(Natural, PositionDependentInverse) {
  auto t = tan_chart(2);
  const NaturalLagrangian nl(
      t, {{parse_field("2 + q1^2", t), parse_field("q2", t)}, {parse_field("q2", t), parse_field("3", t)}},
      parse_field("0", t));
  const auto inv = nl.inverse_metric();
  const Vector x = vec({0.5, 0.4, 0, 0});
  Matrix gi(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) gi(i, j) = evaluate(inv[i][j], std::span<const double>(x.data(), 4));
  EXPECT_LE((gi * nl.metric(x) - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  const Vector y = vec({0.5, 0.4, 1.0, 2.0});
  const Vector v = legendre_inverse(nl, y);
  EXPECT_LE((nl.metric(y) * v.tail(2) - y.tail(2)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(LegendreSection, Momenta) {
  auto t = tan_chart(1);
  const auto l = parse_field("3*v1^2/2", t);
  const auto x = Section::parse(t, SectionTarget::vectors, {"exp(-q1)"});
  const auto g = legendre_section(l, x);
  EXPECT_EQ(g.target(), SectionTarget::covectors);
  EXPECT_EQ(g.chart().fiber_kind(), FiberKind::momenta);
  EXPECT_NEAR(g.values(vec({0.5}))[0], 3 * std::exp(-0.5), 1e-15);
}

namespace {

const char* kGyro = "(1 + q1^2/4)*v1^2/2 + (2 + sin(q2))*v2^2/2 + 0.3*v1*v2 + v1^4/12 + q2*v1 - cos(q1)";

}  // namespace

TEST(Properties, SecondOrderEquation) {
  auto t = tan_chart(2);
  const ForcedLagrangianSystem sys(parse_field(kGyro, t), rayleigh_force({parse_field("v1^2*v2^2/4 + v2^2", t)}));
  for (const auto& x : quasi_random_points(SampleDomain::cube(4), 50)) {
    const Vector f = forced_el_field(sys, x);
    EXPECT_EQ(f.head(2), x.tail(2));
  }
}

TEST(Properties, ForcedFieldsAreLegendreRelated) {
  auto t = tan_chart(2);
  const ScalarField l = parse_field(kGyro, t);
  const ForcedLagrangianSystem sys(l, rayleigh_force({parse_field("v1^2*v2^2/4 + v2^2", t)}));
  const auto ham = to_hamiltonian(sys);
  const std::function<Vector(const Vector&)> leg = [&](const Vector& x) { return legendre(l, x); };
  for (const auto& x : quasi_random_points(SampleDomain::cube(4), 30)) {
    const Vector pushed = fd_jacobian(leg, x) * forced_el_field(sys, x);
    const Vector xh = forced_vector_field(ham, legendre(l, x));
    EXPECT_LE((pushed - xh).cwiseAbs().maxCoeff(), 1e-8 * (1 + xh.cwiseAbs().maxCoeff()));
  }
}

TEST(Properties, LegendreRoundTripWideVelocities) {
  auto t = tan_chart(2);
  const ScalarField l = parse_field(kGyro, t);
  const SampleDomain box({{-1, 1}, {-1, 1}, {-10, 10}, {-10, 10}});
  for (const auto& x : quasi_random_points(box, 100)) {
    const Vector back = legendre_inverse(l, legendre(l, x));
    EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Properties, NewtonFailureIsReported) {
  auto t = tan_chart(1);
  LegendreOptions o;
  o.max_iterations = 1;
  EXPECT_THROW(legendre_inverse(parse_field("v1^2/2 + v1^4", t), vec({0, 50}), o), ConvergenceError);
}
