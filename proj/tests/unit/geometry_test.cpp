#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/geometry.hpp"
#include "mechforce/sampling.hpp"

using namespace mechforce;

namespace {

ChartPtr cot(std::size_t n) {
  return make_chart(numbered_names("q", n), FiberKind::momenta, numbered_names("p", n));
}
ChartPtr tan_chart(std::size_t n) {
  return make_chart(numbered_names("q", n), FiberKind::velocities, numbered_names("v", n));
}

}  // namespace

TEST(ExteriorDerivative, ConstantAndDragFormsAreClosed) {
  auto c = cot(2);
  const auto g0 = Section::parse(c, SectionTarget::covectors, {"1.5", "-2"});
  const auto g1 = Section::parse(c, SectionTarget::covectors, {"2*exp(-q1)", "0.5*exp(-3*q2)"});
  const auto pts = quasi_random_points(SampleDomain::cube(2), 20);
  EXPECT_EQ(closedness_sup(g0, pts), 0.0);
  EXPECT_LE(closedness_sup(g1, pts), 1e-15);
}

TEST(ExteriorDerivative, SignConvention) {
  auto c = cot(2);
  const auto g = Section::parse(c, SectionTarget::covectors, {"q2", "0"});
  Vector q(2);
  q << 0.3, -0.8;
  const Matrix m = exterior_derivative(g, q);
  EXPECT_DOUBLE_EQ(m(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(m(1, 0), 1.0);
  EXPECT_DOUBLE_EQ(m(0, 0), 0.0);
  Vector u(2), v(2);
  u << 1, 0;
  v << 0, 1;
  EXPECT_DOUBLE_EQ(pair_two_form(m, u, v), -1.0);
}

TEST(Pullback, DragForce) {
  auto c = cot(2);
  const auto beta = SemibasicForm::parse(c, {"0.5*p1^2", "2*p2^2"});
  const auto g = Section::parse(c, SectionTarget::covectors, {"3*exp(-0.5*q1)", "0.7*exp(-2*q2)"});
  Vector q(2);
  q << 0.4, -0.1;
  const Vector r = pullback_semibasic(g, beta, q);
  EXPECT_NEAR(r[0], 0.5 * 9 * std::exp(-0.4), 1e-14);
  EXPECT_NEAR(r[1], 2 * 0.49 * std::exp(0.4), 1e-14);
  EXPECT_EQ(pullback_semibasic(g, SemibasicForm::zero(c), q).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Pullback, Substitution) {
  auto c = cot(2);
  const auto beta = SemibasicForm::parse(c, {"p1", "0"});
  const auto g = Section::parse(c, SectionTarget::covectors, {"q1", "0"});
  Vector q(2);
  q << 2.0, 5.0;
  const Vector r = pullback_semibasic(g, beta, q);
  EXPECT_DOUBLE_EQ(r[0], 2.0);
  EXPECT_DOUBLE_EQ(r[1], 0.0);
}

TEST(Section, LiftAndFiberDependence) {
  auto c = cot(1);
  const auto g = Section::parse(c, SectionTarget::covectors, {"q1^2"});
  Vector q(1);
  q << 3.0;
  const Vector y = g.lift(q);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 9.0);
  EXPECT_EQ(g.max_fiber_dependence(q), 0.0);
  const auto bad = Section::parse(c, SectionTarget::covectors, {"q1*p1"});
  EXPECT_GT(bad.max_fiber_dependence(q), 1.0);
  EXPECT_DOUBLE_EQ(g.jacobian(q)(0, 0), 6.0);
}

TEST(Differential, OfGeneratingFunction) {
  auto c = cot(2);
  const auto s = parse_field("q1^2*q2 + sin(q2)", c);
  const auto ds = differential(s);
  Vector q(2);
  q << 0.5, 0.2;
  EXPECT_NEAR(ds.values(q)[0], 2 * 0.5 * 0.2, 1e-15);
  EXPECT_NEAR(ds.values(q)[1], 0.25 + std::cos(0.2), 1e-15);
  EXPECT_LE(exterior_derivative(ds, q).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Compose, HamiltonianAlongSection) {
  auto c = cot(1);
  const auto h = parse_field("p1^2/2 + q1", c);
  const auto g = Section::parse(c, SectionTarget::covectors, {"exp(q1)"});
  const auto hg = compose(h, g);
  Vector x(2);
  x << 0.3, 100.0;  // fiber ignored
  EXPECT_NEAR(hg(x), std::exp(0.6) / 2 + 0.3, 1e-15);
  EXPECT_NEAR(hg.gradient(x)[0], std::exp(0.6) + 1, 1e-14);
}

TEST(Morphism, RayleighFibreDerivative) {
  auto t = tan_chart(2);
  const auto beta = SemibasicForm::parse(t, {"2*v1 + 0.5*v2", "0.5*v1 + 3*v2"});
  const auto d = morphism_from_semibasic(beta);
  Vector x(4);
  x << 0.1, 0.2, 1.0, -1.0;
  const Vector y = d(x);
  EXPECT_DOUBLE_EQ(y[0], 0.1);
  EXPECT_DOUBLE_EQ(y[2], 1.5);
  EXPECT_DOUBLE_EQ(y[3], -2.5);
}

TEST(Morphism, RoundTrip) {
  auto t = tan_chart(2);
  const auto beta = SemibasicForm::parse(t, {"v1*q2", "sin(q1)*v2^2"});
  const auto back = semibasic_from_morphism(morphism_from_semibasic(beta));
  for (const auto& x : quasi_random_points(SampleDomain::cube(4), 10)) {
    EXPECT_EQ(back.values(x), beta.values(x));
  }
  const auto zero = morphism_from_semibasic(SemibasicForm::zero(t));
  Vector x = Vector::Ones(4);
  EXPECT_EQ(zero(x).tail(2).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Sampling, DeterministicAndFiltered) {
  SampleDomain d({{-1, 1}, {-1, 1}}, {ExclusionBand{(Vector(2) << 1, -1).finished(), 0.0, 0.2}});
  const auto a = quasi_random_points(d, 50, 7);
  const auto b = quasi_random_points(d, 50, 7);
  const auto c = quasi_random_points(d, 50, 8);
  ASSERT_EQ(a.size(), 50u);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (const auto& x : a) {
    EXPECT_TRUE(d.contains(x));
    EXPECT_GE(std::fabs(x[0] - x[1]), 0.2);
  }
}

TEST(Sampling, ParallelForRethrows) {
  std::vector<int> hit(100, 0);
  parallel_for(100, [&](std::size_t i) { hit[i] = 1; });
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 100);
  EXPECT_THROW(parallel_for(10, [](std::size_t i) {
                 if (i == 3) throw std::runtime_error("x");
               }),
               std::runtime_error);
}
