#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/fieldlang.hpp"
#include "random_fields.hpp"

using namespace mechforce;

namespace {

ChartPtr phase(std::size_t n = 2) {
  return make_chart(numbered_names("q", n), FiberKind::momenta, numbered_names("p", n),
                    {{"k", 0.5}});
}

Vector point(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return x;
}

}  // namespace

TEST(Chart, SlotsAndParams) {
  auto c = phase();
  EXPECT_EQ(c->dim(), 2u);
  EXPECT_EQ(c->size(), 4u);
  EXPECT_EQ(*c->slot("p1"), 2u);
  EXPECT_FALSE(c->slot("x"));
  EXPECT_DOUBLE_EQ(*c->param("k"), 0.5);
  EXPECT_EQ(c->name(3), "p2");
}

TEST(Chart, RejectsBadNames) {
  EXPECT_THROW(make_chart({"q", "q"}, FiberKind::none, {}), std::invalid_argument);
  EXPECT_THROW(make_chart({}, FiberKind::none, {}), std::invalid_argument);
  EXPECT_THROW(make_chart({"q1", "q2"}, FiberKind::momenta, {"p1"}), std::invalid_argument);
}

TEST(Parse, ValueAndDerivatives) {
  auto c = phase();
  const auto f = parse_field("k*exp(q1)*p1^2 + sin(q2*p2) - 1/(1 + q1^2)", c);
  const Vector x = point({0.3, -0.7, 1.1, 0.4});
  const double v = 0.5 * std::exp(0.3) * 1.21 + std::sin(-0.28) - 1 / 1.09;
  EXPECT_NEAR(f(x), v, 1e-14);
  const Vector g = f.gradient(x);
  EXPECT_NEAR(g[0], 0.5 * std::exp(0.3) * 1.21 + 0.6 / (1.09 * 1.09), 1e-14);
  EXPECT_NEAR(g[1], 0.4 * std::cos(-0.28), 1e-14);
  EXPECT_NEAR(g[2], std::exp(0.3) * 1.1, 1e-14);
  EXPECT_NEAR(g[3], -0.7 * std::cos(-0.28), 1e-14);
  const Matrix h = f.hessian(x);
  EXPECT_NEAR(h(2, 2), std::exp(0.3), 1e-14);
  EXPECT_NEAR(h(1, 3), std::cos(-0.28) - 0.28 * -std::sin(-0.28) * -1.0 * -1.0, 1e-13);
  EXPECT_NEAR((h - h.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Parse, Precedence) {
  auto c = phase(1);
  const Vector x = point({2.0, 3.0});
  // unary minus sits below '^' in the grammar
  EXPECT_DOUBLE_EQ(parse_field("-q1^2", c)(x), 4.0);
  EXPECT_DOUBLE_EQ(parse_field("-(q1^2)", c)(x), -4.0);
  EXPECT_DOUBLE_EQ(parse_field("0 - q1^2", c)(x), -4.0);
  EXPECT_THROW(parse_field("q1^p1^0", c), ParseError);
  EXPECT_DOUBLE_EQ(parse_field("q1 - p1 - 1", c)(x), -2.0);
  EXPECT_DOUBLE_EQ(parse_field("q1/p1*3", c)(x), 2.0);
  EXPECT_DOUBLE_EQ(parse_field("2e-1*q1", c)(x), 0.4);
}

TEST(Parse, ErrorsCarryPosition) {
  auto c = phase(1);
  try {
    parse_field("q1 +\n  foo", c);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.column(), 3u);
  }
  EXPECT_THROW(parse_field("sin(q1, p1)", c), ParseError);
  EXPECT_THROW(parse_field("(q1", c), ParseError);
  EXPECT_THROW(parse_field("q1 +", c), ParseError);
}

TEST(Parse, PrintRoundTrip) {
  auto c = phase();
  mechforce::testing::FieldSource src({"q1", "q2", "p1", "p2"}, 11);
  const Vector x = point({0.2, -0.4, 0.9, 0.1});
  for (int i = 0; i < 30; ++i) {
    const auto f = parse_field(src.next(3), c);
    const auto g = parse_field(f.to_string(), c);
    EXPECT_EQ(g.to_string(), f.to_string());
    EXPECT_EQ(f(x), g(x));
  }
}

TEST(Jet, MatchesFiniteDifferences) {
  auto c = phase();
  mechforce::testing::FieldSource src({"q1", "q2", "p1", "p2"}, 5);
  const Vector x = point({0.3, 0.1, -0.5, 0.8});
  for (int i = 0; i < 40; ++i) {
    const auto f = parse_field(src.next(3), c);
    const Vector g = f.gradient(x);
    EXPECT_LE((g - fd_gradient(f, x)).cwiseAbs().maxCoeff(), 1e-6 * (1 + g.cwiseAbs().maxCoeff()));
    const Matrix h = f.hessian(x);
    EXPECT_LE((h - fd_hessian(f, x)).cwiseAbs().maxCoeff(), 1e-4 * (1 + h.cwiseAbs().maxCoeff()));
  }
}

TEST(Differentiate, AgreesWithJet) {
  auto c = phase();
  mechforce::testing::FieldSource src({"q1", "q2", "p1", "p2"}, 9);
  const Vector x = point({-0.3, 0.6, 0.2, -0.9});
  for (int i = 0; i < 30; ++i) {
    const auto f = parse_field(src.next(3), c);
    const Vector g = f.gradient(x);
    for (std::size_t s = 0; s < 4; ++s) {
      EXPECT_NEAR(f.derivative(s)(x), g[static_cast<Eigen::Index>(s)], 1e-12 * (1 + std::fabs(g[s])));
    }
  }
}

TEST(Substitute, ComposesExpressions) {
  auto c = phase(1);
  const Expr e = parse_expr("q1^2 + p1", *c);
  const std::vector<Expr> rep{parse_expr("sin(p1)", *c), parse_expr("q1", *c)};
  const ScalarField f(c, substitute(e, rep));
  const Vector x = point({0.4, 0.7});
  EXPECT_NEAR(f(x), std::sin(0.7) * std::sin(0.7) + 0.4, 1e-15);
  EXPECT_TRUE(depends_on(f.expr(), 1));
}

TEST(Evaluate, DomainErrors) {
  auto c = phase(1);
  EXPECT_THROW(parse_field("log(q1)", c)(point({-1.0, 0.0})), NonFiniteError);
  EXPECT_THROW(parse_field("1/q1", c)(point({0.0, 0.0})), NonFiniteError);
  EXPECT_THROW(parse_field("q1", c)(point({1.0})), DimensionError);
}

TEST(Folding, DropsNeutralElements) {
  auto c = phase(1);
  const Expr q = Expr::variable(0, "q1");
  EXPECT_EQ(to_string(q * Expr::constant(1.0) + Expr::constant(0.0)), "q1");
  EXPECT_TRUE((Expr::constant(0.0) * q).is_zero());
  EXPECT_EQ(to_string(differentiate(parse_expr("3*q1", *c), 1)), "0");
}

TEST(Callable, WrapsUserMaps) {
  auto c = phase(1);
  const auto f = field_from_callable(
      [](const Vector& x) { return x[0] * x[1]; },
      [](const Vector& x) { return Vector(point({x[1], x[0]})); },
      [](const Vector&) {
        Matrix h(2, 2);
        h << 0, 1, 1, 0;
        return h;
      },
      c, "qp");
  const Vector x = point({2.0, 3.0});
  EXPECT_DOUBLE_EQ(f(x), 6.0);
  EXPECT_DOUBLE_EQ(f.gradient(x)[0], 3.0);
  EXPECT_DOUBLE_EQ(f.hessian(x)(0, 1), 1.0);
  // Composition through a callable keeps exact derivatives.
  const Expr wrapped = substitute(f.expr(), std::vector<Expr>{parse_expr("q1^2", *c),
                                                              parse_expr("p1", *c)});
  const ScalarField g(c, wrapped);
  EXPECT_NEAR(g.gradient(x)[0], 2 * 2.0 * 3.0, 1e-14);
}
