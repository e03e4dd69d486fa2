#include <gtest/gtest.h>

#include <cmath>

#include "mechforce/hamiltonian.hpp"
#include "mechforce/sampling.hpp"

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

}  // namespace

TEST(HamiltonianField, FreeParticle) {
  auto c = cot(2);
  const auto h = parse_field("(p1^2 + p2^2)/2", c);
  const Vector x = vec({0.3, -0.2, 1.5, -0.5});
  EXPECT_EQ(hamiltonian_vector_field(h, x), vec({1.5, -0.5, 0, 0}));
  EXPECT_EQ(hamiltonian_vector_field(parse_field("3", c), x).cwiseAbs().maxCoeff(), 0.0);
}

TEST(HamiltonianField, InverseSquarePotential) {
  auto c = cot(1);
  const auto h = parse_field("(p1^2 + 1/q1^2)/2", c);
  const Vector x = vec({1.0, 0.0});
  const Vector f = hamiltonian_vector_field(h, x);
  EXPECT_DOUBLE_EQ(f[0], 0.0);
  EXPECT_DOUBLE_EQ(f[1], 1.0);
  const Vector g = fd_gradient(h, x);
  EXPECT_NEAR(f[1], -g[0], 1e-9);
}

TEST(ForcedField, DragDisplay) {
  auto c = cot(1, {{"kappa", 1.0}});
  const ForcedHamiltonianSystem sys(parse_field("p1^2/2", c), SemibasicForm::parse(c, {"kappa*p1^2"}));
  EXPECT_EQ(forced_vector_field(sys, vec({0, 2})), vec({2, -4}));
}

TEST(ForcedField, DragTwoDimensional) {
  auto c = cot(2);
  const ForcedHamiltonianSystem sys(parse_field("(p1^2 + p2^2)/2", c),
                                    SemibasicForm::parse(c, {"p1^2", "p2^2"}));
  EXPECT_EQ(forced_vector_field(sys, vec({0, 0, 1, 2})), vec({1, 2, -1, -4}));
}

TEST(ForcedField, ZeroForceIsHamiltonian) {
  auto c = cot(2);
  const auto h = parse_field("p1^2/2 + sin(q1)*p2 + q2^2", c);
  const auto sys = ForcedHamiltonianSystem::conservative(h);
  for (const auto& x : quasi_random_points(SampleDomain::cube(4), 20)) {
    EXPECT_EQ(forced_vector_field(sys, x), hamiltonian_vector_field(h, x));
  }
}

TEST(PoissonBracket, CanonicalAndInvolution) {
  auto c = cot(2);
  const Vector x = vec({0.2, 0.7, -0.4, 1.1});
  EXPECT_DOUBLE_EQ(poisson_bracket(coordinate_field(c, 0), coordinate_field(c, 2), x), 1.0);
  const auto f1 = parse_field("exp(0.5*q1)*p1", c);
  const auto f2 = parse_field("exp(2*q2)*p2", c);
  EXPECT_EQ(poisson_bracket(f1, f2, x), 0.0);
  const auto g = parse_field("sin(q1*p2) + q2^2*p1", c);
  EXPECT_EQ(poisson_bracket(g, g, x), 0.0);
}

TEST(ExteriorMatrix, IdentityTensor) {
  auto c = cot(2);
  const auto r = LinearHamiltonianRayleigh::constant(c, Matrix::Identity(2, 2));
  const auto em = rayleigh_exterior_matrix(r, vec({0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(em.matrix, -canonical_symplectic_matrix(2));
  EXPECT_TRUE(em.nondegenerate);
  EXPECT_NEAR(em.determinant, 1.0, 1e-15);
}

TEST(ExteriorMatrix, Degenerate) {
  auto c = cot(2);
  const auto zero = rayleigh_exterior_matrix(LinearHamiltonianRayleigh::constant(c, Matrix::Zero(2, 2)),
                                             Vector::Zero(4));
  EXPECT_EQ(zero.matrix.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_FALSE(zero.nondegenerate);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1;
  const auto em = rayleigh_exterior_matrix(LinearHamiltonianRayleigh::constant(c, d), Vector::Zero(4));
  EXPECT_FALSE(em.nondegenerate);
  // d/dp2 lies in the kernel
  EXPECT_EQ((em.matrix * Vector::Unit(4, 3)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(ExteriorMatrix, PositionDependentTensor) {
  auto c = cot(2);
  const LinearHamiltonianRayleigh r(
      c, {{parse_field("1 + q2^2", c), parse_field("0", c)}, {parse_field("q1", c), parse_field("2", c)}});
  const Vector x = vec({0.5, -0.3, 1.2, 0.7});
  const Matrix m = rayleigh_exterior_matrix(r, x).matrix;
  // beta_j = R^k_j p_k; only beta_1 depends on q2
  const double db0_dq2 = 2 * -0.3 * 1.2;
  EXPECT_NEAR(m(1, 0), db0_dq2, 1e-15);
  EXPECT_NEAR(m(0, 1), -db0_dq2, 1e-15);
  EXPECT_NEAR((m + m.transpose()).cwiseAbs().maxCoeff(), 0.0, 1e-15);
  EXPECT_TRUE(r.nondegenerate_at({x}));
}

TEST(HamiltonianRayleigh, CalogeroForceDisplay) {
  auto c = cot(2);
  Matrix rh(2, 2);
  rh << 1, -1, 1, -1;
  const auto beta = LinearHamiltonianRayleigh::constant(c, rh).force();
  for (const auto& y : quasi_random_points(SampleDomain::cube(4), 20)) {
    EXPECT_DOUBLE_EQ(beta.values(y)[0], y[2] + y[3]);
    EXPECT_DOUBLE_EQ(beta.values(y)[1], -(y[2] + y[3]));
  }
}
