#include <benchmark/benchmark.h>

#include <string>

#include "mechforce/flows.hpp"
#include "mechforce/hj.hpp"
#include "mechforce/reduction.hpp"

using namespace mechforce;

namespace {

ForcedHamiltonianSystem drag(std::size_t n) {
  auto c = make_chart(numbered_names("q", n), FiberKind::momenta, numbered_names("p", n));
  std::string h;
  std::vector<std::string> beta;
  for (std::size_t i = 1; i <= n; ++i) {
    h += (i > 1 ? " + " : "") + std::string("p") + std::to_string(i) + "^2";
    beta.push_back("p" + std::to_string(i) + "^2");
  }
  return {parse_field("(" + h + ")/2", c), SemibasicForm::parse(c, beta)};
}

Section drag_gamma(const ForcedHamiltonianSystem& s) {
  std::vector<std::string> g;
  for (std::size_t i = 1; i <= s.dim(); ++i) g.push_back("exp(-q" + std::to_string(i) + ")");
  return Section::parse(s.chart_ptr(), SectionTarget::covectors, g);
}

void BM_JetHessian(benchmark::State& state) {
  auto c = make_chart({"q1", "q2"}, FiberKind::momenta, {"p1", "p2"});
  const auto f = parse_field("exp(sin(q1*p2))*sqrt(1 + q2^2) + p1^2/(2 + cos(q1 + p1))", c);
  Vector x(4);
  x << 0.3, -0.2, 0.7, 1.1;
  for (auto _ : state) benchmark::DoNotOptimize(f.jet(x, 2));
}
BENCHMARK(BM_JetHessian);

void BM_VerifyDrag(benchmark::State& state) {
  const auto s = drag(static_cast<std::size_t>(state.range(0)));
  const auto g = drag_gamma(s);
  for (auto _ : state) benchmark::DoNotOptimize(verify_hamiltonian(s, g));
}
BENCHMARK(BM_VerifyDrag)->Arg(1)->Arg(3)->Arg(6);

void BM_LiftAndCompare(benchmark::State& state) {
  const auto s = drag(2);
  const auto g = drag_gamma(s);
  for (auto _ : state) benchmark::DoNotOptimize(lift_and_compare(s, g, Vector::Zero(2), 1.0, 1e-3));
}
BENCHMARK(BM_LiftAndCompare);

void BM_ReduceCalogero(benchmark::State& state) {
  auto c = make_chart({"q1", "q2"}, FiberKind::momenta, {"p1", "p2"});
  const ForcedHamiltonianSystem s(parse_field("(p1^2 + p2^2 + 1/(q1 - q2)^2)/2", c),
                                  SemibasicForm::parse(c, {"p1 + p2", "-(p1 + p2)"}));
  const TranslationAction a((Matrix(1, 2) << 1, 1).finished(), (Matrix(1, 2) << 1, -1).finished());
  Vector mu(1);
  mu << 1.0;
  InvarianceOptions o;
  o.phase_domain = SampleDomain({{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}},
                                {ExclusionBand{(Vector(4) << 1, -1, 0, 0).finished(), 0.0, 0.2}});
  for (auto _ : state) benchmark::DoNotOptimize(reduce_translation(s, a, mu, {}, o));
}
BENCHMARK(BM_ReduceCalogero);

}  // namespace

BENCHMARK_MAIN();
