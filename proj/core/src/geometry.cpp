#include "mechforce/geometry.hpp"

#include <cmath>

namespace mechforce {

namespace {

void require_same_chart(const ScalarField& f, const ChartPtr& chart,
                        const char* what) {
  if (!f.chart().same_coordinates(*chart)) {
    throw DimensionError(std::string(what) +
                         ": component lives on a different chart");
  }
}

}  // namespace

Section::Section(ChartPtr chart, SectionTarget target,
                 std::vector<ScalarField> components)
    : chart_(std::move(chart)),
      target_(target),
      components_(std::move(components)) {
  if (components_.size() != chart_->dim()) {
    throw DimensionError("section needs " + std::to_string(chart_->dim()) +
                         " components, got " +
                         std::to_string(components_.size()));
  }
  for (const auto& c : components_) require_same_chart(c, chart_, "section");
}

Section Section::parse(ChartPtr chart, SectionTarget target,
                       const std::vector<std::string>& sources) {
  std::vector<ScalarField> comps;
  comps.reserve(sources.size());
  for (const auto& s : sources) comps.push_back(parse_field(s, chart));
  return Section(std::move(chart), target, std::move(comps));
}

Vector Section::chart_point(const Vector& q) const {
  const auto n = static_cast<Eigen::Index>(chart_->dim());
  if (q.size() != n) {
    throw DimensionError("base point of size " + std::to_string(q.size()) +
                         " for a section over " + std::to_string(n) +
                         " coordinates");
  }
  Vector x = Vector::Zero(static_cast<Eigen::Index>(chart_->size()));
  x.head(n) = q;
  return x;
}

Vector Section::values(const Vector& q) const {
  const Vector x = chart_point(q);
  Vector out(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] = components_[i](x);
  }
  return out;
}

Matrix Section::jacobian(const Vector& q) const {
  const Vector x = chart_point(q);
  const auto n = static_cast<Eigen::Index>(chart_->dim());
  Matrix J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    J.row(j) = components_[static_cast<std::size_t>(j)]
                   .gradient(x)
                   .head(n)
                   .transpose();
  }
  return J;
}

Vector Section::lift(const Vector& q) const {
  const auto n = q.size();
  Vector x(2 * n);
  x.head(n) = q;
  x.tail(n) = values(q);
  return x;
}

double Section::max_fiber_dependence(const Vector& q) const {
  const Vector x = chart_point(q);
  const auto n = static_cast<Eigen::Index>(chart_->dim());
  const auto m = static_cast<Eigen::Index>(chart_->size()) - n;
  double worst = 0.0;
  if (m == 0) return worst;
  for (const auto& c : components_) {
    worst = std::max(worst, c.gradient(x).tail(m).cwiseAbs().maxCoeff());
  }
  return worst;
}

ScalarField compose(const ScalarField& f, const Section& s) {
  const Chart& fc = f.chart();
  const Chart& sc = s.chart();
  if (fc.base_names() != sc.base_names()) {
    throw DimensionError("compose: base coordinates differ");
  }
  if (fc.size() != 2 * fc.dim()) {
    throw DimensionError("compose: field must live on a phase chart");
  }
  std::vector<Expr> repl;
  repl.reserve(fc.size());
  for (std::size_t i = 0; i < fc.dim(); ++i) {
    repl.push_back(Expr::variable(i, sc.name(i)));
  }
  for (const auto& c : s.components()) repl.push_back(c.expr());
  return ScalarField(s.chart_ptr(), substitute(f.expr(), repl));
}

Section differential(const ScalarField& S) {
  std::vector<ScalarField> comps;
  for (std::size_t i = 0; i < S.chart().dim(); ++i) {
    comps.push_back(S.derivative(i));
  }
  return Section(S.chart_ptr(), SectionTarget::covectors, std::move(comps));
}

// ---------------------------------------------------------------------------

SemibasicForm::SemibasicForm(ChartPtr chart,
                             std::vector<ScalarField> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (components_.size() != chart_->dim()) {
    throw DimensionError("semibasic form needs " +
                         std::to_string(chart_->dim()) + " components, got " +
                         std::to_string(components_.size()));
  }
  for (const auto& c : components_) {
    require_same_chart(c, chart_, "semibasic form");
  }
}

SemibasicForm SemibasicForm::zero(ChartPtr chart) {
  std::vector<ScalarField> comps(chart->dim(), constant_field(chart, 0.0));
  return SemibasicForm(std::move(chart), std::move(comps));
}

SemibasicForm SemibasicForm::parse(ChartPtr chart,
                                   const std::vector<std::string>& sources) {
  std::vector<ScalarField> comps;
  for (const auto& s : sources) comps.push_back(parse_field(s, chart));
  return SemibasicForm(std::move(chart), std::move(comps));
}

Vector SemibasicForm::values(const Vector& x) const {
  Vector out(static_cast<Eigen::Index>(components_.size()));
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const double v = components_[i](x);
    if (!std::isfinite(v)) throw NonFiniteError("non-finite force component");
    out[static_cast<Eigen::Index>(i)] = v;
  }
  return out;
}

FibredMorphism::FibredMorphism(ChartPtr chart,
                               std::vector<ScalarField> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (chart_->fiber_kind() != FiberKind::velocities) {
    throw DimensionError("fibred morphism must be defined on TQ");
  }
  if (components_.size() != chart_->dim()) {
    throw DimensionError("fibred morphism has wrong number of components");
  }
}

Vector FibredMorphism::operator()(const Vector& x) const {
  const auto n = static_cast<Eigen::Index>(chart_->dim());
  Vector out(2 * n);
  out.head(n) = x.head(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out[n + i] = components_[static_cast<std::size_t>(i)](x);
  }
  return out;
}

FibredMorphism morphism_from_semibasic(const SemibasicForm& beta) {
  return FibredMorphism(beta.chart_ptr(), beta.components());
}

SemibasicForm semibasic_from_morphism(const FibredMorphism& d) {
  return SemibasicForm(d.chart_ptr(), d.components());
}

// ---------------------------------------------------------------------------

Matrix exterior_derivative(const Section& gamma, const Vector& q) {
  const Matrix J = gamma.jacobian(q);  // J(j, i) = d gamma_j / d q^i
  const Matrix M = J.transpose() - J;
  if (!M.allFinite()) throw NonFiniteError("non-finite exterior derivative");
  return M;
}

double pair_two_form(const Matrix& m, const Vector& u, const Vector& v) {
  return u.dot(m * v);
}

Vector pullback_semibasic(const Section& gamma, const SemibasicForm& beta,
                          const Vector& q) {
  if (gamma.dim() != beta.dim()) {
    throw DimensionError("pullback: section and form dimensions differ");
  }
  return beta.values(gamma.lift(q));
}

double closedness_sup(const Section& gamma, const std::vector<Vector>& points) {
  double worst = 0.0;
  for (const auto& q : points) {
    worst = std::max(worst, exterior_derivative(gamma, q).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace mechforce
