#pragma once

// Coordinate-level forms on Q, T*Q and TQ.

#include <string>
#include <vector>

#include "mechforce/fieldlang.hpp"

namespace mechforce {

enum class SectionTarget {
  covectors,  // a 1-form gamma on Q
  vectors,    // a vector field X on Q
};

/// A map q -> (gamma_i(q)) or q -> (X^i(q)). Components are fields on a
/// phase chart (fiber coordinates are ignored when evaluating) and must
/// depend on the base coordinates only; see max_fiber_dependence.
class Section {
 public:
  Section(ChartPtr chart, SectionTarget target,
          std::vector<ScalarField> components);

  static Section parse(ChartPtr chart, SectionTarget target,
                       const std::vector<std::string>& sources);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  SectionTarget target() const noexcept { return target_; }
  std::size_t dim() const noexcept { return components_.size(); }
  const std::vector<ScalarField>& components() const noexcept {
    return components_;
  }

  /// (q, 0) padded to the chart size.
  Vector chart_point(const Vector& q) const;
  Vector values(const Vector& q) const;
  /// J(j, i) = d component_j / d q^i
  Matrix jacobian(const Vector& q) const;
  /// (q, components(q)), a point of the phase chart.
  Vector lift(const Vector& q) const;
  /// max |d component / d fiber| at q; zero for a genuine section.
  double max_fiber_dependence(const Vector& q) const;

 private:
  ChartPtr chart_;
  SectionTarget target_;
  std::vector<ScalarField> components_;
};

/// f(q, s(q)) as a field on the chart of `s`. The base names of f's chart
/// must equal those of `s`.
ScalarField compose(const ScalarField& f, const Section& s);

/// The covector section dS.
Section differential(const ScalarField& S);

/// beta_i(x, y) dx^i on T*Q or TQ.
class SemibasicForm {
 public:
  SemibasicForm(ChartPtr chart, std::vector<ScalarField> components);
  static SemibasicForm zero(ChartPtr chart);
  static SemibasicForm parse(ChartPtr chart,
                             const std::vector<std::string>& sources);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  std::size_t dim() const noexcept { return components_.size(); }
  const std::vector<ScalarField>& components() const noexcept {
    return components_;
  }
  Vector values(const Vector& x) const;

 private:
  ChartPtr chart_;
  std::vector<ScalarField> components_;
};

/// D: TQ -> T*Q, (q, v) -> (q, D_i(q, v)). Only the momentum outputs are
/// stored; the base point is preserved by construction.
class FibredMorphism {
 public:
  FibredMorphism(ChartPtr chart, std::vector<ScalarField> components);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  const std::vector<ScalarField>& components() const noexcept {
    return components_;
  }
  /// (q, D(q, v))
  Vector operator()(const Vector& x) const;

 private:
  ChartPtr chart_;
  std::vector<ScalarField> components_;
};

/// M_ij = d gamma_j / d q^i - d gamma_i / d q^j.
Matrix exterior_derivative(const Section& gamma, const Vector& q);

/// Pairing of a 2-form matrix with two vectors: u^T M v.
double pair_two_form(const Matrix& m, const Vector& u, const Vector& v);

/// (gamma* beta)_i = beta_i(q, gamma(q)).
Vector pullback_semibasic(const Section& gamma, const SemibasicForm& beta,
                          const Vector& q);

/// Semibasic forms on TQ and fibred morphisms TQ -> T*Q are the same data.
FibredMorphism morphism_from_semibasic(const SemibasicForm& beta);
SemibasicForm semibasic_from_morphism(const FibredMorphism& d);

/// sup over points of max |M_ij|.
double closedness_sup(const Section& gamma, const std::vector<Vector>& points);

}  // namespace mechforce
