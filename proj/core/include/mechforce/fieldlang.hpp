#pragma once

// Derivative-aware scalar fields over a coordinate chart.
//
// Fields are expression trees. Evaluation propagates second-order truncated
// Taylor coefficients (value, gradient, hessian) through the tree, so first
// and second derivatives are exact up to rounding. Trees can also be
// differentiated and substituted structurally, which is how derived objects
// (energies, Rayleigh forces, reduced Hamiltonians) are built.

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mechforce/errors.hpp"

namespace mechforce {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// ---------------------------------------------------------------------------
// Chart

enum class FiberKind {
  none,
  momenta,     // T*Q, fiber coordinates p_i
  velocities,  // TQ, fiber coordinates v^i
  parameters,  // family parameters lambda_i of a complete solution
};

std::string_view to_string(FiberKind kind);

/// Ordered coordinate names of a patch. Slots are numbered base first, then
/// fiber. Parameters are named constants, not coordinates.
class Chart {
 public:
  using Param = std::pair<std::string, double>;

  /// Throws std::invalid_argument on duplicate names, empty base, or fiber
  /// lists whose length differs from the base.
  Chart(std::vector<std::string> base_names, FiberKind fiber_kind,
        std::vector<std::string> fiber_names, std::vector<Param> params = {});

  /// Base-only chart (fiber kind none).
  explicit Chart(std::vector<std::string> base_names,
                 std::vector<Param> params = {});

  std::size_t dim() const noexcept { return base_names_.size(); }
  std::size_t size() const noexcept {
    return base_names_.size() + fiber_names_.size();
  }
  FiberKind fiber_kind() const noexcept { return fiber_kind_; }
  const std::vector<std::string>& base_names() const noexcept {
    return base_names_;
  }
  const std::vector<std::string>& fiber_names() const noexcept {
    return fiber_names_;
  }
  const std::vector<Param>& params() const noexcept { return params_; }

  std::optional<std::size_t> slot(std::string_view name) const;
  std::optional<double> param(std::string_view name) const;
  const std::string& name(std::size_t slot) const;

  bool operator==(const Chart& other) const;
  bool same_coordinates(const Chart& other) const;

 private:
  std::vector<std::string> base_names_;
  FiberKind fiber_kind_;
  std::vector<std::string> fiber_names_;
  std::vector<Param> params_;
};

using ChartPtr = std::shared_ptr<const Chart>;

ChartPtr make_chart(std::vector<std::string> base_names, FiberKind fiber_kind,
                    std::vector<std::string> fiber_names,
                    std::vector<Chart::Param> params = {});

/// Names `prefix1`..`prefixN`.
std::vector<std::string> numbered_names(std::string_view prefix, std::size_t n);

// ---------------------------------------------------------------------------
// Jets

/// Truncated second-order Taylor data. `gradient` is empty below order 1,
/// `hessian` is empty below order 2.
struct Jet {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

// ---------------------------------------------------------------------------
// Expression trees

enum class Func { sin, cos, tan, exp, log, sqrt, abs, sign };

std::string_view to_string(Func f);
std::optional<Func> func_from_name(std::string_view name);

enum class NodeKind {
  constant,
  variable,
  parameter,
  negate,
  add,
  sub,
  mul,
  div,
  pow,
  call,
  primitive,
};

class Expr;
class Primitive;

struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;          // constant / parameter value
  std::size_t slot = 0;        // variable slot
  std::string name;            // variable / parameter name
  Func func = Func::sin;       // call
  std::vector<Expr> args;      // operands
  std::shared_ptr<const Primitive> primitive;
  bool is_constant = true;     // subtree free of variables and primitives
};

/// Immutable, shareable expression tree handle.
class Expr {
 public:
  Expr();  // constant zero
  explicit Expr(std::shared_ptr<const Node> node);

  const Node& node() const noexcept { return *node_; }
  NodeKind kind() const noexcept { return node_->kind; }
  bool is_constant() const noexcept { return node_->is_constant; }
  /// Value of a constant node (not of a general constant subtree).
  std::optional<double> constant_value() const;
  bool is_zero() const;
  bool is_one() const;

  const void* identity() const noexcept { return node_.get(); }

  static Expr constant(double v);
  static Expr variable(std::size_t slot, std::string name);
  static Expr parameter(std::string name, double v);
  static Expr call(Func f, Expr arg);
  static Expr primitive(std::shared_ptr<const Primitive> prim,
                        std::vector<Expr> args);

  // Raw builders keep the exact tree shape (used by the parser).
  static Expr raw_unary(NodeKind kind, Expr a);
  static Expr raw_binary(NodeKind kind, Expr a, Expr b);

 private:
  std::shared_ptr<const Node> node_;
};

// Folding builders: drop additive zeros and multiplicative ones, collapse
// operations between constant nodes. Used for derived expressions.
Expr operator-(const Expr& a);
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr pow(const Expr& base, const Expr& exponent);
Expr operator*(double a, const Expr& b);
Expr operator+(const Expr& a, double b);

/// Sum of a list; zero when empty.
Expr sum(const std::vector<Expr>& terms);

/// Black-box function of its arguments with exact local derivatives up to
/// `max_order()`.
class Primitive {
 public:
  struct Local {
    double value = 0.0;
    Vector gradient;  // size arity when order >= 1
    Matrix hessian;   // arity x arity when order >= 2
  };

  virtual ~Primitive() = default;
  virtual std::string name() const = 0;
  virtual std::size_t arity() const = 0;
  virtual int max_order() const = 0;
  virtual Local evaluate(std::span<const double> args, int order) const = 0;
  /// d/d(arg k) as an expression over `args`. Default: not available.
  virtual Expr partial(std::size_t k, std::span<const Expr> args) const;
};

/// Evaluates the tree at a point of a chart with `num_slots` coordinates.
double evaluate(const Expr& e, std::span<const double> x);
Jet evaluate_jet(const Expr& e, std::span<const double> x, int order);

/// d e / d slot, structurally (chain rule), with light folding.
Expr differentiate(const Expr& e, std::size_t slot);

/// Replace every variable `slot` by `replacement[slot]`. Parameters and
/// constants are kept.
Expr substitute(const Expr& e, std::span<const Expr> replacement);

/// Replace parameters by name (used to turn parameters into coordinates).
Expr substitute_parameters(
    const Expr& e,
    const std::function<std::optional<Expr>(const std::string&)>& lookup);

bool depends_on(const Expr& e, std::size_t slot);

/// Human-readable string. Parsed expressions reprint to text that parses
/// back to the same tree.
std::string to_string(const Expr& e);

// ---------------------------------------------------------------------------
// Parsing

/// Parses `source` against `chart`. Throws ParseError with line/column on
/// syntax errors, unknown identifiers and arity mismatches.
Expr parse_expr(std::string_view source, const Chart& chart);

// ---------------------------------------------------------------------------
// Scalar fields

class ScalarField {
 public:
  ScalarField(ChartPtr chart, Expr expr);

  const Chart& chart() const noexcept { return *chart_; }
  const ChartPtr& chart_ptr() const noexcept { return chart_; }
  const Expr& expr() const noexcept { return expr_; }

  double operator()(const Vector& x) const;
  double value(std::span<const double> x) const;
  Vector gradient(const Vector& x) const;
  Matrix hessian(const Vector& x) const;
  Jet jet(const Vector& x, int order) const;

  ScalarField derivative(std::size_t slot) const;
  ScalarField derivative(std::string_view name) const;

  std::string to_string() const { return mechforce::to_string(expr_); }

 private:
  void check_point(std::size_t n) const;

  ChartPtr chart_;
  Expr expr_;
};

ScalarField constant_field(ChartPtr chart, double v);
ScalarField coordinate_field(ChartPtr chart, std::size_t slot);

ScalarField parse_field(std::string_view source, ChartPtr chart);

using EvalFn = std::function<double(const Vector&)>;
using GradFn = std::function<Vector(const Vector&)>;
using HessFn = std::function<Matrix(const Vector&)>;

/// Wraps user callables. Consistency between the three maps is not checked
/// here; the finite-difference oracle is the tool for that.
ScalarField field_from_callable(EvalFn eval, GradFn grad, HessFn hess,
                                ChartPtr chart, std::string name = "callable");

// ---------------------------------------------------------------------------
// Finite-difference oracle

/// Central differences with step h*(1+|x_i|) per coordinate.
Vector fd_gradient(const std::function<double(const Vector&)>& f,
                   const Vector& x, double h = 1e-5);
Vector fd_gradient(const ScalarField& f, const Vector& x, double h = 1e-5);

/// Central second differences with step h*(1+|x_i|).
Matrix fd_hessian(const std::function<double(const Vector&)>& f,
                  const Vector& x, double h = 1e-4);
Matrix fd_hessian(const ScalarField& f, const Vector& x, double h = 1e-4);

/// Jacobian of a vector map by central differences.
Matrix fd_jacobian(const std::function<Vector(const Vector&)>& f,
                   const Vector& x, double h = 1e-6);

}  // namespace mechforce
