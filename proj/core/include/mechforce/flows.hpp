#pragma once

// Fixed-step integration and the comparison of base flows lifted through a
// Hamilton-Jacobi solution with the full phase-space flow.

#include <ostream>
#include <string>
#include <vector>

#include "mechforce/hamiltonian.hpp"
#include "mechforce/lagrangian.hpp"

namespace mechforce {

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
  std::string integrator = "rk4";
  double step = 0.0;

  std::size_t size() const noexcept { return times.size(); }
  const Vector& back() const { return states.back(); }

  /// Header `t,x1,...,xm`, then one row per time with %.17g numbers.
  void write_csv(std::ostream& os) const;
};

/// Classical RK4 from t0 to t1 (either direction) with steps of at most
/// `step`; the last step is shortened to land on t1. Throws NonFiniteError
/// with the failure time when the state blows up.
Trajectory integrate(const VectorField& field, const Vector& x0, double t0,
                     double t1, double step);

/// Max norm over times and components. Trajectories must share the grid.
double max_deviation(const Trajectory& a, const Trajectory& b);

struct LiftComparison {
  Trajectory base;    // sigma on Q
  Trajectory lifted;  // gamma o sigma (or X o sigma)
  Trajectory direct;  // flow of the phase-space field from the lifted start
  double deviation = 0.0;
};

/// sigma' = X^gamma(sigma), compared with X_{H,beta} from gamma(q0).
LiftComparison lift_and_compare(const ForcedHamiltonianSystem& sys,
                                const Section& gamma, const Vector& q0,
                                double t1, double step);

/// sigma' = X(sigma), compared with the forced Euler-Lagrange flow from
/// (q0, X(q0)).
LiftComparison lift_and_compare(const ForcedLagrangianSystem& sys,
                                const Section& x, const Vector& q0, double t1,
                                double step);

}  // namespace mechforce
