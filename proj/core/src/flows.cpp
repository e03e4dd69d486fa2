#include "mechforce/flows.hpp"

#include <cmath>
#include <cstdio>

#include "mechforce/hj.hpp"

namespace mechforce {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Vector checked(const VectorField& f, const Vector& x, double t) {
  Vector k = f(x);
  if (k.size() != x.size()) {
    throw DimensionError("vector field returned " + std::to_string(k.size()) +
                         " components for a state of size " +
                         std::to_string(x.size()));
  }
  if (!k.allFinite()) {
    throw NonFiniteError("non-finite vector field at t = " + fmt17(t));
  }
  return k;
}

Trajectory lift(const Trajectory& base, const std::function<Vector(const Vector&)>& up) {
  Trajectory out;
  out.times = base.times;
  out.step = base.step;
  out.integrator = base.integrator;
  out.states.reserve(base.states.size());
  for (const auto& s : base.states) out.states.push_back(up(s));
  return out;
}

}  // namespace

void Trajectory::write_csv(std::ostream& os) const {
  const std::size_t m = states.empty() ? 0 : static_cast<std::size_t>(states[0].size());
  os << "t";
  for (std::size_t i = 1; i <= m; ++i) os << ",x" << i;
  os << "\n";
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << fmt17(times[k]);
    for (Eigen::Index i = 0; i < states[k].size(); ++i) {
      os << "," << fmt17(states[k][i]);
    }
    os << "\n";
  }
}

Trajectory integrate(const VectorField& field, const Vector& x0, double t0,
                     double t1, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("integration step must be positive");
  }
  if (!std::isfinite(t0) || !std::isfinite(t1)) {
    throw std::invalid_argument("integration interval must be finite");
  }
  if (!x0.allFinite()) throw NonFiniteError("non-finite initial state");
  const double span = t1 - t0;
  const double dir = span < 0 ? -1.0 : 1.0;
  // Round to the nearest whole number of steps when the span is (nearly) a
  // multiple of the step, so grids do not end with a sliver.
  const double ratio = std::fabs(span) / step;
  auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (std::fabs(ratio - static_cast<double>(steps)) > 1e-9 * (1.0 + ratio)) {
    steps = static_cast<std::size_t>(std::ceil(ratio));
  }

  Trajectory out;
  out.step = step;
  out.times.reserve(steps + 1);
  out.states.reserve(steps + 1);
  out.times.push_back(t0);
  out.states.push_back(x0);
  Vector x = x0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = t0 + dir * step * static_cast<double>(k);
    const double tn =
        k + 1 == steps ? t1 : t0 + dir * step * static_cast<double>(k + 1);
    const double h = tn - t;
    const Vector k1 = checked(field, x, t);
    const Vector k2 = checked(field, x + 0.5 * h * k1, t + 0.5 * h);
    const Vector k3 = checked(field, x + 0.5 * h * k2, t + 0.5 * h);
    const Vector k4 = checked(field, x + h * k3, tn);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw NonFiniteError("non-finite state at t = " + fmt17(tn));
    }
    out.times.push_back(tn);
    out.states.push_back(x);
  }
  return out;
}

double max_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size()) {
    throw DimensionError("trajectories have different lengths");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.states[k].size() != b.states[k].size()) {
      throw DimensionError("trajectories have different state sizes");
    }
    worst = std::max(worst, (a.states[k] - b.states[k]).cwiseAbs().maxCoeff());
  }
  return worst;
}

LiftComparison lift_and_compare(const ForcedHamiltonianSystem& sys,
                                const Section& gamma, const Vector& q0,
                                double t1, double step) {
  LiftComparison out;
  const VectorField xg = [&](const Vector& q) {
    return projected_field(sys, gamma, q);
  };
  out.base = integrate(xg, q0, 0.0, t1, step);
  out.lifted = lift(out.base, [&](const Vector& q) { return gamma.lift(q); });
  out.direct = integrate(forced_vector_field(sys), gamma.lift(q0), 0.0, t1, step);
  out.deviation = max_deviation(out.lifted, out.direct);
  return out;
}

LiftComparison lift_and_compare(const ForcedLagrangianSystem& sys,
                                const Section& x, const Vector& q0, double t1,
                                double step) {
  LiftComparison out;
  const VectorField base = [&](const Vector& q) { return x.values(q); };
  const auto up = [&](const Vector& q) {
    Vector z(2 * q.size());
    z.head(q.size()) = q;
    z.tail(q.size()) = x.values(q);
    return z;
  };
  out.base = integrate(base, q0, 0.0, t1, step);
  out.lifted = lift(out.base, up);
  out.direct = integrate(forced_el_field(sys), up(q0), 0.0, t1, step);
  out.deviation = max_deviation(out.lifted, out.direct);
  return out;
}

}  // namespace mechforce
