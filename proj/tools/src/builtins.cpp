#include "config.hpp"

#include <sstream>

namespace mechforce::cli {

namespace {

using Strings = std::vector<std::string>;

YAML::Node list(const Strings& items) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (const auto& s : items) n.push_back(s);
  return n;
}

YAML::Node numbers(const std::vector<double>& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  for (double x : v) n.push_back(format_number(x));
  return n;
}

YAML::Node box(std::size_t n, double lo, double hi) {
  YAML::Node b(YAML::NodeType::Sequence);
  for (std::size_t i = 0; i < n; ++i) b.push_back(numbers({lo, hi}));
  return b;
}

YAML::Node candidate(const std::string& name, const Strings& comps,
                     const std::string& expect) {
  YAML::Node c;
  c["name"] = name;
  c["components"] = list(comps);
  c["expect"] = expect;
  return c;
}

std::string num(double v) {
  const std::string s = format_number(v);
  return v < 0 ? "(" + s + ")" : s;
}

std::string idx(const char* p, std::size_t i) { return p + std::to_string(i + 1); }

std::vector<double> sized(const std::vector<double>& given, std::size_t n,
                          const std::vector<double>& fallback,
                          const char* flag) {
  if (given.empty()) return fallback;
  if (given.size() == 1) return std::vector<double>(n, given[0]);
  if (given.size() != n) {
    throw UsageError(std::string("--") + flag + " needs 1 or " +
                     std::to_string(n) + " values");
  }
  return given;
}

double first_or(const std::vector<double>& v, double d, const char* flag) {
  if (v.size() > 1) throw UsageError(std::string("--") + flag + " takes one value here");
  return v.empty() ? d : v[0];
}

void no_extra(const BuiltinArgs& a, bool n, bool kappa, bool lambda, bool mu,
              const std::string& name) {
  auto bad = [&](const char* flag) {
    throw UsageError("--" + std::string(flag) + " does not apply to " + name);
  };
  if (!n && a.n) bad("n");
  if (!kappa && !a.kappa.empty()) bad("kappa");
  if (!lambda && !a.lambda.empty()) bad("lambda");
  if (!mu && !a.mu.empty()) bad("mu");
}

YAML::Node drag_1d(const BuiltinArgs& a) {
  no_extra(a, false, true, true, false, "drag-1d");
  const double k = first_or(a.kappa, 1.0, "kappa");
  const double lam = first_or(a.lambda, 1.0, "lambda");
  YAML::Node d;
  d["system"] = "drag-1d";
  d["description"] = "particle with quadratic drag, H = p^2/(2m), beta = (k/m^2) p^2 dq";
  d["kind"] = "hamiltonian";
  d["coordinates"] = list({"q"});
  d["momenta"] = list({"p"});
  d["params"]["m"] = "1";
  d["params"]["k"] = format_number(k);
  d["params"]["lambda"] = format_number(lam);
  d["params"]["c"] = "1";
  d["hamiltonian"] = "p^2/(2*m)";
  d["force"]["semibasic"] = list({"k/m^2*p^2"});
  d["domain"]["box"] = box(1, -1, 1);
  d["candidates"].push_back(candidate("exact", {"lambda*exp(-k*q/m)"}, "strict"));
  d["candidates"].push_back(candidate("constant", {"c"}, "none"));
  d["complete_solution"]["lambdas"] = list({"l"});
  d["complete_solution"]["components"] = list({"l*exp(-k*q/m)"});
  d["complete_solution"]["box"] = box(1, 0.5, 2);
  d["complete_solution"]["expect"] = "strict";
  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers({0});
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-8";
  return d;
}

YAML::Node drag_nd(const BuiltinArgs& a) {
  no_extra(a, true, true, true, false, "drag-nd");
  const std::size_t n = a.n.value_or(2);
  if (n == 0) throw UsageError("--n must be positive");
  const auto k = sized(a.kappa, n, std::vector<double>(n, 1.0), "kappa");
  const auto lam = sized(a.lambda, n, std::vector<double>(n, 1.0), "lambda");
  YAML::Node d;
  d["system"] = "drag-nd";
  d["description"] = "n particles with quadratic drag, H = |p|^2/2, beta = k_i p_i^2 dq^i";
  d["kind"] = "hamiltonian";
  Strings q, p, h, beta, exact, constant, family, lambdas;
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back(idx("q", i));
    p.push_back(idx("p", i));
    d["params"][idx("k", i)] = format_number(k[i]);
    d["params"][idx("lambda", i)] = format_number(lam[i]);
    h.push_back(idx("p", i) + "^2");
    beta.push_back(idx("k", i) + "*" + idx("p", i) + "^2");
    exact.push_back(idx("lambda", i) + "*exp(-" + idx("k", i) + "*" + idx("q", i) + ")");
    constant.push_back(idx("lambda", i));
    lambdas.push_back(idx("l", i));
    family.push_back(idx("l", i) + "*exp(-" + idx("k", i) + "*" + idx("q", i) + ")");
  }
  std::string hs = h[0];
  for (std::size_t i = 1; i < n; ++i) hs += " + " + h[i];
  d["coordinates"] = list(q);
  d["momenta"] = list(p);
  d["hamiltonian"] = "(" + hs + ")/2";
  d["force"]["semibasic"] = list(beta);
  d["domain"]["box"] = box(n, -1, 1);
  d["candidates"].push_back(candidate("exact", exact, "strict"));
  d["candidates"].push_back(candidate("constant", constant, "none"));
  d["complete_solution"]["lambdas"] = list(lambdas);
  d["complete_solution"]["components"] = list(family);
  d["complete_solution"]["box"] = box(n, 0.5, 2);
  d["complete_solution"]["expect"] = "strict";
  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers(std::vector<double>(n, 0.0));
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-8";
  return d;
}

// Fixed positive masses and a symmetric damping matrix.
double mass(std::size_t i) { return 1.0 + static_cast<double>(i); }
double damping(std::size_t i, std::size_t j) {
  if (i == j) return 0.5 + 0.25 * static_cast<double>(i);
  return 0.2 / static_cast<double>(i + j + 1);
}

std::string row_sum(std::size_t i, std::size_t n, double scale,
                    std::string var = "q") {
  std::string s;
  for (std::size_t j = 0; j < n; ++j) {
    if (j) s += " + ";
    s += num(damping(i, j) * scale) + "*" + idx(var.c_str(), j);
  }
  return "(" + s + ")";
}

YAML::Node homog_ham(const BuiltinArgs& a) {
  no_extra(a, true, false, true, false, "homog-rayleigh-ham");
  const std::size_t n = a.n.value_or(2);
  if (n == 0) throw UsageError("--n must be positive");
  std::vector<double> dl(n);
  for (std::size_t i = 0; i < n; ++i) dl[i] = 1.0 - 0.5 * static_cast<double>(i);
  const auto lam = sized(a.lambda, n, dl, "lambda");
  YAML::Node d;
  d["system"] = "homog-rayleigh-ham";
  d["description"] = "H = g^{ij} p_i p_j / 2 with g = diag(m), beta = R^i_j p_i dq^j";
  d["kind"] = "hamiltonian";
  Strings q, p, exact, unhalved, family, lambdas;
  std::string hs, quad, lin;
  YAML::Node tensor(YAML::NodeType::Sequence);
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back(idx("q", i));
    p.push_back(idx("p", i));
    d["params"][idx("lambda", i)] = format_number(lam[i]);
    if (i) hs += " + ";
    hs += idx("p", i) + "^2/" + num(2 * mass(i));
    Strings row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(num(damping(i, j) / mass(i)));
    tensor.push_back(list(row));
    exact.push_back(idx("lambda", i) + " - " + row_sum(i, n, 1.0));
    unhalved.push_back(idx("lambda", i) + " - " + row_sum(i, n, 2.0));
    lambdas.push_back(idx("l", i));
    family.push_back(idx("l", i) + " - " + row_sum(i, n, 1.0));
    if (i) lin += " + ";
    lin += idx("lambda", i) + "*" + idx("q", i);
    for (std::size_t j = 0; j < n; ++j) {
      quad += " - " + num(0.5 * damping(i, j)) + "*" + idx("q", i) + "*" + idx("q", j);
    }
  }
  d["coordinates"] = list(q);
  d["momenta"] = list(p);
  d["hamiltonian"] = hs;
  d["force"]["hamiltonian_tensor"] = tensor;
  d["domain"]["box"] = box(n, -1, 1);
  auto c = candidate("exact", exact, "strict");
  c["generating_function"] = lin + quad;
  d["candidates"].push_back(c);
  d["candidates"].push_back(candidate("unhalved", unhalved, "none"));
  d["complete_solution"]["lambdas"] = list(lambdas);
  d["complete_solution"]["components"] = list(family);
  d["complete_solution"]["box"] = box(n, -1, 1);
  d["complete_solution"]["expect"] = "strict";
  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers(std::vector<double>(n, 0.0));
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-8";
  return d;
}

YAML::Node homog_lag(const BuiltinArgs& a) {
  no_extra(a, true, false, true, false, "homog-rayleigh-lag");
  const std::size_t n = a.n.value_or(2);
  if (n == 0) throw UsageError("--n must be positive");
  std::vector<double> dl(n);
  for (std::size_t i = 0; i < n; ++i) dl[i] = 1.0 - 0.5 * static_cast<double>(i);
  const auto lam = sized(a.lambda, n, dl, "lambda");
  YAML::Node d;
  d["system"] = "homog-rayleigh-lag";
  d["description"] = "L = g_ij v^i v^j / 2 with g = diag(m), Rayleigh R = R_ij v^i v^j / 2";
  d["kind"] = "lagrangian";
  Strings q, v, exact, unclosed;
  std::string ls;
  YAML::Node tensor(YAML::NodeType::Sequence);
  for (std::size_t i = 0; i < n; ++i) {
    q.push_back(idx("q", i));
    v.push_back(idx("v", i));
    d["params"][idx("lambda", i)] = format_number(lam[i]);
    if (i) ls += " + ";
    ls += num(0.5 * mass(i)) + "*" + idx("v", i) + "^2";
    Strings row;
    for (std::size_t j = 0; j < n; ++j) row.push_back(num(damping(i, j)));
    tensor.push_back(list(row));
    exact.push_back(idx("lambda", i) + " - " + row_sum(i, n, 1.0 / mass(i)));
    unclosed.push_back(exact.back() +
                       (n > 1 ? " + 0.3*" + idx("q", (i + 1) % n) : " + 0.3*q1^2"));
  }
  d["coordinates"] = list(q);
  d["velocities"] = list(v);
  d["lagrangian"] = ls;
  d["force"]["rayleigh_tensor"] = tensor;
  d["domain"]["box"] = box(n, -1, 1);
  d["candidates"].push_back(candidate("exact", exact, "strict"));
  d["candidates"].push_back(candidate("perturbed", unclosed, "none"));
  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers(std::vector<double>(n, 0.0));
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-8";
  return d;
}

// Reduced solutions of (2p - mu) p' = 1/s^3 - mu, the member through the
// point (1, 1 + 1/(2 mu) + lambda).
std::string calogero_exact(const std::string& s) {
  return "mu/2 + sqrt((1 + 1/(2*mu) + lambda - mu/2)^2 + mu*(1 - " + s +
         ") + (1 - 1/" + s + "^2)/2)";
}

std::string calogero_quartic(const std::string& s) {
  return s + " + 1/(2*mu*" + s + "^2) + lambda";
}

YAML::Node calogero(const BuiltinArgs& a) {
  no_extra(a, false, false, true, true, "calogero");
  const double mu = first_or(a.mu, 1.0, "mu");
  const double lam = first_or(a.lambda, 4.0, "lambda");
  if (mu == 0) throw UsageError("--mu must be nonzero");
  YAML::Node d;
  d["system"] = "calogero";
  d["description"] =
      "two-body Calogero with R = (p1 + p2)(dq1 - dq2), reduced by joint translations";
  d["kind"] = "hamiltonian";
  d["coordinates"] = list({"q1", "q2"});
  d["momenta"] = list({"p1", "p2"});
  d["params"]["mu"] = format_number(mu);
  d["params"]["lambda"] = format_number(lam);
  d["hamiltonian"] = "(p1^2 + p2^2 + 1/(q1 - q2)^2)/2";
  YAML::Node t(YAML::NodeType::Sequence);
  t.push_back(list({"1", "-1"}));
  t.push_back(list({"1", "-1"}));
  d["force"]["hamiltonian_tensor"] = t;
  d["domain"]["box"] = box(2, -1, 1);
  YAML::Node band;
  band["coefficients"] = numbers({1, -1});
  band["offset"] = "0";
  band["radius"] = "0.2";
  d["domain"]["exclude"].push_back(band);

  const std::string s = "(q1 - q2)";
  d["candidates"].push_back(candidate(
      "exact", {calogero_exact(s), "mu - (" + calogero_exact(s) + ")"}, "strict"));
  auto quartic = candidate(
      "quartic", {calogero_quartic(s), "mu - (" + calogero_quartic(s) + ")"}, "none");
  quartic["generating_function"] =
      s + "^2/2 - 1/(2*mu*" + s + ") + lambda*" + s + " + mu*q2";
  d["candidates"].push_back(quartic);

  YAML::Node act;
  act["generators"].push_back(numbers({1, 1}));
  act["complement"].push_back(numbers({1, -1}));
  act["momentum"] = numbers({mu});
  act["reduced_coordinates"] = list({"q"});
  act["reduced_momenta"] = list({"p"});
  act["reduced_domain"]["box"] = box(1, -2, 2);
  YAML::Node rband;
  rband["coefficients"] = numbers({1});
  rband["offset"] = "0";
  rband["radius"] = "0.2";
  act["reduced_domain"]["exclude"].push_back(rband);
  act["reduced_candidates"].push_back(candidate("exact", {calogero_exact("q")}, "strict"));
  auto rquartic = candidate("quartic", {calogero_quartic("q")}, "none");
  rquartic["generating_function"] = "q^2/2 - 1/(2*mu*q) + lambda*q";
  act["reduced_candidates"].push_back(rquartic);
  act["display"]["hamiltonian"] = "((mu - p)^2 + p^2 + 1/q^2)/2";
  act["display"]["force"] = list({"mu"});
  d["action"] = act;

  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers({1, 0});
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-7";
  return d;
}

YAML::Node robot(const BuiltinArgs& a) {
  no_extra(a, false, false, true, false, "mobile-robot");
  const auto lam = sized(a.lambda, 2, {1.0, 0.5}, "lambda");
  YAML::Node d;
  d["system"] = "mobile-robot";
  d["description"] = "rolling disk robot: heading theta, wheel angle psi, contact point (x, y)";
  d["kind"] = "caplygin";
  d["coordinates"] = list({"theta", "psi", "x", "y"});
  d["velocities"] = list({"v_theta", "v_psi", "v_x", "v_y"});
  d["params"]["m"] = "2";
  d["params"]["R"] = "0.5";
  d["params"]["J"] = "0.3";
  d["params"]["Jw"] = "0.1";
  d["params"]["lt"] = format_number(lam[0]);
  d["params"]["lp"] = format_number(lam[1]);
  d["lagrangian"] = "m/2*(v_x^2 + v_y^2) + J/2*v_theta^2 + 3*Jw/2*v_psi^2";
  d["domain"]["box"] = YAML::Node(YAML::NodeType::Sequence);
  d["domain"]["box"].push_back(numbers({-3, 3}));
  d["domain"]["box"].push_back(numbers({-3, 3}));
  d["domain"]["box"].push_back(numbers({-1, 1}));
  d["domain"]["box"].push_back(numbers({-1, 1}));
  YAML::Node conn;
  conn["base"] = list({"theta", "psi"});
  conn["fiber"] = list({"x", "y"});
  conn["christoffel"].push_back(list({"0", "-R*cos(theta)"}));
  conn["christoffel"].push_back(list({"0", "-R*sin(theta)"}));
  conn["fiber_reference"] = numbers({0, 0});
  conn["reduced_domain"]["box"].push_back(numbers({-3, 3}));
  conn["reduced_domain"]["box"].push_back(numbers({-3, 3}));
  conn["display"]["lagrangian"] = "J/2*v_theta^2 + (m*R^2 + 3*Jw)/2*v_psi^2";
  conn["display"]["force"] = list({"0", "0"});
  d["connection"] = conn;
  d["candidates"].push_back(candidate("exact", {"lt", "lp"}, "strict"));
  d["candidates"].push_back(candidate("heading", {"theta", "0"}, "none"));
  d["integrate"]["candidate"] = "exact";
  d["integrate"]["q0"] = numbers({0, 0});
  d["integrate"]["t1"] = "1";
  d["integrate"]["step"] = "0.001";
  d["integrate"]["max_deviation"] = "1e-8";
  return d;
}

}  // namespace

const std::vector<BuiltinInfo>& builtin_list() {
  static const std::vector<BuiltinInfo> list = {
      {"drag-1d", "quadratic drag on a line (flags: --kappa, --lambda)"},
      {"drag-nd", "n independent dragged particles (flags: --n, --kappa, --lambda)"},
      {"homog-rayleigh-ham", "linear Rayleigh force, Hamiltonian side (flags: --n, --lambda)"},
      {"homog-rayleigh-lag", "linear Rayleigh force, Lagrangian side (flags: --n, --lambda)"},
      {"calogero", "Calogero pair with a translation-invariant force (flags: --mu, --lambda)"},
      {"mobile-robot", "Caplygin robot reduced to (theta, psi) (flags: --lambda)"},
  };
  return list;
}

YAML::Node builtin_document(const std::string& name, const BuiltinArgs& args) {
  YAML::Node d;
  if (name == "drag-1d") d = drag_1d(args);
  else if (name == "drag-nd") d = drag_nd(args);
  else if (name == "homog-rayleigh-ham") d = homog_ham(args);
  else if (name == "homog-rayleigh-lag") d = homog_lag(args);
  else if (name == "calogero") d = calogero(args);
  else if (name == "mobile-robot") d = robot(args);
  else throw UsageError("unknown builtin system '" + name + "' (see `mechforce list`)");
  for (const auto& [k, v] : args.params) d["params"][k] = format_number(v);
  return d;
}

}  // namespace mechforce::cli
