#include "config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace mechforce::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw UsageError(where + ": " + what);
}

double number(const YAML::Node& n, const std::string& where) {
  try {
    const double v = n.as<double>();
    if (!std::isfinite(v)) fail(where, "number must be finite");
    return v;
  } catch (const YAML::Exception&) {
    fail(where, "expected a number");
  }
}

std::string text(const YAML::Node& n, const std::string& where) {
  if (!n.IsScalar()) fail(where, "expected a string");
  return n.as<std::string>();
}

std::vector<std::string> strings(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) fail(where, "expected a list of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(text(n[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<double> numbers(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence()) fail(where, "expected a list of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    out.push_back(number(n[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Vector vector_of(const YAML::Node& n, const std::string& where) {
  const auto v = numbers(n, where);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_of(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence() || n.size() == 0) fail(where, "expected a list of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < n.size(); ++i) {
    rows.push_back(numbers(n[i], where + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size()) {
      fail(where, "rows have different lengths");
    }
  }
  Matrix m(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

std::vector<std::vector<std::string>> string_matrix(const YAML::Node& n,
                                                    const std::string& where,
                                                    std::size_t rows,
                                                    std::size_t cols) {
  if (!n.IsSequence() || n.size() != rows) {
    fail(where, "expected " + std::to_string(rows) + " rows");
  }
  std::vector<std::vector<std::string>> out;
  for (std::size_t i = 0; i < rows; ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    out.push_back(strings(n[i], w));
    if (out.back().size() != cols) {
      fail(w, "expected " + std::to_string(cols) + " entries");
    }
  }
  return out;
}

std::vector<Chart::Param> params_of(const YAML::Node& n, const std::string& where) {
  std::vector<Chart::Param> out;
  if (!n) return out;
  if (!n.IsMap()) fail(where, "expected a mapping of names to numbers");
  for (const auto& kv : n) {
    const auto name = kv.first.as<std::string>();
    out.emplace_back(name, number(kv.second, where + "." + name));
  }
  return out;
}

std::vector<std::pair<double, double>> box_of(const YAML::Node& n,
                                              const std::string& where) {
  if (!n.IsSequence() || n.size() == 0) fail(where, "expected a list of [lo, hi]");
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const auto lh = numbers(n[i], w);
    if (lh.size() != 2) fail(w, "expected [lo, hi]");
    if (!(lh[0] < lh[1])) fail(w, "needs lo < hi");
    out.emplace_back(lh[0], lh[1]);
  }
  return out;
}

SampleDomain domain_of(const YAML::Node& n, const std::string& where,
                       std::size_t dim) {
  if (!n) return {};
  std::vector<std::pair<double, double>> bounds;
  std::vector<ExclusionBand> bands;
  if (n.IsSequence()) {
    bounds = box_of(n, where);
  } else {
    if (!n["box"]) fail(where, "missing 'box'");
    bounds = box_of(n["box"], where + ".box");
    if (const auto ex = n["exclude"]) {
      if (!ex.IsSequence()) fail(where + ".exclude", "expected a list");
      for (std::size_t i = 0; i < ex.size(); ++i) {
        const std::string w = where + ".exclude[" + std::to_string(i) + "]";
        ExclusionBand b;
        b.coefficients = vector_of(ex[i]["coefficients"], w + ".coefficients");
        b.offset = ex[i]["offset"] ? number(ex[i]["offset"], w + ".offset") : 0.0;
        b.radius = number(ex[i]["radius"], w + ".radius");
        if (static_cast<std::size_t>(b.coefficients.size()) != bounds.size()) {
          fail(w, "coefficients do not match the box dimension");
        }
        if (b.radius <= 0) fail(w, "radius must be positive");
        bands.push_back(std::move(b));
      }
    }
  }
  if (dim && bounds.size() != dim) {
    fail(where, "box has dimension " + std::to_string(bounds.size()) +
                    ", expected " + std::to_string(dim));
  }
  return SampleDomain(std::move(bounds), std::move(bands));
}

Verdict expect_of(const YAML::Node& n, const std::string& where) {
  if (!n) fail(where, "missing 'expect' (strict, weak or none)");
  const auto v = verdict_from_string(text(n, where));
  if (!v) fail(where, "expect must be strict, weak or none");
  return *v;
}

std::vector<CandidateConfig> candidates_of(const YAML::Node& n,
                                           const std::string& where,
                                           std::size_t components) {
  std::vector<CandidateConfig> out;
  if (!n) return out;
  if (!n.IsSequence()) fail(where, "expected a list");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    CandidateConfig c;
    c.name = text(n[i]["name"], w + ".name");
    if (!seen.insert(c.name).second) fail(w, "duplicate candidate '" + c.name + "'");
    c.components = strings(n[i]["components"], w + ".components");
    if (c.components.size() != components) {
      fail(w, "expected " + std::to_string(components) + " components");
    }
    c.expect = expect_of(n[i]["expect"], w + ".expect");
    c.params = params_of(n[i]["params"], w + ".params");
    if (n[i]["generating_function"]) {
      c.generating_function =
          text(n[i]["generating_function"], w + ".generating_function");
    }
    out.push_back(std::move(c));
  }
  return out;
}

ReducedDisplay display_of(const YAML::Node& n, const std::string& where,
                          const char* function_key) {
  ReducedDisplay d;
  if (!n) return d;
  if (n[function_key]) d.function = text(n[function_key], where + "." + function_key);
  if (n["force"]) d.force = strings(n["force"], where + ".force");
  return d;
}

std::vector<std::string> default_fiber(const std::vector<std::string>& base,
                                       SystemKind kind) {
  std::vector<std::string> out;
  const char* pre = kind == SystemKind::hamiltonian ? "p" : "v";
  for (const auto& b : base) {
    if (b.size() > 1 && b[0] == 'q') {
      out.push_back(pre + b.substr(1));
    } else if (b == "q") {
      out.emplace_back(pre);
    } else {
      out.push_back(std::string(pre) + "_" + b);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(SystemKind k) {
  switch (k) {
    case SystemKind::hamiltonian: return "hamiltonian";
    case SystemKind::lagrangian: return "lagrangian";
    case SystemKind::caplygin: return "caplygin";
  }
  return "?";
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string document_hash(const YAML::Node& doc) {
  YAML::Emitter em;
  em << doc;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : std::string(em.c_str())) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<YAML::Node> load_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  YAML::Node root;
  try {
    root = YAML::Load(in);
  } catch (const YAML::Exception& e) {
    throw UsageError(path + ": " + e.what());
  }
  if (!root.IsMap()) throw UsageError(path + ": top level must be a mapping");
  std::vector<YAML::Node> out;
  if (root["systems"]) {
    if (!root["systems"].IsSequence()) {
      throw UsageError(path + ": 'systems' must be a list");
    }
    for (const auto& s : root["systems"]) out.push_back(s);
  } else {
    out.push_back(root);
  }
  if (out.empty()) throw UsageError(path + ": no systems");
  return out;
}

SystemConfig parse_config(const YAML::Node& doc) {
  SystemConfig c;
  if (!doc.IsMap()) throw UsageError("system document must be a mapping");
  c.name = doc["system"] ? text(doc["system"], "system") : "unnamed";
  const std::string w = c.name;
  if (doc["description"]) c.description = text(doc["description"], w + ".description");

  const std::string kind = doc["kind"] ? text(doc["kind"], w + ".kind") : "hamiltonian";
  if (kind == "hamiltonian") c.kind = SystemKind::hamiltonian;
  else if (kind == "lagrangian") c.kind = SystemKind::lagrangian;
  else if (kind == "caplygin") c.kind = SystemKind::caplygin;
  else fail(w + ".kind", "unknown kind '" + kind + "'");
  const bool ham = c.kind == SystemKind::hamiltonian;

  c.coordinates = strings(doc["coordinates"], w + ".coordinates");
  if (c.coordinates.empty()) fail(w + ".coordinates", "needs at least one name");
  const std::size_t n = c.coordinates.size();
  const char* fiber_key = ham ? "momenta" : "velocities";
  c.fiber = doc[fiber_key] ? strings(doc[fiber_key], w + "." + fiber_key)
                           : default_fiber(c.coordinates, c.kind);
  if (c.fiber.size() != n) fail(w + "." + fiber_key, "expected one name per coordinate");
  c.params = params_of(doc["params"], w + ".params");

  const char* fkey = ham ? "hamiltonian" : "lagrangian";
  c.function = text(doc[fkey], w + "." + fkey);

  if (const auto f = doc["force"]) {
    if (!f.IsMap() || f.size() != 1) {
      fail(w + ".force", "expected exactly one of semibasic, rayleigh_potential, "
                         "rayleigh_tensor, hamiltonian_tensor");
    }
    if (f["semibasic"]) {
      c.force_kind = ForceKind::semibasic;
      c.force = strings(f["semibasic"], w + ".force.semibasic");
      if (c.force.size() != n) fail(w + ".force.semibasic", "expected one component per coordinate");
    } else if (f["rayleigh_potential"]) {
      if (ham) fail(w + ".force", "rayleigh_potential needs a Lagrangian system");
      c.force_kind = ForceKind::rayleigh_potential;
      c.rayleigh_potential = text(f["rayleigh_potential"], w + ".force.rayleigh_potential");
    } else if (f["rayleigh_tensor"]) {
      if (ham) fail(w + ".force", "rayleigh_tensor needs a Lagrangian system");
      c.force_kind = ForceKind::rayleigh_tensor;
      c.force_tensor = string_matrix(f["rayleigh_tensor"], w + ".force.rayleigh_tensor", n, n);
    } else if (f["hamiltonian_tensor"]) {
      if (!ham) fail(w + ".force", "hamiltonian_tensor needs a Hamiltonian system");
      c.force_kind = ForceKind::hamiltonian_tensor;
      c.force_tensor = string_matrix(f["hamiltonian_tensor"], w + ".force.hamiltonian_tensor", n, n);
    } else {
      fail(w + ".force", "unknown force kind");
    }
  }

  c.domain = domain_of(doc["domain"], w + ".domain", n);
  if (doc["samples"]) {
    const double s = number(doc["samples"], w + ".samples");
    if (s < 1 || s != std::floor(s)) fail(w + ".samples", "must be a positive integer");
    c.samples = static_cast<std::size_t>(s);
  }
  if (doc["tolerance"]) {
    c.tolerance = number(doc["tolerance"], w + ".tolerance");
    if (!(c.tolerance > 0)) fail(w + ".tolerance", "must be positive");
  }

  if (const auto conn = doc["connection"]) {
    if (c.kind != SystemKind::caplygin) fail(w + ".connection", "needs kind caplygin");
    ConnectionConfig cc;
    cc.base = strings(conn["base"], w + ".connection.base");
    cc.fiber = strings(conn["fiber"], w + ".connection.fiber");
    if (cc.base.empty() || cc.fiber.empty() || cc.base.size() + cc.fiber.size() != n) {
      fail(w + ".connection", "base and fiber must split the coordinates");
    }
    std::set<std::string> all(c.coordinates.begin(), c.coordinates.end());
    for (const auto& s : cc.base) {
      if (!all.erase(s)) fail(w + ".connection.base", "unknown or repeated coordinate '" + s + "'");
    }
    for (const auto& s : cc.fiber) {
      if (!all.erase(s)) fail(w + ".connection.fiber", "unknown or repeated coordinate '" + s + "'");
    }
    cc.christoffel = string_matrix(conn["christoffel"], w + ".connection.christoffel",
                                   cc.fiber.size(), cc.base.size());
    cc.fiber_reference = conn["fiber_reference"]
                             ? vector_of(conn["fiber_reference"], w + ".connection.fiber_reference")
                             : Vector(Vector::Zero(static_cast<Eigen::Index>(cc.fiber.size())));
    if (static_cast<std::size_t>(cc.fiber_reference.size()) != cc.fiber.size()) {
      fail(w + ".connection.fiber_reference", "expected one value per fiber coordinate");
    }
    cc.reduced_domain = domain_of(conn["reduced_domain"], w + ".connection.reduced_domain",
                                  cc.base.size());
    cc.display = display_of(conn["display"], w + ".connection.display", "lagrangian");
    c.connection = std::move(cc);
  } else if (c.kind == SystemKind::caplygin) {
    fail(w, "kind caplygin needs a connection block");
  }

  const std::size_t ncomp = c.connection ? c.connection->base.size() : n;
  c.candidates = candidates_of(doc["candidates"], w + ".candidates", ncomp);
  if (c.candidates.empty()) fail(w + ".candidates", "no candidate solutions");

  if (const auto cs = doc["complete_solution"]) {
    if (!ham) fail(w + ".complete_solution", "needs a Hamiltonian system");
    CompleteConfig cc;
    cc.lambdas = strings(cs["lambdas"], w + ".complete_solution.lambdas");
    if (cc.lambdas.size() != n) fail(w + ".complete_solution.lambdas", "expected one name per coordinate");
    cc.components = strings(cs["components"], w + ".complete_solution.components");
    if (cc.components.size() != n) fail(w + ".complete_solution.components", "expected one component per coordinate");
    cc.box = domain_of(cs["box"], w + ".complete_solution.box", n);
    if (cc.box.dim() == 0) fail(w + ".complete_solution", "missing 'box'");
    if (cs["members"]) cc.members = static_cast<std::size_t>(number(cs["members"], w + ".complete_solution.members"));
    cc.expect = expect_of(cs["expect"], w + ".complete_solution.expect");
    c.complete = std::move(cc);
  }

  if (const auto in = doc["integrate"]) {
    IntegrateConfig ic;
    ic.candidate = in["candidate"] ? text(in["candidate"], w + ".integrate.candidate")
                                   : c.candidates.front().name;
    ic.q0 = numbers(in["q0"], w + ".integrate.q0");
    if (in["t1"]) ic.t1 = number(in["t1"], w + ".integrate.t1");
    if (in["step"]) ic.step = number(in["step"], w + ".integrate.step");
    if (in["max_deviation"]) ic.max_deviation = number(in["max_deviation"], w + ".integrate.max_deviation");
    c.integrate = std::move(ic);
  }

  if (const auto a = doc["action"]) {
    if (!ham) fail(w + ".action", "translation reduction needs a Hamiltonian system");
    ActionConfig ac;
    ac.generators = matrix_of(a["generators"], w + ".action.generators");
    if (static_cast<std::size_t>(ac.generators.cols()) != n ||
        static_cast<std::size_t>(ac.generators.rows()) >= n) {
      fail(w + ".action.generators", "expected k < n rows of length n");
    }
    const std::size_t k = static_cast<std::size_t>(ac.generators.rows());
    if (a["complement"]) {
      ac.complement = matrix_of(a["complement"], w + ".action.complement");
      if (static_cast<std::size_t>(ac.complement->rows()) != n - k ||
          static_cast<std::size_t>(ac.complement->cols()) != n) {
        fail(w + ".action.complement", "expected n - k rows of length n");
      }
    }
    if (a["group_coordinates"]) {
      ac.group_coordinates = matrix_of(a["group_coordinates"], w + ".action.group_coordinates");
      if (static_cast<std::size_t>(ac.group_coordinates->rows()) != k ||
          static_cast<std::size_t>(ac.group_coordinates->cols()) != n) {
        fail(w + ".action.group_coordinates", "expected k rows of length n");
      }
    }
    ac.momentum = a["momentum"] ? vector_of(a["momentum"], w + ".action.momentum")
                                : Vector(Vector::Zero(static_cast<Eigen::Index>(k)));
    if (static_cast<std::size_t>(ac.momentum.size()) != k) {
      fail(w + ".action.momentum", "expected one value per generator");
    }
    if (a["reduced_coordinates"]) ac.reduced_coordinates = strings(a["reduced_coordinates"], w + ".action.reduced_coordinates");
    if (a["reduced_momenta"]) ac.reduced_momenta = strings(a["reduced_momenta"], w + ".action.reduced_momenta");
    ac.reduced_domain = domain_of(a["reduced_domain"], w + ".action.reduced_domain", n - k);
    ac.reduced_candidates = candidates_of(a["reduced_candidates"], w + ".action.reduced_candidates", n - k);
    ac.display = display_of(a["display"], w + ".action.display", "hamiltonian");
    c.action = std::move(ac);
  }

  c.hash = document_hash(doc);
  return c;
}

}  // namespace mechforce::cli
