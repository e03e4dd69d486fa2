#include "commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mechforce/flows.hpp"
#include "mechforce/reduction.hpp"

namespace mechforce::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr double kDisplayTolerance = 1e-12;

std::vector<Chart::Param> merged(const std::vector<Chart::Param>& base,
                                 const std::vector<Chart::Param>& extra) {
  std::vector<Chart::Param> out;
  for (const auto& p : base) {
    const bool shadowed = std::any_of(extra.begin(), extra.end(),
                                      [&](const auto& e) { return e.first == p.first; });
    if (!shadowed) out.push_back(p);
  }
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

Vector padded(const Vector& q, std::size_t size) {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(size));
  x.head(q.size()) = q;
  return x;
}

json box_json(const SampleDomain& d) {
  json b = json::array();
  for (const auto& [lo, hi] : d.bounds()) b.push_back({lo, hi});
  return b;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json mat_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

json num_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double sup(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Input problems surfacing from the library while building objects.
template <class F>
auto building(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const DimensionError& e) {
    throw UsageError(what + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw UsageError(what + ": " + e.what());
  }
}

std::vector<std::vector<ScalarField>> parse_tensor(
    const std::vector<std::vector<std::string>>& src, const ChartPtr& chart) {
  std::vector<std::vector<ScalarField>> out;
  for (const auto& row : src) {
    std::vector<ScalarField> r;
    for (const auto& e : row) r.push_back(parse_field(e, chart));
    out.push_back(std::move(r));
  }
  return out;
}

SampleDomain with_box(const SampleDomain& d,
                      const std::vector<std::pair<double, double>>& box,
                      std::size_t n) {
  if (box.empty()) return d.dim() ? d : SampleDomain::cube(n);
  if (box.size() != n) {
    throw UsageError("--box has " + std::to_string(box.size()) +
                     " intervals, expected " + std::to_string(n));
  }
  return SampleDomain(box, d.dim() == n ? d.exclusions() : std::vector<ExclusionBand>{});
}

struct Model {
  const SystemConfig* cfg = nullptr;
  ChartPtr phase;
  ChartPtr config;
  std::optional<ForcedHamiltonianSystem> ham;
  std::optional<ForcedLagrangianSystem> lag;
  std::optional<CaplyginSystem> cap;
  SampleDomain domain;
  VerifyOptions verify;
};

Model build_model(const SystemConfig& c, const RunOptions& o) {
  Model m;
  m.cfg = &c;
  const std::size_t n = c.coordinates.size();
  const bool ham = c.kind == SystemKind::hamiltonian;
  m.phase = building(c.name + ": chart", [&] {
    return make_chart(c.coordinates, ham ? FiberKind::momenta : FiberKind::velocities,
                      c.fiber, c.params);
  });
  m.config = building(c.name + ": chart",
                      [&] { return make_chart(c.coordinates, FiberKind::none, {}, c.params); });
  m.domain = with_box(c.domain, o.box, n);
  m.verify.domain = m.domain;
  m.verify.samples = o.samples.value_or(c.samples);
  m.verify.tolerance = o.tolerance.value_or(c.tolerance);
  m.verify.seed = o.seed;

  const std::string where = c.name + ": " + (ham ? "hamiltonian" : "lagrangian");
  const ScalarField f = building(where, [&] { return parse_field(c.function, m.phase); });
  const SemibasicForm force = building(c.name + ": force", [&]() -> SemibasicForm {
    switch (c.force_kind) {
      case ForceKind::none: return SemibasicForm::zero(m.phase);
      case ForceKind::semibasic: return SemibasicForm::parse(m.phase, c.force);
      case ForceKind::hamiltonian_tensor:
        return LinearHamiltonianRayleigh(m.phase, parse_tensor(c.force_tensor, m.phase)).force();
      case ForceKind::rayleigh_potential:
        return rayleigh_force(RayleighPotential{parse_field(c.rayleigh_potential, m.phase)});
      case ForceKind::rayleigh_tensor: {
        LinearRayleighTensor t(m.phase, parse_tensor(c.force_tensor, m.phase));
        std::vector<Vector> pts;
        for (const auto& q : quasi_random_points(m.domain, 20, o.seed)) {
          pts.push_back(padded(q, m.phase->size()));
        }
        if (!t.symmetric_at(pts, 1e-14)) {
          throw std::invalid_argument("rayleigh_tensor must be symmetric");
        }
        return t.force();
      }
    }
    return SemibasicForm::zero(m.phase);
  });
  if (ham) {
    m.ham.emplace(f, force);
  } else {
    m.lag.emplace(f, force);
  }
  if (c.connection) {
    const auto& cc = *c.connection;
    m.cap.emplace(building(c.name + ": connection", [&] {
      std::vector<std::vector<ScalarField>> g;
      for (const auto& row : cc.christoffel) {
        std::vector<ScalarField> r;
        for (const auto& e : row) r.push_back(parse_field(e, m.config));
        g.push_back(std::move(r));
      }
      return CaplyginSystem(f, EhresmannConnection(m.config, cc.base, cc.fiber, std::move(g)),
                            cc.fiber_reference);
    }));
  }
  return m;
}

const CandidateConfig& find_candidate(const std::vector<CandidateConfig>& list,
                                      const std::string& name,
                                      const std::string& system) {
  for (const auto& c : list) {
    if (c.name == name) return c;
  }
  throw UsageError(system + ": no candidate named '" + name + "'");
}

std::vector<const CandidateConfig*> selected(const std::vector<CandidateConfig>& list,
                                             const RunOptions& o,
                                             const std::string& system) {
  std::vector<const CandidateConfig*> out;
  if (o.candidate) {
    out.push_back(&find_candidate(list, *o.candidate, system));
  } else {
    for (const auto& c : list) out.push_back(&c);
  }
  return out;
}

Section candidate_section(const Chart& like, FiberKind kind, SectionTarget target,
                          const std::vector<Chart::Param>& params,
                          const CandidateConfig& cand, const std::string& system) {
  return building(system + ": candidate '" + cand.name + "'", [&] {
    ChartPtr chart = make_chart(like.base_names(), kind, like.fiber_names(),
                                merged(params, cand.params));
    return Section::parse(chart, target, cand.components);
  });
}

json report_fields(const HJReport& r) {
  json j;
  j["closedness_sup"] = num_json(r.closedness_sup);
  j["residual_sup"] = num_json(r.residual_sup);
  j["weak_residual_sup"] = num_json(r.weak_residual_sup);
  j["n_samples"] = r.n_samples;
  return j;
}

// max |dS - gamma| over the domain.
double exactness_sup(const ScalarField& s, const Section& gamma,
                     const SampleDomain& domain, std::size_t samples,
                     std::uint64_t seed) {
  const Section ds = differential(s);
  double worst = 0.0;
  for (const auto& q : quasi_random_points(domain, samples, seed)) {
    worst = std::max(worst, sup(Vector(ds.values(q) - gamma.values(q))));
  }
  return worst;
}

struct Outcome {
  json body;
  bool pass = false;
};

// Runs `f`; analytic failures (non-finite values, singular solves, failed
// Newton) become a failed outcome with an error message.
template <class F>
Outcome guarded(json base, F&& f) {
  try {
    return f(std::move(base));
  } catch (const UsageError&) {
    throw;
  } catch (const ParseError& e) {
    throw UsageError(e.what());
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const Error& e) {
    base["verdict"] = "none";
    base["closedness_sup"] = nullptr;
    base["residual_sup"] = nullptr;
    base["weak_residual_sup"] = nullptr;
    base["error"] = e.what();
    Outcome o;
    o.pass = base.contains("expect") && base["expect"] == "none";
    base["pass"] = o.pass;
    o.body = std::move(base);
    return o;
  }
}

json candidate_head(const CandidateConfig& c, const RunOptions& o) {
  json j;
  j["name"] = c.name;
  j["expect"] = std::string(to_string(o.expect.value_or(c.expect)));
  return j;
}

Outcome verify_hamiltonian_candidate(const Model& m, const CandidateConfig& c,
                                     const RunOptions& o) {
  const Verdict expect = o.expect.value_or(c.expect);
  return guarded(candidate_head(c, o), [&](json j) {
    const Section gamma = candidate_section(*m.phase, FiberKind::momenta,
                                            SectionTarget::covectors,
                                            m.cfg->params, c, m.cfg->name);
    const HJReport r = verify_hamiltonian(*m.ham, gamma, m.verify);
    j["verdict"] = std::string(to_string(r.verdict));
    j.update(report_fields(r));
    bool pass = r.verdict == expect;
    if (c.generating_function) {
      const ScalarField s = building(m.cfg->name + ": generating function", [&] {
        return parse_field(*c.generating_function, gamma.chart_ptr());
      });
      const double e = exactness_sup(s, gamma, m.domain, m.verify.samples, m.verify.seed);
      j["generating_function_sup"] = num_json(e);
      pass = pass && e <= m.verify.tolerance;
    }
    j["pass"] = pass;
    return Outcome{std::move(j), pass};
  });
}

Outcome verify_lagrangian_candidate(const Model& m, const CandidateConfig& c,
                                    const RunOptions& o) {
  const Verdict expect = o.expect.value_or(c.expect);
  return guarded(candidate_head(c, o), [&](json j) {
    const Section x = candidate_section(*m.phase, FiberKind::velocities,
                                        SectionTarget::vectors, m.cfg->params, c,
                                        m.cfg->name);
    const TransportReport t = legendre_transport_check(*m.lag, x, m.verify);
    j["verdict"] = std::string(to_string(t.lagrangian.verdict));
    j.update(report_fields(t.lagrangian));
    j["hamiltonian_verdict"] = std::string(to_string(t.hamiltonian.verdict));
    j["legendre_agree"] = t.agree;
    const bool pass = t.lagrangian.verdict == expect && t.agree;
    j["pass"] = pass;
    return Outcome{std::move(j), pass};
  });
}

struct CaplyginContext {
  CaplyginReduction reduced;
  ChartPtr base_chart;
  SampleDomain base_domain;
};

CaplyginContext caplygin_context(const Model& m) {
  const auto& cc = *m.cfg->connection;
  SampleDomain bd = cc.reduced_domain.dim() ? cc.reduced_domain
                                            : SampleDomain::cube(cc.base.size());
  CaplyginReduction r = caplygin_reduce(*m.cap, bd);
  ChartPtr chart = reduced_tangent_chart(*m.cap);
  return {std::move(r), std::move(chart), std::move(bd)};
}

Outcome verify_caplygin_candidate(const Model& m, const CaplyginContext& ctx,
                                  const CandidateConfig& c, const RunOptions& o) {
  const Verdict expect = o.expect.value_or(c.expect);
  return guarded(candidate_head(c, o), [&](json j) {
    const Section y = candidate_section(*ctx.base_chart, FiberKind::velocities,
                                        SectionTarget::vectors, ctx.base_chart->params(),
                                        c, m.cfg->name);
    const Section yh = horizontal_lift(*m.cap, y);
    const NonholonomicReport nh =
        nonholonomic_hj_checks(*m.cap, yh, m.domain, m.verify.samples,
                               m.verify.tolerance, m.verify.seed);
    VerifyOptions bo = m.verify;
    bo.domain = ctx.base_domain;
    const HJReport red = verify_lagrangian(ctx.reduced.lagrangian, y, bo);
    const Section gy = legendre_section(ctx.reduced.lagrangian.lagrangian(), y,
                                        ctx.reduced.hamiltonian.chart_ptr());
    const HJReport hred = verify_hamiltonian(ctx.reduced.hamiltonian, gy, bo);
    const Verdict v = nh.all() ? Verdict::strict : Verdict::none;
    j["verdict"] = std::string(to_string(v));
    j["closedness_sup"] = num_json(nh.ideal_sup);
    j["residual_sup"] = num_json(std::max(nh.horizontal_sup, nh.energy_sup));
    j["weak_residual_sup"] = num_json(std::max(nh.horizontal_sup, nh.energy_sup));
    j["n_samples"] = m.verify.samples;
    j["horizontal_sup"] = num_json(nh.horizontal_sup);
    j["ideal_sup"] = num_json(nh.ideal_sup);
    j["energy_sup"] = num_json(nh.energy_sup);
    j["reduced_verdict"] = std::string(to_string(red.verdict));
    j["reduced"] = report_fields(red);
    j["reduced_hamiltonian_verdict"] = std::string(to_string(hred.verdict));
    j["reduced_hamiltonian"] = report_fields(hred);
    const bool pass = v == expect;
    j["pass"] = pass;
    return Outcome{std::move(j), pass};
  });
}

json complete_json(const CompleteSolutionReport& r, double tol, Verdict expect,
                   bool* pass) {
  const bool ok = r.all_strict && r.min_abs_det > kNondegeneracyThreshold &&
                  r.bracket_sup <= tol && r.conservation_sup <= tol &&
                  r.roundtrip_sup <= tol;
  const Verdict v = ok ? Verdict::strict : Verdict::none;
  json j;
  j["expect"] = std::string(to_string(expect));
  j["verdict"] = std::string(to_string(v));
  j["members"] = r.members;
  j["all_strict"] = r.all_strict;
  j["residual_sup"] = num_json(r.residual_sup);
  j["closedness_sup"] = num_json(r.closedness_sup);
  j["min_abs_det"] = num_json(r.min_abs_det);
  j["bracket_sup"] = num_json(r.bracket_sup);
  j["conservation_sup"] = num_json(r.conservation_sup);
  j["roundtrip_sup"] = num_json(r.roundtrip_sup);
  *pass = v == expect;
  j["pass"] = *pass;
  return j;
}

json header(const SystemConfig& c, const RunOptions& o, const Model& m) {
  json j;
  j["command"] = o.command;
  j["system"] = c.name;
  j["kind"] = std::string(to_string(c.kind));
  j["config_hash"] = c.hash;
  j["seed"] = o.seed;
  j["tolerance"] = m.verify.tolerance;
  j["samples"] = m.verify.samples;
  j["sample_box"] = box_json(m.domain);
  return j;
}

template <class F>
std::vector<Outcome> each_candidate(const std::vector<const CandidateConfig*>& list,
                                    F&& run) {
  std::vector<std::optional<Outcome>> slots(list.size());
  parallel_for(list.size(), [&](std::size_t i) { slots[i] = run(*list[i]); });
  std::vector<Outcome> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

bool collect(json& j, const std::vector<Outcome>& outcomes) {
  bool pass = true;
  j["candidates"] = json::array();
  for (const auto& o : outcomes) {
    j["candidates"].push_back(o.body);
    pass = pass && o.pass;
  }
  return pass;
}

int cmd_verify(const Model& m, const RunOptions& o, json& j) {
  const auto& c = *m.cfg;
  const auto list = selected(c.candidates, o, c.name);
  bool pass = true;
  if (c.kind == SystemKind::hamiltonian) {
    pass = collect(j, each_candidate(list, [&](const CandidateConfig& cand) {
      return verify_hamiltonian_candidate(m, cand, o);
    }));
    if (c.complete && !o.candidate) {
      const auto& cc = *c.complete;
      // The family chart sees every system parameter.
      const CompleteSolution cs = building(c.name + ": complete_solution", [&] {
        return CompleteSolution::parse(c.coordinates, cc.lambdas, cc.components, cc.box,
                                       c.params);
      });
      bool ok = false;
      try {
        const auto r = verify_complete_solution(cs, *m.ham, m.verify, cc.members);
        j["complete_solution"] = complete_json(r, m.verify.tolerance, cc.expect, &ok);
      } catch (const Error& e) {
        ok = cc.expect == Verdict::none;
        j["complete_solution"] = {{"expect", std::string(to_string(cc.expect))},
                                  {"verdict", "none"},
                                  {"error", e.what()},
                                  {"pass", ok}};
      }
      pass = pass && ok;
    }
  } else if (c.kind == SystemKind::lagrangian) {
    pass = collect(j, each_candidate(list, [&](const CandidateConfig& cand) {
      return verify_lagrangian_candidate(m, cand, o);
    }));
  } else {
    const CaplyginContext ctx = caplygin_context(m);
    pass = collect(j, each_candidate(list, [&](const CandidateConfig& cand) {
      return verify_caplygin_candidate(m, ctx, cand, o);
    }));
  }
  return pass ? 0 : 1;
}

std::string file_stem(const std::string& s) {
  std::string out;
  for (char ch : s) {
    out += (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_') ? ch : '_';
  }
  return out;
}

int cmd_integrate(const Model& m, const RunOptions& o, json& j, std::ostream& err) {
  const auto& c = *m.cfg;
  const std::string name =
      o.candidate ? *o.candidate : (c.integrate ? c.integrate->candidate : c.candidates.front().name);
  const CandidateConfig& cand = find_candidate(c.candidates, name, c.name);
  const std::size_t n = c.connection ? c.connection->base.size() : c.coordinates.size();

  std::vector<double> q0 = o.q0;
  if (q0.empty()) {
    if (c.integrate) q0 = c.integrate->q0;
    else q0.assign(n, 0.0);
  }
  const double t1 = o.t1.value_or(c.integrate ? c.integrate->t1 : 1.0);
  const double step = o.step.value_or(c.integrate ? c.integrate->step : 1e-3);
  const double max_dev = c.integrate ? c.integrate->max_deviation : 1e-8;
  if (q0.size() != n) {
    throw UsageError("initial point needs " + std::to_string(n) + " coordinates");
  }
  if (!(step > 0) || !std::isfinite(step)) throw UsageError("step must be positive");
  if (!std::isfinite(t1)) throw UsageError("t1 must be finite");
  const Vector x0 = Eigen::Map<const Vector>(q0.data(), static_cast<Eigen::Index>(n));

  j["candidate"] = cand.name;
  j["q0"] = vec_json(x0);
  j["t1"] = t1;
  j["step"] = step;
  j["integrator"] = "rk4";
  j["max_deviation"] = max_dev;

  LiftComparison cmp;
  try {
    if (c.kind == SystemKind::hamiltonian) {
      const Section g = candidate_section(*m.phase, FiberKind::momenta,
                                          SectionTarget::covectors, c.params, cand, c.name);
      cmp = lift_and_compare(*m.ham, g, x0, t1, step);
    } else if (c.kind == SystemKind::lagrangian) {
      const Section x = candidate_section(*m.phase, FiberKind::velocities,
                                          SectionTarget::vectors, c.params, cand, c.name);
      cmp = lift_and_compare(*m.lag, x, x0, t1, step);
    } else {
      const CaplyginContext ctx = caplygin_context(m);
      const Section y = candidate_section(*ctx.base_chart, FiberKind::velocities,
                                          SectionTarget::vectors, ctx.base_chart->params(),
                                          cand, c.name);
      j["space"] = "reduced";
      cmp = lift_and_compare(ctx.reduced.lagrangian, y, x0, t1, step);
    }
  } catch (const UsageError&) {
    throw;
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  } catch (const Error& e) {
    err << "integration failed: " << e.what() << "\n";
    j["deviation"] = nullptr;
    j["error"] = e.what();
    j["trajectories"] = json::array();
    j["pass"] = false;
    return 1;
  }

  j["deviation"] = num_json(cmp.deviation);
  j["steps"] = cmp.base.size() - 1;
  json files = json::array();
  const std::filesystem::path dir = o.out_dir.value_or(".");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string stem = file_stem(c.name) + "_" + file_stem(cand.name);
  const std::pair<const char*, const Trajectory*> parts[] = {
      {"base", &cmp.base}, {"lifted", &cmp.lifted}, {"direct", &cmp.direct}};
  for (const auto& [label, traj] : parts) {
    const std::string file = stem + "_" + label + ".csv";
    std::ofstream of(dir / file);
    if (!of) throw UsageError("cannot write " + (dir / file).string());
    traj->write_csv(of);
    files.push_back({{"name", label}, {"file", file}, {"rows", traj->size()}});
  }
  j["trajectories"] = files;
  const bool pass = cmp.deviation <= max_dev;
  j["pass"] = pass;
  return pass ? 0 : 1;
}

// Relative max difference between a computed and a displayed expression,
// sampled over the given phase points.
double display_defect(const ScalarField& got, const ScalarField& want,
                      const std::vector<Vector>& pts) {
  double worst = 0.0;
  for (const auto& x : pts) {
    const double a = got(x), b = want(x);
    worst = std::max(worst, std::fabs(a - b) / (1.0 + std::fabs(b)));
  }
  return worst;
}

std::vector<Vector> phase_points(const SampleDomain& base, const Vector& lo_hi,
                                 std::size_t samples, std::uint64_t seed) {
  const SampleDomain fibre = SampleDomain::cube(base.dim(), lo_hi[0], lo_hi[1]);
  return quasi_random_points(base.product(fibre), samples, seed);
}

json display_check(const ReducedDisplay& d, const ScalarField& f,
                   const SemibasicForm& force, const ChartPtr& chart,
                   const SampleDomain& base, std::uint64_t seed, bool* pass) {
  json j;
  if (!d.function && d.force.empty()) return j;
  Vector lh(2);
  lh << -2.0, 2.0;
  const auto pts = phase_points(base, lh, 100, seed);
  double worst = 0.0;
  if (d.function) {
    const ScalarField want = building("display", [&] { return parse_field(*d.function, chart); });
    const double e = display_defect(f, want, pts);
    j["function_sup"] = num_json(e);
    worst = std::max(worst, e);
  }
  if (!d.force.empty()) {
    if (d.force.size() != force.dim()) throw UsageError("display force has wrong length");
    double e = 0.0;
    for (std::size_t i = 0; i < d.force.size(); ++i) {
      const ScalarField want =
          building("display", [&] { return parse_field(d.force[i], chart); });
      e = std::max(e, display_defect(force.components()[i], want, pts));
    }
    j["force_sup"] = num_json(e);
    worst = std::max(worst, e);
  }
  *pass = worst <= kDisplayTolerance;
  j["pass"] = *pass;
  return j;
}

json invariance_json(const InvarianceReport& r, double tol) {
  return {{"hamiltonian_sup", r.hamiltonian_sup},
          {"force_sup", r.force_sup},
          {"dforce_sup", r.dforce_sup},
          {"invariant", r.invariant(tol)}};
}

int cmd_reduce_translation(const Model& m, const RunOptions& o, json& j,
                           std::ostream& err) {
  const auto& c = *m.cfg;
  const std::size_t n = c.coordinates.size();
  ActionConfig ac;
  if (!o.xi.empty()) {
    if (o.xi.size() != n) throw UsageError("--xi needs " + std::to_string(n) + " entries");
    ac.generators = Eigen::Map<const Vector>(o.xi.data(), static_cast<Eigen::Index>(n)).transpose();
    ac.momentum = Vector::Zero(1);
    if (c.action && c.action->generators.rows() == 1) ac.momentum = c.action->momentum;
  } else if (c.action) {
    ac = *c.action;
  } else {
    throw UsageError(c.name + ": reduce needs an action block or --xi");
  }
  const TranslationAction action = building(c.name + ": action", [&] {
    return TranslationAction(ac.generators, ac.complement, ac.group_coordinates);
  });
  InvarianceOptions io;
  io.samples = m.verify.samples;
  io.seed = m.verify.seed;
  io.tolerance = std::min(1e-10, m.verify.tolerance);
  j["generators"] = mat_json(action.generators());
  j["complement"] = mat_json(action.complement());
  j["group_coordinates"] = mat_json(action.group_coordinates());
  j["momentum"] = vec_json(ac.momentum);
  json inv = json::array();
  for (Eigen::Index a = 0; a < action.generators().rows(); ++a) {
    inv.push_back(invariance_json(
        invariance_report(*m.ham, action.generators().row(a).transpose(), io), io.tolerance));
  }
  j["invariance"] = inv;

  std::optional<ReducedSystem> red;
  try {
    red.emplace(reduce_translation(*m.ham, action, ac.momentum,
                                   {ac.reduced_coordinates, ac.reduced_momenta}, io));
  } catch (const InvarianceError& e) {
    err << "reduction failed: " << e.what() << "\n";
    j["error"] = e.what();
    j["pass"] = false;
    return 1;
  } catch (const DimensionError& e) {
    throw UsageError(e.what());
  }
  const ChartPtr& rc = red->system.chart_ptr();
  json rj;
  rj["coordinates"] = rc->base_names();
  rj["momenta"] = rc->fiber_names();
  rj["hamiltonian"] = red->system.hamiltonian().to_string();
  json rf = json::array();
  for (const auto& f : red->system.force().components()) rf.push_back(f.to_string());
  rj["force"] = rf;
  j["reduced"] = rj;

  const std::size_t mdim = rc->dim();
  const SampleDomain rdom = ac.reduced_domain.dim() ? ac.reduced_domain : SampleDomain::cube(mdim);
  bool pass = true;
  bool dpass = true;
  json dj = display_check(ac.display, red->system.hamiltonian(), red->system.force(),
                          rc, rdom, m.verify.seed, &dpass);
  if (!dj.empty()) j["display"] = dj;
  pass = pass && dpass;

  VerifyOptions ro = m.verify;
  ro.domain = rdom;
  const auto list = o.xi.empty() ? selected(ac.reduced_candidates, o, c.name)
                                 : std::vector<const CandidateConfig*>{};
  const auto outcomes = each_candidate(list, [&](const CandidateConfig& cand) {
    return guarded(candidate_head(cand, o), [&](json cj) {
      const Verdict expect = o.expect.value_or(cand.expect);
      const Section g = candidate_section(*rc, FiberKind::momenta, SectionTarget::covectors,
                                          rc->params(), cand, c.name);
      const HJReport r = verify_hamiltonian(red->system, g, ro);
      cj["verdict"] = std::string(to_string(r.verdict));
      cj.update(report_fields(r));
      const Section full = reconstruct_solution(action, ac.momentum, g, m.phase);
      const HJReport fr = verify_hamiltonian(*m.ham, full, m.verify);
      cj["reconstructed"] = {{"verdict", std::string(to_string(fr.verdict))}};
      cj["reconstructed"].update(report_fields(fr));
      bool ok = r.verdict == expect && fr.verdict == expect;
      if (cand.generating_function) {
        const ScalarField s = building(c.name + ": generating function", [&] {
          return parse_field(*cand.generating_function, g.chart_ptr());
        });
        const double e = exactness_sup(s, g, rdom, ro.samples, ro.seed);
        const ScalarField fs = reconstruct_generating_function(action, ac.momentum, s, m.phase);
        const double fe = exactness_sup(fs, full, m.domain, ro.samples, ro.seed);
        cj["generating_function_sup"] = num_json(e);
        cj["reconstructed"]["generating_function_sup"] = num_json(fe);
        ok = ok && e <= ro.tolerance && fe <= ro.tolerance;
      }
      cj["pass"] = ok;
      return Outcome{std::move(cj), ok};
    });
  });
  pass = collect(j, outcomes) && pass;
  return pass ? 0 : 1;
}

int cmd_reduce_caplygin(const Model& m, const RunOptions& o, json& j) {
  const auto& c = *m.cfg;
  const auto& cc = *c.connection;
  const double defect = m.cap->invariance_defect(m.domain, 100, m.verify.seed);
  j["invariance_defect"] = num_json(defect);
  if (!(defect <= m.verify.tolerance)) {
    j["error"] = "Lagrangian is not invariant under the fiber translations";
    j["pass"] = false;
    return 1;
  }
  const CaplyginContext ctx = caplygin_context(m);
  const auto& red = ctx.reduced.lagrangian;
  json rj;
  rj["coordinates"] = ctx.base_chart->base_names();
  rj["velocities"] = ctx.base_chart->fiber_names();
  rj["lagrangian"] = red.lagrangian().to_string();
  json rf = json::array();
  for (const auto& f : red.force().components()) rf.push_back(f.to_string());
  rj["force"] = rf;
  rj["hamiltonian"] = ctx.reduced.hamiltonian.hamiltonian().to_string();
  j["reduced"] = rj;

  bool dpass = true;
  json dj = display_check(cc.display, red.lagrangian(), red.force(), ctx.base_chart,
                          ctx.base_domain, m.verify.seed, &dpass);
  if (!dj.empty()) j["display"] = dj;

  json table = json::array();
  const auto& conn = m.cap->connection();
  for (const auto& q : quasi_random_points(m.domain, 5, m.verify.seed)) {
    json row;
    row["q"] = vec_json(q);
    json per = json::object();
    const auto curv = caplygin_curvature(conn, q);
    for (std::size_t i = 0; i < curv.size(); ++i) per[cc.fiber[i]] = mat_json(curv[i]);
    row["curvature"] = per;
    table.push_back(row);
  }
  j["curvature"] = table;

  const auto list = selected(c.candidates, o, c.name);
  const bool cpass = collect(j, each_candidate(list, [&](const CandidateConfig& cand) {
    return verify_caplygin_candidate(m, ctx, cand, o);
  }));
  return cpass && dpass ? 0 : 1;
}

}  // namespace

int run_command(const SystemConfig& config, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const Model m = build_model(config, options);
  json j = header(config, options, m);
  int code = 0;
  if (options.command == "verify") {
    code = cmd_verify(m, options, j);
  } else if (options.command == "integrate") {
    code = cmd_integrate(m, options, j, err);
  } else if (options.command == "reduce") {
    if (config.kind == SystemKind::caplygin) {
      code = cmd_reduce_caplygin(m, options, j);
    } else if (config.kind == SystemKind::hamiltonian) {
      code = cmd_reduce_translation(m, options, j, err);
    } else {
      throw UsageError(config.name + ": reduce needs a Hamiltonian or Caplygin system");
    }
  } else {
    throw UsageError("unknown command '" + options.command + "'");
  }
  const auto ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start).count();
  j["timing_ms"] = options.reproducible ? 0.0 : ms;
  j["status"] = code == 0 ? "pass" : "fail";
  const std::string text = j.dump(2) + "\n";
  out << text;
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    std::ofstream of(std::filesystem::path(*options.out_dir) /
                     (file_stem(config.name) + "_" + options.command + ".json"));
    of << text;
  }
  return code;
}

}  // namespace mechforce::cli
