#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>

#include "commands.hpp"

namespace mechforce::cli {

namespace {

struct Flags {
  std::string config;
  std::string system;
  std::string candidate;
  std::string expect;
  std::string seed;
  std::optional<double> tol;
  std::optional<std::size_t> samples;
  std::string box;
  std::string out;
  bool reproducible = false;
  std::optional<std::size_t> n;
  std::vector<double> kappa, lambda, mu, q0, xi;
  std::vector<std::string> params;
  std::optional<double> t1, step;
};

void add_common(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "YAML system description");
  app->add_option("--system", f.system, "builtin name, or a system of the config file");
  app->add_option("--candidate", f.candidate, "only this candidate");
  app->add_option("--expect", f.expect, "override the expected verdict (strict|weak|none)");
  app->add_option("--seed", f.seed, "sampling seed (decimal or 0x hex)");
  app->add_option("--tol", f.tol, "verification tolerance");
  app->add_option("--samples", f.samples, "number of sample points");
  app->add_option("--box", f.box, "sample box lo:hi,lo:hi,...");
  app->add_option("--out", f.out, "directory for CSV and JSON files");
  app->add_flag("--reproducible", f.reproducible, "write timing_ms = 0");
  app->add_option("--n", f.n, "builtin dimension");
  app->add_option("--kappa", f.kappa, "builtin drag coefficients")->delimiter(',');
  app->add_option("--lambda", f.lambda, "builtin solution parameters")->delimiter(',');
  app->add_option("--mu", f.mu, "builtin momentum value")->delimiter(',');
  app->add_option("--param", f.params, "set a parameter, name=value");
}

std::uint64_t parse_seed(const std::string& s) {
  if (s.empty()) return kDefaultSeed;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(s, &pos, 0);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("--seed: not an integer: '" + s + "'");
  }
}

std::vector<std::pair<double, double>> parse_box(const std::string& s) {
  std::vector<std::pair<double, double>> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    const std::string part = s.substr(start, comma - start);
    const std::size_t colon = part.find(':');
    try {
      if (colon == std::string::npos) throw std::invalid_argument(part);
      std::size_t a = 0, b = 0;
      const std::string ls = part.substr(0, colon), hs = part.substr(colon + 1);
      const double lo = std::stod(ls, &a);
      const double hi = std::stod(hs, &b);
      if (a != ls.size() || b != hs.size()) throw std::invalid_argument(part);
      if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw UsageError("--box: interval '" + part + "' needs finite lo < hi");
      }
      out.emplace_back(lo, hi);
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception&) {
      throw UsageError("--box: expected lo:hi, got '" + part + "'");
    }
    start = comma + 1;
  }
  return out;
}

std::map<std::string, double> parse_params(const std::vector<std::string>& list) {
  std::map<std::string, double> out;
  for (const auto& item : list) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw UsageError("--param: expected name=value, got '" + item + "'");
    }
    try {
      std::size_t pos = 0;
      const std::string vs = item.substr(eq + 1);
      const double v = std::stod(vs, &pos);
      if (pos != vs.size() || !std::isfinite(v)) throw std::invalid_argument(vs);
      out[item.substr(0, eq)] = v;
    } catch (const std::exception&) {
      throw UsageError("--param: bad value in '" + item + "'");
    }
  }
  return out;
}

bool builtin_flags_used(const Flags& f) {
  return f.n || !f.kappa.empty() || !f.lambda.empty() || !f.mu.empty();
}

YAML::Node select_document(const Flags& f) {
  if (!f.config.empty()) {
    if (builtin_flags_used(f)) {
      throw UsageError("--n, --kappa, --lambda and --mu only apply to builtin systems");
    }
    auto docs = load_documents(f.config);
    YAML::Node doc;
    if (f.system.empty()) {
      if (docs.size() != 1) throw UsageError(f.config + ": several systems, pick one with --system");
      doc = docs[0];
    } else {
      for (const auto& d : docs) {
        if (d["system"] && d["system"].as<std::string>() == f.system) doc = d;
      }
      if (!doc) throw UsageError(f.config + ": no system named '" + f.system + "'");
    }
    for (const auto& [k, v] : parse_params(f.params)) doc["params"][k] = format_number(v);
    return doc;
  }
  if (f.system.empty()) throw UsageError("give --config FILE or --system NAME");
  BuiltinArgs a;
  a.n = f.n;
  a.kappa = f.kappa;
  a.lambda = f.lambda;
  a.mu = f.mu;
  a.params = parse_params(f.params);
  return builtin_document(f.system, a);
}

int run_list(const Flags& f, std::ostream& out) {
  nlohmann::ordered_json j;
  j["command"] = "list";
  j["systems"] = nlohmann::ordered_json::array();
  std::vector<YAML::Node> docs;
  std::vector<std::string> summaries;
  if (!f.config.empty()) {
    docs = load_documents(f.config);
    summaries.assign(docs.size(), "");
  } else {
    for (const auto& b : builtin_list()) {
      docs.push_back(builtin_document(b.name, {}));
      summaries.push_back(b.summary);
    }
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const SystemConfig c = parse_config(docs[i]);
    nlohmann::ordered_json s;
    s["name"] = c.name;
    s["kind"] = std::string(to_string(c.kind));
    s["summary"] = summaries[i].empty() ? c.description : summaries[i];
    s["candidates"] = nlohmann::ordered_json::array();
    for (const auto& cand : c.candidates) {
      s["candidates"].push_back({{"name", cand.name}, {"expect", std::string(to_string(cand.expect))}});
    }
    std::vector<std::string> commands{"verify", "integrate"};
    if (c.action || c.connection) commands.emplace_back("reduce");
    s["commands"] = commands;
    j["systems"].push_back(s);
  }
  out << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"mechforce: forced Hamilton-Jacobi verification", "mechforce"};
  app.require_subcommand(1);
  Flags f;
  CLI::App* verify = app.add_subcommand("verify", "check candidate solutions");
  CLI::App* integrate = app.add_subcommand("integrate", "compare lifted and direct flows");
  CLI::App* reduce = app.add_subcommand("reduce", "reduce by a symmetry and check candidates");
  CLI::App* list = app.add_subcommand("list", "show systems and candidates");
  for (CLI::App* s : {verify, integrate, reduce, list}) add_common(s, f);
  integrate->add_option("--q0", f.q0, "initial configuration")->delimiter(',');
  integrate->add_option("--t1", f.t1, "final time");
  integrate->add_option("--step", f.step, "RK4 step");
  reduce->add_option("--xi", f.xi, "single translation generator")->delimiter(',');

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (list->parsed()) return run_list(f, out);
    RunOptions o;
    o.command = verify->parsed() ? "verify" : integrate->parsed() ? "integrate" : "reduce";
    if (!f.candidate.empty()) o.candidate = f.candidate;
    if (!f.expect.empty()) {
      o.expect = verdict_from_string(f.expect);
      if (!o.expect) throw UsageError("--expect must be strict, weak or none");
    }
    o.seed = parse_seed(f.seed);
    if (f.tol) {
      if (!(*f.tol > 0) || !std::isfinite(*f.tol)) throw UsageError("--tol must be positive");
      o.tolerance = f.tol;
    }
    if (f.samples) {
      if (*f.samples == 0) throw UsageError("--samples must be positive");
      o.samples = f.samples;
    }
    o.box = parse_box(f.box);
    if (!f.out.empty()) o.out_dir = f.out;
    o.reproducible = f.reproducible;
    o.q0 = f.q0;
    o.t1 = f.t1;
    o.step = f.step;
    o.xi = f.xi;
    const SystemConfig c = parse_config(select_document(f));
    return run_command(c, o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const YAML::Exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "failure: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mechforce::cli
