#pragma once

// System descriptions read from YAML documents, and the builtin registry.

#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mechforce/hj.hpp"

namespace mechforce::cli {

/// Bad input: malformed config, unknown names, invalid flag values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SystemKind { hamiltonian, lagrangian, caplygin };

struct CandidateConfig {
  std::string name;
  std::vector<std::string> components;
  Verdict expect = Verdict::strict;
  std::vector<Chart::Param> params;
  std::optional<std::string> generating_function;
};

struct CompleteConfig {
  std::vector<std::string> lambdas;
  std::vector<std::string> components;
  SampleDomain box;
  std::size_t members = 5;
  Verdict expect = Verdict::strict;
};

struct IntegrateConfig {
  std::string candidate;
  std::vector<double> q0;
  double t1 = 1.0;
  double step = 1e-3;
  double max_deviation = 1e-8;
};

struct ReducedDisplay {
  std::optional<std::string> function;  // h or ell
  std::vector<std::string> force;       // r or upsilon alpha
};

struct ActionConfig {
  Matrix generators;
  std::optional<Matrix> complement;
  std::optional<Matrix> group_coordinates;
  Vector momentum;
  std::vector<std::string> reduced_coordinates;
  std::vector<std::string> reduced_momenta;
  SampleDomain reduced_domain;
  std::vector<CandidateConfig> reduced_candidates;
  ReducedDisplay display;
};

struct ConnectionConfig {
  std::vector<std::string> base;
  std::vector<std::string> fiber;
  std::vector<std::vector<std::string>> christoffel;  // [i][a]
  Vector fiber_reference;
  SampleDomain reduced_domain;
  ReducedDisplay display;
};

enum class ForceKind { none, semibasic, rayleigh_potential, rayleigh_tensor,
                       hamiltonian_tensor };

struct SystemConfig {
  std::string name;
  std::string description;
  SystemKind kind = SystemKind::hamiltonian;
  std::vector<std::string> coordinates;
  std::vector<std::string> fiber;  // momenta or velocities
  std::vector<Chart::Param> params;
  std::string function;            // H or L
  ForceKind force_kind = ForceKind::none;
  std::vector<std::string> force;                    // semibasic components
  std::string rayleigh_potential;
  std::vector<std::vector<std::string>> force_tensor;
  SampleDomain domain;
  std::size_t samples = 200;
  double tolerance = 1e-9;
  std::vector<CandidateConfig> candidates;
  std::optional<CompleteConfig> complete;
  std::optional<IntegrateConfig> integrate;
  std::optional<ActionConfig> action;
  std::optional<ConnectionConfig> connection;
  std::string hash;  // of the effective document
};

std::string_view to_string(SystemKind k);

/// Validates names, sizes and boxes; throws UsageError.
SystemConfig parse_config(const YAML::Node& doc);

/// All system documents of a file: either one mapping or a `systems` list.
std::vector<YAML::Node> load_documents(const std::string& path);

/// FNV-1a of the emitted document, as 16 hex digits.
std::string document_hash(const YAML::Node& doc);

// ---------------------------------------------------------------------------
// Builtins

/// Flag values that shape builtin systems. Empty entries keep defaults.
struct BuiltinArgs {
  std::optional<std::size_t> n;
  std::vector<double> kappa;
  std::vector<double> lambda;
  std::vector<double> mu;
  std::map<std::string, double> params;
};

struct BuiltinInfo {
  std::string name;
  std::string summary;
};

const std::vector<BuiltinInfo>& builtin_list();

/// Document of a builtin; throws UsageError for unknown names.
YAML::Node builtin_document(const std::string& name, const BuiltinArgs& args);

/// "%.17g"
std::string format_number(double v);

}  // namespace mechforce::cli
