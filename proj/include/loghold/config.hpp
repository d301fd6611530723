#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "loghold/geometry.hpp"
#include "loghold/modcont.hpp"
#include "loghold/transport.hpp"

namespace loghold {

/// Parse or validation failure. `line` is 0 when the error is not tied to a line.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0, std::string key = {})
      : std::runtime_error(what), line_(line), key_(std::move(key)) {}
  int line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  int line_;
  std::string key_;
};

struct ConfigValue {
  enum class Type { number, boolean, string, array };
  Type type = Type::number;
  double number = 0.0;
  bool boolean = false;
  std::string string;
  std::vector<ConfigValue> array;
  int line = 0;
};

/// Dotted key -> value. Sections and inline tables are flattened.
using ConfigDocument = std::map<std::string, ConfigValue>;

/// Parses the TOML subset used by experiment configs: `key = value` lines,
/// `[section]` headers, inline tables, arrays (may span lines), strings,
/// numbers, booleans and `#` comments.
ConfigDocument parse_document(std::string_view text);

/// Applies `key=value` to the document. The key must be a schema key; the
/// value uses config syntax, and a bare word is taken as a string.
void apply_override(ConfigDocument& doc, std::string_view assignment);

enum class ExperimentKind { preservation, sandwich, euler_growth, flow_diagnostics, euler_validation, origin_strain };
std::string to_string(ExperimentKind k);

struct BilipschitzSettings {
  int pairs = 0;  ///< 0 disables the check
  double extent = 1.0;
  double max_separation = 0.1;
  double slack = 0.01;
  int refine = 10;  ///< dt / refine for the mu(T) stability check
};

struct LogRatioSettings {
  bool enabled = false;
  double t = 1.0;
  double gamma = 0.5;
  int k_min = 5;  ///< radii exp(-k), k = k_min..k_max
  int k_max = 14;
  int directions = 720;
  int shells = 4;
  double envelope_tol = 1e-9;
};

struct EulerSettings {
  std::string data = "bahouri_chemin";  ///< or "zero"
  int n = 512;
  double half_period = 3.141592653589793;
  double beta = 0.5;
  double t_end = 1.0;
  int output_count = 8;
  double cfl = 0.4;
  double dt = 0.0;  ///< fixed step; 0 selects dt from the CFL target
  double log_gamma = 0.5;
  std::vector<double> seeds{0.02, 0.04};  ///< tracer seeds (r, 2r)
  std::vector<double> strain_cutoffs{0.1, 0.05, 0.025};
  double min_radius_cells = 8.0;
};

struct ValidationSettings {
  int eigen_n = 64;
  int n = 256;
  double t_end = 1.0;
  int modes = 4;
  double cfl = 0.4;
};

struct StrainSettings {
  std::string data = "log_profile";  ///< or "zero"
  double gamma = 1.0;
  double support = 0.5;
  double outer = 0.5;
  std::vector<double> cutoffs{1e-2, 1e-3, 1e-4};
};

struct Tolerances {
  double gap = 0.05;
  double initial = 0.02;
  double sandwich_slack = 0.01;
  double saturation = 0.05;
  double mu_refinement = 1e-6;
  double log_gap = 0.15;
  double strain = 0.10;
  double eigen = 1e-12;
  double curl = 1e-11;
  double divergence = 1e-12;
  double stationary = 1e-10;
  double conservation = 1e-3;
  double symmetry = 1e-10;
  double origin_velocity = 1e-10;
  double origin_value = 1e-12;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::preservation;
  std::string name;
  std::uint64_t seed = 1;
  int jobs = 0;
  std::string output_dir = "out";

  std::string velocity_kind = "zero";
  std::map<std::string, double> velocity_params;

  InitialDataSpec initial;
  bool initial_exponent_follows_modulus = true;

  ModulusKind family = ModulusKind::log_holder;
  std::vector<double> exponents{1.0};

  double t_end = 1.0;
  double dt = 1e-3;
  std::vector<double> outputs{1.0};
  Vec2 tracked_point{};

  std::vector<double> radii;  ///< explicit, or the geometric ladder below
  double ladder_r_max = 0.1;
  double ladder_ratio = 0.5;
  int ladder_count = 0;
  SamplerSpec sampler;
  double plateau_tol = 1e-2;

  BilipschitzSettings bilipschitz;
  LogRatioSettings log_ratio;
  EulerSettings euler;
  ValidationSettings validation;
  StrainSettings strain;
  Tolerances tol;
  std::optional<double> expected_initial;
  std::optional<double> expected_saturation_rate;

  /// Every effective key with its value, sorted; echoed into reports.
  nlohmann::json echo;
};

/// Schema keys with a one-line description.
const std::vector<std::pair<std::string, std::string>>& config_schema();

/// Validates a document against the schema and every module precondition.
ExperimentConfig build_config(const ConfigDocument& doc);
ExperimentConfig parse_config(std::string_view text);

}  // namespace loghold
