#include "loghold/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "loghold/fields.hpp"

namespace loghold {

// ---------------------------------------------------------------------------
// Syntax

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

bool is_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'; }

void check_key(const std::string& key, int line) {
  if (key.empty() || key.front() == '.' || key.back() == '.' || key.find("..") != std::string::npos ||
      !std::all_of(key.begin(), key.end(), is_key_char))
    throw ConfigError("line " + std::to_string(line) + ": invalid key '" + key + "'", line, key);
}

// Removes a trailing comment, respecting quoted strings.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (c == '\\' && quoted) {
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (c == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

class ValueParser {
 public:
  ValueParser(std::string_view text, int line, bool bare_strings)
      : s_(text), line_(line), bare_(bare_strings) {}

  // Parses one value into `out`; inline tables are flattened under `prefix`.
  void parse(const std::string& prefix, ConfigDocument& out) {
    skip();
    if (peek() == '{') {
      parse_table(prefix, out);
    } else {
      insert(out, prefix, value());
    }
    skip();
    if (pos_ != s_.size()) fail("unexpected trailing characters");
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
  int line_;
  bool bare_;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + msg, line_);
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  void insert(ConfigDocument& out, const std::string& key, ConfigValue v) {
    check_key(key, line_);
    if (out.count(key)) throw ConfigError("line " + std::to_string(line_) + ": duplicate key '" + key + "'", line_, key);
    out.emplace(key, std::move(v));
  }

  void parse_table(const std::string& prefix, ConfigDocument& out) {
    ++pos_;  // '{'
    skip();
    if (peek() == '}') {
      ++pos_;
      return;
    }
    while (true) {
      skip();
      const std::size_t start = pos_;
      while (pos_ < s_.size() && is_key_char(s_[pos_])) ++pos_;
      const std::string key = std::string(s_.substr(start, pos_ - start));
      skip();
      if (peek() != '=') fail("expected '=' in inline table");
      ++pos_;
      skip();
      const std::string full = prefix + "." + key;
      if (peek() == '{') {
        parse_table(full, out);
      } else {
        insert(out, full, value());
      }
      skip();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == '}') {
        ++pos_;
        return;
      }
      fail("expected ',' or '}' in inline table");
    }
  }

  ConfigValue value() {
    skip();
    ConfigValue v;
    v.line = line_;
    const char c = peek();
    if (c == '"') {
      v.type = ConfigValue::Type::string;
      v.string = quoted();
    } else if (c == '[') {
      v.type = ConfigValue::Type::array;
      ++pos_;
      skip();
      if (peek() == ']') {
        ++pos_;
        return v;
      }
      while (true) {
        v.array.push_back(value());
        skip();
        if (peek() == ',') {
          ++pos_;
          skip();
          if (peek() == ']') {
            ++pos_;
            return v;
          }
          continue;
        }
        if (peek() == ']') {
          ++pos_;
          return v;
        }
        fail("expected ',' or ']' in array");
      }
    } else {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && s_[pos_] != ',' && s_[pos_] != ']' && s_[pos_] != '}' &&
             !std::isspace(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      const std::string tok(s_.substr(start, pos_ - start));
      if (tok.empty()) fail("missing value");
      if (tok == "true" || tok == "false") {
        v.type = ConfigValue::Type::boolean;
        v.boolean = tok == "true";
        return v;
      }
      char* end = nullptr;
      const double d = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() + tok.size() && std::isfinite(d)) {
        v.type = ConfigValue::Type::number;
        v.number = d;
        return v;
      }
      if (bare_) {
        v.type = ConfigValue::Type::string;
        v.string = tok;
        return v;
      }
      fail("cannot parse value '" + tok + "'");
    }
    return v;
  }

  std::string quoted() {
    ++pos_;
    std::string out;
    while (pos_ < s_.size()) {
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        const char e = s_[pos_++];
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          default: fail(std::string("unknown escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
    fail("unterminated string");
  }
};

int bracket_balance(const std::string& s) {
  int depth = 0;
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '\\' && quoted) {
      ++i;
    } else if (c == '"') {
      quoted = !quoted;
    } else if (!quoted && (c == '[' || c == '{')) {
      ++depth;
    } else if (!quoted && (c == ']' || c == '}')) {
      --depth;
    }
  }
  return depth;
}

}  // namespace

ConfigDocument parse_document(std::string_view text) {
  ConfigDocument doc;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header", line_no);
      section = trim(line.substr(1, line.size() - 2));
      check_key(section, line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    check_key(key, line_no);
    std::string value = trim(line.substr(eq + 1));
    const int start = line_no;
    // Arrays and inline tables may continue over several lines.
    while (bracket_balance(value) > 0 && std::getline(in, raw)) {
      ++line_no;
      value += " " + trim(strip_comment(raw));
    }
    if (bracket_balance(value) != 0) throw ConfigError("line " + std::to_string(start) + ": unbalanced brackets", start, key);
    const std::string full = section.empty() ? key : section + "." + key;
    ValueParser(value, start, false).parse(full, doc);
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Schema

namespace {

enum class Kind { number, integer, boolean, string, numbers, point };

struct KeySpec {
  std::string key;
  Kind kind;
  std::string description;
  std::function<void(ExperimentConfig&, const ConfigValue&)> set;
  std::function<nlohmann::json(const ExperimentConfig&)> get;
};

std::string where(const ConfigValue& v, const std::string& key) {
  return (v.line > 0 ? "line " + std::to_string(v.line) + ": " : std::string()) + "key '" + key + "': ";
}

double as_number(const ConfigValue& v, const std::string& key) {
  if (v.type != ConfigValue::Type::number) throw ConfigError(where(v, key) + "expected a number", v.line, key);
  return v.number;
}

std::vector<double> as_numbers(const ConfigValue& v, const std::string& key) {
  if (v.type != ConfigValue::Type::array) throw ConfigError(where(v, key) + "expected an array of numbers", v.line, key);
  std::vector<double> out;
  for (const auto& e : v.array) out.push_back(as_number(e, key));
  return out;
}

template <class T>
KeySpec field(std::string key, Kind kind, std::string desc, T ExperimentConfig::*member) {
  KeySpec s{std::move(key), kind, std::move(desc), {}, {}};
  s.set = [member, k = s.key, kind](ExperimentConfig& c, const ConfigValue& v) {
    if constexpr (std::is_same_v<T, double>) {
      c.*member = as_number(v, k);
    } else if constexpr (std::is_same_v<T, int>) {
      const double d = as_number(v, k);
      if (d != std::round(d) || std::abs(d) > 1e9) throw ConfigError(where(v, k) + "expected an integer", v.line, k);
      c.*member = static_cast<int>(d);
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (v.type != ConfigValue::Type::string) throw ConfigError(where(v, k) + "expected a string", v.line, k);
      c.*member = v.string;
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      c.*member = as_numbers(v, k);
    }
    (void)kind;
  };
  s.get = [member](const ExperimentConfig& c) { return nlohmann::json(c.*member); };
  return s;
}

// Keys addressing members of nested settings structs.
template <class S, class T>
KeySpec nested(std::string key, Kind kind, std::string desc, S ExperimentConfig::*outer, T S::*inner) {
  KeySpec s{std::move(key), kind, std::move(desc), {}, {}};
  s.set = [outer, inner, k = s.key](ExperimentConfig& c, const ConfigValue& v) {
    T& dst = (c.*outer).*inner;
    if constexpr (std::is_same_v<T, double>) {
      dst = as_number(v, k);
    } else if constexpr (std::is_same_v<T, int>) {
      const double d = as_number(v, k);
      if (d != std::round(d) || std::abs(d) > 1e9) throw ConfigError(where(v, k) + "expected an integer", v.line, k);
      dst = static_cast<int>(d);
    } else if constexpr (std::is_same_v<T, bool>) {
      if (v.type != ConfigValue::Type::boolean) throw ConfigError(where(v, k) + "expected true or false", v.line, k);
      dst = v.boolean;
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (v.type != ConfigValue::Type::string) throw ConfigError(where(v, k) + "expected a string", v.line, k);
      dst = v.string;
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      dst = as_numbers(v, k);
    }
  };
  s.get = [outer, inner](const ExperimentConfig& c) { return nlohmann::json((c.*outer).*inner); };
  return s;
}

KeySpec custom(std::string key, Kind kind, std::string desc, std::function<void(ExperimentConfig&, const ConfigValue&)> set,
               std::function<nlohmann::json(const ExperimentConfig&)> get) {
  return {std::move(key), kind, std::move(desc), std::move(set), std::move(get)};
}

Vec2 as_point(const ConfigValue& v, const std::string& key) {
  const auto xs = as_numbers(v, key);
  if (xs.size() != 2) throw ConfigError(where(v, key) + "expected [x1, x2]", v.line, key);
  return {xs[0], xs[1]};
}

std::string as_string(const ConfigValue& v, const std::string& key) {
  if (v.type != ConfigValue::Type::string) throw ConfigError(where(v, key) + "expected a string", v.line, key);
  return v.string;
}

const std::vector<KeySpec>& schema() {
  using C = ExperimentConfig;
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    k.push_back(custom(
        "kind", Kind::string,
        "experiment: preservation | sandwich | euler_growth | flow_diagnostics | euler_validation | origin_strain",
        [](C& c, const ConfigValue& v) {
          const auto s = as_string(v, "kind");
          for (auto e : {ExperimentKind::preservation, ExperimentKind::sandwich, ExperimentKind::euler_growth,
                         ExperimentKind::flow_diagnostics, ExperimentKind::euler_validation,
                         ExperimentKind::origin_strain})
            if (to_string(e) == s) {
              c.kind = e;
              return;
            }
          throw ConfigError(where(v, "kind") + "unknown experiment kind '" + s + "'", v.line, "kind");
        },
        [](const C& c) { return nlohmann::json(to_string(c.kind)); }));
    k.push_back(field("name", Kind::string, "scenario label", &C::name));
    k.push_back(custom(
        "seed", Kind::integer, "seed for random pair and data sampling",
        [](C& c, const ConfigValue& v) {
          const double d = as_number(v, "seed");
          if (d < 0 || d != std::round(d) || d > 9007199254740992.0)
            throw ConfigError(where(v, "seed") + "expected a non-negative integer", v.line, "seed");
          c.seed = static_cast<std::uint64_t>(d);
        },
        [](const C& c) { return nlohmann::json(c.seed); }));
    k.push_back(field("jobs", Kind::integer, "worker threads; 0 = available cores", &C::jobs));
    k.push_back(field("output_dir", Kind::string, "report directory", &C::output_dir));

    k.push_back(field("velocity.kind", Kind::string, "catalog entry name", &C::velocity_kind));
    for (const char* p : {"omega", "lambda", "amplitude"}) {
      const std::string key = std::string("velocity.") + p;
      k.push_back(custom(
          key, Kind::number, "catalog parameter",
          [p, key](C& c, const ConfigValue& v) { c.velocity_params[p] = as_number(v, key); },
          [p](const C& c) {
            const auto it = c.velocity_params.find(p);
            return it == c.velocity_params.end() ? nlohmann::json() : nlohmann::json(it->second);
          }));
    }

    k.push_back(custom(
        "initial.kind", Kind::string, "zero | constant | abs_power | log_holder_cap | sin_cos",
        [](C& c, const ConfigValue& v) {
          try {
            c.initial.kind = initial_kind_from_string(as_string(v, "initial.kind"));
          } catch (const std::invalid_argument& e) {
            throw ConfigError(where(v, "initial.kind") + e.what(), v.line, "initial.kind");
          }
        },
        [](const C& c) { return nlohmann::json(to_string(c.initial.kind)); }));
    k.push_back(custom(
        "initial.exponent", Kind::number, "data exponent; defaults to each modulus exponent",
        [](C& c, const ConfigValue& v) {
          c.initial.exponent = as_number(v, "initial.exponent");
          c.initial_exponent_follows_modulus = false;
        },
        [](const C& c) {
          return c.initial_exponent_follows_modulus ? nlohmann::json() : nlohmann::json(c.initial.exponent);
        }));
    k.push_back(nested("initial.value", Kind::number, "value of constant data", &C::initial, &InitialDataSpec::value));
    k.push_back(custom(
        "initial.center", Kind::point, "center of radial data",
        [](C& c, const ConfigValue& v) { c.initial.center = as_point(v, "initial.center"); },
        [](const C& c) { return nlohmann::json::array({c.initial.center.x, c.initial.center.y}); }));
    k.push_back(nested("initial.cutoff", Kind::number, "smooth cutoff radius of radial data", &C::initial,
                       &InitialDataSpec::cutoff));

    k.push_back(custom(
        "modulus.family", Kind::string, "holder | log_holder",
        [](C& c, const ConfigValue& v) {
          const auto s = as_string(v, "modulus.family");
          if (s == "holder") {
            c.family = ModulusKind::holder;
          } else if (s == "log_holder") {
            c.family = ModulusKind::log_holder;
          } else {
            throw ConfigError(where(v, "modulus.family") + "unknown modulus family '" + s + "'", v.line,
                              "modulus.family");
          }
        },
        [](const C& c) { return nlohmann::json(c.family == ModulusKind::holder ? "holder" : "log_holder"); }));
    k.push_back(field("modulus.exponents", Kind::numbers, "beta or gamma values, one curve each", &C::exponents));

    k.push_back(field("time.t_end", Kind::number, "final time", &C::t_end));
    k.push_back(field("time.dt", Kind::number, "requested RK4 step", &C::dt));
    k.push_back(field("time.outputs", Kind::numbers, "output times (grid nodes)", &C::outputs));
    k.push_back(custom(
        "tracked_point", Kind::point, "x0",
        [](C& c, const ConfigValue& v) { c.tracked_point = as_point(v, "tracked_point"); },
        [](const C& c) { return nlohmann::json::array({c.tracked_point.x, c.tracked_point.y}); }));

    k.push_back(custom(
        "estimator.radii", Kind::numbers, "explicit decreasing radii (overrides the ladder keys)",
        [](C& c, const ConfigValue& v) { c.radii = as_numbers(v, "estimator.radii"); },
        [](const C& c) { return nlohmann::json(c.radii); }));
    k.push_back(field("estimator.r_max", Kind::number, "largest radius of the geometric ladder", &C::ladder_r_max));
    k.push_back(field("estimator.ratio", Kind::number, "ladder ratio r_(k+1) / r_k", &C::ladder_ratio));
    k.push_back(field("estimator.count", Kind::integer, "ladder length", &C::ladder_count));
    k.push_back(custom(
        "estimator.sampler", Kind::string, "direction_sweep | grid",
        [](C& c, const ConfigValue& v) {
          const auto s = as_string(v, "estimator.sampler");
          if (s == "direction_sweep") {
            c.sampler.kind = SamplerSpec::Kind::direction_sweep;
          } else if (s == "grid") {
            c.sampler.kind = SamplerSpec::Kind::grid;
          } else {
            throw ConfigError(where(v, "estimator.sampler") + "unknown sampler '" + s + "'", v.line,
                              "estimator.sampler");
          }
        },
        [](const C& c) { return nlohmann::json(to_string(c.sampler.kind)); }));
    k.push_back(nested("estimator.directions", Kind::integer, "directions per shell", &C::sampler,
                       &SamplerSpec::directions));
    k.push_back(nested("estimator.shells_per_band", Kind::integer, "shells between consecutive radii", &C::sampler,
                       &SamplerSpec::shells_per_band));
    k.push_back(field("estimator.plateau_tol", Kind::number, "plateau slope tolerance", &C::plateau_tol));

    using B = BilipschitzSettings;
    k.push_back(nested("bilipschitz.pairs", Kind::integer, "random pairs; 0 disables", &C::bilipschitz, &B::pairs));
    k.push_back(nested("bilipschitz.extent", Kind::number, "alpha drawn from [-extent, extent]^2", &C::bilipschitz,
                       &B::extent));
    k.push_back(nested("bilipschitz.max_separation", Kind::number, "largest pair separation", &C::bilipschitz,
                       &B::max_separation));
    k.push_back(nested("bilipschitz.slack", Kind::number, "relative slack on [1/mu, mu]", &C::bilipschitz, &B::slack));
    k.push_back(nested("bilipschitz.refine", Kind::integer, "dt divisor for the mu(T) stability check",
                       &C::bilipschitz, &B::refine));

    using R = LogRatioSettings;
    k.push_back(nested("log_ratio.enabled", Kind::boolean, "run the log-ratio check", &C::log_ratio, &R::enabled));
    k.push_back(nested("log_ratio.t", Kind::number, "time of the check", &C::log_ratio, &R::t));
    k.push_back(nested("log_ratio.gamma", Kind::number, "log-Holder exponent", &C::log_ratio, &R::gamma));
    k.push_back(nested("log_ratio.k_min", Kind::integer, "radii exp(-k) from k_min", &C::log_ratio, &R::k_min));
    k.push_back(nested("log_ratio.k_max", Kind::integer, "radii exp(-k) up to k_max", &C::log_ratio, &R::k_max));
    k.push_back(nested("log_ratio.directions", Kind::integer, "directions per shell", &C::log_ratio, &R::directions));
    k.push_back(nested("log_ratio.shells", Kind::integer, "shells per radius", &C::log_ratio, &R::shells));
    k.push_back(nested("log_ratio.envelope_tol", Kind::number, "integrator allowance on the envelope", &C::log_ratio,
                       &R::envelope_tol));

    using E = EulerSettings;
    k.push_back(nested("euler.data", Kind::string, "bahouri_chemin | zero", &C::euler, &E::data));
    k.push_back(nested("euler.n", Kind::integer, "grid cells per axis", &C::euler, &E::n));
    k.push_back(nested("euler.half_period", Kind::number, "torus half-period L", &C::euler, &E::half_period));
    k.push_back(nested("euler.beta", Kind::number, "Holder exponent of the data", &C::euler, &E::beta));
    k.push_back(nested("euler.t_end", Kind::number, "final time", &C::euler, &E::t_end));
    k.push_back(nested("euler.output_count", Kind::integer, "equispaced output times including t = 0", &C::euler,
                       &E::output_count));
    k.push_back(nested("euler.cfl", Kind::number, "target CFL number for the adaptive step", &C::euler, &E::cfl));
    k.push_back(nested("euler.dt", Kind::number, "fixed step; 0 = from the CFL target", &C::euler, &E::dt));
    k.push_back(nested("euler.log_gamma", Kind::number, "log-Holder exponent tracked", &C::euler, &E::log_gamma));
    k.push_back(nested("euler.seeds", Kind::numbers, "tracer seeds (r, 2r)", &C::euler, &E::seeds));
    k.push_back(nested("euler.strain_cutoffs", Kind::numbers, "inner cutoffs of the strain diagnostic", &C::euler,
                       &E::strain_cutoffs));
    k.push_back(nested("euler.min_radius_cells", Kind::number, "innermost sampled radius in cells", &C::euler,
                       &E::min_radius_cells));

    using V = ValidationSettings;
    k.push_back(nested("validation.eigen_n", Kind::integer, "grid of the eigenfunction test", &C::validation,
                       &V::eigen_n));
    k.push_back(nested("validation.n", Kind::integer, "grid of the conservation runs", &C::validation, &V::n));
    k.push_back(nested("validation.t_end", Kind::number, "conservation run length", &C::validation, &V::t_end));
    k.push_back(nested("validation.modes", Kind::integer, "random data bandwidth", &C::validation, &V::modes));
    k.push_back(nested("validation.cfl", Kind::number, "CFL number of the runs", &C::validation, &V::cfl));

    using S = StrainSettings;
    k.push_back(nested("strain.data", Kind::string, "log_profile | zero", &C::strain, &S::data));
    k.push_back(nested("strain.gamma", Kind::number, "radial profile exponent", &C::strain, &S::gamma));
    k.push_back(nested("strain.support", Kind::number, "profile support radius", &C::strain, &S::support));
    k.push_back(nested("strain.outer", Kind::number, "outer quadrature radius", &C::strain, &S::outer));
    k.push_back(nested("strain.cutoffs", Kind::numbers, "inner cutoffs", &C::strain, &S::cutoffs));

    using T = Tolerances;
    const std::pair<const char*, double T::*> tols[] = {
        {"gap", &T::gap},
        {"initial", &T::initial},
        {"sandwich_slack", &T::sandwich_slack},
        {"saturation", &T::saturation},
        {"mu_refinement", &T::mu_refinement},
        {"log_gap", &T::log_gap},
        {"strain", &T::strain},
        {"eigen", &T::eigen},
        {"curl", &T::curl},
        {"divergence", &T::divergence},
        {"stationary", &T::stationary},
        {"conservation", &T::conservation},
        {"symmetry", &T::symmetry},
        {"origin_velocity", &T::origin_velocity},
        {"origin_value", &T::origin_value},
    };
    for (const auto& [name, member] : tols)
      k.push_back(nested(std::string("tolerances.") + name, Kind::number, "verdict threshold", &C::tol, member));

    k.push_back(custom(
        "expected.initial", Kind::number, "reference initial coefficient",
        [](C& c, const ConfigValue& v) { c.expected_initial = as_number(v, "expected.initial"); },
        [](const C& c) { return c.expected_initial ? nlohmann::json(*c.expected_initial) : nlohmann::json(); }));
    k.push_back(custom(
        "expected.saturation_rate", Kind::number, "est(T)/est(0) expected as exp(rate * beta * T)",
        [](C& c, const ConfigValue& v) { c.expected_saturation_rate = as_number(v, "expected.saturation_rate"); },
        [](const C& c) {
          return c.expected_saturation_rate ? nlohmann::json(*c.expected_saturation_rate) : nlohmann::json();
        }));
    return k;
  }();
  return keys;
}

const KeySpec* find_key(const std::string& key) {
  for (const auto& s : schema())
    if (s.key == key) return &s;
  return nullptr;
}

[[noreturn]] void invalid(const std::string& key, const std::string& msg) {
  throw ConfigError("key '" + key + "': " + msg, 0, key);
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) invalid(key, "must be positive");
}

void validate(ExperimentConfig& c) {
  // Velocity: catalog name and exactly its parameters.
  if (c.kind == ExperimentKind::preservation || c.kind == ExperimentKind::sandwich ||
      c.kind == ExperimentKind::flow_diagnostics) {
    try {
      (void)VelocityField::from_catalog(c.velocity_kind, c.velocity_params);
    } catch (const std::exception& e) {
      invalid("velocity.kind", e.what());
    }
  }
  require_positive("jobs", c.jobs + 1.0);

  const bool transport = c.kind == ExperimentKind::preservation || c.kind == ExperimentKind::sandwich;
  if (transport || c.kind == ExperimentKind::flow_diagnostics) {
    require_positive("time.t_end", c.t_end);
    require_positive("time.dt", c.dt);
    if (c.dt > c.t_end) invalid("time.dt", "must not exceed time.t_end");
    const TimeGrid tg(c.t_end, c.dt);
    for (double t : c.outputs) {
      try {
        (void)tg.node_index(t);
      } catch (const std::exception&) {
        invalid("time.outputs", "output time " + std::to_string(t) + " is not a node of the time grid");
      }
    }
  }

  if (c.exponents.empty()) invalid("modulus.exponents", "must not be empty");
  for (double e : c.exponents) {
    try {
      (void)(c.family == ModulusKind::holder ? ModulusFamily::holder(e) : ModulusFamily::log_holder(e));
    } catch (const std::exception& ex) {
      invalid("modulus.exponents", ex.what());
    }
  }
  if (c.kind == ExperimentKind::sandwich && c.family != ModulusKind::holder)
    invalid("modulus.family", "the sandwich experiment requires the holder family");

  if (transport || c.kind == ExperimentKind::euler_growth) {
    if (c.radii.empty() && c.ladder_count > 0) {
      if (!(c.ladder_ratio > 0.0 && c.ladder_ratio < 1.0)) invalid("estimator.ratio", "must lie in (0, 1)");
      require_positive("estimator.r_max", c.ladder_r_max);
      c.radii = geometric_radii(c.ladder_r_max, c.ladder_ratio, c.ladder_count);
    }
    if (c.radii.empty()) invalid("estimator.radii", "set estimator.radii or estimator.count");
    for (std::size_t i = 0; i < c.radii.size(); ++i) {
      if (!(c.radii[i] > 0.0)) invalid("estimator.radii", "radii must be positive");
      if (i > 0 && !(c.radii[i] < c.radii[i - 1])) invalid("estimator.radii", "radii must be strictly decreasing");
    }
    if (c.radii.front() > kModulusArgumentMax)
      invalid("estimator.radii", "radii exceed the modcont bound s_max = 0.3");
    if (c.radii.size() < 4) invalid("estimator.radii", "at least four radii are needed for the plateau fit");
    if (c.sampler.directions < 1) invalid("estimator.directions", "must be at least 1");
    if (c.sampler.shells_per_band < 1) invalid("estimator.shells_per_band", "must be at least 1");
    require_positive("estimator.plateau_tol", c.plateau_tol);
    c.sampler.jobs = c.jobs;
  }
  if (transport) {
    if (c.sampler.kind != SamplerSpec::Kind::direction_sweep)
      invalid("estimator.sampler", "transported fields are analytic; use direction_sweep");
    InitialDataSpec probe = c.initial;
    if (c.initial_exponent_follows_modulus) probe.exponent = c.exponents.front();
    try {
      for (double e : c.exponents) {
        if (c.initial_exponent_follows_modulus) probe.exponent = e;
        (void)make_initial_data(probe);
      }
    } catch (const std::exception& e) {
      invalid("initial.kind", e.what());
    }
  }

  if (c.bilipschitz.pairs < 0) invalid("bilipschitz.pairs", "must be non-negative");
  if (c.bilipschitz.pairs > 0) {
    require_positive("bilipschitz.extent", c.bilipschitz.extent);
    require_positive("bilipschitz.max_separation", c.bilipschitz.max_separation);
    require_positive("bilipschitz.slack", c.bilipschitz.slack);
    if (c.bilipschitz.refine < 2) invalid("bilipschitz.refine", "must be at least 2");
  }
  if (c.log_ratio.enabled) {
    if (c.log_ratio.k_min < 2 || c.log_ratio.k_max <= c.log_ratio.k_min)
      invalid("log_ratio.k_min", "need 2 <= k_min < k_max (radii exp(-k) below s_max)");
    require_positive("log_ratio.gamma", c.log_ratio.gamma);
    require_positive("log_ratio.t", c.log_ratio.t);
    if (c.log_ratio.directions < 1 || c.log_ratio.shells < 1)
      invalid("log_ratio.directions", "directions and shells must be at least 1");
  }

  if (c.kind == ExperimentKind::euler_growth) {
    auto& e = c.euler;
    if (e.data != "bahouri_chemin" && e.data != "zero") invalid("euler.data", "expected bahouri_chemin or zero");
    try {
      const Grid2 g(e.n, e.half_period);
      if (e.data == "bahouri_chemin" && !(e.beta > 0.0 && e.beta <= 1.0))
        invalid("euler.beta", "holder requires 0 < beta <= 1");
      if (e.half_period < 2.0) invalid("euler.half_period", "the scenario requires L >= 2");
      const double inner = c.radii.size() > 1 ? c.radii.back() * c.radii.back() / c.radii[c.radii.size() - 2]
                                              : 0.5 * c.radii.back();
      if (inner < e.min_radius_cells * g.spacing())
        invalid("estimator.radii", "innermost sampled radius " + std::to_string(inner) + " is below " +
                                       std::to_string(e.min_radius_cells) + " cells");
      for (double r : e.strain_cutoffs)
        if (r < 2.0 * g.spacing()) invalid("euler.strain_cutoffs", "cutoffs must be at least 2h");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& ex) {
      invalid("euler.n", ex.what());
    }
    require_positive("euler.t_end", e.t_end);
    if (e.output_count < 2) invalid("euler.output_count", "must be at least 2");
    if (!(e.cfl > 0.0 && e.cfl <= 0.5)) invalid("euler.cfl", "must lie in (0, 0.5]");
    if (e.dt < 0.0) invalid("euler.dt", "must be non-negative");
    require_positive("euler.log_gamma", e.log_gamma);
    for (double r : e.seeds)
      if (!(r > 0.0 && 2.0 * r < 1.0)) invalid("euler.seeds", "seeds (r, 2r) must lie inside the unit disc");
  }
  if (c.kind == ExperimentKind::euler_validation) {
    auto& v = c.validation;
    try {
      (void)Grid2(v.eigen_n, 3.141592653589793);
      (void)Grid2(v.n, 3.141592653589793);
    } catch (const std::exception& ex) {
      invalid("validation.n", ex.what());
    }
    require_positive("validation.t_end", v.t_end);
    if (v.modes < 1 || 3 * v.modes >= v.n) invalid("validation.modes", "must lie in [1, n/3)");
    if (!(v.cfl > 0.0 && v.cfl <= 0.5)) invalid("validation.cfl", "must lie in (0, 0.5]");
  }
  if (c.kind == ExperimentKind::origin_strain) {
    auto& s = c.strain;
    if (s.data != "log_profile" && s.data != "zero") invalid("strain.data", "expected log_profile or zero");
    require_positive("strain.gamma", s.gamma);
    if (!(s.support > 0.0 && s.support < 1.0)) invalid("strain.support", "must lie in (0, 1)");
    require_positive("strain.outer", s.outer);
    if (s.cutoffs.size() < 2) invalid("strain.cutoffs", "need at least two cutoffs");
    if (s.cutoffs.front() > 0.5 * s.support)
      invalid("strain.cutoffs", "cutoffs must lie where the profile is uncut (<= support / 2)");
    for (std::size_t i = 0; i < s.cutoffs.size(); ++i) {
      if (!(s.cutoffs[i] > 0.0 && s.cutoffs[i] < s.outer)) invalid("strain.cutoffs", "cutoffs must lie in (0, outer)");
      if (i > 0 && !(s.cutoffs[i] < s.cutoffs[i - 1])) invalid("strain.cutoffs", "cutoffs must be decreasing");
    }
  }

  const Tolerances& t = c.tol;
  for (auto [name, v] : {std::pair{"gap", t.gap}, {"sandwich_slack", t.sandwich_slack}, {"saturation", t.saturation},
                         {"mu_refinement", t.mu_refinement}, {"log_gap", t.log_gap}, {"strain", t.strain},
                         {"eigen", t.eigen}, {"curl", t.curl}, {"divergence", t.divergence},
                         {"stationary", t.stationary}, {"conservation", t.conservation}, {"symmetry", t.symmetry},
                         {"origin_velocity", t.origin_velocity}, {"origin_value", t.origin_value}})
    require_positive(std::string("tolerances.") + name, v);
  if (t.initial < 0.0) invalid("tolerances.initial", "must be non-negative (0 disables the check)");
}

}  // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::preservation: return "preservation";
    case ExperimentKind::sandwich: return "sandwich";
    case ExperimentKind::euler_growth: return "euler_growth";
    case ExperimentKind::flow_diagnostics: return "flow_diagnostics";
    case ExperimentKind::euler_validation: return "euler_validation";
    case ExperimentKind::origin_strain: return "origin_strain";
  }
  return "unknown";
}

const std::vector<std::pair<std::string, std::string>>& config_schema() {
  static const auto list = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : schema()) out.emplace_back(s.key, s.description);
    return out;
  }();
  return list;
}

void apply_override(ConfigDocument& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError("override '" + std::string(assignment) + "': expected key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (!find_key(key)) throw ConfigError("override: unknown key '" + key + "'", 0, key);
  ConfigDocument tmp;
  ValueParser(trim(assignment.substr(eq + 1)), 0, true).parse(key, tmp);
  doc[key] = tmp.at(key);
}

ExperimentConfig build_config(const ConfigDocument& doc) {
  if (!doc.count("kind")) throw ConfigError("key 'kind': required", 0, "kind");
  ExperimentConfig c;
  for (const auto& [key, value] : doc) {
    const KeySpec* spec = find_key(key);
    if (!spec) throw ConfigError(where(value, key) + "unknown key", value.line, key);
    spec->set(c, value);
  }
  validate(c);
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& s : schema()) {
    auto v = s.get(c);
    if (!v.is_null()) echo[s.key] = std::move(v);
  }
  c.echo = std::move(echo);
  return c;
}

ExperimentConfig parse_config(std::string_view text) { return build_config(parse_document(text)); }

}  // namespace loghold
