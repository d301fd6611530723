#include "loghold/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "loghold/config.hpp"
#include "loghold/harness.hpp"

namespace loghold {

namespace {

struct ToolError {
  std::string code;  // config | io | usage
  std::string message;
  std::string key;
  int line = 0;
};

void report_error(std::ostream& err, const ToolError& e) {
  std::string msg = e.message;
  for (char& ch : msg)
    if (ch == '\n' || ch == '\r') ch = ' ';
  err << "loghold: error: code=" << e.code;
  if (!e.key.empty()) err << " key=" << e.key;
  if (e.line > 0) err << " line=" << e.line;
  err << ": " << msg << "\n";
}

std::string read_text(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ToolError{"io", "cannot read " + path, {}, 0};
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides, int jobs) {
  const std::string text = read_text(path);
  try {
    ConfigDocument doc = parse_document(text);
    for (const auto& o : overrides) apply_override(doc, o);
    if (jobs >= 0) apply_override(doc, "jobs=" + std::to_string(jobs));
    return build_config(doc);
  } catch (const ConfigError& e) {
    throw ToolError{"config", e.what(), e.key(), e.line()};
  } catch (const std::invalid_argument& e) {
    throw ToolError{"config", e.what(), {}, 0};
  }
}

void list_scenarios(std::ostream& out) {
  out << "velocity fields:\n";
  for (const auto& e : velocity_catalog()) {
    out << "  " << e.name;
    if (!e.parameters.empty()) {
      out << " (";
      for (std::size_t i = 0; i < e.parameters.size(); ++i) out << (i ? ", " : "") << e.parameters[i];
      out << ")";
    }
    out << ": " << e.formula << "\n";
  }
  out << "initial data: abs_power (exponent), log_holder_cap (exponent, cutoff), sin_cos, constant (value)\n"
         "modulus families: holder (0 < beta <= 1), log_holder (gamma > 0)\n"
         "experiment kinds: preservation, sandwich, flow_diagnostics, euler_growth, euler_validation, origin_strain\n"
         "euler data: bahouri_chemin (beta), zero\n"
         "config keys:\n";
  for (const auto& [key, what] : config_schema()) out << "  " << key << ": " << what << "\n";
}

int exit_code(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::pass: return kExitPass;
    case VerdictStatus::indeterminate: return kExitIndeterminate;
    case VerdictStatus::fail: return kExitFail;
  }
  return kExitFail;
}

void print_verdicts(std::ostream& out, const std::string& name, const std::vector<Verdict>& verdicts) {
  for (const auto& v : verdicts) {
    out << to_string(v.status) << "  " << v.name << "  measured=" << v.measured << " threshold=" << v.threshold;
    if (!v.detail.empty()) out << "  (" << v.detail << ")";
    out << "\n";
  }
  out << name << ": " << to_string(overall(verdicts)) << "\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"log-Holder transport and 2D Euler experiments", "loghold"};
  app.require_subcommand(1);
  std::string config_path, out_dir, report_path;
  std::vector<std::string> overrides;
  int jobs = -1;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run an experiment and write its report");
  run->add_option("--config", config_path, "experiment config (TOML subset)")->required();
  run->add_option("--out", out_dir, "output directory (overrides LOGHOLD_OUT and output_dir)");
  run->add_option("--set", overrides, "key=value override, repeatable");
  run->add_option("--jobs", jobs, "worker threads; 0 = available cores")->check(CLI::NonNegativeNumber);
  run->add_flag("--quiet", quiet, "print only the overall verdict");

  auto* list = app.add_subcommand("list-scenarios", "print catalog names, parameters and config keys");

  auto* check = app.add_subcommand("validate-config", "parse and validate a config without running it");
  check->add_option("--config", config_path, "experiment config")->required();
  check->add_option("--set", overrides, "key=value override, repeatable");
  check->add_flag("--quiet", quiet, "print nothing on success");

  auto* plots = app.add_subcommand("emit-plots", "regenerate the plot bundle from a report.json");
  plots->add_option("--report", report_path, "persisted report.json")->required();
  plots->add_option("--out", out_dir, "output directory (default: the report's directory)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    report_error(err, {"usage", e.what(), {}, 0});
    return kExitError;
  }

  try {
    if (list->parsed()) {
      list_scenarios(out);
      return kExitPass;
    }
    if (check->parsed()) {
      const auto c = load(config_path, overrides, -1);
      if (!quiet) out << config_path << ": valid " << to_string(c.kind) << " config\n";
      return kExitPass;
    }
    if (plots->parsed()) {
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(read_text(report_path));
        if (doc.value("schema", "") != kReportSchema)
          throw ToolError{"io", report_path + " is not a " + std::string(kReportSchema) + " document", {}, 0};
      } catch (const nlohmann::json::exception& e) {
        throw ToolError{"io", report_path + ": " + e.what(), {}, 0};
      }
      const std::filesystem::path dir =
          out_dir.empty() ? std::filesystem::path(report_path).parent_path() : std::filesystem::path(out_dir);
      const auto files = emit_plots(doc, dir.empty() ? "." : dir);
      if (!quiet) out << "wrote " << files.size() << " files under " << (dir / "plots").string() << "\n";
      return kExitPass;
    }

    const auto c = load(config_path, overrides, jobs);
    std::string dir = out_dir;
    if (dir.empty()) {
      const char* env = std::getenv("LOGHOLD_OUT");
      dir = env && *env ? env : c.output_dir;
    }
    Report r;
    try {
      r = run_experiment(c);
    } catch (const std::invalid_argument& e) {
      throw ToolError{"config", e.what(), {}, 0};
    }
    write_report(r, dir);
    if (quiet) {
      out << c.name << ": " << to_string(overall(r.verdicts)) << "\n";
    } else {
      print_verdicts(out, c.name, r.verdicts);
      out << "report: " << (std::filesystem::path(dir) / "report.json").string() << "\n";
    }
    return exit_code(overall(r.verdicts));
  } catch (const ToolError& e) {
    report_error(err, e);
  } catch (const ReportWriteError& e) {
    std::string msg = e.what();
    if (!e.written().empty()) msg += " (partial write: " + std::to_string(e.written().size()) + " files)";
    report_error(err, {"io", msg, {}, 0});
  } catch (const std::exception& e) {
    report_error(err, {"runtime", e.what(), {}, 0});
  }
  return kExitError;
}

}  // namespace loghold
