#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "loghold/config.hpp"

namespace loghold {

inline constexpr const char* kReportSchema = "loghold-report/1";
inline constexpr const char* kArtifactVersion = "1.0.0";

enum class VerdictStatus { pass, fail, indeterminate };
std::string to_string(VerdictStatus s);

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::pass;
  double measured = 0.0;
  double threshold = 0.0;
  std::string detail;
};

/// A named table of numbers; written as <name>.csv and used for plots.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  ExperimentKind kind = ExperimentKind::preservation;
  std::string name;
  std::uint64_t seed = 0;
  nlohmann::json config;   ///< effective config echo
  nlohmann::json records;  ///< everything the verdicts are computed from
  std::vector<Series> series;
  std::vector<Verdict> verdicts;
  double wall_seconds = 0.0;
};

/// FAIL dominates INDETERMINATE, which dominates PASS. Empty lists pass.
VerdictStatus overall(const std::vector<Verdict>& verdicts);

Report run_preservation_experiment(const ExperimentConfig& c);
Report run_sandwich_experiment(const ExperimentConfig& c);
Report run_euler_growth_experiment(const ExperimentConfig& c);
Report run_flow_diagnostics_experiment(const ExperimentConfig& c);
Report run_euler_validation_experiment(const ExperimentConfig& c);
Report run_origin_strain_experiment(const ExperimentConfig& c);
Report run_experiment(const ExperimentConfig& c);

/// Verdicts as a pure function of the config echo and the records.
std::vector<Verdict> compute_verdicts(ExperimentKind kind, const nlohmann::json& config,
                                      const nlohmann::json& records);
/// Recomputes verdicts from a persisted report.json document.
std::vector<Verdict> recheck_report(const nlohmann::json& report);

/// Full report document; wall-clock data lives under "runtime" only.
nlohmann::json to_json(const Report& r);
/// The document without "runtime", as compared by determinism checks.
nlohmann::json deterministic_part(const nlohmann::json& report);

/// Thrown when a report cannot be written completely.
class ReportWriteError : public std::runtime_error {
 public:
  ReportWriteError(const std::string& what, std::vector<std::filesystem::path> written)
      : std::runtime_error(what), written_(std::move(written)) {}
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::vector<std::filesystem::path> written_;
};

/// Writes report.json, one CSV per series and the plot bundle under plots/.
std::vector<std::filesystem::path> write_report(const Report& r, const std::filesystem::path& dir);
/// Regenerates plots/ from a persisted report document.
std::vector<std::filesystem::path> emit_plots(const nlohmann::json& report, const std::filesystem::path& dir);

}  // namespace loghold
