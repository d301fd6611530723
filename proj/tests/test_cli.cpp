#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "loghold/cli.hpp"

using namespace loghold;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(LOGHOLD_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("loghold_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("validate-config accepts every shipped config") {
    for (const auto& e : fs::directory_iterator(LOGHOLD_CONFIG_DIR)) {
      if (e.path().extension() != ".toml") continue;
      const auto r = run({"validate-config", "--config", e.path().string()});
      CHECK_MESSAGE(r.code == kExitPass, e.path().string(), r.err);
    }
  }

  TEST_CASE("run on the zero-velocity control passes") {
    const auto dir = scratch("zero");
    const auto r = run({"run", "--config", config("c3_zero_velocity.toml"), "--out", dir.string(), "--quiet"});
    CHECK(r.code == kExitPass);
    CHECK(fs::exists(dir / "report.json"));
    fs::remove_all(dir);
  }

  TEST_CASE("unwritable output directory exits 1 with one diagnostic line") {
    const auto blocker = scratch("blocker");
    std::ofstream(blocker) << "x";
    const auto r = run({"run", "--config", config("c3_zero_velocity.toml"), "--out", (blocker / "out").string()});
    CHECK(r.code == kExitError);
    CHECK(r.err.rfind("loghold: error: code=io", 0) == 0);
    CHECK(std::count(r.err.begin(), r.err.end(), '\n') == 1);
    fs::remove(blocker);
  }

  TEST_CASE("configuration errors exit 1 with key and line") {
    const auto r = run({"validate-config", "--config", config("c3_zero_velocity.toml"), "--set", "nope=1"});
    CHECK(r.code == kExitError);
    CHECK(r.err.find("code=config") != std::string::npos);
    CHECK(r.err.find("key=nope") != std::string::npos);

    const auto file = scratch("bad.toml");
    std::ofstream(file) << "kind = \"preservation\"\n[modulus]\nfamily = \"holder\"\nexponents = [1.5]\n";
    const auto b = run({"validate-config", "--config", file.string()});
    CHECK(b.code == kExitError);
    CHECK(b.err.find("holder requires 0 < beta <= 1") != std::string::npos);
    fs::remove(file);

    CHECK(run({"validate-config", "--config", "/nonexistent.toml"}).code == kExitError);
  }

  TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == kExitError);
    CHECK(run({"frobnicate"}).code == kExitError);
    CHECK(run({"run"}).code == kExitError);
  }

  TEST_CASE("verdicts map to exit codes") {
    const auto dir = scratch("codes");
    CHECK(run({"run", "--config", config("c1_negative_control.toml"), "--out", dir.string(), "--quiet"}).code ==
          kExitIndeterminate);
    CHECK(run({"run", "--config", config("c7_origin_strain.toml"), "--out", dir.string(), "--quiet", "--set",
               "tolerances.strain=1e-12"})
              .code == kExitFail);
    fs::remove_all(dir);
  }

  TEST_CASE("list-scenarios prints the catalog") {
    const auto r = run({"list-scenarios"});
    CHECK(r.code == kExitPass);
    CHECK(r.out.find("linear_strain (lambda)") != std::string::npos);
    CHECK(r.out.find("tolerances.gap") != std::string::npos);
  }

  TEST_CASE("output directory precedence") {
    const auto env_dir = scratch("env");
    const auto flag_dir = scratch("flag");
    setenv("LOGHOLD_OUT", env_dir.c_str(), 1);
    CHECK(run({"run", "--config", config("c7_origin_strain_zero.toml"), "--quiet"}).code == kExitPass);
    CHECK(fs::exists(env_dir / "report.json"));
    CHECK(run({"run", "--config", config("c7_origin_strain_zero.toml"), "--quiet", "--out", flag_dir.string()}).code ==
          kExitPass);
    CHECK(fs::exists(flag_dir / "report.json"));
    unsetenv("LOGHOLD_OUT");
    fs::remove_all(env_dir);
    fs::remove_all(flag_dir);
  }

  TEST_CASE("emit-plots from a persisted report") {
    const auto dir = scratch("plots");
    REQUIRE(run({"run", "--config", config("c7_origin_strain.toml"), "--out", dir.string(), "--quiet"}).code == 0);
    fs::remove_all(dir / "plots");
    const auto r = run({"emit-plots", "--report", (dir / "report.json").string()});
    CHECK(r.code == kExitPass);
    CHECK(fs::exists(dir / "plots" / "index.json"));
    CHECK(run({"emit-plots", "--report", (dir / "missing.json").string()}).code == kExitError);
    fs::remove_all(dir);
  }

  TEST_CASE("--jobs is echoed and does not change results") {
    const auto a = scratch("jobs1");
    const auto b = scratch("jobs2");
    REQUIRE(run({"run", "--config", config("c4_log_ratio.toml"), "--out", a.string(), "--jobs", "1", "--quiet"}).code == 0);
    REQUIRE(run({"run", "--config", config("c4_log_ratio.toml"), "--out", b.string(), "--jobs", "2", "--quiet"}).code == 0);
    auto slurp = [](const fs::path& p) {
      std::ifstream is(p);
      std::ostringstream ss;
      ss << is.rdbuf();
      return ss.str();
    };
    CHECK(slurp(a / "log_ratio.csv") == slurp(b / "log_ratio.csv"));
    fs::remove_all(a);
    fs::remove_all(b);
  }
}
