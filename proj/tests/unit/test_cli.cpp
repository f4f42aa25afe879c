#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "doctest.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "zrp_unit_cli" / name;
  fs::remove_all(dir);
  return dir;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  return json::parse(in);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json small_simulation(const fs::path& out) {
  return {{"rate", "linear"},
          {"out", out.string()},
          {"seed", 17},
          {"simulate",
           {{"N", 8},
            {"times", {0.0, 0.01}},
            {"replicas", 2},
            {"profile", {{"rho1", "0.5"}, {"rho2", "0.25"}}}}}};
}

}  // namespace

TEST_CASE("equivalence preset succeeds and writes a manifest") {
  const fs::path out = scratch("equivalence");
  json config = read_json(fs::path(ZRP_CONFIG_DIR) / "equivalence.json");
  config["out"] = out.string();
  CHECK(zrp::cli::run_command("equivalence", config) == zrp::cli::kSuccess);
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["exit_code"] == 0);
  CHECK(fs::exists(out / "equivalence.csv"));
}

TEST_CASE("missing rate table is a usage error with a manifest") {
  const fs::path out = scratch("missing_table");
  const json config{{"rate", {{"family", "table"}, {"path", "/nonexistent/table.csv"}}},
                    {"out", out.string()}};
  CHECK(zrp::cli::run_command("phase-diagram", config) == zrp::cli::kUsageError);
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["status"] == "usage_error");
  CHECK(manifest["abort_reason"].get<std::string>().find("rate table not found") !=
        std::string::npos);
}

TEST_CASE("empty time grid and unknown keys are usage errors") {
  const fs::path out = scratch("bad_config");
  json config = small_simulation(out);
  config["simulate"]["times"] = json::array();
  CHECK(zrp::cli::run_command("simulate", config) == zrp::cli::kUsageError);
  CHECK(fs::exists(out / "manifest.json"));

  config = small_simulation(out);
  config["simulate"]["bogus"] = 1;
  CHECK(zrp::cli::run_command("simulate", config) == zrp::cli::kUsageError);

  config = small_simulation(out);
  config.erase("seed");
  CHECK(zrp::cli::run_command("simulate", config) == zrp::cli::kUsageError);
}

TEST_CASE("repeat runs with the same seed are byte-identical") {
  const fs::path a = scratch("repeat_a");
  const fs::path b = scratch("repeat_b");
  REQUIRE(zrp::cli::run_command("simulate", small_simulation(a)) == zrp::cli::kSuccess);
  REQUIRE(zrp::cli::run_command("simulate", small_simulation(b)) == zrp::cli::kSuccess);
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    if (name == "manifest.json") continue;  // records the output directory
    CHECK(read_text(entry.path()) == read_text(b / name));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("an empty lattice aborts with the numerical exit code") {
  const fs::path out = scratch("frozen");
  json config = small_simulation(out);
  config["simulate"]["initial"] = json::array();
  for (int x = 0; x < 8; ++x) config["simulate"]["initial"].push_back({0, 0});
  CHECK(zrp::cli::run_command("simulate", config) == zrp::cli::kNumericalAbort);
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["status"] == "aborted");
  CHECK(manifest["results"].contains("frozen_replicas"));
}

TEST_CASE("supercritical PDE data aborts with the numerical exit code") {
  const fs::path out = scratch("supercritical");
  const json config{{"rate", {{"family", "evans"}, {"b", 4}}},
                    {"out", out.string()},
                    {"solve_pde", {{"M", 16}, {"times", {0.01}},
                                   {"profile", {{"rho1", "0.2"}, {"rho2", "0.2 + 0.2*cos(2*pi*u)"}}}}}};
  const int code = zrp::cli::run_command("solve-pde", config);
  CHECK(code != zrp::cli::kSuccess);
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("command line flags override the config") {
  const fs::path out = scratch("flags");
  const fs::path config_path = fs::temp_directory_path() / "zrp_unit_cli" / "flags.json";
  {
    std::ofstream f(config_path);
    f << small_simulation(scratch("flags_unused")).dump();
  }
  const std::string out_str = out.string();
  const std::string cfg_str = config_path.string();
  const char* argv[] = {"zrp", "simulate", "--config", cfg_str.c_str(), "--out",
                        out_str.c_str(), "--seed", "5"};
  CHECK(zrp::cli::main(8, const_cast<char**>(argv)) == 0);
  const json manifest = read_json(out / "manifest.json");
  CHECK(manifest["config"]["seed"] == 5);
  CHECK(!fs::exists(scratch("flags_unused") / "manifest.json"));
}
