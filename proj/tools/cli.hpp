#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace zrp::cli {

/// Exit codes of the runner.
enum ExitCode : int { kSuccess = 0, kNumericalAbort = 1, kUsageError = 2 };

/// Invalid command line or configuration document (exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs one command. `config` is the full document after flag overrides;
/// outputs and manifest.json go to `out`. Returns the exit code; the manifest
/// is written on every path that knows the output directory.
int run_command(const std::string& command, nlohmann::json config);

/// Entry point shared by the executable and the tests.
int main(int argc, char** argv);

}  // namespace zrp::cli
