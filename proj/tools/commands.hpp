#pragma once

#include <string>

#include <json.hpp>

#include "run_config.hpp"

namespace plap::cli {

struct RunOutcome {
  nlohmann::json manifest;
  std::string directory;
  int exit_code = 0;
};

/// Validates, runs the subcommand, writes its artifacts and manifest.json.
/// Solver errors propagate as plap::Error; selftest failures set exit code 3.
RunOutcome run(const RunConfig& config);

}  // namespace plap::cli
