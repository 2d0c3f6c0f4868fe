#pragma once

#include "config.hpp"
#include "output.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace cli {

struct Context {
  int threads = 1;  ///< from CRYSTAL_HEAT_THREADS
};

struct Command {
  std::string name;
  std::string description;
  std::function<std::vector<std::string>(const Config&)> files;
  std::function<nlohmann::ordered_json(const Config&, OutputDir&, const Context&)> run;
};

const std::vector<Command>& commands();

/// Human-readable summary lines for a command result.
std::string summarize(const std::string& command, const nlohmann::ordered_json& result);

/// Runs the invariant and acceptance checks; returns the table and whether all passed.
nlohmann::ordered_json run_selftest(bool& all_passed);

}  // namespace cli
