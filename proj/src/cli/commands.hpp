#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "params.hpp"
#include "report.hpp"

namespace schlab::cli {

struct RunContext {
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct Command {
  std::string name;
  std::string description;
  std::string csv_help;  // series written by the command
  ParamSet params;
  /// Checks the resolved config against module preconditions; throws
  /// UsageError before any computation starts.
  std::function<void(const Json& cfg)> validate;
  std::function<Report(const Json& cfg, const RunContext& ctx)> run;
};

std::vector<std::unique_ptr<Command>> make_commands();

}  // namespace schlab::cli
