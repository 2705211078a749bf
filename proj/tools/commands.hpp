#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "scenario.hpp"

namespace ncfractal::cli {

struct Flags {
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::uint64_t budget = 4096;
  bool oracle = false;
  std::optional<int> depth;
  std::string bump = "I";
};

struct CommandResult {
  ojson report;
  /// Written as <name>.<command>.csv when present.
  std::optional<std::string> csv;
  bool pass = false;
};

const std::vector<std::string>& command_names();

/// Throws std::invalid_argument for an unknown command; library errors
/// (precondition, resource, numerical) propagate.
CommandResult run_command(const std::string& command, const Scenario& scenario, const Flags& flags);

}  // namespace ncfractal::cli
