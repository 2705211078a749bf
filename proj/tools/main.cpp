// ncfractal <command> <scenario.json> [flags]
//
// Exit codes: 0 all contracts pass, 1 a contract failed, 2 usage error,
// 3 parse error, 4 schema violation, 5 validator failure, 6 precondition
// failure, 7 resource limit, 8 numerical failure, 9 other library error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "commands.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace ncfractal;
using namespace ncfractal::cli;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-similar states of dual iterated function systems on finite-dimensional C*-algebras"};
  std::string command;
  std::string scenario_path;
  std::string out_dir;
  Flags flags;
  std::string commands_help;
  for (const auto& c : command_names()) commands_help += (commands_help.empty() ? "" : ", ") + c;

  app.add_option("command", command, "One of: " + commands_help)->required();
  app.add_option("scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--seed", flags.seed, "Seed for sampled checks")->capture_default_str();
  auto* tol_opt = app.add_option("--tol", flags.tol, "Contract tolerance (default: scenario value or 1e-8)");
  auto* budget_opt =
      app.add_option("--budget", flags.budget, "Word budget k^M (default: NCFRACTAL_BUDGET, scenario value or 4096)");
  app.add_flag("--oracle", flags.oracle, "Enable brute-force cross-checks");
  app.add_option("--depth", flags.depth, "codespace: largest word length M");
  app.add_option("--bump", flags.bump, "diagnose: bump name from the scenario, or I")->capture_default_str();
  app.add_option("--out-dir", out_dir, "Report directory (default: beside the scenario)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), command) == names.end()) {
    std::cerr << "unknown command \"" << command << "\"; expected one of: " << commands_help << "\n";
    return 2;
  }

  try {
    const Scenario scenario = load_scenario(scenario_path);
    if (tol_opt->count() == 0) flags.tol = scenario.tol;
    if (budget_opt->count() == 0) {
      flags.budget = scenario.budget;
      if (const char* env = std::getenv("NCFRACTAL_BUDGET")) {
        try {
          flags.budget = std::stoull(env);
        } catch (const std::exception&) {
          std::cerr << "NCFRACTAL_BUDGET must be a positive integer, got \"" << env << "\"\n";
          return 2;
        }
      }
    }
    if (!(flags.tol > 0.0) || flags.budget == 0) {
      std::cerr << "--tol and --budget must be positive\n";
      return 2;
    }

    const CommandResult result = run_command(command, scenario, flags);
    const fs::path dir = out_dir.empty() ? fs::absolute(scenario_path).parent_path() : fs::path(out_dir);
    fs::create_directories(dir);
    const std::string stem = scenario.name + "." + command;
    write_file(dir / (stem + ".json"), dump_json(result.report));
    if (result.csv) write_file(dir / (stem + ".csv"), *result.csv);
    std::cout << command << " " << scenario.name << ": " << (result.pass ? "pass" : "FAIL") << " -> "
              << (dir / (stem + ".json")).string() << "\n";
    return result.pass ? 0 : 1;
  } catch (const ParseError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const SchemaError& e) {
    std::cerr << e.what() << "\n";
    return 4;
  } catch (const ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 5;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition failed: " << e.what() << "\n";
    return 6;
  } catch (const ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 7;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 8;
  } catch (const ncfractal::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 9;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
