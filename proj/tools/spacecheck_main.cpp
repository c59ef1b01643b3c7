// spacecheck: runs a storage-integrity scenario file and prints the report.
//
//   spacecheck run <file> [--report <path>] [--ledger <path>] [--seed <u64>]
//                         [--no-auto-check] [--no-auto-restore]
//
// Exit codes: 0 consistent, 1 usage/parse, 2 violation detected,
// 3 unrecoverable.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "spacecheck/scenario.hpp"

namespace {

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

bool write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  out << contents;
  return static_cast<bool>(out);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace spacecheck;

  CLI::App app{"Space-accounting integrity simulator for untrusted multi-server storage"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string report_path;
  std::string ledger_path;
  RunOptions options;
  bool no_auto_check = false;
  bool no_auto_restore = false;

  auto* run = app.add_subcommand("run", "Execute a scenario file");
  run->add_option("file", scenario_path, "Scenario file")->required();
  run->add_option("--report", report_path, "Write the report here instead of stdout");
  run->add_option("--ledger", ledger_path, "Write the final client ledger here");
  run->add_option("--seed", options.seed, "Seed for payloads without an explicit seed=");
  run->add_flag("--no-auto-check", no_auto_check, "Do not check after mutating commands");
  run->add_flag("--no-auto-restore", no_auto_restore, "Do not take restore points automatically");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  options.auto_check = !no_auto_check;
  options.auto_restore = !no_auto_restore;

  std::string text;
  if (!read_file(scenario_path, text)) {
    std::cerr << "error: cannot read scenario file '" << scenario_path << "'\n";
    return kExitUsage;
  }

  std::vector<ScenarioCommand> commands;
  try {
    commands = parse_scenario(text);
  } catch (const ParseError& e) {
    std::cerr << scenario_path << ": " << e.what() << '\n';
    return kExitUsage;
  }

  ScenarioRunner runner(options);
  for (const auto& c : commands) {
    if (!runner.step(c)) break;
  }
  RunReport report = runner.finish();

  if (report_path.empty()) {
    std::cout << report.text;
  } else if (!write_file(report_path, report.text)) {
    std::cerr << "error: cannot write report to '" << report_path << "'\n";
    return kExitUsage;
  }
  if (!ledger_path.empty() && !write_file(ledger_path, ledger_text(runner))) {
    std::cerr << "error: cannot write ledger to '" << ledger_path << "'\n";
    return kExitUsage;
  }
  return report.exit_code;
}
