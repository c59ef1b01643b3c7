#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spacecheck/accounting.hpp"
#include "spacecheck/adversary.hpp"
#include "spacecheck/ledger.hpp"
#include "spacecheck/restore.hpp"
#include "spacecheck/storage.hpp"

namespace spacecheck {

namespace cmd {

struct Fleet {
  std::uint64_t count = 0;
  bool operator==(const Fleet&) const = default;
};
struct Allocate {
  ServerId server;
  Bytes capacity = 0;
  bool operator==(const Allocate&) const = default;
};
struct Append {
  ServerId server;
  std::string block_id;
  Bytes size = 0;
  std::optional<std::uint64_t> seed;
  bool operator==(const Append&) const = default;
};
struct Delete {
  ServerId server;
  std::string block_id;
  bool operator==(const Delete&) const = default;
};
struct Update {
  ServerId server;
  std::string block_id;
  Bytes new_size = 0;
  std::optional<std::uint64_t> seed;
  bool operator==(const Update&) const = default;
};
struct Check {
  bool operator==(const Check&) const = default;
};
struct Audit {
  std::vector<ServerId> scope;  // empty: every server
  bool operator==(const Audit&) const = default;
};
struct RestorePoint {
  bool operator==(const RestorePoint&) const = default;
};
// modify, add or remove; crashes have their own verb.
struct Tamper {
  TamperAction action;
  bool operator==(const Tamper&) const = default;
};
struct Crash {
  ServerId server;
  bool operator==(const Crash&) const = default;
};
struct Recover {
  ServerId server;
  std::optional<Tick> at;
  bool operator==(const Recover&) const = default;
};

}  // namespace cmd

using CommandBody = std::variant<cmd::Fleet, cmd::Allocate, cmd::Append, cmd::Delete, cmd::Update,
                                 cmd::Check, cmd::Audit, cmd::RestorePoint, cmd::Tamper,
                                 cmd::Crash, cmd::Recover>;

struct ScenarioCommand {
  CommandBody body;
  std::size_t line_no = 0;

  // line_no is diagnostic only and does not take part in equality.
  friend bool operator==(const ScenarioCommand& a, const ScenarioCommand& b) {
    return a.body == b.body;
  }
};

// Strict line grammar; `#` starts a comment. Throws ParseError naming the
// line on unknown verbs, wrong arity or malformed tokens.
std::vector<ScenarioCommand> parse_scenario(std::string_view text);

// Canonical single-line spelling (no trailing newline).
std::string format_command(const ScenarioCommand& command);
std::string format_scenario(std::span<const ScenarioCommand> commands);

enum ExitCode : int {
  kExitConsistent = 0,
  kExitUsage = 1,
  kExitViolation = 2,
  kExitUnrecoverable = 3,
};

struct RunOptions {
  bool auto_check = true;
  bool auto_restore = true;
  std::uint64_t seed = 0;
};

struct RunReport {
  std::string text;
  int exit_code = kExitConsistent;
  Verdict verdict = Verdict::Consistent;
};

// Drives the library one command at a time against fresh state. Exposed so
// tests can inspect state between steps; run_scenario is the usual entry.
class ScenarioRunner {
 public:
  explicit ScenarioRunner(RunOptions options = {});

  // Executes a command. Returns false (and records an ERROR line) if the
  // command failed; the run is aborted and later calls are ignored.
  bool step(const ScenarioCommand& command);

  bool aborted() const noexcept { return aborted_; }
  const std::optional<Fleet>& fleet() const noexcept { return fleet_; }
  const ClientLedger& ledger() const noexcept { return ledger_; }
  const RestoreStore& restore_points() const noexcept { return restore_points_; }
  // Every CHECK and AUDIT report emitted so far, in order.
  const std::vector<IntegrityReport>& reports() const noexcept { return reports_; }
  const std::string& text() const noexcept { return text_; }

  // Appends the RESULT line and returns the final report.
  RunReport finish();

 private:
  void execute(const CommandBody& body);
  Fleet& require_fleet();
  void emit_check();
  void emit(const IntegrityReport& report, std::string_view header);
  void snapshot_if_new_tick();
  std::uint64_t client_seed(const std::optional<std::uint64_t>& explicit_seed);

  RunOptions options_;
  std::optional<Fleet> fleet_;
  ClientLedger ledger_;
  RestoreStore restore_points_;
  Lcg64 client_seeds_;
  Lcg64 adversary_seeds_;
  std::vector<IntegrityReport> reports_;
  std::string text_;
  bool aborted_ = false;
  ErrorCode abort_code_ = ErrorCode::Usage;
  bool finished_ = false;
  bool data_recorded_ = false;
  bool violation_seen_ = false;
  int exit_code_ = kExitConsistent;
  Verdict worst_ = Verdict::Consistent;
};

RunReport run_scenario(std::span<const ScenarioCommand> commands, const RunOptions& options = {});

// Ledger file contents for a finished runner.
std::string ledger_text(const ScenarioRunner& runner);

}  // namespace spacecheck
