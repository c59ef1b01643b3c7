#include "spacecheck/scenario.hpp"

#include <charconv>
#include <sstream>

#include "spacecheck/audit.hpp"
#include "spacecheck/block_ops.hpp"

namespace spacecheck {

namespace {

// Adversary payload seeds come from a stream offset from the client's.
constexpr std::uint64_t kAdversaryStreamOffset = 0x9e3779b97f4a7c15ull;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

class LineParser {
 public:
  LineParser(std::size_t line_no, std::vector<std::string_view> tokens)
      : line_no_(line_no), tokens_(std::move(tokens)) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError(ErrorCode::Parse, line_no_, why);
  }

  void arity(std::size_t min, std::size_t max) const {
    std::size_t n = tokens_.size() - 1;
    if (n < min || n > max) {
      fail("'" + std::string(tokens_[0]) + "' takes " +
           (min == max ? std::to_string(min) : std::to_string(min) + "-" + std::to_string(max)) +
           " argument(s), got " + std::to_string(n));
    }
  }

  std::size_t size() const { return tokens_.size(); }
  std::string_view at(std::size_t i) const { return tokens_[i]; }

  std::uint64_t number(std::size_t i) const { return unsigned_value(tokens_[i]); }

  std::uint64_t unsigned_value(std::string_view t) const {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
      fail("expected a non-negative integer, got '" + std::string(t) + "'");
    }
    return v;
  }

  std::int64_t signed_value(std::size_t i) const {
    std::string_view t = tokens_[i];
    std::string_view digits = t;
    if (!t.empty() && (t[0] == '+' || t[0] == '-')) digits = t.substr(1);
    std::uint64_t magnitude = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), magnitude);
    if (digits.empty() || ec != std::errc() || ptr != digits.data() + digits.size()) {
      fail("expected a signed integer, got '" + std::string(t) + "'");
    }
    bool negative = t[0] == '-';
    constexpr std::uint64_t kMaxPositive = 9223372036854775807ull;
    if (magnitude > kMaxPositive + (negative ? 1 : 0)) fail("delta out of range");
    if (negative) return magnitude == kMaxPositive + 1 ? INT64_MIN : -static_cast<std::int64_t>(magnitude);
    return static_cast<std::int64_t>(magnitude);
  }

  ServerId server(std::size_t i) const {
    try {
      return ServerId::parse(tokens_[i]);
    } catch (const Error&) {
      fail("invalid server id '" + std::string(tokens_[i]) + "'");
    }
  }

  std::string block(std::size_t i) const {
    if (!is_valid_block_id(tokens_[i])) fail("invalid block id '" + std::string(tokens_[i]) + "'");
    return std::string(tokens_[i]);
  }

  // Optional trailing key=<u64>.
  std::optional<std::uint64_t> keyed(std::size_t i, std::string_view key) const {
    if (i >= tokens_.size()) return std::nullopt;
    std::string_view t = tokens_[i];
    if (t.size() <= key.size() + 1 || t.substr(0, key.size()) != key || t[key.size()] != '=') {
      fail("expected '" + std::string(key) + "=<n>', got '" + std::string(t) + "'");
    }
    return unsigned_value(t.substr(key.size() + 1));
  }

 private:
  std::size_t line_no_;
  std::vector<std::string_view> tokens_;
};

CommandBody parse_line(const LineParser& p) {
  std::string_view verb = p.at(0);
  if (verb == "fleet") {
    p.arity(1, 1);
    return cmd::Fleet{p.number(1)};
  }
  if (verb == "allocate") {
    p.arity(2, 2);
    return cmd::Allocate{p.server(1), p.number(2)};
  }
  if (verb == "append") {
    p.arity(3, 4);
    return cmd::Append{p.server(1), p.block(2), p.number(3), p.keyed(4, "seed")};
  }
  if (verb == "delete") {
    p.arity(2, 2);
    return cmd::Delete{p.server(1), p.block(2)};
  }
  if (verb == "update") {
    p.arity(3, 4);
    return cmd::Update{p.server(1), p.block(2), p.number(3), p.keyed(4, "seed")};
  }
  if (verb == "check") {
    p.arity(0, 0);
    return cmd::Check{};
  }
  if (verb == "audit") {
    cmd::Audit audit;
    for (std::size_t i = 1; i < p.size(); ++i) audit.scope.push_back(p.server(i));
    return audit;
  }
  if (verb == "restorepoint") {
    p.arity(0, 0);
    return cmd::RestorePoint{};
  }
  if (verb == "tamper") {
    if (p.size() < 2) p.fail("'tamper' needs a kind: modify, add or remove");
    std::string_view kind = p.at(1);
    TamperAction action;
    if (kind == "modify") {
      p.arity(4, 4);
      action = {TamperKind::Modify, p.server(2), p.block(3), p.signed_value(4), 0};
    } else if (kind == "add") {
      p.arity(4, 4);
      action = {TamperKind::Add, p.server(2), p.block(3), 0, p.number(4)};
    } else if (kind == "remove") {
      p.arity(3, 3);
      action = {TamperKind::Remove, p.server(2), p.block(3), 0, 0};
    } else {
      p.fail("unknown tamper kind '" + std::string(kind) + "'");
    }
    return cmd::Tamper{action};
  }
  if (verb == "crash") {
    p.arity(1, 1);
    return cmd::Crash{p.server(1)};
  }
  if (verb == "recover") {
    p.arity(1, 2);
    return cmd::Recover{p.server(1), p.keyed(2, "at")};
  }
  p.fail("unknown command '" + std::string(verb) + "'");
}

}  // namespace

std::vector<ScenarioCommand> parse_scenario(std::string_view text) {
  std::vector<ScenarioCommand> commands;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tokens = tokenize(line);
    if (!tokens.empty()) {
      LineParser parser(line_no, std::move(tokens));
      commands.push_back({parse_line(parser), line_no});
    }
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return commands;
}

std::string format_command(const ScenarioCommand& command) {
  std::ostringstream out;
  auto seed_suffix = [&](const std::optional<std::uint64_t>& seed) {
    if (seed) out << " seed=" << *seed;
  };
  std::visit(
      Overloaded{
          [&](const cmd::Fleet& c) { out << "fleet " << c.count; },
          [&](const cmd::Allocate& c) { out << "allocate " << c.server.str() << ' ' << c.capacity; },
          [&](const cmd::Append& c) {
            out << "append " << c.server.str() << ' ' << c.block_id << ' ' << c.size;
            seed_suffix(c.seed);
          },
          [&](const cmd::Delete& c) { out << "delete " << c.server.str() << ' ' << c.block_id; },
          [&](const cmd::Update& c) {
            out << "update " << c.server.str() << ' ' << c.block_id << ' ' << c.new_size;
            seed_suffix(c.seed);
          },
          [&](const cmd::Check&) { out << "check"; },
          [&](const cmd::Audit& c) {
            out << "audit";
            for (auto id : c.scope) out << ' ' << id.str();
          },
          [&](const cmd::RestorePoint&) { out << "restorepoint"; },
          [&](const cmd::Tamper& c) {
            const auto& a = c.action;
            out << "tamper " << to_string(a.kind) << ' ' << a.server.str() << ' ' << a.block_id;
            if (a.kind == TamperKind::Modify) {
              out << ' ' << (a.size_delta > 0 ? "+" : "") << a.size_delta;
            } else if (a.kind == TamperKind::Add) {
              out << ' ' << a.size;
            }
          },
          [&](const cmd::Crash& c) { out << "crash " << c.server.str(); },
          [&](const cmd::Recover& c) {
            out << "recover " << c.server.str();
            if (c.at) out << " at=" << *c.at;
          },
      },
      command.body);
  return out.str();
}

std::string format_scenario(std::span<const ScenarioCommand> commands) {
  std::string out;
  for (const auto& c : commands) out += format_command(c) + '\n';
  return out;
}

ScenarioRunner::ScenarioRunner(RunOptions options)
    : options_(options),
      client_seeds_(options.seed),
      adversary_seeds_(options.seed ^ kAdversaryStreamOffset) {}

Fleet& ScenarioRunner::require_fleet() {
  if (!fleet_) throw Error(ErrorCode::Usage, "no fleet; the scenario must start with 'fleet <n>'");
  return *fleet_;
}

std::uint64_t ScenarioRunner::client_seed(const std::optional<std::uint64_t>& explicit_seed) {
  return explicit_seed ? *explicit_seed : client_seeds_.next();
}

void ScenarioRunner::emit(const IntegrityReport& report, std::string_view header) {
  text_ += format_report(report, header);
  worst_ = worst(worst_, report.summary);
  if (report.violation_count > 0) violation_seen_ = true;
  reports_.push_back(report);
}

void ScenarioRunner::emit_check() {
  Fleet& fleet = require_fleet();
  if (data_recorded_) {
    emit(compare_spaces(ledger_, fleet), "CHECK");
  } else {
    emit(check_initial_allocation(ledger_, fleet), "CHECK");
  }
}

void ScenarioRunner::snapshot_if_new_tick() {
  const RestorePoint* last = restore_points_.latest();
  if (last && last->tick >= ledger_.current_tick()) return;
  restore_points_.create(require_fleet(), ledger_.current_tick());
}

void ScenarioRunner::execute(const CommandBody& body) {
  OpOptions op_options;
  if (options_.auto_restore) op_options.restore_points = &restore_points_;

  bool mutating = true;
  std::visit(
      Overloaded{
          [&](const cmd::Fleet& c) {
            if (fleet_) throw Error(ErrorCode::Usage, "fleet already created");
            if (c.count < 1 || c.count > kMaxFleetSize) {
              throw Error(ErrorCode::Bounds, "fleet size must be in [1, " +
                                                 std::to_string(kMaxFleetSize) + "]");
            }
            fleet_.emplace(create_fleet(static_cast<std::size_t>(c.count)));
            ledger_ = ClientLedger(fleet_->size());
            mutating = false;
          },
          [&](const cmd::Allocate& c) {
            allocate_server(ledger_, require_fleet(), c.server, c.capacity, op_options);
          },
          [&](const cmd::Append& c) {
            append_block(ledger_, require_fleet(), c.server, c.block_id, c.size,
                         client_seed(c.seed), op_options);
            data_recorded_ = true;
          },
          [&](const cmd::Delete& c) {
            delete_block(ledger_, require_fleet(), c.server, c.block_id, op_options);
            data_recorded_ = true;
          },
          [&](const cmd::Update& c) {
            update_block(ledger_, require_fleet(), c.server, c.block_id, c.new_size,
                         client_seed(c.seed), op_options);
            data_recorded_ = true;
          },
          [&](const cmd::Check&) {
            emit_check();
            mutating = false;
          },
          [&](const cmd::Audit& c) {
            AuditGrant grant{true, c.scope};
            emit(tpa_audit(grant, public_view(ledger_), require_fleet()), "AUDIT");
            mutating = false;
          },
          [&](const cmd::RestorePoint&) {
            snapshot_if_new_tick();
            mutating = false;
          },
          [&](const cmd::Tamper& c) { apply_tamper(require_fleet(), c.action, adversary_seeds_); },
          [&](const cmd::Crash& c) { crash_server(require_fleet(), c.server); },
          [&](const cmd::Recover& c) {
            auto note = recover(restore_points_, require_fleet(), ledger_, c.server, c.at);
            text_ += format_recovery(note);
            if (!note.reconciliation.empty()) data_recorded_ = true;
            if (options_.auto_restore) snapshot_if_new_tick();
          },
      },
      body);

  if (mutating && options_.auto_check) emit_check();
}

bool ScenarioRunner::step(const ScenarioCommand& command) {
  if (aborted_ || finished_) return false;
  try {
    execute(command.body);
    return true;
  } catch (const Error& e) {
    aborted_ = true;
    abort_code_ = e.code();
    text_ += "ERROR line=" + std::to_string(command.line_no) + " " +
             std::string(to_string(e.code())) + ": " + e.what() + "\n";
    return false;
  }
}

RunReport ScenarioRunner::finish() {
  RunReport report;
  if (!finished_) {
    finished_ = true;
    int exit_code = kExitConsistent;
    if (violation_seen_) {
      exit_code = kExitViolation;
    } else if (aborted_) {
      exit_code = abort_code_ == ErrorCode::Usage ? kExitUsage : kExitUnrecoverable;
    } else if (fleet_) {
      for (const auto& s : fleet_->servers()) {
        if (s.crashed()) exit_code = kExitUnrecoverable;
      }
    }
    text_ += "RESULT verdict=" + std::string(to_string(worst_)) +
             " exit=" + std::to_string(exit_code) + "\n";
    exit_code_ = exit_code;
  }
  report.text = text_;
  report.exit_code = exit_code_;
  report.verdict = worst_;
  return report;
}

RunReport run_scenario(std::span<const ScenarioCommand> commands, const RunOptions& options) {
  ScenarioRunner runner(options);
  for (const auto& c : commands) {
    if (!runner.step(c)) break;
  }
  return runner.finish();
}

std::string ledger_text(const ScenarioRunner& runner) { return save_ledger(runner.ledger()); }

}  // namespace spacecheck
