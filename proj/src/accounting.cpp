#include "spacecheck/accounting.hpp"

#include <sstream>

namespace spacecheck {

namespace {

void require_same_servers(const ClientLedger& ledger, const Fleet& fleet) {
  bool same = ledger.servers().size() == fleet.size();
  for (const auto& [id, entry] : ledger.servers()) {
    same = same && fleet.contains(id);
  }
  if (!same) {
    throw Error(ErrorCode::Configuration,
                "ledger tracks " + std::to_string(ledger.servers().size()) +
                    " servers but the fleet has " + std::to_string(fleet.size()));
  }
}

std::optional<Bytes> measured_used(const ServerState& server) {
  if (server.crashed()) return std::nullopt;
  return server_measure(server).used;
}

std::vector<BlockDiscrepancy> attribute(ServerId id, const ClientLedger::SizeTable& expected,
                                        const ServerState::BlockTable& actual) {
  std::vector<BlockDiscrepancy> out;
  for (const auto& [block_id, size] : expected) {
    const DataBlock* block = actual.contains(block_id) ? &actual.find(block_id)->second : nullptr;
    if (!block) {
      out.push_back({id, block_id, size, std::nullopt});
    } else if (block->size() != size) {
      out.push_back({id, block_id, size, block->size()});
    }
  }
  for (const auto& [block_id, block] : actual) {
    if (!expected.contains(block_id)) out.push_back({id, block_id, std::nullopt, block.size()});
  }
  return out;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Consistent: return "CONSISTENT";
    case Verdict::Violation: return "VIOLATION";
    case Verdict::Unavailable: return "UNAVAILABLE";
  }
  return "?";
}

Verdict worst(Verdict a, Verdict b) noexcept {
  auto rank = [](Verdict v) {
    switch (v) {
      case Verdict::Consistent: return 0;
      case Verdict::Unavailable: return 1;
      case Verdict::Violation: return 2;
    }
    return 0;
  };
  return rank(a) >= rank(b) ? a : b;
}

IntegrityReport make_report(Tick tick, std::vector<ReportRow> rows) {
  IntegrityReport report;
  report.tick = tick;
  for (auto& row : rows) {
    if (!row.actual_used) {
      row.verdict = Verdict::Unavailable;
    } else {
      row.verdict = *row.actual_used == row.expected_used ? Verdict::Consistent : Verdict::Violation;
    }
    if (row.verdict == Verdict::Violation) ++report.violation_count;
    report.summary = worst(report.summary, row.verdict);
  }
  report.rows = std::move(rows);
  return report;
}

IntegrityReport compare_spaces(const ClientLedger& ledger, const Fleet& fleet) {
  require_same_servers(ledger, fleet);
  std::vector<ReportRow> rows;
  rows.reserve(fleet.size());
  for (const auto& server : fleet.servers()) {
    rows.push_back({server.id(), ledger.expected_used(server.id()), measured_used(server),
                    Verdict::Consistent});
  }
  IntegrityReport report = make_report(ledger.current_tick(), std::move(rows));
  for (const auto& row : report.rows) {
    if (row.verdict != Verdict::Violation) continue;
    const auto& server = fleet.server(row.server);
    auto found = attribute(row.server, ledger.server(row.server).blocks, server.blocks());
    report.diagnostics.insert(report.diagnostics.end(), found.begin(), found.end());
  }
  return report;
}

IntegrityReport check_initial_allocation(const ClientLedger& ledger, const Fleet& fleet) {
  require_same_servers(ledger, fleet);
  std::vector<ReportRow> rows;
  rows.reserve(fleet.size());
  for (const auto& server : fleet.servers()) {
    rows.push_back({server.id(), 0, measured_used(server), Verdict::Consistent});
  }
  IntegrityReport report = make_report(ledger.current_tick(), std::move(rows));
  for (const auto& row : report.rows) {
    if (row.verdict != Verdict::Violation) continue;
    auto found = attribute(row.server, {}, fleet.server(row.server).blocks());
    report.diagnostics.insert(report.diagnostics.end(), found.begin(), found.end());
  }
  return report;
}

std::string format_report(const IntegrityReport& report, std::string_view header) {
  std::ostringstream out;
  out << header << " tick=" << report.tick << '\n';
  for (const auto& row : report.rows) {
    out << "server " << row.server.str() << " expected=" << row.expected_used << " actual=";
    if (row.actual_used) {
      out << *row.actual_used;
    } else {
      out << "NA";
    }
    out << " verdict=" << to_string(row.verdict) << '\n';
  }
  out << "SUMMARY verdict=" << to_string(report.summary)
      << " violations=" << report.violation_count << '\n';
  return out.str();
}

}  // namespace spacecheck
