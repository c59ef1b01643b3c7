#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spacecheck/ledger.hpp"
#include "spacecheck/storage.hpp"

namespace spacecheck {

enum class Verdict { Consistent, Violation, Unavailable };

std::string_view to_string(Verdict v) noexcept;

// Ordering used when folding verdicts: VIOLATION > UNAVAILABLE > CONSISTENT.
Verdict worst(Verdict a, Verdict b) noexcept;

struct ReportRow {
  ServerId server;
  Bytes expected_used = 0;
  std::optional<Bytes> actual_used;  // empty when the server is unavailable
  Verdict verdict = Verdict::Consistent;

  bool operator==(const ReportRow&) const = default;
};

// Best-effort per-block attribution for a violating server. Not part of the
// report text.
struct BlockDiscrepancy {
  ServerId server;
  std::string block_id;
  std::optional<Bytes> expected;  // empty: block unknown to the ledger
  std::optional<Bytes> actual;    // empty: block missing on the server

  bool operator==(const BlockDiscrepancy&) const = default;
};

struct IntegrityReport {
  Tick tick = 0;
  std::vector<ReportRow> rows;
  Verdict summary = Verdict::Consistent;
  std::size_t violation_count = 0;
  std::vector<BlockDiscrepancy> diagnostics;
};

// Applies the row rule (VIOLATION iff both sides present and unequal,
// UNAVAILABLE when the actual side is missing) and the summary rule.
IntegrityReport make_report(Tick tick, std::vector<ReportRow> rows);

// Per-server expected (ledger) versus actual (measured) occupancy. The fleet
// and ledger must cover the same server set, else Configuration. Pure.
IntegrityReport compare_spaces(const ClientLedger& ledger, const Fleet& fleet);

// The pre-data check: every server must measure as empty regardless of what
// the ledger expects.
IntegrityReport check_initial_allocation(const ClientLedger& ledger, const Fleet& fleet);

// CHECK tick=<n> / server rows / SUMMARY, each LF-terminated.
std::string format_report(const IntegrityReport& report, std::string_view header = "CHECK");

}  // namespace spacecheck
