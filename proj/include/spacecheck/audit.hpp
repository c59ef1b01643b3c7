#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spacecheck/accounting.hpp"
#include "spacecheck/ledger.hpp"
#include "spacecheck/storage.hpp"

namespace spacecheck {

// Detects types that expose payload bytes, either as a member or accessor.
template <typename T>
concept CarriesPayload = requires(const T& t) { t.payload; } || requires(const T& t) { t.payload(); };

// Delegation from the data owner to a third-party auditor. An empty scope
// covers every server.
struct AuditGrant {
  bool granted = false;
  std::vector<ServerId> scope;
};

// Size-only projection of the client ledger. The auditor sees block ids and
// sizes; there is nowhere to put content.
struct PublicBlockEntry {
  std::string block_id;
  Bytes size = 0;

  bool operator==(const PublicBlockEntry&) const = default;
};

struct PublicServerEntry {
  ServerId server;
  Bytes capacity = 0;
  Bytes expected_used = 0;
  std::vector<PublicBlockEntry> blocks;

  bool operator==(const PublicServerEntry&) const = default;
};

struct LedgerPublicView {
  Tick tick = 0;
  std::vector<PublicServerEntry> servers;

  std::string to_text() const;
  bool operator==(const LedgerPublicView&) const = default;
};

// What a server reports about itself: occupancy numbers, nothing else.
// Empty measurement means the server did not answer (crashed).
struct OccupancyReport {
  ServerId server;
  std::optional<SpaceMeasurement> measurement;
};

static_assert(!CarriesPayload<PublicBlockEntry>);
static_assert(!CarriesPayload<PublicServerEntry>);
static_assert(!CarriesPayload<LedgerPublicView>);
static_assert(!CarriesPayload<OccupancyReport>);
static_assert(!CarriesPayload<SpaceMeasurement>);

LedgerPublicView public_view(const ClientLedger& ledger);
std::vector<OccupancyReport> collect_occupancy(const Fleet& fleet);

// Throws NotGranted without delegation and Configuration when the scope
// names a server outside the fleet or the view and reports disagree on the
// server set. The verdict rule is the one compare_spaces uses.
IntegrityReport tpa_audit(const AuditGrant& grant, const LedgerPublicView& view,
                          std::span<const OccupancyReport> occupancy);

// Convenience: projects the fleet through collect_occupancy first.
IntegrityReport tpa_audit(const AuditGrant& grant, const LedgerPublicView& view,
                          const Fleet& fleet);

}  // namespace spacecheck
