#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "spacecheck/accounting.hpp"
#include "spacecheck/ledger.hpp"
#include "spacecheck/restore.hpp"
#include "spacecheck/storage.hpp"

namespace spacecheck {

struct OpOptions {
  // Run compare_spaces before mutating and attach the report to the outcome.
  bool pre_check = false;
  // When set, a restore point is taken at the operation's tick.
  RestoreStore* restore_points = nullptr;
};

struct OpOutcome {
  OperationRecord record;
  std::optional<IntegrityReport> pre_check;
  std::optional<Tick> restore_point_tick;
};

// Client operations. Each validates the fleet, the ledger and the restore
// store before touching any of them, so a thrown error leaves all three as
// they were. A successful call consumes exactly one tick.

OpOutcome allocate_server(ClientLedger& ledger, Fleet& fleet, ServerId server, Bytes capacity,
                          const OpOptions& options = {});

OpOutcome append_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, Bytes size, std::uint64_t seed,
                       const OpOptions& options = {});

// Refuses with EmptyServer when the server holds nothing at all.
OpOutcome delete_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, const OpOptions& options = {});

// Replaces the payload with generate_payload(seed, new_size). new_size may
// equal the old size, which is logged as a zero-delta UPDATE.
OpOutcome update_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, Bytes new_size, std::uint64_t seed,
                       const OpOptions& options = {});

}  // namespace spacecheck
