#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spacecheck/storage.hpp"

namespace spacecheck {

enum class OpKind { Append, Delete, Update, Allocate };

std::string_view to_string(OpKind kind) noexcept;
std::optional<OpKind> parse_op_kind(std::string_view text) noexcept;

// Placeholder block id carried by ALLOCATE records.
inline constexpr std::string_view kNoBlock = "-";

struct OperationRecord {
  Tick tick = 0;
  OpKind kind = OpKind::Append;
  ServerId server;
  std::string block_id;
  std::int64_t size_delta = 0;
  Bytes pre_used = 0;   // expected occupancy before the operation
  Bytes post_used = 0;  // expected occupancy after the operation

  bool operator==(const OperationRecord&) const = default;
};

// The client's content-free record of what the fleet should hold. Only block
// identifiers and sizes are kept, never payload bytes.
class ClientLedger {
 public:
  using SizeTable = std::map<std::string, Bytes, std::less<>>;

  struct ServerEntry {
    Bytes capacity = 0;
    Bytes used = 0;
    SizeTable blocks;

    bool operator==(const ServerEntry&) const = default;
  };

  ClientLedger() = default;

  // Registers s0..s{count-1}, unallocated and empty.
  explicit ClientLedger(std::size_t server_count);

  Tick current_tick() const noexcept { return current_tick_; }
  Tick next_tick() const noexcept { return current_tick_ + 1; }

  const std::map<ServerId, ServerEntry>& servers() const noexcept { return servers_; }
  const ServerEntry& server(ServerId id) const;
  bool contains(ServerId id) const noexcept { return servers_.contains(id); }
  const std::vector<OperationRecord>& log() const noexcept { return log_; }

  Bytes expected_used(ServerId id) const { return server(id).used; }
  Bytes capacity(ServerId id) const { return server(id).capacity; }
  std::optional<Bytes> expected_block_size(ServerId id, std::string_view block_id) const;

  // Validates a record against the current state without applying it.
  // pre_used must equal expected_used; size_delta must agree with the block
  // table for the record's kind.
  void check(const OperationRecord& record) const;

  void record(OperationRecord record);

  // Records an ALLOCATE at next_tick() and sets the server's capacity.
  OperationRecord record_allocation(ServerId id, Bytes capacity);

  // Brings the server's entry in line with a recovered state by appending
  // DELETE/APPEND/UPDATE records at fresh ticks, then adopts `capacity`.
  // Returns the appended records (empty when already in agreement).
  std::vector<OperationRecord> reconcile(ServerId id, Bytes capacity,
                                         const SizeTable& actual_blocks);

  bool operator==(const ClientLedger&) const = default;

 private:
  friend ClientLedger load_ledger(std::string_view text);

  ServerEntry& entry(ServerId id);

  Tick current_tick_ = 0;
  std::map<ServerId, ServerEntry> servers_;
  std::vector<OperationRecord> log_;
};

// Free-function spellings of the ledger contract.
inline void ledger_record(ClientLedger& ledger, OperationRecord record) {
  ledger.record(std::move(record));
}
inline Bytes expected_used(const ClientLedger& ledger, ServerId id) {
  return ledger.expected_used(id);
}

// Recomputes expected occupancy per server by folding the log from an empty
// state. Shares no code with ClientLedger's incremental tables. Throws
// MalformedLog on non-monotone ticks or records that do not chain.
std::map<ServerId, Bytes> replay_oracle(std::span<const OperationRecord> log);

std::string save_ledger(const ClientLedger& ledger);
ClientLedger load_ledger(std::string_view text);

}  // namespace spacecheck
