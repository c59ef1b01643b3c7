#include "spacecheck/block_ops.hpp"

namespace spacecheck {

namespace {

void check_restore_slot(const OpOptions& options, Tick tick) {
  if (!options.restore_points) return;
  const RestorePoint* last = options.restore_points->latest();
  if (last && last->tick >= tick) {
    throw Error(ErrorCode::NonMonotoneTick, "restore store already holds tick " +
                                                std::to_string(last->tick));
  }
}

std::optional<IntegrityReport> maybe_pre_check(const OpOptions& options,
                                               const ClientLedger& ledger, const Fleet& fleet) {
  if (!options.pre_check) return std::nullopt;
  return compare_spaces(ledger, fleet);
}

// Last step of every operation; nothing after the fleet mutation may throw
// a domain error.
OpOutcome commit(ClientLedger& ledger, const Fleet& fleet, OperationRecord record,
                 std::optional<IntegrityReport> pre, const OpOptions& options) {
  ledger.record(record);
  OpOutcome outcome{std::move(record), std::move(pre), std::nullopt};
  if (options.restore_points) {
    options.restore_points->create(fleet, outcome.record.tick);
    outcome.restore_point_tick = outcome.record.tick;
  }
  return outcome;
}

std::int64_t as_delta(Bytes from, Bytes to) {
  return to >= from ? static_cast<std::int64_t>(to - from)
                    : -static_cast<std::int64_t>(from - to);
}

}  // namespace

OpOutcome allocate_server(ClientLedger& ledger, Fleet& fleet, ServerId server, Bytes capacity,
                          const OpOptions& options) {
  ServerState& target = fleet.server(server);
  target.check_allocate(capacity);
  OperationRecord record{ledger.next_tick(), OpKind::Allocate, server, std::string(kNoBlock),
                         0, 0, 0};
  ledger.check(record);
  check_restore_slot(options, record.tick);
  auto pre = maybe_pre_check(options, ledger, fleet);

  target.allocate(capacity);
  Tick tick = record.tick;
  ledger.record_allocation(server, capacity);
  OpOutcome outcome{std::move(record), std::move(pre), std::nullopt};
  if (options.restore_points) {
    options.restore_points->create(fleet, tick);
    outcome.restore_point_tick = tick;
  }
  return outcome;
}

OpOutcome append_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, Bytes size, std::uint64_t seed,
                       const OpOptions& options) {
  ServerState& target = fleet.server(server);
  target.check_insert(block_id, size);
  if (ledger.expected_block_size(server, block_id)) {
    throw Error(ErrorCode::DuplicateBlock,
                "block '" + std::string(block_id) + "' is already recorded for " + server.str());
  }
  Bytes pre_used = ledger.expected_used(server);
  OperationRecord record{ledger.next_tick(), OpKind::Append, server, std::string(block_id),
                         static_cast<std::int64_t>(size), pre_used, pre_used + size};
  if (record.post_used > ledger.capacity(server)) {
    throw Error(ErrorCode::CapacityExceeded,
                "block of " + std::to_string(size) + " bytes exceeds the recorded capacity of " +
                    server.str());
  }
  ledger.check(record);
  check_restore_slot(options, record.tick);
  auto pre = maybe_pre_check(options, ledger, fleet);
  auto block = DataBlock::create(std::string(block_id), generate_payload(seed, size));

  target.insert(std::move(block));
  return commit(ledger, fleet, std::move(record), std::move(pre), options);
}

OpOutcome delete_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, const OpOptions& options) {
  ServerState& target = fleet.server(server);
  if (target.crashed()) {
    throw Error(ErrorCode::ServerCrashed, "server " + server.str() + " is crashed");
  }
  if (server_measure(target).empty()) {
    throw Error(ErrorCode::EmptyServer,
                "server " + server.str() + " is empty; there is nothing to delete");
  }
  target.check_erase(block_id);
  auto expected = ledger.expected_block_size(server, block_id);
  if (!expected) {
    throw Error(ErrorCode::UnknownBlock,
                "block '" + std::string(block_id) + "' is not recorded for " + server.str());
  }
  Bytes pre_used = ledger.expected_used(server);
  OperationRecord record{ledger.next_tick(), OpKind::Delete, server, std::string(block_id),
                         -static_cast<std::int64_t>(*expected), pre_used, pre_used - *expected};
  ledger.check(record);
  check_restore_slot(options, record.tick);
  auto pre = maybe_pre_check(options, ledger, fleet);

  target.erase(block_id);
  return commit(ledger, fleet, std::move(record), std::move(pre), options);
}

OpOutcome update_block(ClientLedger& ledger, Fleet& fleet, ServerId server,
                       std::string_view block_id, Bytes new_size, std::uint64_t seed,
                       const OpOptions& options) {
  ServerState& target = fleet.server(server);
  target.check_replace(block_id, new_size);
  auto expected = ledger.expected_block_size(server, block_id);
  if (!expected) {
    throw Error(ErrorCode::UnknownBlock,
                "block '" + std::string(block_id) + "' is not recorded for " + server.str());
  }
  Bytes pre_used = ledger.expected_used(server);
  Bytes post_used = pre_used - *expected + new_size;
  if (post_used > ledger.capacity(server)) {
    throw Error(ErrorCode::CapacityExceeded,
                "resizing '" + std::string(block_id) + "' exceeds the recorded capacity of " +
                    server.str());
  }
  OperationRecord record{ledger.next_tick(), OpKind::Update, server, std::string(block_id),
                         as_delta(*expected, new_size), pre_used, post_used};
  ledger.check(record);
  check_restore_slot(options, record.tick);
  auto pre = maybe_pre_check(options, ledger, fleet);
  auto block = DataBlock::create(std::string(block_id), generate_payload(seed, new_size));

  target.replace(std::move(block));
  return commit(ledger, fleet, std::move(record), std::move(pre), options);
}

}  // namespace spacecheck
