#include "spacecheck/adversary.hpp"

#include <algorithm>

namespace spacecheck {

std::string_view to_string(TamperKind kind) noexcept {
  switch (kind) {
    case TamperKind::Modify: return "modify";
    case TamperKind::Add: return "add";
    case TamperKind::Remove: return "remove";
    case TamperKind::Crash: return "crash";
  }
  return "?";
}

void tamper_modify(Fleet& fleet, ServerId server, std::string_view block_id,
                   std::int64_t size_delta, std::uint64_t seed) {
  ServerState& target = fleet.server(server);
  target.check_erase(block_id);
  const DataBlock& old = *target.find(block_id);

  Bytes old_size = old.size();
  Bytes new_size;
  if (size_delta >= 0) {
    new_size = old_size + static_cast<Bytes>(size_delta);
    if (new_size < old_size) throw Error(ErrorCode::CapacityExceeded, "size overflow");
  } else {
    Bytes shrink = static_cast<Bytes>(-(size_delta + 1)) + 1;
    if (shrink >= old_size) {
      throw Error(ErrorCode::Bounds, "modify would leave block '" + std::string(block_id) +
                                         "' with no bytes; use remove");
    }
    new_size = old_size - shrink;
  }
  target.check_replace(block_id, new_size);

  Payload bytes = generate_payload(seed, new_size);
  auto old_bytes = old.payload();
  if (std::equal(bytes.begin(), bytes.end(), old_bytes.begin(), old_bytes.end())) {
    bytes[0] ^= 0xff;
  }
  target.replace(DataBlock::create(std::string(block_id), std::move(bytes)));
}

void tamper_add(Fleet& fleet, ServerId server, std::string_view block_id, Bytes size,
                std::uint64_t seed) {
  ServerState& target = fleet.server(server);
  target.check_insert(block_id, size);
  target.insert(DataBlock::create(std::string(block_id), generate_payload(seed, size)));
}

void tamper_remove(Fleet& fleet, ServerId server, std::string_view block_id) {
  fleet.server(server).erase(block_id);
}

void crash_server(Fleet& fleet, ServerId server) { fleet.server(server).crash(); }

void apply_tamper(Fleet& fleet, const TamperAction& action, Lcg64& seeds) {
  switch (action.kind) {
    case TamperKind::Modify:
      tamper_modify(fleet, action.server, action.block_id, action.size_delta, seeds.next());
      break;
    case TamperKind::Add:
      tamper_add(fleet, action.server, action.block_id, action.size, seeds.next());
      break;
    case TamperKind::Remove:
      tamper_remove(fleet, action.server, action.block_id);
      break;
    case TamperKind::Crash:
      crash_server(fleet, action.server);
      break;
  }
}

}  // namespace spacecheck
