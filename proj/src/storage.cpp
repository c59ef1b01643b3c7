#include "spacecheck/storage.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace spacecheck {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Bounds: return "bounds";
    case ErrorCode::InvalidToken: return "invalid-token";
    case ErrorCode::UnknownServer: return "unknown-server";
    case ErrorCode::UnknownBlock: return "unknown-block";
    case ErrorCode::DuplicateBlock: return "duplicate-block";
    case ErrorCode::CapacityExceeded: return "capacity-exceeded";
    case ErrorCode::ServerCrashed: return "server-crashed";
    case ErrorCode::AlreadyCrashed: return "already-crashed";
    case ErrorCode::MeasurementUnavailable: return "measurement-unavailable";
    case ErrorCode::ServerNotEmpty: return "server-not-empty";
    case ErrorCode::EmptyServer: return "empty-server";
    case ErrorCode::NonMonotoneTick: return "non-monotone-tick";
    case ErrorCode::InconsistentRecord: return "inconsistent-record";
    case ErrorCode::MalformedLog: return "malformed-log";
    case ErrorCode::Parse: return "parse";
    case ErrorCode::VersionMismatch: return "version-mismatch";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::Configuration: return "configuration";
    case ErrorCode::Unrecoverable: return "unrecoverable";
    case ErrorCode::NotGranted: return "not-granted";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

Payload generate_payload(std::uint64_t seed, Bytes size) {
  if (size == 0) {
    throw Error(ErrorCode::Bounds, "payload size must be at least 1 byte");
  }
  Payload out(size);
  Lcg64 rng(seed);
  for (auto& b : out) b = rng.next_byte();
  return out;
}

ServerId ServerId::parse(std::string_view token) {
  auto fail = [&] {
    return Error(ErrorCode::InvalidToken,
                 "invalid server id '" + std::string(token) + "'");
  };
  if (token.size() < 2 || token.front() != 's') throw fail();
  auto digits = token.substr(1);
  // Canonical spelling only: no leading zeros, so s01 and s1 never alias.
  if (digits.size() > 1 && digits.front() == '0') throw fail();
  std::uint32_t index = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) throw fail();
  return ServerId(index);
}

bool is_valid_block_id(std::string_view id) noexcept {
  if (id.empty() || id.size() > kMaxBlockIdLength) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
           (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

DataBlock DataBlock::create(std::string id, Payload payload) {
  if (!is_valid_block_id(id)) {
    throw Error(ErrorCode::InvalidToken, "invalid block id '" + id + "'");
  }
  if (payload.empty()) {
    throw Error(ErrorCode::Bounds, "block '" + id + "' has zero size");
  }
  return DataBlock(std::move(id), std::make_shared<const Payload>(std::move(payload)));
}

const DataBlock* ServerState::find(std::string_view block_id) const {
  auto it = blocks_.find(block_id);
  return it == blocks_.end() ? nullptr : &it->second;
}

void ServerState::check_alive() const {
  if (crashed_) {
    throw Error(ErrorCode::ServerCrashed, "server " + id_.str() + " is crashed");
  }
}

void ServerState::check_allocate(Bytes capacity) const {
  check_alive();
  if (!blocks_.empty()) {
    throw Error(ErrorCode::ServerNotEmpty,
                "server " + id_.str() + " holds data and cannot be reallocated");
  }
  if (capacity < 1) {
    throw Error(ErrorCode::Bounds, "capacity must be at least 1 byte");
  }
}

void ServerState::check_insert(std::string_view block_id, Bytes size) const {
  check_alive();
  if (!is_valid_block_id(block_id)) {
    throw Error(ErrorCode::InvalidToken, "invalid block id '" + std::string(block_id) + "'");
  }
  if (size == 0) throw Error(ErrorCode::Bounds, "block size must be at least 1 byte");
  if (blocks_.contains(block_id)) {
    throw Error(ErrorCode::DuplicateBlock,
                "block '" + std::string(block_id) + "' already exists on " + id_.str());
  }
  if (size > capacity_ - used_) {
    throw Error(ErrorCode::CapacityExceeded,
                "block of " + std::to_string(size) + " bytes does not fit on " + id_.str() +
                    " (free " + std::to_string(capacity_ - used_) + ")");
  }
}

void ServerState::check_erase(std::string_view block_id) const {
  check_alive();
  if (!blocks_.contains(block_id)) {
    throw Error(ErrorCode::UnknownBlock,
                "block '" + std::string(block_id) + "' not found on " + id_.str());
  }
}

void ServerState::check_replace(std::string_view block_id, Bytes new_size) const {
  check_erase(block_id);
  if (new_size == 0) throw Error(ErrorCode::Bounds, "block size must be at least 1 byte");
  Bytes old_size = find(block_id)->size();
  Bytes free_after_removal = capacity_ - used_ + old_size;
  if (new_size > free_after_removal) {
    throw Error(ErrorCode::CapacityExceeded,
                "resizing '" + std::string(block_id) + "' to " + std::to_string(new_size) +
                    " bytes exceeds capacity of " + id_.str());
  }
}

void ServerState::allocate(Bytes capacity) {
  check_allocate(capacity);
  capacity_ = capacity;
}

void ServerState::insert(DataBlock block) {
  check_insert(block.id(), block.size());
  used_ += block.size();
  std::string key = block.id();
  blocks_.emplace(std::move(key), std::move(block));
}

DataBlock ServerState::erase(std::string_view block_id) {
  check_erase(block_id);
  auto node = blocks_.extract(blocks_.find(block_id));
  used_ -= node.mapped().size();
  return std::move(node.mapped());
}

void ServerState::replace(DataBlock block) {
  check_replace(block.id(), block.size());
  auto it = blocks_.find(block.id());
  used_ = used_ - it->second.size() + block.size();
  it->second = std::move(block);
}

void ServerState::crash() {
  if (crashed_) {
    throw Error(ErrorCode::AlreadyCrashed, "server " + id_.str() + " is already crashed");
  }
  crashed_ = true;
  blocks_.clear();
  used_ = 0;
}

Fleet::Fleet(std::size_t count) {
  if (count < 1 || count > kMaxFleetSize) {
    throw Error(ErrorCode::Bounds, "fleet size must be in [1, " +
                                       std::to_string(kMaxFleetSize) + "], got " +
                                       std::to_string(count));
  }
  servers_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    servers_.emplace_back(ServerId(static_cast<std::uint32_t>(i)));
  }
}

const ServerState& Fleet::server(ServerId id) const {
  if (!contains(id)) throw Error(ErrorCode::UnknownServer, "unknown server " + id.str());
  return servers_[id.index()];
}

ServerState& Fleet::server(ServerId id) {
  if (!contains(id)) throw Error(ErrorCode::UnknownServer, "unknown server " + id.str());
  return servers_[id.index()];
}

Fleet create_fleet(std::size_t count) { return Fleet(count); }

void allocate(Fleet& fleet, ServerId server, Bytes capacity) {
  fleet.server(server).allocate(capacity);
}

SpaceMeasurement server_measure(const ServerState& server) {
  if (server.crashed()) {
    throw Error(ErrorCode::MeasurementUnavailable,
                "server " + server.id().str() + " is crashed; measurement unavailable");
  }
  return SpaceMeasurement{server.id(), server.used(), server.capacity() - server.used(),
                          server.capacity()};
}

std::string dump_fleet(const Fleet& fleet) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::ostringstream out;
  for (const auto& s : fleet.servers()) {
    out << "server " << s.id().str() << " capacity " << s.capacity() << " used " << s.used()
        << " crashed " << (s.crashed() ? 1 : 0) << '\n';
    for (const auto& [id, block] : s.blocks()) {
      out << "  block " << id << ' ' << block.size() << ' ';
      for (auto b : block.payload()) out << kHex[b >> 4] << kHex[b & 0xf];
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace spacecheck
