#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spacecheck/error.hpp"

namespace spacecheck {

using Bytes = std::uint64_t;
using Tick = std::uint64_t;
using Payload = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxFleetSize = 1024;
inline constexpr std::size_t kMaxBlockIdLength = 64;

// 64-bit linear congruential generator. Each call to next() advances the
// state once and returns the new state.
class Lcg64 {
 public:
  static constexpr std::uint64_t kMultiplier = 6364136223846793005ull;
  static constexpr std::uint64_t kIncrement = 1442695040888963407ull;

  constexpr explicit Lcg64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ = state_ * kMultiplier + kIncrement;
    return state_;
  }

  constexpr std::uint8_t next_byte() noexcept {
    return static_cast<std::uint8_t>(next() >> 56);
  }

  constexpr std::uint64_t state() const noexcept { return state_; }

 private:
  std::uint64_t state_;
};

// Byte k is the top byte of the (k+1)-th generator state. Throws Bounds on
// size 0.
Payload generate_payload(std::uint64_t seed, Bytes size);

// Server identifier of the form s<k>.
class ServerId {
 public:
  constexpr ServerId() = default;
  constexpr explicit ServerId(std::uint32_t index) noexcept : index_(index) {}

  static ServerId parse(std::string_view token);

  constexpr std::uint32_t index() const noexcept { return index_; }
  std::string str() const { return "s" + std::to_string(index_); }

  constexpr auto operator<=>(const ServerId&) const = default;

 private:
  std::uint32_t index_ = 0;
};

bool is_valid_block_id(std::string_view id) noexcept;

// A stored unit. The payload buffer is immutable and shared between copies,
// so copying a block (or a whole server) never copies bytes and a copy can
// never observe later changes made through another copy.
class DataBlock {
 public:
  static DataBlock create(std::string id, Payload payload);

  const std::string& id() const noexcept { return id_; }
  Bytes size() const noexcept { return payload_->size(); }
  std::span<const std::uint8_t> payload() const noexcept { return *payload_; }

  friend bool operator==(const DataBlock& a, const DataBlock& b) {
    return a.id_ == b.id_ &&
           (a.payload_ == b.payload_ || *a.payload_ == *b.payload_);
  }

 private:
  DataBlock(std::string id, std::shared_ptr<const Payload> payload)
      : id_(std::move(id)), payload_(std::move(payload)) {}

  std::string id_;
  std::shared_ptr<const Payload> payload_;
};

struct SpaceMeasurement {
  ServerId server;
  Bytes used = 0;
  Bytes free = 0;
  Bytes capacity = 0;

  bool empty() const noexcept { return used == 0 && free == capacity; }
  bool operator==(const SpaceMeasurement&) const = default;
};

// One simulated cloud server. Every mutator either succeeds or throws with
// the server unchanged. The check_* members run the same validation without
// mutating, so callers can validate several parties before committing any.
class ServerState {
 public:
  using BlockTable = std::map<std::string, DataBlock, std::less<>>;

  explicit ServerState(ServerId id) : id_(id) {}

  ServerId id() const noexcept { return id_; }
  Bytes capacity() const noexcept { return capacity_; }
  bool crashed() const noexcept { return crashed_; }
  const BlockTable& blocks() const noexcept { return blocks_; }

  // Bytes physically present. Zero after a crash.
  Bytes used() const noexcept { return used_; }

  const DataBlock* find(std::string_view block_id) const;

  void check_allocate(Bytes capacity) const;
  void check_insert(std::string_view block_id, Bytes size) const;
  void check_erase(std::string_view block_id) const;
  void check_replace(std::string_view block_id, Bytes new_size) const;

  void allocate(Bytes capacity);
  void insert(DataBlock block);
  DataBlock erase(std::string_view block_id);
  void replace(DataBlock block);

  // Marks the server failed and drops its block table.
  void crash();

  bool operator==(const ServerState&) const = default;

 private:
  void check_alive() const;

  ServerId id_;
  Bytes capacity_ = 0;
  Bytes used_ = 0;
  bool crashed_ = false;
  BlockTable blocks_;
};

class Fleet {
 public:
  explicit Fleet(std::size_t count);

  std::size_t size() const noexcept { return servers_.size(); }
  const std::vector<ServerState>& servers() const noexcept { return servers_; }

  bool contains(ServerId id) const noexcept { return id.index() < servers_.size(); }
  const ServerState& server(ServerId id) const;
  ServerState& server(ServerId id);

  bool operator==(const Fleet&) const = default;

 private:
  std::vector<ServerState> servers_;
};

// 1 <= count <= kMaxFleetSize, else Bounds.
Fleet create_fleet(std::size_t count);

// CSP-side allocation. The server must exist, be alive and hold no blocks.
void allocate(Fleet& fleet, ServerId server, Bytes capacity);

// Throws MeasurementUnavailable for a crashed server.
SpaceMeasurement server_measure(const ServerState& server);

// Canonical text dump of the whole fleet including payload bytes (hex).
// Two fleets are equal iff their dumps are equal.
std::string dump_fleet(const Fleet& fleet);

}  // namespace spacecheck
