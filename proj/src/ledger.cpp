#include "spacecheck/ledger.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

namespace spacecheck {

namespace {

constexpr std::string_view kMagic = "SPACELEDGER";
constexpr std::string_view kVersion = "v1";

// post == pre + delta, without overflow.
bool chains(Bytes pre, std::int64_t delta, Bytes post) {
  if (delta >= 0) return post >= pre && post - pre == static_cast<Bytes>(delta);
  Bytes magnitude = static_cast<Bytes>(-(delta + 1)) + 1;
  return pre >= post && pre - post == magnitude;
}

std::int64_t signed_delta(Bytes from, Bytes to) {
  return to >= from ? static_cast<std::int64_t>(to - from)
                    : -static_cast<std::int64_t>(from - to);
}

Error inconsistent(const OperationRecord& r, const std::string& why) {
  return Error(ErrorCode::InconsistentRecord, "op at tick " + std::to_string(r.tick) + " (" +
                                                  std::string(to_string(r.kind)) + " " +
                                                  r.server.str() + "/" + r.block_id +
                                                  "): " + why);
}

}  // namespace

std::string_view to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::Append: return "APPEND";
    case OpKind::Delete: return "DELETE";
    case OpKind::Update: return "UPDATE";
    case OpKind::Allocate: return "ALLOCATE";
  }
  return "?";
}

std::optional<OpKind> parse_op_kind(std::string_view text) noexcept {
  if (text == "APPEND") return OpKind::Append;
  if (text == "DELETE") return OpKind::Delete;
  if (text == "UPDATE") return OpKind::Update;
  if (text == "ALLOCATE") return OpKind::Allocate;
  return std::nullopt;
}

ClientLedger::ClientLedger(std::size_t server_count) {
  for (std::size_t i = 0; i < server_count; ++i) {
    servers_.emplace(ServerId(static_cast<std::uint32_t>(i)), ServerEntry{});
  }
}

const ClientLedger::ServerEntry& ClientLedger::server(ServerId id) const {
  auto it = servers_.find(id);
  if (it == servers_.end()) {
    throw Error(ErrorCode::UnknownServer, "server " + id.str() + " is not in the ledger");
  }
  return it->second;
}

ClientLedger::ServerEntry& ClientLedger::entry(ServerId id) {
  return const_cast<ServerEntry&>(std::as_const(*this).server(id));
}

std::optional<Bytes> ClientLedger::expected_block_size(ServerId id,
                                                       std::string_view block_id) const {
  const auto& blocks = server(id).blocks;
  auto it = blocks.find(block_id);
  if (it == blocks.end()) return std::nullopt;
  return it->second;
}

void ClientLedger::check(const OperationRecord& r) const {
  const ServerEntry& s = server(r.server);
  if (r.tick <= current_tick_) {
    throw Error(ErrorCode::NonMonotoneTick, "tick " + std::to_string(r.tick) +
                                                " is not after current tick " +
                                                std::to_string(current_tick_));
  }
  if (!chains(r.pre_used, r.size_delta, r.post_used)) {
    throw inconsistent(r, "post_used - pre_used != size_delta");
  }
  if (r.pre_used != s.used) {
    throw inconsistent(r, "pre_used " + std::to_string(r.pre_used) +
                              " differs from expected occupancy " + std::to_string(s.used));
  }

  if (r.kind == OpKind::Allocate) {
    if (r.block_id != kNoBlock) throw inconsistent(r, "ALLOCATE carries no block id");
    if (!s.blocks.empty()) throw inconsistent(r, "server still holds blocks");
    if (r.size_delta != 0) throw inconsistent(r, "ALLOCATE must have zero delta");
    return;
  }

  if (!is_valid_block_id(r.block_id)) throw inconsistent(r, "invalid block id");
  auto it = s.blocks.find(r.block_id);
  switch (r.kind) {
    case OpKind::Append:
      if (it != s.blocks.end()) throw inconsistent(r, "block already recorded");
      if (r.size_delta < 1) throw inconsistent(r, "APPEND must add at least one byte");
      break;
    case OpKind::Delete:
      if (it == s.blocks.end()) throw inconsistent(r, "block not recorded");
      if (!chains(it->second, r.size_delta, 0)) {
        throw inconsistent(r, "DELETE delta must remove the whole block");
      }
      break;
    case OpKind::Update:
      if (it == s.blocks.end()) throw inconsistent(r, "block not recorded");
      if (r.size_delta < 0 && static_cast<Bytes>(-r.size_delta) >= it->second) {
        throw inconsistent(r, "UPDATE would leave the block empty");
      }
      break;
    case OpKind::Allocate:
      break;
  }
  if (r.post_used > s.capacity) throw inconsistent(r, "post_used exceeds capacity");
}

void ClientLedger::record(OperationRecord r) {
  check(r);
  ServerEntry& s = entry(r.server);
  switch (r.kind) {
    case OpKind::Append:
      s.blocks.emplace(r.block_id, static_cast<Bytes>(r.size_delta));
      break;
    case OpKind::Delete:
      s.blocks.erase(s.blocks.find(r.block_id));
      break;
    case OpKind::Update: {
      auto& size = s.blocks.find(r.block_id)->second;
      size = static_cast<Bytes>(static_cast<std::int64_t>(size) + r.size_delta);
      break;
    }
    case OpKind::Allocate:
      break;
  }
  s.used = r.post_used;
  current_tick_ = r.tick;
  log_.push_back(std::move(r));
}

OperationRecord ClientLedger::record_allocation(ServerId id, Bytes capacity) {
  if (capacity < 1) throw Error(ErrorCode::Bounds, "capacity must be at least 1 byte");
  OperationRecord r{next_tick(), OpKind::Allocate, id, std::string(kNoBlock), 0, 0, 0};
  record(r);
  entry(id).capacity = capacity;
  return r;
}

std::vector<OperationRecord> ClientLedger::reconcile(ServerId id, Bytes capacity,
                                                     const SizeTable& actual_blocks) {
  std::vector<OperationRecord> appended;
  // Capacity first so that growth records never trip the capacity check.
  Bytes old_capacity = server(id).capacity;
  entry(id).capacity = std::max(old_capacity, capacity);

  auto emit = [&](OpKind kind, const std::string& block_id, std::int64_t delta) {
    Bytes pre = server(id).used;
    Bytes post = static_cast<Bytes>(static_cast<std::int64_t>(pre) + delta);
    OperationRecord r{next_tick(), kind, id, block_id, delta, pre, post};
    record(r);
    appended.push_back(std::move(r));
  };

  // Shrink before growing so occupancy never transiently exceeds capacity.
  SizeTable expected = server(id).blocks;
  for (const auto& [block_id, size] : expected) {
    auto it = actual_blocks.find(block_id);
    if (it == actual_blocks.end()) {
      emit(OpKind::Delete, block_id, -static_cast<std::int64_t>(size));
    } else if (it->second < size) {
      emit(OpKind::Update, block_id, signed_delta(size, it->second));
    }
  }
  for (const auto& [block_id, size] : actual_blocks) {
    auto it = expected.find(block_id);
    if (it == expected.end()) {
      emit(OpKind::Append, block_id, static_cast<std::int64_t>(size));
    } else if (it->second < size) {
      emit(OpKind::Update, block_id, signed_delta(it->second, size));
    }
  }
  entry(id).capacity = capacity;
  return appended;
}

std::map<ServerId, Bytes> replay_oracle(std::span<const OperationRecord> log) {
  std::map<ServerId, Bytes> used;
  std::optional<Tick> last;
  for (const auto& r : log) {
    auto malformed = [&](const std::string& why) {
      return Error(ErrorCode::MalformedLog, "log entry at tick " + std::to_string(r.tick) + ": " + why);
    };
    if (last && r.tick <= *last) throw malformed("ticks are not strictly increasing");
    last = r.tick;
    Bytes running = used.contains(r.server) ? used[r.server] : 0;
    if (r.pre_used != running) throw malformed("pre_used does not continue the fold");
    if (!chains(r.pre_used, r.size_delta, r.post_used)) throw malformed("delta does not chain");
    if (r.kind == OpKind::Allocate && running != 0) throw malformed("allocation of occupied server");
    used[r.server] = r.post_used;
  }
  return used;
}

std::string save_ledger(const ClientLedger& ledger) {
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  out << "tick " << ledger.current_tick() << '\n';
  for (const auto& [id, s] : ledger.servers()) {
    out << "server " << id.str() << " capacity " << s.capacity << '\n';
  }
  for (const auto& [id, s] : ledger.servers()) {
    for (const auto& [block_id, size] : s.blocks) {
      out << "block " << id.str() << ' ' << block_id << ' ' << size << '\n';
    }
  }
  for (const auto& r : ledger.log()) {
    out << "op " << r.tick << ' ' << to_string(r.kind) << ' ' << r.server.str() << ' '
        << r.block_id << ' ' << r.size_delta << ' ' << r.pre_used << ' ' << r.post_used << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    auto next = line.find(' ', pos);
    fields.push_back(line.substr(pos, next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return fields;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  if (text.size() > 1 && text[0] == '0') return std::nullopt;
  if (text.size() > 2 && text[0] == '-' && text[1] == '0') return std::nullopt;
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

}  // namespace

ClientLedger load_ledger(std::string_view text) {
  if (text.empty()) throw ParseError(ErrorCode::Truncated, 1, "empty ledger stream");

  std::vector<std::string_view> lines;
  bool terminated = true;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(pos));
      terminated = false;
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }

  auto header = split_fields(lines[0]);
  if (header.size() == 2 && header[0] == kMagic && header[1] != kVersion) {
    throw ParseError(ErrorCode::VersionMismatch, 1,
                     "unsupported ledger version '" + std::string(header[1]) + "'");
  }
  if (header.size() != 2 || header[0] != kMagic) {
    throw ParseError(ErrorCode::Parse, 1, "not a ledger file (expected 'SPACELEDGER v1')");
  }
  if (!terminated) {
    throw ParseError(ErrorCode::Truncated, lines.size(), "missing final newline");
  }
  if (lines.size() < 2) throw ParseError(ErrorCode::Truncated, 2, "missing tick line");

  ClientLedger ledger;
  enum class Section { Server, Block, Op } section = Section::Server;

  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    auto fail = [&](const std::string& why) { return ParseError(ErrorCode::Parse, line_no, why); };
    auto f = split_fields(lines[i]);

    auto server_id = [&](std::string_view token) {
      try {
        return ServerId::parse(token);
      } catch (const Error&) {
        throw fail("invalid server id '" + std::string(token) + "'");
      }
    };
    auto unsigned_field = [&](std::string_view token) {
      auto v = parse_number<Bytes>(token);
      if (!v) throw fail("invalid number '" + std::string(token) + "'");
      return *v;
    };

    if (i == 1) {
      if (f.size() != 2 || f[0] != "tick") throw fail("expected 'tick <n>'");
      ledger.current_tick_ = unsigned_field(f[1]);
      continue;
    }

    if (f[0] == "server") {
      if (section != Section::Server) throw fail("server line out of order");
      if (f.size() != 4 || f[2] != "capacity") throw fail("expected 'server <id> capacity <bytes>'");
      ServerId id = server_id(f[1]);
      if (!ledger.servers_.empty() && !(ledger.servers_.rbegin()->first < id)) {
        throw fail("servers must be strictly ordered by id");
      }
      ledger.servers_[id].capacity = unsigned_field(f[3]);
    } else if (f[0] == "block") {
      if (section == Section::Op) throw fail("block line out of order");
      section = Section::Block;
      if (f.size() != 4) throw fail("expected 'block <server> <block> <size>'");
      ServerId id = server_id(f[1]);
      if (!ledger.contains(id)) throw fail("block references unknown server " + id.str());
      if (!is_valid_block_id(f[2])) throw fail("invalid block id '" + std::string(f[2]) + "'");
      Bytes size = unsigned_field(f[3]);
      if (size == 0) throw fail("block size must be at least 1");
      auto& s = ledger.servers_[id];
      if (!s.blocks.empty() && !(s.blocks.rbegin()->first < f[2])) {
        throw fail("blocks must be strictly ordered by id");
      }
      s.blocks.emplace(std::string(f[2]), size);
      s.used += size;
      if (s.used > s.capacity) throw fail("blocks exceed capacity of " + id.str());
    } else if (f[0] == "op") {
      section = Section::Op;
      if (f.size() != 8) throw fail("expected 8 fields in op line");
      OperationRecord r;
      r.tick = unsigned_field(f[1]);
      auto kind = parse_op_kind(f[2]);
      if (!kind) throw fail("unknown op kind '" + std::string(f[2]) + "'");
      r.kind = *kind;
      r.server = server_id(f[3]);
      if (!ledger.contains(r.server)) throw fail("op references unknown server " + r.server.str());
      r.block_id = std::string(f[4]);
      if (r.block_id != kNoBlock && !is_valid_block_id(r.block_id)) throw fail("invalid block id");
      auto delta = parse_number<std::int64_t>(f[5]);
      if (!delta) throw fail("invalid delta '" + std::string(f[5]) + "'");
      r.size_delta = *delta;
      r.pre_used = unsigned_field(f[6]);
      r.post_used = unsigned_field(f[7]);
      if (!chains(r.pre_used, r.size_delta, r.post_used)) throw fail("delta does not match pre/post");
      if (!ledger.log_.empty() && r.tick <= ledger.log_.back().tick) {
        throw fail("op ticks must strictly increase");
      }
      if (r.tick > ledger.current_tick_) throw fail("op tick is after the ledger tick");
      ledger.log_.push_back(std::move(r));
    } else {
      throw fail("unknown record '" + std::string(f[0]) + "'");
    }
  }

  // The block tables must be exactly what the log folds to.
  auto folded = replay_oracle(ledger.log_);
  for (const auto& [id, s] : ledger.servers_) {
    Bytes from_log = folded.contains(id) ? folded.at(id) : 0;
    if (from_log != s.used) {
      throw Error(ErrorCode::MalformedLog, "block table of " + id.str() + " sums to " +
                                               std::to_string(s.used) + " but the log folds to " +
                                               std::to_string(from_log));
    }
  }
  return ledger;
}

}  // namespace spacecheck
