#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "spacecheck/storage.hpp"

namespace spacecheck {

// Unledgered fleet mutations: modification, unauthorized add/remove and
// crashes. None of these functions can reach a ClientLedger.

enum class TamperKind { Modify, Add, Remove, Crash };

std::string_view to_string(TamperKind kind) noexcept;

struct TamperAction {
  TamperKind kind = TamperKind::Modify;
  ServerId server;
  std::string block_id;        // unused for Crash
  std::int64_t size_delta = 0;  // Modify only; 0 is a same-size substitution
  Bytes size = 0;               // Add only

  bool operator==(const TamperAction&) const = default;
};

// Rewrites the block with fresh bytes from `seed`, resized by size_delta.
// The new content always differs from the old, even when the size does not.
// The result must keep at least one byte (use tamper_remove instead) and fit
// the capacity.
void tamper_modify(Fleet& fleet, ServerId server, std::string_view block_id,
                   std::int64_t size_delta, std::uint64_t seed);

void tamper_add(Fleet& fleet, ServerId server, std::string_view block_id, Bytes size,
                std::uint64_t seed);

void tamper_remove(Fleet& fleet, ServerId server, std::string_view block_id);

void crash_server(Fleet& fleet, ServerId server);

// Dispatches an action. Payload seeds are drawn from `seeds`, a stream kept
// separate from the client's so campaigns replay independently.
void apply_tamper(Fleet& fleet, const TamperAction& action, Lcg64& seeds);

}  // namespace spacecheck
