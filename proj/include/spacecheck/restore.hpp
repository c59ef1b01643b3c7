#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spacecheck/ledger.hpp"
#include "spacecheck/storage.hpp"

namespace spacecheck {

// Fleet-wide snapshot held on the provider side. Server copies have their
// crash flag cleared.
struct RestorePoint {
  Tick tick = 0;
  std::vector<ServerState> servers;

  const ServerState& server(ServerId id) const;
};

// Append-only, tick-ordered collection of restore points. All points are
// retained.
class RestoreStore {
 public:
  // Throws NonMonotoneTick unless `tick` is greater than every stored tick.
  const RestorePoint& create(const Fleet& fleet, Tick tick);

  // Greatest tick <= at_tick, or nullptr when there is none.
  const RestorePoint* find(Tick at_tick) const;
  const RestorePoint* latest() const;

  std::span<const RestorePoint> points() const noexcept { return points_; }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t size() const noexcept { return points_.size(); }

 private:
  std::vector<RestorePoint> points_;
};

inline const RestorePoint& create_restore_point(RestoreStore& store, const Fleet& fleet,
                                                Tick tick) {
  return store.create(fleet, tick);
}

inline const RestorePoint* find_restore_point(const RestoreStore& store, Tick at_tick) {
  return store.find(at_tick);
}

struct RecoveryNote {
  ServerId server;
  Tick to_tick = 0;
  std::vector<OperationRecord> lost_ops;        // ledger ops on the server after to_tick
  std::vector<OperationRecord> reconciliation;  // records appended to the ledger
};

// Replaces the server's state with its copy in the selected restore point
// (latest when at_tick is empty) and reconciles the ledger so that its
// expected table for the server matches the restored blocks. Throws
// Unrecoverable when no restore point qualifies.
RecoveryNote recover(const RestoreStore& store, Fleet& fleet, ClientLedger& ledger,
                     ServerId server, std::optional<Tick> at_tick = std::nullopt);

// RECOVER server=<id> to_tick=<t> lost_ops=<k>
std::string format_recovery(const RecoveryNote& note);

}  // namespace spacecheck
