#include "spacecheck/restore.hpp"

#include <algorithm>

namespace spacecheck {

const ServerState& RestorePoint::server(ServerId id) const {
  if (id.index() >= servers.size()) {
    throw Error(ErrorCode::UnknownServer,
                "server " + id.str() + " not in restore point at tick " + std::to_string(tick));
  }
  return servers[id.index()];
}

const RestorePoint& RestoreStore::create(const Fleet& fleet, Tick tick) {
  if (!points_.empty() && tick <= points_.back().tick) {
    throw Error(ErrorCode::NonMonotoneTick,
                "restore point tick " + std::to_string(tick) + " is not after " +
                    std::to_string(points_.back().tick));
  }
  RestorePoint point{tick, {}};
  point.servers.reserve(fleet.size());
  for (const auto& server : fleet.servers()) {
    if (!server.crashed()) {
      point.servers.push_back(server);
      continue;
    }
    // A crashed server has nothing left to copy: keep the allocation only.
    ServerState fresh(server.id());
    if (server.capacity() > 0) fresh.allocate(server.capacity());
    point.servers.push_back(std::move(fresh));
  }
  points_.push_back(std::move(point));
  return points_.back();
}

const RestorePoint* RestoreStore::find(Tick at_tick) const {
  auto it = std::upper_bound(points_.begin(), points_.end(), at_tick,
                             [](Tick t, const RestorePoint& p) { return t < p.tick; });
  if (it == points_.begin()) return nullptr;
  return &*std::prev(it);
}

const RestorePoint* RestoreStore::latest() const {
  return points_.empty() ? nullptr : &points_.back();
}

RecoveryNote recover(const RestoreStore& store, Fleet& fleet, ClientLedger& ledger,
                     ServerId server, std::optional<Tick> at_tick) {
  ServerState& target = fleet.server(server);
  ledger.server(server);

  const RestorePoint* point = at_tick ? store.find(*at_tick) : store.latest();
  if (!point) {
    throw Error(ErrorCode::Unrecoverable,
                "no restore point found for " + server.str() +
                    (at_tick ? " at or before tick " + std::to_string(*at_tick) : std::string()));
  }
  const ServerState& snapshot = point->server(server);

  RecoveryNote note{server, point->tick, {}, {}};
  for (const auto& r : ledger.log()) {
    if (r.server == server && r.tick > point->tick) note.lost_ops.push_back(r);
  }

  ClientLedger::SizeTable sizes;
  for (const auto& [id, block] : snapshot.blocks()) sizes.emplace(id, block.size());

  target = snapshot;
  note.reconciliation = ledger.reconcile(server, snapshot.capacity(), sizes);
  return note;
}

std::string format_recovery(const RecoveryNote& note) {
  return "RECOVER server=" + note.server.str() + " to_tick=" + std::to_string(note.to_tick) +
         " lost_ops=" + std::to_string(note.lost_ops.size()) + "\n";
}

}  // namespace spacecheck
