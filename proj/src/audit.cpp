#include "spacecheck/audit.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace spacecheck {

std::string LedgerPublicView::to_text() const {
  std::ostringstream out;
  out << "view tick=" << tick << '\n';
  for (const auto& s : servers) {
    out << "server " << s.server.str() << " capacity=" << s.capacity
        << " expected=" << s.expected_used << '\n';
    for (const auto& b : s.blocks) out << "block " << b.block_id << " size=" << b.size << '\n';
  }
  return out.str();
}

LedgerPublicView public_view(const ClientLedger& ledger) {
  LedgerPublicView view{ledger.current_tick(), {}};
  for (const auto& [id, entry] : ledger.servers()) {
    PublicServerEntry s{id, entry.capacity, entry.used, {}};
    for (const auto& [block_id, size] : entry.blocks) s.blocks.push_back({block_id, size});
    view.servers.push_back(std::move(s));
  }
  return view;
}

std::vector<OccupancyReport> collect_occupancy(const Fleet& fleet) {
  std::vector<OccupancyReport> out;
  out.reserve(fleet.size());
  for (const auto& server : fleet.servers()) {
    OccupancyReport r{server.id(), std::nullopt};
    if (!server.crashed()) r.measurement = server_measure(server);
    out.push_back(r);
  }
  return out;
}

IntegrityReport tpa_audit(const AuditGrant& grant, const LedgerPublicView& view,
                          std::span<const OccupancyReport> occupancy) {
  if (!grant.granted) {
    throw Error(ErrorCode::NotGranted, "the data owner has not delegated auditing");
  }

  std::map<ServerId, const PublicServerEntry*> expected;
  for (const auto& s : view.servers) expected.emplace(s.server, &s);
  std::map<ServerId, const OccupancyReport*> reported;
  for (const auto& r : occupancy) reported.emplace(r.server, &r);

  bool same_set = expected.size() == reported.size() &&
                  std::equal(expected.begin(), expected.end(), reported.begin(),
                             [](const auto& a, const auto& b) { return a.first == b.first; });
  if (!same_set) {
    throw Error(ErrorCode::Configuration, "ledger view and server reports cover different servers");
  }

  std::vector<ServerId> scope = grant.scope;
  if (scope.empty()) {
    for (const auto& [id, _] : reported) scope.push_back(id);
  }
  std::sort(scope.begin(), scope.end());
  scope.erase(std::unique(scope.begin(), scope.end()), scope.end());

  std::vector<ReportRow> rows;
  rows.reserve(scope.size());
  for (ServerId id : scope) {
    auto it = reported.find(id);
    if (it == reported.end()) {
      throw Error(ErrorCode::Configuration, "audit scope names unknown server " + id.str());
    }
    std::optional<Bytes> actual;
    if (it->second->measurement) actual = it->second->measurement->used;
    rows.push_back({id, expected.at(id)->expected_used, actual, Verdict::Consistent});
  }
  return make_report(view.tick, std::move(rows));
}

IntegrityReport tpa_audit(const AuditGrant& grant, const LedgerPublicView& view,
                          const Fleet& fleet) {
  auto occupancy = collect_occupancy(fleet);
  return tpa_audit(grant, view, occupancy);
}

}  // namespace spacecheck
