#include <doctest.h>

#include <random>

#include "spacecheck/adversary.hpp"
#include "spacecheck/block_ops.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

using namespace spacecheck;
using spacecheck::testing::code_of;

namespace {

constexpr Bytes kGiB32 = 34359738368ull;

struct World {
  Fleet fleet;
  ClientLedger ledger;
  RestoreStore points;

  World(std::size_t servers, Bytes capacity) : fleet(servers), ledger(servers) {
    for (std::uint32_t i = 0; i < servers; ++i) {
      allocate_server(ledger, fleet, ServerId(i), capacity);
    }
  }

  OpOptions opts(bool pre_check = false) { return {pre_check, &points}; }

  // Serialized state of everything an operation may touch.
  std::string state() const {
    return dump_fleet(fleet) + save_ledger(ledger) + std::to_string(points.size());
  }
};

}  // namespace

TEST_CASE("append into a 32 GiB allocation") {
  World w(1, kGiB32);
  ServerId s0(0);
  auto out = append_block(w.ledger, w.fleet, s0, "blk1", 1048576, 42, w.opts());
  CHECK(out.record.kind == OpKind::Append);
  CHECK(out.record.pre_used == 0);
  CHECK(out.record.post_used == 1048576);
  CHECK(out.record.size_delta == 1048576);
  CHECK(out.record.post_used == server_measure(w.fleet.server(s0)).used);
  CHECK(out.restore_point_tick == out.record.tick);
  CHECK(w.fleet.server(s0).find("blk1")->payload()[0] == 0x91);
}

TEST_CASE("append at the capacity boundary") {
  World w(1, 1000);
  ServerId s0(0);
  append_block(w.ledger, w.fleet, s0, "a", 400, 1, w.opts());
  append_block(w.ledger, w.fleet, s0, "fill", 600, 2, w.opts());
  CHECK(server_measure(w.fleet.server(s0)).free == 0);

  auto before = w.state();
  CHECK(code_of([&] { append_block(w.ledger, w.fleet, s0, "one", 1, 3, w.opts()); }) ==
        ErrorCode::CapacityExceeded);
  CHECK(w.state() == before);
}

TEST_CASE("append errors leave everything unchanged") {
  World w(2, 1000);
  ServerId s0(0);
  append_block(w.ledger, w.fleet, s0, "a", 10, 1, w.opts());
  auto oracle_before = replay_oracle(w.ledger.log());
  auto before = w.state();

  CHECK(code_of([&] { append_block(w.ledger, w.fleet, s0, "a", 10, 1, w.opts()); }) ==
        ErrorCode::DuplicateBlock);
  CHECK(replay_oracle(w.ledger.log()) == oracle_before);
  CHECK(code_of([&] { append_block(w.ledger, w.fleet, ServerId(7), "z", 10, 1, w.opts()); }) ==
        ErrorCode::UnknownServer);
  CHECK(code_of([&] { append_block(w.ledger, w.fleet, s0, "z", 0, 1, w.opts()); }) ==
        ErrorCode::Bounds);
  CHECK(w.state() == before);

  crash_server(w.fleet, ServerId(1));
  before = w.state();
  CHECK(code_of([&] { append_block(w.ledger, w.fleet, ServerId(1), "z", 10, 1, w.opts()); }) ==
        ErrorCode::ServerCrashed);
  CHECK(w.state() == before);
}

TEST_CASE("delete") {
  World w(1, 1000);
  ServerId s0(0);
  CHECK(code_of([&] { delete_block(w.ledger, w.fleet, s0, "nothing", w.opts()); }) ==
        ErrorCode::EmptyServer);

  append_block(w.ledger, w.fleet, s0, "only", 123, 1, w.opts());
  auto before = w.state();
  CHECK(code_of([&] { delete_block(w.ledger, w.fleet, s0, "other", w.opts()); }) ==
        ErrorCode::UnknownBlock);
  CHECK(w.state() == before);

  auto out = delete_block(w.ledger, w.fleet, s0, "only", w.opts());
  CHECK(out.record.size_delta == -123);
  CHECK(out.record.post_used == 0);
  CHECK(server_measure(w.fleet.server(s0)).empty());

  crash_server(w.fleet, s0);
  CHECK(code_of([&] { delete_block(w.ledger, w.fleet, s0, "only", w.opts()); }) ==
        ErrorCode::ServerCrashed);
}

TEST_CASE("delete of a block only the adversary knows is refused") {
  World w(1, 1000);
  ServerId s0(0);
  append_block(w.ledger, w.fleet, s0, "mine", 10, 1, w.opts());
  tamper_add(w.fleet, s0, "theirs", 5, 1);
  auto before = w.state();
  CHECK(code_of([&] { delete_block(w.ledger, w.fleet, s0, "theirs", w.opts()); }) ==
        ErrorCode::UnknownBlock);
  CHECK(w.state() == before);
}

TEST_CASE("update") {
  World w(1, 2000);
  ServerId s0(0);
  append_block(w.ledger, w.fleet, s0, "b", 1000, 1, w.opts());

  auto grow = update_block(w.ledger, w.fleet, s0, "b", 1512, 2, w.opts());
  CHECK(grow.record.size_delta == 512);
  CHECK(server_measure(w.fleet.server(s0)).used == 1512);
  CHECK(replay_oracle(w.ledger.log()).at(s0) == 1512);

  auto payload_before = std::vector<std::uint8_t>(w.fleet.server(s0).find("b")->payload().begin(),
                                                  w.fleet.server(s0).find("b")->payload().end());
  auto same = update_block(w.ledger, w.fleet, s0, "b", 1512, 3, w.opts());
  CHECK(same.record.size_delta == 0);
  CHECK(same.record.kind == OpKind::Update);
  auto after = w.fleet.server(s0).find("b")->payload();
  CHECK_FALSE(std::equal(after.begin(), after.end(), payload_before.begin(), payload_before.end()));
  CHECK(compare_spaces(w.ledger, w.fleet).summary == Verdict::Consistent);

  update_block(w.ledger, w.fleet, s0, "b", 2000, 4, w.opts());
  auto before = w.state();
  CHECK(code_of([&] { update_block(w.ledger, w.fleet, s0, "b", 2001, 5, w.opts()); }) ==
        ErrorCode::CapacityExceeded);
  CHECK(w.state() == before);
  CHECK(code_of([&] { update_block(w.ledger, w.fleet, s0, "zz", 1, 5, w.opts()); }) ==
        ErrorCode::UnknownBlock);
  CHECK(code_of([&] { update_block(w.ledger, w.fleet, s0, "b", 0, 5, w.opts()); }) ==
        ErrorCode::Bounds);
  CHECK(w.state() == before);
}

TEST_CASE("pre-check is optional and reports the state before the operation") {
  World w(2, 1000);
  append_block(w.ledger, w.fleet, ServerId(0), "a", 10, 1, w.opts());
  CHECK_FALSE(append_block(w.ledger, w.fleet, ServerId(0), "b", 10, 1, w.opts()).pre_check);

  tamper_add(w.fleet, ServerId(1), "x", 3, 1);
  auto out = append_block(w.ledger, w.fleet, ServerId(0), "c", 10, 1, w.opts(true));
  REQUIRE(out.pre_check.has_value());
  CHECK(out.pre_check->summary == Verdict::Violation);
  CHECK(out.pre_check->tick == out.record.tick - 1);
}

TEST_CASE("restore store collision keeps the operation atomic") {
  World w(1, 1000);
  w.points.create(w.fleet, w.ledger.next_tick());
  auto before = w.state();
  CHECK(code_of([&] { append_block(w.ledger, w.fleet, ServerId(0), "a", 1, 1, w.opts()); }) ==
        ErrorCode::NonMonotoneTick);
  CHECK(w.state() == before);
}

TEST_CASE("property: random honest interleavings") {
  std::mt19937_64 rng(8080);
  for (int run = 0; run < 100; ++run) {
    std::size_t n = 1 + rng() % 8;
    World w(n, 512 + rng() % 4096);
    std::size_t points_before = w.points.size();
    Tick tick_before = w.ledger.current_tick();
    std::uint64_t name = 0;
    for (int step = 0; step < 150; ++step) {
      ServerId s(static_cast<std::uint32_t>(rng() % n));
      auto before = w.state();
      try {
        switch (rng() % 3) {
          case 0: append_block(w.ledger, w.fleet, s, "b" + std::to_string(name++ % 40), 1 + rng() % 700, rng(), w.opts()); break;
          case 1: delete_block(w.ledger, w.fleet, s, "b" + std::to_string(rng() % 40), w.opts()); break;
          case 2: update_block(w.ledger, w.fleet, s, "b" + std::to_string(rng() % 40), 1 + rng() % 700, rng(), w.opts()); break;
        }
        REQUIRE(w.ledger.current_tick() == tick_before + 1);
        REQUIRE(w.points.size() == points_before + 1);
      } catch (const Error&) {
        REQUIRE(w.state() == before);
      }
      tick_before = w.ledger.current_tick();
      points_before = w.points.size();

      auto replay = replay_oracle(w.ledger.log());
      for (const auto& server : w.fleet.servers()) {
        REQUIRE(replay.at(server.id()) == w.ledger.expected_used(server.id()));
        REQUIRE(server.used() == w.ledger.expected_used(server.id()));
      }
      REQUIRE(compare_spaces(w.ledger, w.fleet).summary == Verdict::Consistent);
    }
  }
}
