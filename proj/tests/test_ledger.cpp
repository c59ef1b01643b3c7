#include <doctest.h>

#include <random>
#include <regex>

#include "support/helpers.hpp"
#include "spacecheck/ledger.hpp"
#include "support/oracles.hpp"

using namespace spacecheck;
using spacecheck::testing::code_of;
using spacecheck::testing::fold_totals;

namespace {

OperationRecord append(const ClientLedger& l, ServerId s, std::string id, Bytes size) {
  Bytes pre = l.expected_used(s);
  return {l.next_tick(), OpKind::Append, s, std::move(id), static_cast<std::int64_t>(size), pre,
          pre + size};
}

// Drives a ledger through `count` random valid records.
void random_ops(ClientLedger& ledger, std::mt19937_64& rng, int count) {
  static std::uint64_t name = 0;
  for (int i = 0; i < count; ++i) {
    ServerId s(static_cast<std::uint32_t>(rng() % ledger.servers().size()));
    const auto& entry = ledger.server(s);
    Bytes free = entry.capacity - entry.used;
    int kind = entry.blocks.empty() ? 0 : static_cast<int>(rng() % 3);
    if (kind == 0 && free == 0) continue;
    if (kind == 0) {
      ledger.record(append(ledger, s, "b" + std::to_string(name++), 1 + rng() % std::min<Bytes>(free, 900)));
      continue;
    }
    auto it = entry.blocks.begin();
    std::advance(it, static_cast<long>(rng() % entry.blocks.size()));
    Bytes pre = entry.used;
    if (kind == 1) {
      ledger.record({ledger.next_tick(), OpKind::Delete, s, it->first,
                     -static_cast<std::int64_t>(it->second), pre, pre - it->second});
    } else {
      Bytes new_size = 1 + rng() % std::min<Bytes>(free + it->second, 900);
      std::int64_t delta = static_cast<std::int64_t>(new_size) - static_cast<std::int64_t>(it->second);
      ledger.record({ledger.next_tick(), OpKind::Update, s, it->first, delta, pre,
                     static_cast<Bytes>(static_cast<std::int64_t>(pre) + delta)});
    }
  }
}

ClientLedger allocated_ledger(std::size_t servers, Bytes capacity) {
  ClientLedger l(servers);
  for (std::uint32_t i = 0; i < servers; ++i) l.record_allocation(ServerId(i), capacity);
  return l;
}

}  // namespace

TEST_CASE("ledger_record examples") {
  ClientLedger l = allocated_ledger(1, 34359738368ull);
  ServerId s0(0);
  CHECK(expected_used(l, s0) == 0);

  ledger_record(l, append(l, s0, "blk1", 1048576));
  CHECK(l.expected_used(s0) == 1048576);

  ledger_record(l, {l.next_tick(), OpKind::Delete, s0, "blk1", -1048576, 1048576, 0});
  CHECK(l.expected_used(s0) == 0);

  auto stale = append(l, s0, "blk2", 10);
  stale.tick = l.current_tick();
  CHECK(code_of([&] { l.record(stale); }) == ErrorCode::NonMonotoneTick);
}

TEST_CASE("expected_used after append and update") {
  ClientLedger l = allocated_ledger(1, 1 << 21);
  ServerId s0(0);
  l.record(append(l, s0, "blk1", 1048576));
  l.record({l.next_tick(), OpKind::Update, s0, "blk1", 512, 1048576, 1049088});
  CHECK(l.expected_used(s0) == 1049088);
  CHECK(l.expected_block_size(s0, "blk1") == 1049088);
  CHECK(code_of([&] { l.expected_used(ServerId(3)); }) == ErrorCode::UnknownServer);
}

TEST_CASE("ledger_record rejects inconsistent records") {
  ClientLedger l = allocated_ledger(2, 1000);
  ServerId s0(0);
  l.record(append(l, s0, "a", 100));
  auto before = save_ledger(l);

  auto bad_chain = append(l, s0, "b", 10);
  bad_chain.post_used += 1;
  CHECK(code_of([&] { l.record(bad_chain); }) == ErrorCode::InconsistentRecord);

  auto bad_pre = append(l, s0, "b", 10);
  bad_pre.pre_used = 0;
  bad_pre.post_used = 10;
  CHECK(code_of([&] { l.record(bad_pre); }) == ErrorCode::InconsistentRecord);

  CHECK(code_of([&] { l.record(append(l, s0, "a", 5)); }) == ErrorCode::InconsistentRecord);
  CHECK(code_of([&] { l.record(append(l, s0, "big", 901)); }) == ErrorCode::InconsistentRecord);
  CHECK(code_of([&] { l.record(append(l, ServerId(9), "a", 1)); }) == ErrorCode::UnknownServer);
  CHECK(code_of([&] {
          l.record({l.next_tick(), OpKind::Delete, s0, "a", -99, 100, 1});
        }) == ErrorCode::InconsistentRecord);
  CHECK(code_of([&] {
          l.record({l.next_tick(), OpKind::Update, s0, "a", -100, 100, 0});
        }) == ErrorCode::InconsistentRecord);
  CHECK(code_of([&] { l.record_allocation(s0, 5); }) == ErrorCode::InconsistentRecord);
  CHECK(save_ledger(l) == before);
}

TEST_CASE("replay_oracle") {
  CHECK(replay_oracle({}).empty());

  std::vector<OperationRecord> one = {{1, OpKind::Append, ServerId(2), "x", 77, 0, 77}};
  CHECK(replay_oracle(one) == std::map<ServerId, Bytes>{{ServerId(2), 77}});

  std::vector<OperationRecord> unordered = {{2, OpKind::Append, ServerId(0), "x", 1, 0, 1},
                                            {2, OpKind::Append, ServerId(0), "y", 1, 1, 2}};
  CHECK(code_of([&] { replay_oracle(unordered); }) == ErrorCode::MalformedLog);

  std::vector<OperationRecord> gap = {{1, OpKind::Append, ServerId(0), "x", 5, 0, 5},
                                      {2, OpKind::Append, ServerId(0), "y", 1, 4, 5}};
  CHECK(code_of([&] { replay_oracle(gap); }) == ErrorCode::MalformedLog);
}

TEST_CASE("property: expected_used equals both folds of the log") {
  std::mt19937_64 rng(17);
  for (int run = 0; run < 50; ++run) {
    ClientLedger l = allocated_ledger(1 + rng() % 8, 256 + rng() % 4096);
    for (int step = 0; step < 200; ++step) {
      random_ops(l, rng, 1);
      auto replay = replay_oracle(l.log());
      auto independent = fold_totals(l.log());
      for (const auto& [id, entry] : l.servers()) {
        REQUIRE(replay.at(id) == entry.used);
        REQUIRE(independent.at(id) == entry.used);
        REQUIRE(entry.used <= entry.capacity);
      }
    }
    for (std::size_t i = 1; i < l.log().size(); ++i) {
      REQUIRE(l.log()[i - 1].tick < l.log()[i].tick);
    }
  }
}

TEST_CASE("save format is bit-exact") {
  ClientLedger l = allocated_ledger(2, 1000);
  l.record(append(l, ServerId(1), "zz", 10));
  l.record(append(l, ServerId(1), "aa", 20));
  l.record({l.next_tick(), OpKind::Update, ServerId(1), "zz", -4, 30, 26});
  CHECK(save_ledger(l) ==
        "SPACELEDGER v1\n"
        "tick 5\n"
        "server s0 capacity 1000\n"
        "server s1 capacity 1000\n"
        "block s1 aa 20\n"
        "block s1 zz 6\n"
        "op 1 ALLOCATE s0 - 0 0 0\n"
        "op 2 ALLOCATE s1 - 0 0 0\n"
        "op 3 APPEND s1 zz 10 0 10\n"
        "op 4 APPEND s1 aa 20 10 30\n"
        "op 5 UPDATE s1 zz -4 30 26\n");
}

TEST_CASE("servers are ordered numerically") {
  ClientLedger l(12);
  auto text = save_ledger(l);
  CHECK(text.find("server s2 ") < text.find("server s10 "));
  CHECK(load_ledger(text) == l);
}

TEST_CASE("round trips") {
  ClientLedger fresh;
  CHECK(load_ledger(save_ledger(fresh)) == fresh);
  ClientLedger fresh_fleet(3);
  CHECK(load_ledger(save_ledger(fresh_fleet)) == fresh_fleet);

  std::mt19937_64 rng(99);
  for (int run = 0; run < 20; ++run) {
    ClientLedger l = allocated_ledger(1 + rng() % 5, 100 + rng() % 3000);
    random_ops(l, rng, 50);
    auto text = save_ledger(l);
    auto loaded = load_ledger(text);
    REQUIRE(loaded == l);
    REQUIRE(save_ledger(loaded) == text);
  }
}

TEST_CASE("saved ledger holds only identifiers and numbers") {
  std::mt19937_64 rng(5);
  ClientLedger l = allocated_ledger(3, 5000);
  random_ops(l, rng, 80);
  const std::regex line(
      "SPACELEDGER v1|tick [0-9]+|server s[0-9]+ capacity [0-9]+|"
      "block s[0-9]+ [A-Za-z0-9_-]+ [0-9]+|"
      "op [0-9]+ (APPEND|DELETE|UPDATE|ALLOCATE) s[0-9]+ [A-Za-z0-9_-]+ -?[0-9]+ [0-9]+ [0-9]+");
  auto text = save_ledger(l);
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    REQUIRE(std::regex_match(text.substr(pos, nl - pos), line));
    pos = nl + 1;
  }
}

TEST_CASE("load errors") {
  auto parse_code = [](std::string_view text, std::size_t expected_line) {
    try {
      load_ledger(text);
    } catch (const ParseError& e) {
      CHECK(e.line() == expected_line);
      return e.code();
    }
    FAIL("expected ParseError");
    return ErrorCode::Usage;
  };

  CHECK(parse_code("GARBAGE", 1) == ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1", 1) == ErrorCode::Truncated);
  CHECK(parse_code("GARBAGE\n", 1) == ErrorCode::Parse);
  CHECK(parse_code("", 1) == ErrorCode::Truncated);
  CHECK(parse_code("SPACELEDGER v2\ntick 0\n", 1) == ErrorCode::VersionMismatch);
  CHECK(parse_code("SPACELEDGER v1\n", 2) == ErrorCode::Truncated);
  CHECK(parse_code("SPACELEDGER v1\ntick 0", 2) == ErrorCode::Truncated);
  CHECK(parse_code("SPACELEDGER v1\ntick 0\nserver s0 capacity x\n", 3) == ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1\ntick 0\nserver s1 capacity 1\nserver s0 capacity 1\n", 4) ==
        ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1\ntick 1\nserver s0 capacity 9\nblock s0 a 5\n"
                   "op 1 APPEND s0 a 5 0 5\nblock s0 b 1\n", 6) == ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1\ntick 1\nserver s0 capacity 9\nop 1 FROB s0 a 5 0 5\n", 4) ==
        ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1\ntick 1\nserver s0 capacity 9\nop 1 APPEND s0 a 5 0 6\n", 4) ==
        ErrorCode::Parse);
  CHECK(parse_code("SPACELEDGER v1\ntick 0\nserver s0 capacity 9\nop 1 APPEND s0 a 5 0 5\n", 4) ==
        ErrorCode::Parse);

  // Block table disagrees with the log.
  CHECK(code_of([] {
          load_ledger("SPACELEDGER v1\ntick 1\nserver s0 capacity 9\nblock s0 a 4\n"
                      "op 1 APPEND s0 a 5 0 5\n");
        }) == ErrorCode::MalformedLog);
}

TEST_CASE("reconcile brings the table in line and keeps the log foldable") {
  ClientLedger l = allocated_ledger(1, 1000);
  ServerId s0(0);
  l.record(append(l, s0, "keep", 10));
  l.record(append(l, s0, "gone", 20));
  l.record(append(l, s0, "grow", 30));
  l.record(append(l, s0, "shrink", 40));

  ClientLedger::SizeTable actual = {{"keep", 10}, {"grow", 35}, {"shrink", 5}, {"new", 7}};
  auto records = l.reconcile(s0, 1000, actual);
  CHECK(records.size() == 4);
  CHECK(l.server(s0).blocks == actual);
  CHECK(l.expected_used(s0) == 57);
  CHECK(replay_oracle(l.log()).at(s0) == 57);
  CHECK(fold_totals(l.log()).at(s0) == 57);

  CHECK(l.reconcile(s0, 1000, actual).empty());
}
