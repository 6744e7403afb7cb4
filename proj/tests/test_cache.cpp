#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "support/micro.hpp"
#include "wcsim/cache.hpp"
#include "wcsim/grid_map.hpp"

using namespace wcsim;
using wcsim::testing::make_map;

namespace {

// Corridor with the port at one end and three caches at distances 2, 4, 7.
struct Rig {
  GridMap map = make_map({"U.C.C..C"});
  DistanceCache dist{map};
  CacheGroup group;

  explicit Rig(Policy p = Policy::Lru, int capacity = 5, uint64_t seed = 1)
      : group(p, {{0, {0, 2}}, {1, {0, 4}}, {2, {0, 7}}}, capacity, seed) {}
};

bool slots_equal(const CacheSlot& a, const CacheSlot& b) {
  return a.cache_id == b.cache_id && a.loc == b.loc && a.capacity == b.capacity &&
         a.stored_kind == b.stored_kind && a.count == b.count &&
         a.reserved == b.reserved && a.readers == b.readers &&
         a.writer == b.writer && a.last_use_tick == b.last_use_tick &&
         a.deposit_tick == b.deposit_tick;
}

}  // namespace

TEST_CASE("policy names round-trip") {
  for (Policy p : {Policy::Lru, Policy::Fifo, Policy::Random, Policy::None})
    CHECK(parse_policy(policy_name(p)) == p);
  CHECK_FALSE(parse_policy("mru").has_value());
}

TEST_CASE("read locks reserve one stored item each") {
  Rig rig;
  CacheGroup& g = rig.group;
  g.deposit(0, 7, 2, 5);
  CHECK(g.slot(0).stored_kind == 7);
  CHECK(g.slot(0).deposit_tick == 5);

  CHECK(g.try_acquire_read(0, 1, 7, 6));
  CHECK(g.slot(0).last_use_tick == 6);
  CHECK(g.try_acquire_read(0, 2, 7, 7));
  CHECK(g.slot(0).reserved == 2);
  // Both stored items are spoken for; a third reader is turned away, and the
  // denial must not disturb the slot.
  const CacheSlot before = g.slot(0);
  CHECK_FALSE(g.try_acquire_read(0, 3, 7, 8));
  CHECK(slots_equal(before, g.slot(0)));
  // Wrong kind is refused even with items stored.
  CHECK_FALSE(g.try_acquire_read(0, 3, 8, 8));

  g.release(0, 1);
  CHECK(g.slot(0).reserved == 1);
  CHECK(g.try_acquire_read(0, 3, 7, 9));
  g.check_invariants();
}

TEST_CASE("writers exclude readers and other writers") {
  Rig rig;
  CacheGroup& g = rig.group;
  CHECK(g.try_acquire_write(1, 1));
  const CacheSlot before = g.slot(1);
  CHECK_FALSE(g.try_acquire_write(1, 2));
  CHECK(slots_equal(before, g.slot(1)));
  // A write-locked slot grants no reads and accepts no deposits.
  CHECK_THROWS_AS(g.deposit(1, 3, 2, 1), std::logic_error);
  g.release(1, 1);
  CHECK(g.slot(1).writer == -1);

  g.deposit(1, 3, 2, 1);
  CHECK(g.try_acquire_read(1, 2, 3, 2));
  CHECK_FALSE(g.try_acquire_write(1, 3));
  g.check_invariants();
}

TEST_CASE("releasing a lock never granted is an error") {
  Rig rig;
  CHECK_THROWS_AS(rig.group.release(0, 99), std::logic_error);
}

TEST_CASE("withdrawals empty the slot cleanly") {
  Rig rig;
  CacheGroup& g = rig.group;
  g.deposit(2, 4, 3, 10);
  CHECK(g.withdraw_one(2, 11) == 4);
  CHECK(g.slot(2).count == 2);
  CHECK(g.slot(2).last_use_tick == 11);
  g.withdraw_one(2, 12);
  g.withdraw_one(2, 13);
  CHECK(g.slot(2).count == 0);
  CHECK(g.slot(2).stored_kind == -1);
  CHECK(g.slot(2).deposit_tick == -1);
  CHECK_THROWS_AS(g.withdraw_one(2, 14), std::logic_error);

  g.deposit(2, 9, 4, 20);
  CHECK(g.withdraw_all(2) == std::pair<int, int>{9, 4});
  CHECK(g.slot(2).count == 0);
  CHECK(g.slot(2).stored_kind == -1);
  CHECK_THROWS_AS(g.withdraw_all(2), std::logic_error);
  g.check_invariants();
}

TEST_CASE("deposit rejects bad loads") {
  Rig rig;
  CacheGroup& g = rig.group;
  g.deposit(0, 1, 1, 1);
  CHECK_THROWS_AS(g.deposit(0, 2, 1, 2), std::logic_error);  // non-empty
  CHECK_THROWS_AS(g.deposit(1, 2, 0, 2), std::logic_error);  // n < 1
  CHECK_THROWS_AS(g.deposit(1, 2, 6, 2), std::logic_error);  // n > capacity
  CHECK_THROWS_AS(g.deposit(1, -1, 2, 2), std::logic_error);
}

TEST_CASE("find_readable picks the nearest grantable slot") {
  Rig rig;
  CacheGroup& g = rig.group;
  const Coord from{0, 0};
  CHECK_FALSE(g.find_readable(3, from, rig.dist).has_value());

  g.deposit(1, 3, 1, 1);  // distance 4
  g.deposit(2, 3, 2, 1);  // distance 7
  CHECK(g.find_readable(3, from, rig.dist) == 1);
  // A writer hides the nearer slot.
  CHECK(g.try_acquire_write(1, 9));
  CHECK(g.find_readable(3, from, rig.dist) == 2);
  // Full reservation hides the farther one too.
  CHECK(g.try_acquire_read(2, 1, 3, 2));
  CHECK(g.try_acquire_read(2, 2, 3, 2));
  CHECK_FALSE(g.find_readable(3, from, rig.dist).has_value());
}

TEST_CASE("find_empty picks the nearest idle empty slot") {
  Rig rig;
  CacheGroup& g = rig.group;
  const Coord from{0, 0};
  CHECK(g.find_empty(from, rig.dist) == 0);
  g.deposit(0, 1, 1, 1);
  CHECK(g.find_empty(from, rig.dist) == 1);
  CHECK(g.try_acquire_write(1, 5));
  CHECK(g.find_empty(from, rig.dist) == 2);
  CHECK(g.try_acquire_write(2, 6));
  CHECK_FALSE(g.find_empty(from, rig.dist).has_value());
}

TEST_CASE("equidistant slots break ties toward the lower index") {
  GridMap map = make_map({"C.U.C"});
  DistanceCache dist(map);
  CacheGroup g(Policy::Lru, {{0, {0, 0}}, {1, {0, 4}}}, 5, 1);
  CHECK(g.find_empty({0, 2}, dist) == 0);
  g.deposit(0, 2, 1, 1);
  g.deposit(1, 2, 1, 1);
  CHECK(g.find_readable(2, {0, 2}, dist) == 0);
}

TEST_CASE("LRU evicts the least recently used unlocked slot") {
  Rig rig(Policy::Lru);
  CacheGroup& g = rig.group;
  CHECK_FALSE(g.select_eviction_victim().has_value());  // nothing stored
  g.deposit(0, 1, 2, 1);
  g.deposit(1, 2, 2, 2);
  g.deposit(2, 3, 2, 3);
  g.withdraw_one(0, 4);  // refreshes slot 0
  CHECK(g.select_eviction_victim() == 1);
  CHECK(g.try_acquire_read(1, 7, 2, 4));  // lock shields slot 1
  CHECK(g.select_eviction_victim() == 2);
}

TEST_CASE("FIFO evicts the oldest residency regardless of use") {
  Rig rig(Policy::Fifo);
  CacheGroup& g = rig.group;
  g.deposit(0, 1, 2, 1);
  g.deposit(1, 2, 2, 2);
  g.deposit(2, 3, 2, 3);
  g.withdraw_one(0, 50);  // heavy recent use does not save it
  CHECK(g.select_eviction_victim() == 0);
  CHECK(g.try_acquire_write(0, 9));
  CHECK(g.select_eviction_victim() == 1);
}

TEST_CASE("RANDOM eviction is seed-deterministic and covers all candidates") {
  auto build = [](uint64_t seed) {
    Rig rig(Policy::Random, 5, seed);
    rig.group.deposit(0, 1, 1, 1);
    rig.group.deposit(1, 2, 1, 2);
    rig.group.deposit(2, 3, 1, 3);
    return rig;
  };
  for (uint64_t seed : {1ULL, 7ULL, 42ULL}) {
    Rig a = build(seed);
    Rig b = build(seed);
    CHECK(a.group.select_eviction_victim() == b.group.select_eviction_victim());
  }
  std::set<int> seen;
  for (uint64_t seed = 0; seed < 64; ++seed) {
    Rig rig = build(seed);
    seen.insert(*rig.group.select_eviction_victim());
  }
  CHECK(seen == std::set<int>{0, 1, 2});
}

TEST_CASE("eviction is undefined under policy none") {
  Rig rig(Policy::None);
  rig.group.deposit(0, 1, 1, 1);
  CHECK_THROWS_AS(rig.group.select_eviction_victim(), std::logic_error);
}

TEST_CASE("victims are never locked or empty") {
  Rig rig(Policy::Lru);
  CacheGroup& g = rig.group;
  g.deposit(0, 1, 1, 1);
  g.deposit(1, 2, 1, 2);
  CHECK(g.try_acquire_read(0, 5, 1, 3));
  CHECK(g.try_acquire_write(1, 6));
  CHECK_FALSE(g.select_eviction_victim().has_value());  // slot 2 is empty
}

TEST_CASE("check_invariants flags injected corruption") {
  auto corrupt = [](auto mutate) {
    Rig rig;
    rig.group.deposit(0, 1, 2, 1);
    mutate(rig.group);
    CHECK_THROWS_AS(rig.group.check_invariants(), std::logic_error);
  };
  corrupt([](CacheGroup& g) { g.slot_mut(0).reserved = 1; });
  corrupt([](CacheGroup& g) { g.slot_mut(0).count = 99; });
  corrupt([](CacheGroup& g) { g.slot_mut(0).count = -1; });
  corrupt([](CacheGroup& g) { g.slot_mut(0).stored_kind = -1; });
  corrupt([](CacheGroup& g) { g.slot_mut(1).count = 1; });  // kind still -1
  corrupt([](CacheGroup& g) { g.slot_mut(0).deposit_tick = -1; });
  corrupt([](CacheGroup& g) {
    g.slot_mut(0).readers = {4, 4};
    g.slot_mut(0).reserved = 2;
  });
  corrupt([](CacheGroup& g) {
    g.slot_mut(0).readers = {4};
    g.slot_mut(0).reserved = 1;
    g.slot_mut(0).writer = 5;
  });
}

TEST_CASE("slot lookups by id and by cell") {
  Rig rig;
  CHECK(rig.group.slot_by_cache_id(1) == 1);
  CHECK(rig.group.slot_by_cache_id(99) == -1);
  CHECK(rig.group.slot_at({0, 7}) == 2);
  CHECK(rig.group.slot_at({0, 1}) == -1);
}

TEST_CASE("a group with cells requires positive capacity") {
  CHECK_THROWS_AS(CacheGroup(Policy::Lru, {{0, {0, 0}}}, 0, 1),
                  std::runtime_error);
  CacheGroup empty(Policy::None, {}, 0, 1);  // disabled groups are fine
  CHECK(empty.slot_count() == 0);
}
