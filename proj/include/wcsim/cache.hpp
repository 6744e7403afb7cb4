#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "wcsim/geometry.hpp"
#include "wcsim/grid_map.hpp"
#include "wcsim/rng.hpp"

namespace wcsim {

enum class Policy : uint8_t { Lru, Fifo, Random, None };

std::optional<Policy> parse_policy(std::string_view name);
const char* policy_name(Policy p);

// One cache cell. `reserved` counts outstanding read claims: each granted
// read lock reserves exactly one stored item, so reserved == readers.size()
// and a grant requires reserved < count. A writer excludes all readers and
// other writers; readers exclude writers. Locks are released when the holder
// arrives at the cell; the item transfer happens in the same tick right
// after, so the slot is never observed mid-handoff.
struct CacheSlot {
  int cache_id = -1;  // dense id in the full map
  Coord loc{};
  int capacity = 0;
  int stored_kind = -1;  // -1 iff count == 0
  int count = 0;
  int reserved = 0;
  std::vector<int> readers;  // agent ids, grant order
  int writer = -1;           // agent id or -1
  long last_use_tick = -1;   // read grant / withdraw / deposit
  long deposit_tick = -1;    // start of the current residency

  bool has_locks() const { return writer != -1 || !readers.empty(); }
};

// The cache cells owned by one unloading port, plus the replacement policy.
class CacheGroup {
 public:
  // `cells`: (map cache id, cell) pairs. `seed` only feeds the RANDOM policy.
  CacheGroup(Policy policy, std::vector<std::pair<int, Coord>> cells,
             int capacity, uint64_t seed);

  int slot_count() const { return int(slots_.size()); }
  const CacheSlot& slot(int i) const { return slots_[size_t(i)]; }
  Policy policy() const { return policy_; }
  int slot_by_cache_id(int cache_id) const;  // -1 if not in this group
  int slot_at(Coord loc) const;              // -1 if no slot on that cell

  // Non-blocking lock attempts; a denial changes nothing.
  bool try_acquire_read(int slot, int agent, int kind, long now);
  bool try_acquire_write(int slot, int agent);
  // Releases whichever lock `agent` holds on `slot` (arrival rule).
  void release(int slot, int agent);

  int withdraw_one(int slot, long now);        // returns the item kind
  std::pair<int, int> withdraw_all(int slot);  // (kind, count), empties slot
  void deposit(int slot, int kind, int n, long now);

  // Nearest slot that can grant a read lock for `kind` right now.
  std::optional<int> find_readable(int kind, Coord from, DistanceCache& dist) const;
  // Nearest empty, lock-free slot.
  std::optional<int> find_empty(Coord from, DistanceCache& dist) const;
  // Policy pick among non-empty, lock-free slots (never valid under NONE).
  std::optional<int> select_eviction_victim();

  // Throws std::logic_error on any broken slot invariant.
  void check_invariants() const;

  // Test access for corruption-injection checks.
  CacheSlot& slot_mut(int i) { return slots_[size_t(i)]; }

 private:
  Policy policy_;
  std::vector<CacheSlot> slots_;
  Rng rng_;
};

}  // namespace wcsim
