#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wcsim/cache.hpp"
#include "wcsim/geometry.hpp"
#include "wcsim/grid_map.hpp"

namespace wcsim {

// Agent duty-cycle statuses:
//   SF_GET  heading to a shelf to fetch items (plain trip, or a cache-fill
//           trip when holding a write lock)
//   CA_MOV  heading to a cache to evict its contents (write lock held)
//   CA_GET  heading to a cache to withdraw one reserved item (read lock)
//   CA_ADD  heading to a cache to deposit surplus items (write lock held)
//   SF_ADD  returning evicted items to their shelf
//   UP_END  carrying the task item to the unloading port
enum class Status : uint8_t { SfGet, CaMov, CaGet, CaAdd, SfAdd, UpEnd };
inline constexpr int kStatusCount = 6;

const char* status_name(Status s);  // "SF_GET", "CA_MOV", ...
std::optional<Status> parse_status(std::string_view name);

enum class LockKind : uint8_t { Read, Write };

struct HeldLock {
  int cache_id = -1;
  LockKind kind = LockKind::Read;
};

struct AgentState {
  int id = -1;
  int group = -1;
  Coord loc{};
  Coord target{};
  Status status = Status::SfGet;
  int task_kind = -1;
  int carry_kind = -1;
  int carry_count = 0;
  std::optional<HeldLock> lock;
  bool task_hit = false;  // current task will count as a cache hit
  int age = 0;            // ticks since the agent last reached a target
};

struct LockEvent {
  enum Kind : uint8_t { AcquireRead, AcquireWrite, Release } kind;
  int cache_id = -1;
};

// Trace spelling: "acq_r:3", "acq_w:3", "rel:3".
std::string lock_event_text(const LockEvent& ev);

// Decides what an agent does next. One assigner per port group; it owns no
// state of its own — all shared state lives in the map and the cache group.
class TaskAssigner {
 public:
  TaskAssigner(const GridMap& map, CacheGroup& caches, DistanceCache& dist,
               Coord port, int max_carry, bool caches_enabled);

  // Gives the agent a fresh task and routes it. Preference order: withdraw
  // from a cache already holding the kind (read lock, counts as a hit), fill
  // an empty cache on the way (write lock), evict a victim to make room
  // (write lock), else a plain shelf round trip. Also used for the very
  // first assignment, where empty caches reduce it to the fill/plain cases.
  std::optional<LockEvent> assign_task(AgentState& a, int task_kind, long now);

  // Arrival effects for every status except UP_END (the engine owns
  // delivery): item transfer plus the next leg of the route.
  void on_arrival(AgentState& a, long now);

  // Arrival rule for locks: an agent standing on the cache it locked lets
  // the lock go before anything else happens this tick.
  std::optional<LockEvent> release_on_arrival(AgentState& a);

  // Mid-route improvement: a lock-free SF_GET agent switches to a cache that
  // can serve its kind right now.
  std::optional<LockEvent> try_retarget(AgentState& a, long now);

  // Every (from, to) status edge this implementation can produce.
  static std::vector<std::pair<Status, Status>> state_graph();

  Coord port() const { return port_; }
  CacheGroup& caches() { return *caches_; }
  bool caches_enabled() const { return caches_enabled_; }
  int max_carry() const { return max_carry_; }

 private:
  const GridMap* map_;
  CacheGroup* caches_;
  DistanceCache* dist_;
  Coord port_;
  int max_carry_;
  bool caches_enabled_;
};

}  // namespace wcsim
