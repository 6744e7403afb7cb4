#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wcsim/assigner.hpp"
#include "wcsim/cache.hpp"
#include "wcsim/geometry.hpp"
#include "wcsim/grid_map.hpp"
#include "wcsim/planner.hpp"
#include "wcsim/taskgen.hpp"

namespace wcsim {

// One unloading port plus its caches and agents.
struct GroupSpec {
  Coord port{};
  std::vector<Coord> cache_cells;
  int agent_count = 0;
  std::vector<Coord> starts;  // empty => seeded placement on aisle cells
};

struct SimConfig {
  GridMap map;  // kinds already assigned, caches already trimmed
  std::vector<GroupSpec> groups;
  Policy policy = Policy::Lru;
  PlannerKind planner = PlannerKind::Pibt;
  DistParams dist = MkParams{};
  int max_carry = 100;      // items one agent can hold (P)
  int cache_capacity = 0;   // 0 => max_carry - 1
  long task_limit = 1000;   // completions before the run ends
  long watchdog = 50000;    // abort after this many ticks without a delivery
  long wall_clock_ms = 0;   // optional real-time abort, 0 => off
  uint64_t seed = 0;
  bool record_trace = false;
  bool paranoid = true;  // re-validate every joint step and all invariants
};

struct TraceRow {
  long tick = 0;
  int agent = -1;
  Status status = Status::SfGet;  // status while this action was taken
  Coord loc{};
  enum Action : uint8_t { Start, Move, Wait } action = Start;
  std::string lock_event;  // "", "acq_r:N", "acq_w:N", "rel:N"
};

const char* action_name(TraceRow::Action a);

struct RunMetrics {
  long completed = 0;
  long makespan = 0;
  double throughput = 0;  // completed / makespan
  long hits = 0;
  long misses = 0;
  double hit_rate = 0;  // hits / completed
  long moves = 0;
  long waits = 0;
  std::array<long, kStatusCount> status_ticks{};
  std::vector<long> wait_counts;  // per cell, row-major
  int height = 0;
  int width = 0;
  bool aborted = false;
  std::string abort_reason;
  long trace_rows = 0;
  std::vector<TraceRow> trace;  // populated when record_trace
};

// Discrete-tick engine. Per tick: plan a joint collision-free step, execute
// it, release locks of agents that arrived at their locked cache, apply
// arrival effects (item transfers), handle deliveries (which draw the next
// task), then let lock-free SF_GET agents retarget onto readable caches.
class Simulation {
 public:
  explicit Simulation(SimConfig cfg);
  ~Simulation();
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  bool step();          // one tick; false once the run is over
  RunMetrics finish();  // final metrics; call after step() returns false

  long tick() const { return tick_; }
  long completed_tasks() const { return completed_; }
  bool done() const { return done_; }
  const GridMap& map() const { return cfg_.map; }
  const SimConfig& config() const { return cfg_; }
  const std::vector<AgentState>& agents() const { return agents_; }
  int group_count() const { return int(groups_.size()); }
  const CacheGroup& group_caches(int g) const;

  // Full cross-module consistency check; throws std::logic_error.
  void check_invariants() const;

  // Every (from, to) status change realized so far, recorded per update
  // phase so back-to-back changes within one tick stay distinct edges.
  const std::set<std::pair<Status, Status>>& observed_transitions() const {
    return transitions_;
  }

 private:
  struct Group;

  void place_agents();
  void initial_assignments();
  void execute_joint_step(const StepPlan& plan);
  void abort_run(const std::string& reason);

  SimConfig cfg_;
  std::unique_ptr<DistanceCache> dist_;
  std::vector<std::unique_ptr<Group>> groups_;
  std::vector<AgentState> agents_;
  std::unique_ptr<StepPlanner> planner_;

  long tick_ = 0;
  long completed_ = 0;
  long hits_ = 0;
  long misses_ = 0;
  long last_completion_tick_ = 0;
  bool done_ = false;
  bool aborted_ = false;
  std::string abort_reason_;

  long moves_ = 0;
  long waits_ = 0;
  std::array<long, kStatusCount> status_ticks_{};
  std::vector<long> wait_counts_;
  std::vector<TraceRow> trace_;
  long trace_rows_ = 0;
  std::set<std::pair<Status, Status>> transitions_;

  // Conservation ledger: items leaving shelves must end up delivered,
  // restocked, cached, or in someone's hands.
  long shelf_withdrawn_ = 0;
  long shelf_restocked_ = 0;
  long delivered_items_ = 0;

  long deadline_ms_ = 0;  // wall-clock cutoff, 0 => none
};

RunMetrics run_simulation(SimConfig cfg);

}  // namespace wcsim
