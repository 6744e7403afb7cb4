#include "wcsim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <set>
#include <stdexcept>

#include "wcsim/rng.hpp"

namespace wcsim {

const char* action_name(TraceRow::Action a) {
  switch (a) {
    case TraceRow::Start: return "start";
    case TraceRow::Move: return "move";
    case TraceRow::Wait: return "wait";
  }
  return "?";
}

struct Simulation::Group {
  GroupSpec spec;
  CacheGroup caches;
  TaskAssigner assigner;
  std::unique_ptr<TaskStream> stream;

  Group(GroupSpec s, CacheGroup c, const GridMap& map, DistanceCache& dist,
        int max_carry, bool caches_enabled, std::unique_ptr<TaskStream> ts)
      : spec(std::move(s)),
        caches(std::move(c)),
        assigner(map, caches, dist, spec.port, max_carry, caches_enabled),
        stream(std::move(ts)) {}
};

namespace {

long now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

[[noreturn]] void config_fail(const std::string& what) {
  throw std::runtime_error("sim config: " + what);
}

}  // namespace

Simulation::Simulation(SimConfig cfg) : cfg_(std::move(cfg)) {
  GridMap& map = cfg_.map;
  validate_map(map);
  if (map.kind_count() < 1) config_fail("map has no shelves");
  if (cfg_.groups.empty()) config_fail("no agent groups");
  if (cfg_.max_carry < 1) config_fail("max carry must be >= 1");
  if (cfg_.cache_capacity == 0) cfg_.cache_capacity = cfg_.max_carry - 1;
  if (cfg_.task_limit < 1) config_fail("task limit must be >= 1");
  if (cfg_.watchdog < 1) config_fail("watchdog must be >= 1");

  dist_ = std::make_unique<DistanceCache>(map);

  // Structural checks: ports and caches must be what the map says they are,
  // caches must not be claimed twice, and everything must be reachable.
  std::set<int> used_cache_cells;
  std::set<int> used_ports;
  int total_cache_cells = 0;
  for (size_t g = 0; g < cfg_.groups.size(); ++g) {
    const GroupSpec& spec = cfg_.groups[g];
    if (!map.in_bounds(spec.port) || map.kind(spec.port) != CellKind::Port)
      config_fail("group " + std::to_string(g) + " port " +
                  to_string(spec.port) + " is not a port cell");
    if (!used_ports.insert(map.idx(spec.port)).second)
      config_fail("two groups share port " + to_string(spec.port));
    if (spec.agent_count < 1)
      config_fail("group " + std::to_string(g) + " has no agents");
    for (const Coord& c : spec.cache_cells) {
      if (!map.in_bounds(c) || map.kind(c) != CellKind::Cache)
        config_fail("group " + std::to_string(g) + " cache " + to_string(c) +
                    " is not a cache cell");
      if (!used_cache_cells.insert(map.idx(c)).second)
        config_fail("cache " + to_string(c) + " assigned to two groups");
      ++total_cache_cells;
    }
  }
  const bool caches_enabled = cfg_.policy != Policy::None && total_cache_cells > 0;
  if (caches_enabled && cfg_.cache_capacity < 1)
    config_fail("cache capacity must be >= 1");
  if (caches_enabled && cfg_.max_carry < 2)
    config_fail("max carry must be >= 2 when caches are in play");

  // Reachability: one BFS from the first port must cover every cell of
  // interest (the grid is undirected, so pairwise reachability follows).
  const DistanceField& reach = dist_->field(cfg_.groups[0].port);
  auto require_reachable = [&](Coord c, const char* what) {
    if (reach.at(c) == DistanceField::kUnreachable)
      config_fail(std::string(what) + " " + to_string(c) +
                  " unreachable from port " + to_string(cfg_.groups[0].port));
  };
  for (const Coord& c : map.shelf_of_kind) require_reachable(c, "shelf");
  for (const GroupSpec& spec : cfg_.groups) {
    require_reachable(spec.port, "port");
    for (const Coord& c : spec.cache_cells) require_reachable(c, "cache");
  }

  // Build groups: each gets its own cache set, task stream, and assigner.
  for (size_t g = 0; g < cfg_.groups.size(); ++g) {
    const GroupSpec& spec = cfg_.groups[g];
    std::vector<std::pair<int, Coord>> cells;
    for (const Coord& c : spec.cache_cells)
      cells.emplace_back(map.cache_id_at[size_t(map.idx(c))], c);
    CacheGroup caches(cfg_.policy, std::move(cells),
                      caches_enabled ? cfg_.cache_capacity : 1,
                      stream_seed(cfg_.seed, Stream::kCacheGroupBase, g));
    auto stream = make_stream(cfg_.dist, map.kind_count(),
                              stream_seed(cfg_.seed, Stream::kTaskGroupBase, g));
    groups_.push_back(std::make_unique<Group>(spec, std::move(caches), map,
                                              *dist_, cfg_.max_carry,
                                              caches_enabled,
                                              std::move(stream)));
  }

  planner_ = make_planner(cfg_.planner);
  wait_counts_.assign(map.cells.size(), 0);

  place_agents();
  for (const AgentState& a : agents_)
    require_reachable(a.loc, "agent start");
  initial_assignments();

  if (cfg_.wall_clock_ms > 0) deadline_ms_ = now_ms() + cfg_.wall_clock_ms;
  if (cfg_.paranoid) check_invariants();
}

Simulation::~Simulation() = default;

const CacheGroup& Simulation::group_caches(int g) const {
  return groups_[size_t(g)]->caches;
}

void Simulation::place_agents() {
  const GridMap& map = cfg_.map;
  std::set<int> taken;
  int next_id = 0;
  // Explicit starts are claimed first so seeded placement can't collide.
  for (size_t g = 0; g < cfg_.groups.size(); ++g) {
    const GroupSpec& spec = cfg_.groups[g];
    if (spec.starts.empty()) continue;
    if (int(spec.starts.size()) != spec.agent_count)
      config_fail("group " + std::to_string(g) + " lists " +
                  std::to_string(spec.starts.size()) + " starts for " +
                  std::to_string(spec.agent_count) + " agents");
    for (const Coord& c : spec.starts) {
      if (!map.passable(c))
        config_fail("start " + to_string(c) + " is not passable");
      if (!taken.insert(map.idx(c)).second)
        config_fail("two agents start on " + to_string(c));
    }
  }
  std::vector<Coord> aisle_pool;
  for (int r = 0; r < map.height; ++r)
    for (int c = 0; c < map.width; ++c)
      if (map.kind({r, c}) == CellKind::Aisle &&
          taken.find(map.idx({r, c})) == taken.end())
        aisle_pool.push_back({r, c});
  Rng start_rng(stream_seed(cfg_.seed, Stream::kStartCells));
  start_rng.shuffle(aisle_pool);
  size_t pool_next = 0;

  for (size_t g = 0; g < cfg_.groups.size(); ++g) {
    const GroupSpec& spec = cfg_.groups[g];
    for (int k = 0; k < spec.agent_count; ++k) {
      AgentState a;
      a.id = next_id++;
      a.group = int(g);
      if (!spec.starts.empty()) {
        a.loc = spec.starts[size_t(k)];
      } else {
        if (pool_next >= aisle_pool.size())
          config_fail("not enough free aisle cells to place all agents");
        a.loc = aisle_pool[pool_next++];
      }
      a.target = a.loc;
      agents_.push_back(a);
    }
  }
}

void Simulation::initial_assignments() {
  // The very first assignment uses the same preference cascade as any other;
  // with every cache still empty it degenerates to fill trips and plain
  // shelf trips, so all agents start out SF_GET.
  for (AgentState& a : agents_) {
    Group& grp = *groups_[size_t(a.group)];
    const int kind = grp.stream->next_kind();
    const auto ev = grp.assigner.assign_task(a, kind, 0);
    if (cfg_.record_trace)
      trace_.push_back({0, a.id, a.status, a.loc, TraceRow::Start,
                        ev ? lock_event_text(*ev) : std::string()});
  }
  trace_rows_ += long(agents_.size());
}

bool Simulation::step() {
  if (done_) return false;
  ++tick_;

  // Plan one collision-free joint move.
  StepRequest req;
  req.map = &cfg_.map;
  req.dist = dist_.get();
  req.seed = stream_seed(cfg_.seed, Stream::kPlanner, uint64_t(tick_));
  req.agents.reserve(agents_.size());
  for (const AgentState& a : agents_)
    req.agents.push_back(
        {a.id, a.loc, a.target,
         plan_priority(a.age, a.id, int(agents_.size()))});
  const StepPlan plan = planner_->plan_step(req);
  if (cfg_.paranoid) {
    std::vector<Coord> before;
    before.reserve(agents_.size());
    for (const AgentState& a : agents_) before.push_back(a.loc);
    const auto conflicts = validate_step(cfg_.map, before, plan);
    if (!conflicts.empty())
      throw std::logic_error("tick " + std::to_string(tick_) +
                             ": planner emitted an unsafe step: " +
                             conflicts.front().describe());
  }

  execute_joint_step(plan);

  if (completed_ >= cfg_.task_limit) {
    done_ = true;
  } else if (tick_ - last_completion_tick_ >= cfg_.watchdog) {
    abort_run("watchdog: no task completed in " + std::to_string(cfg_.watchdog) +
              " ticks");
  } else if (deadline_ms_ > 0 && now_ms() > deadline_ms_) {
    abort_run("wall clock budget exceeded");
  }
  if (cfg_.paranoid) check_invariants();
  return !done_;
}

void Simulation::execute_joint_step(const StepPlan& plan) {
  const size_t n = agents_.size();
  std::vector<bool> arrived(n, false);
  std::vector<bool> was_up_end(n, false);
  std::vector<std::string> lock_note(n);
  std::vector<Status> status_during(n);
  std::vector<TraceRow::Action> action(n);

  // Execute moves; bookkeeping uses the status each agent moved under.
  for (size_t i = 0; i < n; ++i) {
    AgentState& a = agents_[i];
    const Coord to = plan.next[i];
    status_during[i] = a.status;
    was_up_end[i] = a.status == Status::UpEnd;
    if (to == a.loc) {
      action[i] = TraceRow::Wait;
      ++waits_;
      wait_counts_[size_t(cfg_.map.idx(a.loc))] += 1;
    } else {
      action[i] = TraceRow::Move;
      ++moves_;
    }
    status_ticks_[size_t(a.status)] += 1;
    a.loc = to;
    arrived[i] = a.loc == a.target;
    a.age = arrived[i] ? 0 : a.age + 1;
  }

  // Locks fall away the moment their holder stands on the locked cache.
  for (size_t i = 0; i < n; ++i) {
    AgentState& a = agents_[i];
    if (!arrived[i] || !a.lock) continue;
    if (auto ev = groups_[size_t(a.group)]->assigner.release_on_arrival(a))
      lock_note[i] = lock_event_text(*ev);
  }

  // Item effects first: withdrawals and deposits must settle before new
  // locks are granted, or a same-tick grant could claim an item that is
  // already walking away. Shelf traffic feeds the conservation ledger.
  for (size_t i = 0; i < n; ++i) {
    if (!arrived[i] || was_up_end[i]) continue;
    AgentState& a = agents_[i];
    const int carry_before = a.carry_count;
    const Status before = a.status;
    groups_[size_t(a.group)]->assigner.on_arrival(a, tick_);
    if (before != a.status) transitions_.emplace(before, a.status);
    if (status_during[i] == Status::SfGet)
      shelf_withdrawn_ += a.carry_count - carry_before;
    else if (status_during[i] == Status::SfAdd)
      shelf_restocked_ += carry_before - a.carry_count;
  }

  // Deliveries: complete the task, then immediately draw the next one.
  for (size_t i = 0; i < n; ++i) {
    if (!arrived[i] || !was_up_end[i]) continue;
    AgentState& a = agents_[i];
    Group& grp = *groups_[size_t(a.group)];
    if (!(a.loc == grp.spec.port))
      throw std::logic_error("agent " + std::to_string(a.id) +
                             " finished UP_END off its port");
    if (a.carry_kind != a.task_kind || a.carry_count != 1)
      throw std::logic_error("agent " + std::to_string(a.id) +
                             " delivered the wrong load");
    a.carry_kind = -1;
    a.carry_count = 0;
    ++completed_;
    ++delivered_items_;
    (a.task_hit ? hits_ : misses_) += 1;
    last_completion_tick_ = tick_;
    const int kind = grp.stream->next_kind();
    const auto ev = grp.assigner.assign_task(a, kind, tick_);
    transitions_.emplace(Status::UpEnd, a.status);
    if (ev) {
      if (!lock_note[i].empty())
        throw std::logic_error("agent " + std::to_string(a.id) +
                               " produced two lock events in one tick");
      lock_note[i] = lock_event_text(*ev);
    }
  }

  // Opportunistic retargets for lock-free shelf-bound agents.
  for (size_t i = 0; i < n; ++i) {
    AgentState& a = agents_[i];
    if (a.status != Status::SfGet || a.lock) continue;
    if (auto ev = groups_[size_t(a.group)]->assigner.try_retarget(a, tick_)) {
      transitions_.emplace(Status::SfGet, a.status);
      if (!lock_note[i].empty())
        throw std::logic_error("agent " + std::to_string(a.id) +
                               " produced two lock events in one tick");
      lock_note[i] = lock_event_text(*ev);
    }
  }

  if (cfg_.record_trace)
    for (size_t i = 0; i < n; ++i)
      trace_.push_back({tick_, agents_[i].id, status_during[i],
                        agents_[i].loc, action[i], lock_note[i]});
  trace_rows_ += long(n);
}

void Simulation::abort_run(const std::string& reason) {
  done_ = true;
  aborted_ = true;
  abort_reason_ = reason;
}

void Simulation::check_invariants() const {
  const GridMap& map = cfg_.map;
  std::set<int> cells;
  for (const AgentState& a : agents_) {
    if (!map.passable(a.loc))
      throw std::logic_error("agent " + std::to_string(a.id) +
                             " stands on a blocked cell");
    if (!cells.insert(map.idx(a.loc)).second)
      throw std::logic_error("two agents share " + to_string(a.loc));
    if (a.carry_count < 0 || a.carry_count > cfg_.max_carry)
      throw std::logic_error("agent " + std::to_string(a.id) +
                             " carries an impossible load");
    if ((a.carry_count == 0) != (a.carry_kind == -1))
      throw std::logic_error("agent " + std::to_string(a.id) +
                             " carry kind/count disagree");
    const Group& grp = *groups_[size_t(a.group)];
    switch (a.status) {
      case Status::SfGet:
        if (a.carry_count != 0)
          throw std::logic_error("SF_GET agent carrying items");
        if (a.lock && a.lock->kind != LockKind::Write)
          throw std::logic_error("SF_GET agent with a read lock");
        if (!(a.target == map.shelf_of_kind[size_t(a.task_kind)]))
          throw std::logic_error("SF_GET agent aimed away from its shelf");
        break;
      case Status::CaGet:
        if (!a.lock || a.lock->kind != LockKind::Read)
          throw std::logic_error("CA_GET agent without a read lock");
        if (a.carry_count != 0)
          throw std::logic_error("CA_GET agent carrying items");
        break;
      case Status::CaAdd:
        if (!a.lock || a.lock->kind != LockKind::Write)
          throw std::logic_error("CA_ADD agent without a write lock");
        if (a.carry_count < 2 || a.carry_kind != a.task_kind)
          throw std::logic_error("CA_ADD agent with a broken load");
        break;
      case Status::CaMov:
        if (!a.lock || a.lock->kind != LockKind::Write)
          throw std::logic_error("CA_MOV agent without a write lock");
        if (a.carry_count != 0)
          throw std::logic_error("CA_MOV agent already carrying");
        break;
      case Status::SfAdd:
        if (a.lock) throw std::logic_error("SF_ADD agent holding a lock");
        if (a.carry_count < 1)
          throw std::logic_error("SF_ADD agent with nothing to restock");
        if (!(a.target == map.shelf_of_kind[size_t(a.carry_kind)]))
          throw std::logic_error("SF_ADD agent aimed away from the shelf");
        break;
      case Status::UpEnd:
        if (a.lock) throw std::logic_error("UP_END agent holding a lock");
        if (a.carry_count != 1 || a.carry_kind != a.task_kind)
          throw std::logic_error("UP_END agent with a broken load");
        if (!(a.target == grp.spec.port))
          throw std::logic_error("UP_END agent aimed away from its port");
        break;
    }
    // Lock targets must point at caches inside the agent's own group.
    if (a.lock) {
      const int s = grp.caches.slot_by_cache_id(a.lock->cache_id);
      if (s < 0)
        throw std::logic_error("agent " + std::to_string(a.id) +
                               " locks a cache outside its group");
      const CacheSlot& slot = grp.caches.slot(s);
      if (a.lock->kind == LockKind::Read) {
        if (std::find(slot.readers.begin(), slot.readers.end(), a.id) ==
            slot.readers.end())
          throw std::logic_error("read lock not registered on the slot");
      } else if (slot.writer != a.id) {
        throw std::logic_error("write lock not registered on the slot");
      }
    }
  }

  long cached_items = 0;
  long carried_items = 0;
  for (const auto& grp : groups_) {
    grp->caches.check_invariants();
    // Every registered lock holder must be a live agent of this group
    // holding the matching HeldLock.
    for (int s = 0; s < grp->caches.slot_count(); ++s) {
      const CacheSlot& slot = grp->caches.slot(s);
      cached_items += slot.count;
      auto holder_matches = [&](int agent_id, LockKind kind) {
        const AgentState& a = agents_[size_t(agent_id)];
        return a.id == agent_id && a.lock && a.lock->cache_id == slot.cache_id &&
               a.lock->kind == kind;
      };
      for (int r : slot.readers)
        if (r < 0 || r >= int(agents_.size()) || !holder_matches(r, LockKind::Read))
          throw std::logic_error("slot lists a phantom reader");
      if (slot.writer != -1 &&
          (slot.writer >= int(agents_.size()) ||
           !holder_matches(slot.writer, LockKind::Write)))
        throw std::logic_error("slot lists a phantom writer");
    }
  }
  for (const AgentState& a : agents_) carried_items += a.carry_count;
  // Every item net-removed from shelves must be delivered, sitting in a
  // cache, or in someone's hands.
  if (shelf_withdrawn_ - shelf_restocked_ !=
      delivered_items_ + cached_items + carried_items)
    throw std::logic_error(
        "item conservation broken: withdrawn " +
        std::to_string(shelf_withdrawn_) + " - restocked " +
        std::to_string(shelf_restocked_) + " != delivered " +
        std::to_string(delivered_items_) + " + cached " +
        std::to_string(cached_items) + " + carried " +
        std::to_string(carried_items));
}

RunMetrics Simulation::finish() {
  RunMetrics m;
  m.completed = completed_;
  m.makespan = tick_;
  m.throughput = tick_ > 0 ? double(completed_) / double(tick_) : 0.0;
  m.hits = hits_;
  m.misses = misses_;
  m.hit_rate = completed_ > 0 ? double(hits_) / double(completed_) : 0.0;
  m.moves = moves_;
  m.waits = waits_;
  m.status_ticks = status_ticks_;
  m.wait_counts = wait_counts_;
  m.height = cfg_.map.height;
  m.width = cfg_.map.width;
  m.aborted = aborted_;
  m.abort_reason = abort_reason_;
  m.trace_rows = trace_rows_;
  m.trace = std::move(trace_);
  return m;
}

RunMetrics run_simulation(SimConfig cfg) {
  Simulation sim(std::move(cfg));
  while (sim.step()) {
  }
  return sim.finish();
}

}  // namespace wcsim
