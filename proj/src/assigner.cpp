#include "wcsim/assigner.hpp"

#include <algorithm>
#include <stdexcept>

namespace wcsim {

const char* status_name(Status s) {
  switch (s) {
    case Status::SfGet: return "SF_GET";
    case Status::CaMov: return "CA_MOV";
    case Status::CaGet: return "CA_GET";
    case Status::CaAdd: return "CA_ADD";
    case Status::SfAdd: return "SF_ADD";
    case Status::UpEnd: return "UP_END";
  }
  return "?";
}

std::optional<Status> parse_status(std::string_view name) {
  for (int i = 0; i < kStatusCount; ++i)
    if (name == status_name(Status(i))) return Status(i);
  return std::nullopt;
}

std::string lock_event_text(const LockEvent& ev) {
  const char* tag = ev.kind == LockEvent::AcquireRead    ? "acq_r:"
                    : ev.kind == LockEvent::AcquireWrite ? "acq_w:"
                                                         : "rel:";
  return tag + std::to_string(ev.cache_id);
}

namespace {

[[noreturn]] void agent_fail(const AgentState& a, const std::string& what) {
  throw std::logic_error("agent " + std::to_string(a.id) + " (" +
                         status_name(a.status) + " at " + to_string(a.loc) +
                         "): " + what);
}

}  // namespace

TaskAssigner::TaskAssigner(const GridMap& map, CacheGroup& caches,
                           DistanceCache& dist, Coord port, int max_carry,
                           bool caches_enabled)
    : map_(&map),
      caches_(&caches),
      dist_(&dist),
      port_(port),
      max_carry_(max_carry),
      caches_enabled_(caches_enabled && caches.slot_count() > 0) {
  if (max_carry_ < 1)
    throw std::runtime_error("assigner: max carry must be >= 1");
  if (caches_enabled_ && max_carry_ < 2)
    throw std::runtime_error(
        "assigner: max carry must be >= 2 when caches are in play (a fill "
        "trip banks carry-1 items)");
}

std::optional<LockEvent> TaskAssigner::assign_task(AgentState& a,
                                                   int task_kind, long now) {
  if (a.lock) agent_fail(a, "takes a new task while holding a lock");
  if (a.carry_count != 0) agent_fail(a, "takes a new task while carrying");
  if (task_kind < 0 || task_kind >= map_->kind_count())
    agent_fail(a, "task kind " + std::to_string(task_kind) + " out of range");
  a.task_kind = task_kind;
  a.task_hit = false;
  if (caches_enabled_) {
    if (auto s = caches_->find_readable(task_kind, a.loc, *dist_)) {
      const CacheSlot& slot = caches_->slot(*s);
      if (!caches_->try_acquire_read(*s, a.id, task_kind, now))
        agent_fail(a, "readable cache refused the read lock");
      a.lock = HeldLock{slot.cache_id, LockKind::Read};
      a.status = Status::CaGet;
      a.target = slot.loc;
      a.task_hit = true;
      return LockEvent{LockEvent::AcquireRead, slot.cache_id};
    }
    if (auto s = caches_->find_empty(a.loc, *dist_)) {
      const CacheSlot& slot = caches_->slot(*s);
      if (!caches_->try_acquire_write(*s, a.id))
        agent_fail(a, "empty cache refused the write lock");
      a.lock = HeldLock{slot.cache_id, LockKind::Write};
      a.status = Status::SfGet;  // fill trip: overshoot the shelf, bank extras
      a.target = map_->shelf_of_kind[size_t(task_kind)];
      return LockEvent{LockEvent::AcquireWrite, slot.cache_id};
    }
    if (auto s = caches_->select_eviction_victim()) {
      const CacheSlot& slot = caches_->slot(*s);
      if (!caches_->try_acquire_write(*s, a.id))
        agent_fail(a, "eviction victim refused the write lock");
      a.lock = HeldLock{slot.cache_id, LockKind::Write};
      a.status = Status::CaMov;
      a.target = slot.loc;
      return LockEvent{LockEvent::AcquireWrite, slot.cache_id};
    }
  }
  a.status = Status::SfGet;  // plain round trip, no cache involvement
  a.target = map_->shelf_of_kind[size_t(task_kind)];
  return std::nullopt;
}

void TaskAssigner::on_arrival(AgentState& a, long now) {
  switch (a.status) {
    case Status::SfGet: {
      if (a.lock) {
        // Fill trip: load enough to bank capacity items and still deliver 1.
        if (a.lock->kind != LockKind::Write)
          agent_fail(a, "fetch trip with a read lock");
        const int s = caches_->slot_by_cache_id(a.lock->cache_id);
        if (s < 0) agent_fail(a, "lock on a cache outside this group");
        const CacheSlot& slot = caches_->slot(s);
        a.carry_kind = a.task_kind;
        a.carry_count = std::min(max_carry_, slot.capacity + 1);
        a.status = Status::CaAdd;
        a.target = slot.loc;
      } else {
        a.carry_kind = a.task_kind;
        a.carry_count = 1;
        a.status = Status::UpEnd;
        a.target = port_;
      }
      return;
    }
    case Status::CaGet: {
      const int s = caches_->slot_at(a.loc);
      if (s < 0) agent_fail(a, "CA_GET arrival off any cache cell");
      const int kind = caches_->withdraw_one(s, now);
      if (kind != a.task_kind)
        agent_fail(a, "reserved cache held the wrong kind");
      a.carry_kind = kind;
      a.carry_count = 1;
      a.status = Status::UpEnd;
      a.target = port_;
      return;
    }
    case Status::CaAdd: {
      const int s = caches_->slot_at(a.loc);
      if (s < 0) agent_fail(a, "CA_ADD arrival off any cache cell");
      if (a.carry_count < 2) agent_fail(a, "nothing to bank on a fill trip");
      caches_->deposit(s, a.carry_kind, a.carry_count - 1, now);
      a.carry_count = 1;  // keep one item for the delivery leg
      a.status = Status::UpEnd;
      a.target = port_;
      return;
    }
    case Status::CaMov: {
      const int s = caches_->slot_at(a.loc);
      if (s < 0) agent_fail(a, "CA_MOV arrival off any cache cell");
      const auto [kind, count] = caches_->withdraw_all(s);
      a.carry_kind = kind;
      a.carry_count = count;
      a.status = Status::SfAdd;
      a.target = map_->shelf_of_kind[size_t(kind)];
      return;
    }
    case Status::SfAdd: {
      // Evicted items go back on their shelf; resume the agent's own task.
      a.carry_kind = -1;
      a.carry_count = 0;
      a.status = Status::SfGet;
      a.target = map_->shelf_of_kind[size_t(a.task_kind)];
      return;
    }
    case Status::UpEnd:
      agent_fail(a, "delivery arrivals are handled by the engine");
  }
}

std::optional<LockEvent> TaskAssigner::release_on_arrival(AgentState& a) {
  if (!a.lock) return std::nullopt;
  const int s = caches_->slot_by_cache_id(a.lock->cache_id);
  if (s < 0) agent_fail(a, "lock on a cache outside this group");
  if (!(caches_->slot(s).loc == a.loc)) return std::nullopt;
  caches_->release(s, a.id);
  const LockEvent ev{LockEvent::Release, a.lock->cache_id};
  a.lock.reset();
  return ev;
}

std::optional<LockEvent> TaskAssigner::try_retarget(AgentState& a, long now) {
  if (!caches_enabled_) return std::nullopt;
  if (a.status != Status::SfGet || a.lock || a.carry_count != 0)
    return std::nullopt;
  auto s = caches_->find_readable(a.task_kind, a.loc, *dist_);
  if (!s) return std::nullopt;
  const CacheSlot& slot = caches_->slot(*s);
  if (!caches_->try_acquire_read(*s, a.id, a.task_kind, now))
    agent_fail(a, "readable cache refused the read lock");
  a.lock = HeldLock{slot.cache_id, LockKind::Read};
  a.status = Status::CaGet;
  a.target = slot.loc;
  a.task_hit = true;
  return LockEvent{LockEvent::AcquireRead, slot.cache_id};
}

std::vector<std::pair<Status, Status>> TaskAssigner::state_graph() {
  using S = Status;
  return {
      {S::UpEnd, S::CaGet},  // new task, readable cache
      {S::UpEnd, S::SfGet},  // new task, fill trip or plain trip
      {S::UpEnd, S::CaMov},  // new task, eviction first
      {S::SfGet, S::UpEnd},  // picked one item, deliver it
      {S::SfGet, S::CaAdd},  // fill trip loaded, bank the surplus
      {S::SfGet, S::CaGet},  // retargeted onto a readable cache
      {S::CaGet, S::UpEnd},  // withdrew the reserved item
      {S::CaAdd, S::UpEnd},  // banked the surplus, deliver the last item
      {S::CaMov, S::SfAdd},  // evicted contents, return them
      {S::SfAdd, S::SfGet},  // shelf restocked, resume own task
  };
}

}  // namespace wcsim
