#include "wcsim/cache.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace wcsim {

std::optional<Policy> parse_policy(std::string_view name) {
  if (name == "lru") return Policy::Lru;
  if (name == "fifo") return Policy::Fifo;
  if (name == "random") return Policy::Random;
  if (name == "none") return Policy::None;
  return std::nullopt;
}

const char* policy_name(Policy p) {
  switch (p) {
    case Policy::Lru: return "lru";
    case Policy::Fifo: return "fifo";
    case Policy::Random: return "random";
    case Policy::None: return "none";
  }
  return "?";
}

namespace {

[[noreturn]] void slot_fail(const CacheSlot& s, const std::string& what) {
  throw std::logic_error("cache slot " + std::to_string(s.cache_id) + " at " +
                         to_string(s.loc) + ": " + what);
}

}  // namespace

CacheGroup::CacheGroup(Policy policy, std::vector<std::pair<int, Coord>> cells,
                       int capacity, uint64_t seed)
    : policy_(policy), rng_(seed) {
  if (capacity < 1 && !cells.empty())
    throw std::runtime_error("cache capacity must be >= 1");
  slots_.reserve(cells.size());
  for (const auto& [id, loc] : cells) {
    CacheSlot s;
    s.cache_id = id;
    s.loc = loc;
    s.capacity = capacity;
    slots_.push_back(s);
  }
}

int CacheGroup::slot_by_cache_id(int cache_id) const {
  for (int i = 0; i < slot_count(); ++i)
    if (slots_[size_t(i)].cache_id == cache_id) return i;
  return -1;
}

int CacheGroup::slot_at(Coord loc) const {
  for (int i = 0; i < slot_count(); ++i)
    if (slots_[size_t(i)].loc == loc) return i;
  return -1;
}

bool CacheGroup::try_acquire_read(int slot, int agent, int kind, long now) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.writer != -1) return false;
  if (s.stored_kind != kind || s.count <= 0) return false;
  if (s.reserved >= s.count) return false;  // every share maps to one item
  s.readers.push_back(agent);
  s.reserved += 1;
  s.last_use_tick = now;
  return true;
}

bool CacheGroup::try_acquire_write(int slot, int agent) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.writer != -1 || !s.readers.empty()) return false;
  s.writer = agent;
  return true;
}

void CacheGroup::release(int slot, int agent) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.writer == agent) {
    s.writer = -1;
    return;
  }
  auto it = std::find(s.readers.begin(), s.readers.end(), agent);
  if (it == s.readers.end())
    slot_fail(s, "agent " + std::to_string(agent) + " released a lock it never held");
  s.readers.erase(it);
  s.reserved -= 1;
}

int CacheGroup::withdraw_one(int slot, long now) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.count <= 0) slot_fail(s, "withdraw_one from empty slot");
  const int kind = s.stored_kind;
  s.count -= 1;
  s.last_use_tick = now;
  if (s.count == 0) {
    s.stored_kind = -1;
    s.last_use_tick = -1;
    s.deposit_tick = -1;
  }
  return kind;
}

std::pair<int, int> CacheGroup::withdraw_all(int slot) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.count <= 0) slot_fail(s, "withdraw_all from empty slot");
  const std::pair<int, int> out{s.stored_kind, s.count};
  s.stored_kind = -1;
  s.count = 0;
  s.last_use_tick = -1;
  s.deposit_tick = -1;
  return out;
}

void CacheGroup::deposit(int slot, int kind, int n, long now) {
  CacheSlot& s = slots_[size_t(slot)];
  if (s.count != 0) slot_fail(s, "deposit into non-empty slot");
  if (s.has_locks()) slot_fail(s, "deposit into locked slot");
  if (n < 1 || n > s.capacity)
    slot_fail(s, "deposit of " + std::to_string(n) + " items, capacity " +
                     std::to_string(s.capacity));
  if (kind < 0) slot_fail(s, "deposit of invalid kind");
  s.stored_kind = kind;
  s.count = n;
  s.last_use_tick = now;
  s.deposit_tick = now;
}

std::optional<int> CacheGroup::find_readable(int kind, Coord from,
                                             DistanceCache& dist) const {
  std::optional<int> best;
  int best_d = 0;
  for (int i = 0; i < slot_count(); ++i) {
    const CacheSlot& s = slots_[size_t(i)];
    if (s.writer != -1 || s.stored_kind != kind || s.count <= 0 ||
        s.reserved >= s.count)
      continue;
    const int d = dist.hops(from, s.loc);
    if (d == DistanceField::kUnreachable) continue;
    if (!best || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::optional<int> CacheGroup::find_empty(Coord from, DistanceCache& dist) const {
  std::optional<int> best;
  int best_d = 0;
  for (int i = 0; i < slot_count(); ++i) {
    const CacheSlot& s = slots_[size_t(i)];
    if (s.count != 0 || s.has_locks()) continue;
    const int d = dist.hops(from, s.loc);
    if (d == DistanceField::kUnreachable) continue;
    if (!best || d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

std::optional<int> CacheGroup::select_eviction_victim() {
  if (policy_ == Policy::None)
    throw std::logic_error("eviction requested under policy none");
  std::vector<int> cands;
  for (int i = 0; i < slot_count(); ++i) {
    const CacheSlot& s = slots_[size_t(i)];
    if (s.count > 0 && !s.has_locks()) cands.push_back(i);
  }
  if (cands.empty()) return std::nullopt;
  switch (policy_) {
    case Policy::Lru: {
      int best = cands[0];
      for (int i : cands)
        if (slots_[size_t(i)].last_use_tick < slots_[size_t(best)].last_use_tick)
          best = i;
      return best;
    }
    case Policy::Fifo: {
      int best = cands[0];
      for (int i : cands)
        if (slots_[size_t(i)].deposit_tick < slots_[size_t(best)].deposit_tick)
          best = i;
      return best;
    }
    case Policy::Random:
      return cands[size_t(rng_.below(int(cands.size())))];
    case Policy::None:
      break;
  }
  return std::nullopt;
}

void CacheGroup::check_invariants() const {
  for (const CacheSlot& s : slots_) {
    if (s.capacity < 1) slot_fail(s, "capacity < 1");
    if (s.count < 0 || s.count > s.capacity)
      slot_fail(s, "count " + std::to_string(s.count) + " outside [0,capacity]");
    if (s.reserved != int(s.readers.size()))
      slot_fail(s, "reserved != reader count");
    if (s.reserved > s.count) slot_fail(s, "more shares than stored items");
    if (s.writer != -1 && !s.readers.empty())
      slot_fail(s, "writer and readers coexist");
    if ((s.count == 0) != (s.stored_kind == -1))
      slot_fail(s, "stored_kind / count disagree");
    if (s.count > 0 && s.deposit_tick < 0)
      slot_fail(s, "stored items without a deposit tick");
    std::vector<int> r = s.readers;
    std::sort(r.begin(), r.end());
    if (std::adjacent_find(r.begin(), r.end()) != r.end())
      slot_fail(s, "duplicate reader");
    if (s.writer != -1 &&
        std::find(r.begin(), r.end(), s.writer) != r.end())
      slot_fail(s, "agent is both reader and writer");
  }
}

}  // namespace wcsim
