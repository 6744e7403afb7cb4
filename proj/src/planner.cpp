#include "wcsim/planner.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace wcsim {

std::optional<PlannerKind> parse_planner(std::string_view name) {
  if (name == "pibt") return PlannerKind::Pibt;
  if (name == "cautious") return PlannerKind::Cautious;
  return std::nullopt;
}

const char* planner_name(PlannerKind k) {
  switch (k) {
    case PlannerKind::Pibt: return "pibt";
    case PlannerKind::Cautious: return "cautious";
  }
  return "?";
}

std::string StepConflict::describe() const {
  switch (kind) {
    case Vertex:
      return "vertex conflict: agents " + std::to_string(agent_a) + " and " +
             std::to_string(agent_b) + " both enter " + to_string(where);
    case Swap:
      return "swap conflict: agents " + std::to_string(agent_a) + " and " +
             std::to_string(agent_b) + " exchange cells at " + to_string(where);
    case OffGrid:
      return "agent " + std::to_string(agent_a) + " enters blocked cell " +
             to_string(where);
    case NotAdjacent:
      return "agent " + std::to_string(agent_a) + " teleports to " +
             to_string(where);
  }
  return "?";
}

std::vector<StepConflict> validate_step(const GridMap& map,
                                        const std::vector<Coord>& before,
                                        const StepPlan& plan) {
  std::vector<StepConflict> out;
  const int n = int(before.size());
  if (int(plan.next.size()) != n)
    throw std::invalid_argument("validate_step: plan size mismatch");
  for (int i = 0; i < n; ++i) {
    const Coord to = plan.next[size_t(i)];
    if (!map.passable(to))
      out.push_back({StepConflict::OffGrid, i, -1, to});
    if (!adjacent_or_equal(before[size_t(i)], to))
      out.push_back({StepConflict::NotAdjacent, i, -1, to});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (plan.next[size_t(i)] == plan.next[size_t(j)])
        out.push_back({StepConflict::Vertex, i, j, plan.next[size_t(i)]});
      if (plan.next[size_t(i)] == before[size_t(j)] &&
          plan.next[size_t(j)] == before[size_t(i)] &&
          !(before[size_t(i)] == before[size_t(j)]))
        out.push_back({StepConflict::Swap, i, j, plan.next[size_t(i)]});
    }
  return out;
}

double plan_priority(int age, int agent_id, int agent_count) {
  // Fractional part orders ids strictly; integer part carries the aging.
  return double(age) +
         double(agent_count - agent_id) / double(agent_count + 1);
}

namespace {

constexpr int kNoAgent = -1;
const Coord kUndecided{-1, -1};

// Shared candidate enumeration: own cell plus passable neighbors, ranked by
// distance-to-target; generation order (up, down, left, right, stay) breaks
// distance ties so plans never depend on sort stability accidents.
std::vector<Coord> ranked_candidates(const GridMap& map, DistanceCache& dist,
                                     Coord loc, Coord target) {
  struct Scored {
    Coord cell;
    long key;  // distance * 8 + generation index
  };
  std::vector<Scored> scored;
  scored.reserve(5);
  int gen = 0;
  auto add = [&](Coord c) {
    if (!map.passable(c)) return;
    const int d = dist.hops(c, target);
    const long base =
        d == DistanceField::kUnreachable ? std::numeric_limits<int>::max() : d;
    scored.push_back({c, base * 8 + gen});
    ++gen;
  };
  for (const Coord& step : kDirections) add(loc + step);
  add(loc);
  std::sort(scored.begin(), scored.end(),
            [](const Scored& a, const Scored& b) { return a.key < b.key; });
  std::vector<Coord> out;
  out.reserve(scored.size());
  for (const Scored& s : scored) out.push_back(s.cell);
  return out;
}

std::vector<int> priority_order(const std::vector<PlanAgent>& agents) {
  std::vector<int> order(agents.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return agents[size_t(a)].priority > agents[size_t(b)].priority;
  });
  return order;
}

// Priority-inheritance planner. Each agent claims the best free candidate;
// claiming an occupied cell recursively pushes the resident. A failed
// subtree leaves only stay-claims on its members' own cells, so the claim
// table stays consistent when the parent moves on to its next candidate.
class PibtPlanner final : public StepPlanner {
 public:
  StepPlan plan_step(const StepRequest& req) override {
    const GridMap& map = *req.map;
    const auto& agents = req.agents;
    const int n = int(agents.size());
    occupied_now_.assign(map.cells.size(), kNoAgent);
    occupied_next_.assign(map.cells.size(), kNoAgent);
    next_.assign(size_t(n), kUndecided);
    for (int i = 0; i < n; ++i) {
      const int cell = map.idx(agents[size_t(i)].loc);
      if (occupied_now_[size_t(cell)] != kNoAgent)
        throw std::invalid_argument("plan_step: two agents share " +
                                    to_string(agents[size_t(i)].loc));
      occupied_now_[size_t(cell)] = i;
    }
    for (int i : priority_order(agents))
      if (next_[size_t(i)] == kUndecided) solve(req, i);
    StepPlan plan;
    plan.next = next_;
    return plan;
  }

 private:
  bool solve(const StepRequest& req, int i) {
    const GridMap& map = *req.map;
    const PlanAgent& me = req.agents[size_t(i)];
    for (const Coord& cand :
         ranked_candidates(map, *req.dist, me.loc, me.target)) {
      const size_t cell = size_t(map.idx(cand));
      if (occupied_next_[cell] != kNoAgent) continue;  // vertex conflict
      const int resident = occupied_now_[cell];
      if (resident != kNoAgent && resident != i &&
          next_[size_t(resident)] == me.loc)
        continue;  // swap conflict
      occupied_next_[cell] = i;
      next_[size_t(i)] = cand;
      if (resident != kNoAgent && resident != i &&
          next_[size_t(resident)] == kUndecided) {
        // push the resident; on failure it has reclaimed its own cell
        // (overwriting our tentative claim), so just try the next candidate
        if (!solve(req, resident)) continue;
      }
      return true;
    }
    const size_t own = size_t(map.idx(me.loc));
    next_[size_t(i)] = me.loc;
    occupied_next_[own] = i;
    return false;
  }

  std::vector<int> occupied_now_;
  std::vector<int> occupied_next_;
  std::vector<Coord> next_;
};

// Reference planner for differential testing: never pushes, only enters
// cells that are free now (or vacated by an already-decided agent). Trivially
// collision-free, makes no progress guarantees.
class CautiousPlanner final : public StepPlanner {
 public:
  StepPlan plan_step(const StepRequest& req) override {
    const GridMap& map = *req.map;
    const auto& agents = req.agents;
    const int n = int(agents.size());
    std::vector<int> occupied_now(map.cells.size(), kNoAgent);
    std::vector<int> claimed(map.cells.size(), kNoAgent);
    std::vector<Coord> next(size_t(n), kUndecided);
    for (int i = 0; i < n; ++i) {
      const int cell = map.idx(agents[size_t(i)].loc);
      if (occupied_now[size_t(cell)] != kNoAgent)
        throw std::invalid_argument("plan_step: two agents share " +
                                    to_string(agents[size_t(i)].loc));
      occupied_now[size_t(cell)] = i;
    }
    for (int i : priority_order(agents)) {
      const PlanAgent& me = agents[size_t(i)];
      Coord choice = me.loc;
      for (const Coord& cand :
           ranked_candidates(map, *req.dist, me.loc, me.target)) {
        const size_t cell = size_t(map.idx(cand));
        if (claimed[cell] != kNoAgent) continue;
        const int resident = occupied_now[cell];
        if (resident != kNoAgent && resident != i) {
          if (next[size_t(resident)] == kUndecided) continue;  // may stay
          if (next[size_t(resident)] == cand) continue;        // stays put
          if (next[size_t(resident)] == me.loc) continue;      // would swap
        }
        choice = cand;
        break;
      }
      next[size_t(i)] = choice;
      claimed[size_t(map.idx(choice))] = i;
    }
    StepPlan plan;
    plan.next = next;
    return plan;
  }
};

}  // namespace

std::unique_ptr<StepPlanner> make_planner(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::Pibt: return std::make_unique<PibtPlanner>();
    case PlannerKind::Cautious: return std::make_unique<CautiousPlanner>();
  }
  throw std::logic_error("unknown planner kind");
}

}  // namespace wcsim
