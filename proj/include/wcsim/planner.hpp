#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "wcsim/geometry.hpp"
#include "wcsim/grid_map.hpp"

namespace wcsim {

enum class PlannerKind : uint8_t { Pibt, Cautious };

std::optional<PlannerKind> parse_planner(std::string_view name);
const char* planner_name(PlannerKind k);

struct PlanAgent {
  int id = -1;
  Coord loc{};
  Coord target{};
  double priority = 0;  // higher moves first; must be unique across agents
};

struct StepRequest {
  const GridMap* map = nullptr;
  DistanceCache* dist = nullptr;
  std::vector<PlanAgent> agents;
  uint64_t seed = 0;  // for stochastic planners; the built-ins ignore it
};

// next[i] is where request.agents[i] is after this tick (possibly its own
// cell). Planners must return a collision-free joint step.
struct StepPlan {
  std::vector<Coord> next;
};

struct StepConflict {
  enum Kind : uint8_t { Vertex, Swap, OffGrid, NotAdjacent } kind;
  int agent_a = -1;
  int agent_b = -1;  // -1 for single-agent conflicts
  Coord where{};
  std::string describe() const;
};

// Checks a joint step against `before` positions: every move lands on a
// passable in-bounds cell one hop away (or stays), no two agents share a
// next cell, no pair swaps cells.
std::vector<StepConflict> validate_step(const GridMap& map,
                                        const std::vector<Coord>& before,
                                        const StepPlan& plan);

class StepPlanner {
 public:
  virtual ~StepPlanner() = default;
  virtual StepPlan plan_step(const StepRequest& req) = 0;
};

std::unique_ptr<StepPlanner> make_planner(PlannerKind kind);

// Scalar priority: ticks since the agent last reached a target, with the id
// as a strict tie-break so the order is total. Monotone in `age`.
double plan_priority(int age, int agent_id, int agent_count);

}  // namespace wcsim
