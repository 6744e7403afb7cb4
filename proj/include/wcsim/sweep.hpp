#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wcsim/sim.hpp"

namespace wcsim {

// Cartesian sweep over fleet size x cache count x policy x distribution x
// seed. The base map carries the full cache layout; each point trims it down
// to its cache budget, re-derives the groups, and runs to completion.
struct SweepSpec {
  GridMap base_map;                     // kinds assigned, all caches present
  std::optional<std::string> scenario;  // scenario JSON text, if any
  std::vector<int> agents;
  std::vector<int> caches;
  std::vector<Policy> policies;
  std::vector<DistParams> dists;
  std::vector<uint64_t> seeds;
  int max_carry = 100;
  int cache_capacity = 0;  // 0 => max_carry - 1
  long task_limit = 1000;
  long watchdog = 50000;
  PlannerKind planner = PlannerKind::Pibt;
};

struct SweepPoint {
  int agents = 0;
  int caches = 0;
  Policy policy = Policy::Lru;
  std::string dist;
  uint64_t seed = 0;
  RunMetrics metrics;
  SimConfig config;  // the resolved per-point configuration
};

// Splits `total` agents over the groups (first groups take the remainder)
// and drops any fixed starts so every fleet size stays placeable.
std::vector<GroupSpec> scale_groups(std::vector<GroupSpec> groups, int total);

// Runs every point (agents outermost, seeds innermost). `jobs` worker
// threads split the points; results are keyed by point index, so the output
// is identical for any job count.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int jobs);

// One row per point, same order as run_sweep.
std::string sweep_points_csv(const std::vector<SweepPoint>& points);
// One row per (agents, caches, policy, dist) cell: point/abort counts and
// mean throughput / hit rate over the non-aborted seeds.
std::string sweep_aggregate_csv(const std::vector<SweepPoint>& points);
// Stable per-point file stem, e.g. "point_a8_c16_lru_zhang_s3".
std::string sweep_point_stem(const SweepPoint& p);

}  // namespace wcsim
