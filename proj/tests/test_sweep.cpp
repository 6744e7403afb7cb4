// Parameter sweeps: point enumeration order, per-point config resolution,
// CSV emission, aggregate means, thread-count independence, and fleet
// scaling over scenario groups.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "support/micro.hpp"
#include "wcsim/sweep.hpp"

using namespace wcsim;
using wcsim::testing::identity_kinds;
using wcsim::testing::make_map;

namespace {

// Two-row map so agents can pass each other; two shelf kinds, two caches.
SweepSpec small_spec() {
  SweepSpec spec;
  spec.base_map = make_map({"U.CC.B.B", "........"});
  identity_kinds(spec.base_map);
  spec.agents = {1, 2};
  spec.caches = {1, 2};
  spec.policies = {Policy::Lru, Policy::None};
  spec.dists = {MkParams{5, 2}};
  spec.seeds = {1, 2};
  spec.max_carry = 3;
  spec.task_limit = 6;
  spec.watchdog = 5000;
  return spec;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

bool six_decimals(const std::string& s) {
  const size_t dot = s.find('.');
  return dot != std::string::npos && s.size() - dot - 1 == 6;
}

}  // namespace

TEST_CASE("run_sweep enumerates the grid with seeds innermost") {
  const SweepSpec spec = small_spec();
  const std::vector<SweepPoint> points = run_sweep(spec, 1);
  REQUIRE(points.size() == 16);

  size_t i = 0;
  for (int a : {1, 2})
    for (int c : {1, 2})
      for (Policy p : {Policy::Lru, Policy::None})
        for (uint64_t s : {uint64_t(1), uint64_t(2)}) {
          CHECK(points[i].agents == a);
          CHECK(points[i].caches == c);
          CHECK(points[i].policy == p);
          CHECK(points[i].dist == "mk");
          CHECK(points[i].seed == s);
          ++i;
        }

  for (const SweepPoint& p : points) {
    // Each point resolves to a config with the trimmed cache budget.
    CHECK(p.config.map.cache_count() == p.caches);
    REQUIRE(p.config.groups.size() == 1);
    CHECK(p.config.groups[0].agent_count == p.agents);
    CHECK(p.config.groups[0].cache_cells.size() == size_t(p.caches));
    CHECK(p.config.seed == p.seed);
    CHECK_FALSE(p.config.record_trace);
    CHECK_FALSE(p.config.paranoid);

    // Every point on this small grid runs to completion.
    CHECK_FALSE(p.metrics.aborted);
    CHECK(p.metrics.completed == 6);
    CHECK(p.metrics.completed == p.metrics.hits + p.metrics.misses);
    CHECK(p.metrics.throughput ==
          doctest::Approx(6.0 / double(p.metrics.makespan)).epsilon(1e-12));
    if (p.policy == Policy::None) CHECK(p.metrics.hits == 0);
  }

  // The disabled-cache points never hit; the caching points do somewhere.
  long lru_hits = 0;
  for (const SweepPoint& p : points)
    if (p.policy == Policy::Lru) lru_hits += p.metrics.hits;
  CHECK(lru_hits > 0);
}

TEST_CASE("sweep csv emission matches the run data") {
  const SweepSpec spec = small_spec();
  const std::vector<SweepPoint> points = run_sweep(spec, 1);

  const auto point_lines = lines_of(sweep_points_csv(points));
  REQUIRE(point_lines.size() == 17);
  CHECK(point_lines[0] ==
        "agents,caches,policy,dist,seed,completed,makespan,throughput,hits,"
        "misses,hit_rate,aborted");
  for (size_t i = 0; i < points.size(); ++i) {
    const SweepPoint& p = points[i];
    const auto f = fields_of(point_lines[i + 1]);
    REQUIRE(f.size() == 12);
    CHECK(f[0] == std::to_string(p.agents));
    CHECK(f[1] == std::to_string(p.caches));
    CHECK(f[2] == policy_name(p.policy));
    CHECK(f[3] == p.dist);
    CHECK(f[4] == std::to_string(p.seed));
    CHECK(std::stol(f[5]) == p.metrics.completed);
    CHECK(std::stol(f[6]) == p.metrics.makespan);
    CHECK(six_decimals(f[7]));
    CHECK(std::stod(f[7]) == doctest::Approx(p.metrics.throughput).epsilon(1e-5));
    CHECK(std::stol(f[8]) == p.metrics.hits);
    CHECK(std::stol(f[9]) == p.metrics.misses);
    CHECK(six_decimals(f[10]));
    CHECK(std::stod(f[10]) == doctest::Approx(p.metrics.hit_rate).epsilon(1e-5));
    CHECK(f[11] == "0");
  }

  // Aggregates: one row per (agents, caches, policy, dist) cell of 2 seeds,
  // means recomputed here from the raw point metrics.
  const auto agg_lines = lines_of(sweep_aggregate_csv(points));
  REQUIRE(agg_lines.size() == 9);
  CHECK(agg_lines[0] ==
        "agents,caches,policy,dist,points,aborted,mean_throughput,"
        "mean_hit_rate");
  for (size_t cell = 0; cell < 8; ++cell) {
    const SweepPoint& a = points[2 * cell];
    const SweepPoint& b = points[2 * cell + 1];
    const auto f = fields_of(agg_lines[cell + 1]);
    REQUIRE(f.size() == 8);
    CHECK(f[0] == std::to_string(a.agents));
    CHECK(f[1] == std::to_string(a.caches));
    CHECK(f[2] == policy_name(a.policy));
    CHECK(f[3] == a.dist);
    CHECK(f[4] == "2");
    CHECK(f[5] == "0");
    const double mean_tp = (a.metrics.throughput + b.metrics.throughput) / 2;
    const double mean_hr = (a.metrics.hit_rate + b.metrics.hit_rate) / 2;
    CHECK(std::stod(f[6]) == doctest::Approx(mean_tp).epsilon(1e-5));
    CHECK(std::stod(f[7]) == doctest::Approx(mean_hr).epsilon(1e-5));
  }
}

TEST_CASE("sweep output is identical for any worker count") {
  const SweepSpec spec = small_spec();
  const auto one = run_sweep(spec, 1);
  const auto two = run_sweep(spec, 2);
  CHECK(sweep_points_csv(one) == sweep_points_csv(two));
  CHECK(sweep_aggregate_csv(one) == sweep_aggregate_csv(two));
}

TEST_CASE("aborted points are counted and excluded from the means") {
  SweepSpec spec = small_spec();
  spec.agents = {1};
  spec.caches = {1};
  spec.policies = {Policy::Lru};
  spec.watchdog = 1;  // no delivery can land within one tick
  const auto points = run_sweep(spec, 1);
  REQUIRE(points.size() == 2);
  for (const SweepPoint& p : points) {
    CHECK(p.metrics.aborted);
    CHECK(p.metrics.completed == 0);
  }
  const auto point_lines = lines_of(sweep_points_csv(points));
  REQUIRE(point_lines.size() == 3);
  CHECK(point_lines[1].back() == '1');
  CHECK(point_lines[2].back() == '1');
  const auto agg_lines = lines_of(sweep_aggregate_csv(points));
  REQUIRE(agg_lines.size() == 2);
  CHECK(agg_lines[1] == "1,1,lru,mk,2,2,nan,nan");
}

TEST_CASE("run_sweep validates its axes") {
  SweepSpec spec = small_spec();
  spec.seeds.clear();
  CHECK_THROWS_AS(run_sweep(spec, 1), std::runtime_error);
  CHECK_THROWS_AS(run_sweep(small_spec(), 0), std::runtime_error);
}

TEST_CASE("scale_groups splits a fleet with the remainder up front") {
  std::vector<GroupSpec> groups(3);
  for (int i = 0; i < 3; ++i) {
    groups[size_t(i)].port = {i, 0};
    groups[size_t(i)].agent_count = 99;
    groups[size_t(i)].starts = {{i, 1}};
  }
  const auto seven = scale_groups(groups, 7);
  REQUIRE(seven.size() == 3);
  CHECK(seven[0].agent_count == 3);
  CHECK(seven[1].agent_count == 2);
  CHECK(seven[2].agent_count == 2);
  for (const GroupSpec& g : seven) CHECK(g.starts.empty());

  const auto four = scale_groups(groups, 4);
  CHECK(four[0].agent_count == 2);
  CHECK(four[1].agent_count == 1);
  CHECK(four[2].agent_count == 1);

  try {
    scale_groups(groups, 2);
    FAIL_CHECK("expected scale_groups to reject an empty group");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("a fleet of 2") != std::string::npos);
  }
  CHECK_THROWS_AS(scale_groups({}, 5), std::runtime_error);
}

TEST_CASE("a scenario drives the sweep's group layout") {
  SweepSpec spec;
  spec.base_map = make_map({"U.CB", "U.CB"});
  identity_kinds(spec.base_map);
  spec.scenario = std::string(R"({"groups": [
      {"port": [0, 0], "agents": 9, "caches": [[0, 2]], "starts": [[0, 1]]},
      {"port": [1, 0], "agents": 9, "caches": [[1, 2]]}]})");
  spec.agents = {2};
  spec.caches = {2};
  spec.policies = {Policy::Lru};
  spec.dists = {MkParams{5, 2}};
  spec.seeds = {4};
  spec.max_carry = 3;
  spec.task_limit = 4;
  spec.watchdog = 5000;

  const auto points = run_sweep(spec, 1);
  REQUIRE(points.size() == 1);
  const SimConfig& cfg = points[0].config;
  // The scenario's two groups survive; the fleet is rescaled over them and
  // the fixed starts are dropped in favor of seeded placement.
  REQUIRE(cfg.groups.size() == 2);
  CHECK(cfg.groups[0].agent_count == 1);
  CHECK(cfg.groups[1].agent_count == 1);
  CHECK(cfg.groups[0].starts.empty());
  CHECK(cfg.groups[0].cache_cells == std::vector<Coord>{{0, 2}});
  CHECK(cfg.groups[1].cache_cells == std::vector<Coord>{{1, 2}});
  CHECK_FALSE(points[0].metrics.aborted);
  CHECK(points[0].metrics.completed == 4);
}

TEST_CASE("sweep_point_stem names points stably") {
  SweepPoint p;
  p.agents = 8;
  p.caches = 16;
  p.policy = Policy::Lru;
  p.dist = "zhang";
  p.seed = 3;
  CHECK(sweep_point_stem(p) == "point_a8_c16_lru_zhang_s3");
}
