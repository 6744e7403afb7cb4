#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "support/micro.hpp"
#include "wcsim/io.hpp"
#include "wcsim/sim.hpp"

using namespace wcsim;
using wcsim::testing::fuzz_config;
using wcsim::testing::identity_kinds;
using wcsim::testing::make_map;

namespace {

SimConfig micro_cfg() {
  SimConfig cfg;
  GridMap m = make_map({"U.C.B"});
  identity_kinds(m);
  cfg.map = m;
  GroupSpec g;
  g.port = {0, 0};
  g.cache_cells = {{0, 2}};
  g.agent_count = 1;
  g.starts = {{0, 1}};
  cfg.groups = {g};
  cfg.policy = Policy::Lru;
  cfg.dist = MkParams{10, 1};
  cfg.max_carry = 3;
  cfg.task_limit = 5;
  cfg.seed = 7;
  cfg.record_trace = true;
  return cfg;
}

bool row_eq(const TraceRow& x, const TraceRow& y) {
  return x.tick == y.tick && x.agent == y.agent && x.status == y.status &&
         x.loc == y.loc && x.action == y.action && x.lock_event == y.lock_event;
}

void check_accounting(const RunMetrics& m, int agents) {
  CHECK(m.completed == m.hits + m.misses);
  CHECK(m.moves + m.waits == m.makespan * agents);
  CHECK(std::accumulate(m.status_ticks.begin(), m.status_ticks.end(), 0L) ==
        m.makespan * agents);
  CHECK(std::accumulate(m.wait_counts.begin(), m.wait_counts.end(), 0L) ==
        m.waits);
  if (m.makespan > 0)
    CHECK(m.throughput == double(m.completed) / double(m.makespan));
  if (m.completed > 0)
    CHECK(m.hit_rate == double(m.hits) / double(m.completed));
  CHECK(m.trace_rows == (m.makespan + 1) * agents);
}

}  // namespace

TEST_CASE("a single agent cycles tasks to completion on a micro map") {
  const SimConfig cfg = micro_cfg();
  const RunMetrics m = run_simulation(cfg);
  CHECK(m.completed == 5);
  CHECK_FALSE(m.aborted);
  CHECK(m.makespan > 0);
  CHECK(m.hits > 0);    // the banked items serve later tasks
  CHECK(m.misses > 0);  // fill trips count as misses
  check_accounting(m, 1);
  CHECK(long(m.trace.size()) == m.trace_rows);
  CHECK(m.trace[0].tick == 0);
  CHECK(m.trace[0].action == TraceRow::Start);
  CHECK(validate_trace(m.trace, cfg.map).empty());
}

TEST_CASE("identical configs replay byte-for-byte") {
  for (uint64_t seed : {3ULL, 11ULL}) {
    const SimConfig cfg = fuzz_config(seed);
    const RunMetrics a = run_simulation(cfg);
    const RunMetrics b = run_simulation(cfg);
    CHECK(a.completed == b.completed);
    CHECK(a.makespan == b.makespan);
    CHECK(a.hits == b.hits);
    CHECK(a.misses == b.misses);
    CHECK(a.moves == b.moves);
    CHECK(a.waits == b.waits);
    CHECK(a.status_ticks == b.status_ticks);
    CHECK(a.wait_counts == b.wait_counts);
    CHECK(a.aborted == b.aborted);
    REQUIRE(a.trace.size() == b.trace.size());
    for (size_t i = 0; i < a.trace.size(); ++i)
      CHECK(row_eq(a.trace[i], b.trace[i]));
  }
}

TEST_CASE("policy none leaves the cache machinery cold") {
  SimConfig cfg = micro_cfg();
  cfg.policy = Policy::None;
  cfg.task_limit = 6;
  Simulation sim(std::move(cfg));
  while (sim.step()) {
    for (int s = 0; s < sim.group_caches(0).slot_count(); ++s)
      CHECK(sim.group_caches(0).slot(s).count == 0);
  }
  const RunMetrics m = sim.finish();
  CHECK(m.completed == 6);
  CHECK(m.hits == 0);
  CHECK(m.misses == 6);
  CHECK(m.status_ticks[size_t(Status::CaGet)] == 0);
  CHECK(m.status_ticks[size_t(Status::CaAdd)] == 0);
  CHECK(m.status_ticks[size_t(Status::CaMov)] == 0);
  CHECK(m.status_ticks[size_t(Status::SfAdd)] == 0);
  for (const TraceRow& row : m.trace) CHECK(row.lock_event.empty());
  check_accounting(m, 1);
}

TEST_CASE("the watchdog aborts a run that stops completing tasks") {
  SimConfig cfg = micro_cfg();
  cfg.watchdog = 3;  // the first delivery needs more ticks than this
  const RunMetrics m = run_simulation(cfg);
  CHECK(m.aborted);
  CHECK(m.abort_reason.find("watchdog") != std::string::npos);
  CHECK(m.completed == 0);
  CHECK(m.makespan == 3);
  check_accounting(m, 1);
}

TEST_CASE("a wall-clock budget aborts an oversized run") {
  SimConfig cfg = fuzz_config(5);
  cfg.task_limit = 1000000000;
  cfg.watchdog = 1000000;
  cfg.wall_clock_ms = 1;
  cfg.record_trace = false;
  const RunMetrics m = run_simulation(cfg);
  CHECK(m.aborted);
  CHECK(m.abort_reason == "wall clock budget exceeded");
}

TEST_CASE("explicit starts are honored, seeded placement is deterministic") {
  SimConfig cfg = micro_cfg();
  {
    Simulation sim(cfg);
    CHECK(sim.agents()[0].loc == Coord{0, 1});
  }
  cfg.groups[0].starts.clear();
  cfg.groups[0].agent_count = 2;
  cfg.map = make_map({"U.C.B", "....."});
  identity_kinds(cfg.map);
  Simulation a(cfg);
  Simulation b(cfg);
  REQUIRE(a.agents().size() == 2);
  CHECK(a.agents()[0].loc == b.agents()[0].loc);
  CHECK(a.agents()[1].loc == b.agents()[1].loc);
  CHECK(a.agents()[0].loc != a.agents()[1].loc);
  for (const AgentState& ag : a.agents())
    CHECK(cfg.map.kind(ag.loc) == CellKind::Aisle);
}

TEST_CASE("construction rejects broken configurations") {
  auto bad = [](auto mutate) {
    SimConfig cfg = micro_cfg();
    mutate(cfg);
    CHECK_THROWS_AS(Simulation{std::move(cfg)}, std::runtime_error);
  };
  bad([](SimConfig& c) { c.groups.clear(); });
  bad([](SimConfig& c) { c.groups[0].agent_count = 0; });
  bad([](SimConfig& c) { c.groups[0].port = {0, 1}; });      // not a port cell
  bad([](SimConfig& c) { c.groups[0].cache_cells = {{0, 4}}; });  // a shelf
  bad([](SimConfig& c) { c.groups[0].starts = {{0, 9}}; });  // off the map
  bad([](SimConfig& c) { c.groups[0].starts = {{0, 1}, {0, 1}}; });
  bad([](SimConfig& c) { c.task_limit = 0; });
  bad([](SimConfig& c) { c.watchdog = 0; });
  bad([](SimConfig& c) { c.max_carry = 1; });  // too small with caches on
  bad([](SimConfig& c) {
    c.groups[0].starts.clear();
    c.groups[0].agent_count = 50;  // more agents than aisle cells
  });
  bad([](SimConfig& c) {
    // Two groups claiming one cache cell.
    c.map = make_map({"U.C.B", "U...B"});
    identity_kinds(c.map);
    GroupSpec g2;
    g2.port = {1, 0};
    g2.cache_cells = {{0, 2}};
    g2.agent_count = 1;
    c.groups[0].starts.clear();
    c.groups.push_back(g2);
  });
  bad([](SimConfig& c) {
    c.map = make_map({"U.@.B"});  // shelf walled off
    identity_kinds(c.map);
    c.groups[0].cache_cells.clear();
  });
}

TEST_CASE("two port groups run side by side without crossing locks") {
  SimConfig cfg;
  GridMap m = make_map({"U.C.B", ".....", "U.C.B"});
  identity_kinds(m);
  cfg.map = m;
  GroupSpec g0, g1;
  g0.port = {0, 0};
  g0.cache_cells = {{0, 2}};
  g0.agent_count = 1;
  g0.starts = {{0, 1}};
  g1.port = {2, 0};
  g1.cache_cells = {{2, 2}};
  g1.agent_count = 1;
  g1.starts = {{2, 1}};
  cfg.groups = {g0, g1};
  cfg.dist = MkParams{5, 2};
  cfg.max_carry = 3;
  cfg.task_limit = 8;
  cfg.seed = 21;
  cfg.record_trace = true;
  const RunMetrics metrics = run_simulation(cfg);
  CHECK(metrics.completed == 8);
  check_accounting(metrics, 2);

  // Lock events must stay within each agent's own cache: agent 0 may only
  // touch cache id 0 (cell (0,2)), agent 1 only cache id 1 (cell (2,2)).
  for (const TraceRow& row : metrics.trace) {
    if (row.lock_event.empty()) continue;
    const int cache_id = std::stoi(row.lock_event.substr(row.lock_event.find(':') + 1));
    CHECK(cache_id == row.agent);
  }
  CHECK(validate_trace(metrics.trace, cfg.map).empty());
}

TEST_CASE("realized status changes stay inside the documented graph") {
  const auto edges = TaskAssigner::state_graph();
  const std::set<std::pair<Status, Status>> allowed(edges.begin(), edges.end());
  SimConfig cfg = fuzz_config(17);
  Simulation sim(std::move(cfg));
  while (sim.step()) {
  }
  CHECK_FALSE(sim.observed_transitions().empty());
  for (const auto& edge : sim.observed_transitions())
    CHECK(allowed.count(edge) == 1);
}

TEST_CASE("trace row counting does not require recording") {
  SimConfig cfg = micro_cfg();
  cfg.record_trace = false;
  const RunMetrics m = run_simulation(cfg);
  CHECK(m.trace.empty());
  CHECK(m.trace_rows == m.makespan + 1);
}

TEST_CASE("a finished simulation stays finished") {
  Simulation sim(micro_cfg());
  while (sim.step()) {
  }
  CHECK(sim.done());
  CHECK_FALSE(sim.step());
  CHECK_FALSE(sim.step());
  const RunMetrics m = sim.finish();
  CHECK(m.completed == 5);
}

TEST_CASE("the first assignment cascade runs before the first tick") {
  Simulation sim(micro_cfg());
  // One agent, one empty cache: the initial task must be a fill trip.
  const AgentState& a = sim.agents()[0];
  CHECK(a.status == Status::SfGet);
  REQUIRE(a.lock.has_value());
  CHECK(a.lock->kind == LockKind::Write);
  CHECK(sim.config().cache_capacity == 2);  // defaulted to max_carry - 1
}
