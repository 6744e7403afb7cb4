// wcsim: lifelong multi-agent warehouse simulator with cache grids.
//
// Subcommands:
//   run       simulate one configuration, emit metrics (and optionally a trace)
//   sweep     run a cartesian grid of configurations, emit per-point metrics
//             plus points.csv / aggregate.csv
//   validate  audit a recorded trace for collisions and lock-protocol breaks
//   heatmap   render the wait-count field of a metrics file as PGM + CSV
//
// Exit codes: 0 success, 1 validation findings or broken invariants,
// 2 usage/file/format errors, 3 run aborted by the watchdog.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "wcsim/io.hpp"
#include "wcsim/rng.hpp"
#include "wcsim/sim.hpp"
#include "wcsim/sweep.hpp"

namespace {

using namespace wcsim;

struct CommonOpts {
  std::string map_path;
  std::string kinds_path;
  std::string scenario_path;
  int agents = 4;
  bool agents_given = false;
  int caches = -1;  // -1 keeps the map's full cache layout
  std::string policy = "lru";
  std::string planner = "pibt";
  std::string dist = "mk";
  int mk_window = 200;
  int mk_active = 20;
  std::string rdd_table;
  int max_carry = 100;
  int capacity = 0;  // 0 => max_carry - 1
  long tasks = 1000;
  long watchdog = 50000;
  long budget_ms = 0;
  std::uint64_t seed = 0;
};

void add_map_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--map", o.map_path, "warehouse map file")->required();
  cmd->add_option("--kinds", o.kinds_path,
                  "item-kind table CSV (default: seeded shuffle)");
  cmd->add_option("--scenario", o.scenario_path,
                  "scenario JSON with ports/caches/agents per group");
}

void add_run_options(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--agents", o.agents, "fleet size (default 4)");
  cmd->add_option("--caches", o.caches,
                  "keep this many cache cells (column-major trim)");
  cmd->add_option("--policy", o.policy, "lru | fifo | random | none");
  cmd->add_option("--planner", o.planner, "pibt | cautious");
  cmd->add_option("--dist", o.dist, "mk | zhang | rdd");
  cmd->add_option("--mk-window", o.mk_window, "mk: window length M");
  cmd->add_option("--mk-active", o.mk_active, "mk: active kinds K");
  cmd->add_option("--rdd-table", o.rdd_table, "rdd: item_kind,weight CSV");
  cmd->add_option("--max-carry", o.max_carry, "items one agent can hold");
  cmd->add_option("--capacity", o.capacity,
                  "cache slot capacity (default max-carry minus 1)");
  cmd->add_option("--tasks", o.tasks, "completions before the run ends");
  cmd->add_option("--watchdog", o.watchdog,
                  "abort after this many ticks without a completion");
  cmd->add_option("--budget-ms", o.budget_ms,
                  "optional wall-clock abort in milliseconds");
  cmd->add_option("--seed", o.seed, "run seed");
}

GridMap load_map(const CommonOpts& o) {
  GridMap map = parse_map(read_text_file(o.map_path));
  if (o.caches >= 0) map = remove_caches(map, o.caches);
  if (!o.kinds_path.empty())
    apply_kinds_csv(map, read_text_file(o.kinds_path));
  else
    assign_item_kinds(map, stream_seed(o.seed, Stream::kShelfKinds));
  return map;
}

DistParams load_dist(const CommonOpts& o) {
  if (o.dist == "mk") return MkParams{o.mk_window, o.mk_active};
  if (o.dist == "zhang") return ZhangParams{};
  if (o.dist == "rdd") {
    if (o.rdd_table.empty())
      throw std::runtime_error("--dist rdd needs --rdd-table");
    return parse_rdd_csv(read_text_file(o.rdd_table));
  }
  throw std::runtime_error("unknown distribution '" + o.dist + "'");
}

std::vector<GroupSpec> load_groups(const CommonOpts& o, const GridMap& map) {
  std::vector<GroupSpec> groups;
  if (!o.scenario_path.empty()) {
    groups = parse_scenario_json(read_text_file(o.scenario_path), map);
    if (o.agents_given) groups = scale_groups(std::move(groups), o.agents);
  } else {
    if (map.port_count() < 1)
      throw std::runtime_error("map has no unloading port");
    GroupSpec g;
    g.port = map.port_cells[0];
    g.cache_cells = map.cache_cells;
    g.agent_count = o.agents;
    groups.push_back(std::move(g));
  }
  return groups;
}

Policy need_policy(const std::string& name) {
  const auto p = parse_policy(name);
  if (!p) throw std::runtime_error("unknown policy '" + name + "'");
  return *p;
}

PlannerKind need_planner(const std::string& name) {
  const auto p = parse_planner(name);
  if (!p) throw std::runtime_error("unknown planner '" + name + "'");
  return *p;
}

int cmd_run(const CommonOpts& o, const std::string& out_path,
            const std::string& trace_path, bool unchecked) {
  SimConfig cfg;
  cfg.map = load_map(o);
  cfg.groups = load_groups(o, cfg.map);
  cfg.policy = need_policy(o.policy);
  cfg.planner = need_planner(o.planner);
  cfg.dist = load_dist(o);
  cfg.max_carry = o.max_carry;
  cfg.cache_capacity = o.capacity;
  cfg.task_limit = o.tasks;
  cfg.watchdog = o.watchdog;
  cfg.wall_clock_ms = o.budget_ms;
  cfg.seed = o.seed;
  cfg.record_trace = !trace_path.empty();
  cfg.paranoid = !unchecked;

  RunMetrics m = run_simulation(cfg);
  if (!trace_path.empty()) write_text_file(trace_path, trace_to_csv(m.trace));
  const std::string json = metrics_to_json(m, cfg);
  if (out_path.empty()) {
    std::cout << json;
  } else {
    write_text_file(out_path, json);
    std::cout << "completed " << m.completed << " tasks in " << m.makespan
              << " ticks  throughput " << m.throughput << "  hit_rate "
              << m.hit_rate << (m.aborted ? "  [aborted]" : "") << "\n";
  }
  if (m.aborted) {
    std::cerr << "run aborted: " << m.abort_reason << "\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::vector<int>& agents_list,
              const std::vector<int>& caches_list,
              const std::vector<std::string>& policy_list,
              const std::vector<std::string>& dist_list,
              const std::vector<std::uint64_t>& seed_list,
              const std::string& out_dir, int jobs) {
  SweepSpec spec;
  {
    CommonOpts base = o;
    base.caches = -1;  // the sweep trims per point
    spec.base_map = load_map(base);
  }
  if (!o.scenario_path.empty())
    spec.scenario = read_text_file(o.scenario_path);
  spec.agents = agents_list.empty() ? std::vector<int>{o.agents} : agents_list;
  spec.caches = caches_list.empty()
                    ? std::vector<int>{spec.base_map.cache_count()}
                    : caches_list;
  for (const std::string& p :
       policy_list.empty() ? std::vector<std::string>{o.policy} : policy_list)
    spec.policies.push_back(need_policy(p));
  for (const std::string& d :
       dist_list.empty() ? std::vector<std::string>{o.dist} : dist_list) {
    CommonOpts dd = o;
    dd.dist = d;
    spec.dists.push_back(load_dist(dd));
  }
  spec.seeds = seed_list.empty() ? std::vector<std::uint64_t>{o.seed} : seed_list;
  spec.max_carry = o.max_carry;
  spec.cache_capacity = o.capacity;
  spec.task_limit = o.tasks;
  spec.watchdog = o.watchdog;
  spec.planner = need_planner(o.planner);

  std::filesystem::create_directories(out_dir);
  const std::vector<SweepPoint> points = run_sweep(spec, jobs);
  for (const SweepPoint& p : points)
    write_text_file(out_dir + "/" + sweep_point_stem(p) + ".json",
                    metrics_to_json(p.metrics, p.config));
  write_text_file(out_dir + "/points.csv", sweep_points_csv(points));
  write_text_file(out_dir + "/aggregate.csv", sweep_aggregate_csv(points));
  int aborted = 0;
  for (const SweepPoint& p : points) aborted += p.metrics.aborted ? 1 : 0;
  std::cout << points.size() << " points -> " << out_dir << "  (" << aborted
            << " aborted)\n";
  return 0;
}

int cmd_validate(const std::string& map_path, int caches,
                 const std::string& trace_path) {
  GridMap map = parse_map(read_text_file(map_path));
  // Trace cache ids are densified over the trimmed layout, so the audit must
  // replay the same trim the recording run used.
  if (caches >= 0) map = remove_caches(map, caches);
  const std::vector<TraceRow> rows =
      parse_trace_csv(read_text_file(trace_path));
  const std::vector<TraceViolation> violations = validate_trace(rows, map);
  if (violations.empty()) {
    long ticks = 0;
    for (const TraceRow& r : rows) ticks = std::max(ticks, r.tick);
    std::cout << "trace ok: " << rows.size() << " rows, " << ticks
              << " ticks\n";
    return 0;
  }
  for (const TraceViolation& v : violations)
    std::cout << "tick " << v.tick << " agent " << v.agent << ": " << v.what
              << "\n";
  std::cout << violations.size() << " violation(s)\n";
  return 1;
}

int cmd_heatmap(const std::string& map_path, const std::string& metrics_path,
                const std::string& out_stem) {
  const GridMap map = parse_map(read_text_file(map_path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(metrics_path));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("metrics json: ") + e.what());
  }
  if (!j.contains("wait_counts") || !j["wait_counts"].is_array())
    throw std::runtime_error("metrics json lacks a wait_counts grid");
  std::vector<long> counts;
  for (const auto& row : j["wait_counts"]) {
    if (!row.is_array())
      throw std::runtime_error("wait_counts must be an array of rows");
    for (const auto& v : row) counts.push_back(v.get<long>());
  }
  if (counts.size() != map.cells.size())
    throw std::runtime_error("wait_counts shape does not match the map");
  std::ofstream pgm(out_stem + ".pgm", std::ios::binary);
  if (!pgm) throw std::runtime_error("cannot write " + out_stem + ".pgm");
  write_heatmap_pgm(pgm, map, counts);
  if (!pgm) throw std::runtime_error("write failed for " + out_stem + ".pgm");
  write_text_file(out_stem + ".csv", heatmap_to_csv(map, counts));
  std::cout << out_stem << ".pgm " << out_stem << ".csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lifelong multi-agent warehouse simulator with cache grids"};
  app.require_subcommand(1);

  CommonOpts o;
  std::string out_path, trace_path, out_dir, metrics_path, out_stem;
  std::string v_map, v_trace;
  bool unchecked = false;
  std::vector<int> agents_list, caches_list;
  std::vector<std::string> policy_list, dist_list;
  std::vector<std::uint64_t> seed_list;
  int jobs = 1;

  CLI::App* run = app.add_subcommand("run", "simulate one configuration");
  add_map_options(run, o);
  add_run_options(run, o);
  run->add_option("--out", out_path, "metrics JSON path (default: stdout)");
  run->add_option("--trace", trace_path, "record the trace CSV here");
  run->add_flag("--unchecked", unchecked,
                "skip per-tick invariant re-validation");

  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter grid");
  add_map_options(sweep, o);
  add_run_options(sweep, o);
  sweep->add_option("--agents-list", agents_list, "fleet sizes")
      ->delimiter(',');
  sweep->add_option("--caches-list", caches_list, "cache budgets")
      ->delimiter(',');
  sweep->add_option("--policies", policy_list, "replacement policies")
      ->delimiter(',');
  sweep->add_option("--dists", dist_list, "task distributions")
      ->delimiter(',');
  sweep->add_option("--seeds", seed_list, "run seeds")->delimiter(',');
  sweep->add_option("--out-dir", out_dir, "output directory")->required();
  sweep->add_option("--jobs", jobs, "worker threads (default 1)");

  CLI::App* validate = app.add_subcommand("validate", "audit a trace file");
  int v_caches = -1;
  validate->add_option("--map", v_map, "warehouse map file")->required();
  validate->add_option("--caches", v_caches,
                       "cache trim the recording run used (--caches)");
  validate->add_option("--trace", v_trace, "trace CSV to audit")->required();

  CLI::App* heatmap =
      app.add_subcommand("heatmap", "render wait counts from a metrics file");
  heatmap->add_option("--map", v_map, "warehouse map file")->required();
  heatmap->add_option("--metrics", metrics_path, "metrics JSON")->required();
  heatmap->add_option("--out", out_stem, "output stem (.pgm/.csv)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    o.agents_given = run->count("--agents") > 0 || sweep->count("--agents") > 0;
    if (run->parsed()) return cmd_run(o, out_path, trace_path, unchecked);
    if (sweep->parsed())
      return cmd_sweep(o, agents_list, caches_list, policy_list, dist_list,
                       seed_list, out_dir, jobs);
    if (validate->parsed()) return cmd_validate(v_map, v_caches, v_trace);
    if (heatmap->parsed()) return cmd_heatmap(v_map, metrics_path, out_stem);
  } catch (const std::logic_error& e) {
    std::cerr << "invariant violated: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
