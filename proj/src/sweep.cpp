#include "wcsim/sweep.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "wcsim/io.hpp"

namespace wcsim {

namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

SimConfig point_config(const SweepSpec& spec, int agents, int caches,
                       Policy policy, const DistParams& dist, uint64_t seed) {
  SimConfig cfg;
  cfg.map = remove_caches(spec.base_map, caches);
  if (spec.scenario) {
    cfg.groups = scale_groups(parse_scenario_json(*spec.scenario, cfg.map), agents);
  } else {
    if (cfg.map.port_count() < 1)
      throw std::runtime_error("sweep: map has no port");
    GroupSpec g;
    g.port = cfg.map.port_cells[0];
    g.cache_cells = cfg.map.cache_cells;
    g.agent_count = agents;
    cfg.groups.push_back(std::move(g));
  }
  cfg.policy = policy;
  cfg.planner = spec.planner;
  cfg.dist = dist;
  cfg.max_carry = spec.max_carry;
  cfg.cache_capacity = spec.cache_capacity;
  cfg.task_limit = spec.task_limit;
  cfg.watchdog = spec.watchdog;
  cfg.seed = seed;
  cfg.record_trace = false;
  cfg.paranoid = false;  // sweeps favor speed; correctness is tested elsewhere
  return cfg;
}

}  // namespace

std::vector<GroupSpec> scale_groups(std::vector<GroupSpec> groups, int total) {
  const int g = int(groups.size());
  if (g == 0) throw std::runtime_error("scale_groups: no groups");
  for (int i = 0; i < g; ++i) {
    groups[size_t(i)].agent_count = total / g + (i < total % g ? 1 : 0);
    groups[size_t(i)].starts.clear();
  }
  for (const GroupSpec& grp : groups)
    if (grp.agent_count < 1)
      throw std::runtime_error("a fleet of " + std::to_string(total) +
                               " agents leaves a group empty");
  return groups;
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int jobs) {
  if (spec.agents.empty() || spec.caches.empty() || spec.policies.empty() ||
      spec.dists.empty() || spec.seeds.empty())
    throw std::runtime_error("sweep: every axis needs at least one value");
  if (jobs < 1) throw std::runtime_error("sweep: jobs must be >= 1");

  std::vector<SweepPoint> points;
  for (int a : spec.agents)
    for (int c : spec.caches)
      for (Policy p : spec.policies)
        for (const DistParams& d : spec.dists)
          for (uint64_t s : spec.seeds) {
            SweepPoint pt;
            pt.agents = a;
            pt.caches = c;
            pt.policy = p;
            pt.dist = dist_name(d);
            pt.seed = s;
            pt.config = point_config(spec, a, c, p, d, s);
            points.push_back(std::move(pt));
          }

  std::atomic<size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const size_t i = cursor.fetch_add(1);
      if (i >= points.size()) return;
      points[i].metrics = run_simulation(points[i].config);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return points;
}

std::string sweep_points_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "agents,caches,policy,dist,seed,completed,makespan,throughput,hits,"
         "misses,hit_rate,aborted\n";
  for (const SweepPoint& p : points)
    out << p.agents << ',' << p.caches << ',' << policy_name(p.policy) << ','
        << p.dist << ',' << p.seed << ',' << p.metrics.completed << ','
        << p.metrics.makespan << ',' << fmt6(p.metrics.throughput) << ','
        << p.metrics.hits << ',' << p.metrics.misses << ','
        << fmt6(p.metrics.hit_rate) << ',' << (p.metrics.aborted ? 1 : 0)
        << '\n';
  return out.str();
}

std::string sweep_aggregate_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out << "agents,caches,policy,dist,points,aborted,mean_throughput,"
         "mean_hit_rate\n";
  size_t i = 0;
  while (i < points.size()) {
    const SweepPoint& head = points[i];
    size_t j = i;
    int aborted = 0;
    int clean = 0;
    double tp = 0, hr = 0;
    while (j < points.size() && points[j].agents == head.agents &&
           points[j].caches == head.caches &&
           points[j].policy == head.policy && points[j].dist == head.dist) {
      if (points[j].metrics.aborted) {
        ++aborted;
      } else {
        ++clean;
        tp += points[j].metrics.throughput;
        hr += points[j].metrics.hit_rate;
      }
      ++j;
    }
    out << head.agents << ',' << head.caches << ',' << policy_name(head.policy)
        << ',' << head.dist << ',' << (j - i) << ',' << aborted << ','
        << (clean ? fmt6(tp / clean) : "nan") << ','
        << (clean ? fmt6(hr / clean) : "nan") << '\n';
    i = j;
  }
  return out.str();
}

std::string sweep_point_stem(const SweepPoint& p) {
  std::ostringstream out;
  out << "point_a" << p.agents << "_c" << p.caches << '_'
      << policy_name(p.policy) << '_' << p.dist << "_s" << p.seed;
  return out.str();
}

}  // namespace wcsim
