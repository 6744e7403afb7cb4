#include "wcsim/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace wcsim {

using ordered_json = nlohmann::ordered_json;

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
  std::ostringstream out;
  out << "tick,agent,status,row,col,action,lock_event\n";
  for (const TraceRow& r : rows)
    out << r.tick << ',' << r.agent << ',' << status_name(r.status) << ','
        << r.loc.row << ',' << r.loc.col << ',' << action_name(r.action) << ','
        << r.lock_event << '\n';
  return out.str();
}

namespace {

[[noreturn]] void trace_fail(size_t line_no, const std::string& what) {
  throw std::runtime_error("trace csv: line " + std::to_string(line_no) +
                           ": " + what);
}

std::vector<std::string> split_csv_line(const std::string& line) {
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

long parse_long_field(const std::string& s, size_t line_no, const char* what) {
  try {
    size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    trace_fail(line_no, std::string("bad ") + what + " '" + s + "'");
  }
}

}  // namespace

std::vector<TraceRow> parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trace csv: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "tick,agent,status,row,col,action,lock_event")
    trace_fail(1, "bad header '" + line + "'");
  std::vector<TraceRow> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) trace_fail(line_no, "expected 7 fields");
    TraceRow r;
    r.tick = parse_long_field(f[0], line_no, "tick");
    r.agent = int(parse_long_field(f[1], line_no, "agent"));
    const auto st = parse_status(f[2]);
    if (!st) trace_fail(line_no, "unknown status '" + f[2] + "'");
    r.status = *st;
    r.loc.row = int(parse_long_field(f[3], line_no, "row"));
    r.loc.col = int(parse_long_field(f[4], line_no, "col"));
    if (f[5] == "start") r.action = TraceRow::Start;
    else if (f[5] == "move") r.action = TraceRow::Move;
    else if (f[5] == "wait") r.action = TraceRow::Wait;
    else trace_fail(line_no, "unknown action '" + f[5] + "'");
    if (!f[6].empty() && f[6].rfind("acq_r:", 0) != 0 &&
        f[6].rfind("acq_w:", 0) != 0 && f[6].rfind("rel:", 0) != 0)
      trace_fail(line_no, "unknown lock event '" + f[6] + "'");
    r.lock_event = f[6];
    rows.push_back(std::move(r));
  }
  return rows;
}

namespace {

struct LockLedger {
  std::vector<std::vector<int>> readers;  // per cache id
  std::vector<int> writer;                // per cache id, -1 free
  std::vector<int> held_by_agent;         // agent -> cache id or -1

  LockLedger(int caches, int max_agent)
      : readers(size_t(caches)),
        writer(size_t(caches), -1),
        held_by_agent(size_t(max_agent + 1), -1) {}
};

}  // namespace

std::vector<TraceViolation> validate_trace(const std::vector<TraceRow>& rows,
                                           const GridMap& map) {
  std::vector<TraceViolation> out;
  auto flag = [&](long tick, int agent, std::string what) {
    out.push_back({tick, agent, std::move(what)});
  };
  if (rows.empty()) {
    flag(0, -1, "trace contains no rows");
    return out;
  }

  // Bucket rows by tick; ticks must be contiguous from 0.
  long max_tick = 0;
  int max_agent = 0;
  for (const TraceRow& r : rows) {
    max_tick = std::max(max_tick, r.tick);
    max_agent = std::max(max_agent, r.agent);
    if (r.tick < 0 || r.agent < 0) {
      flag(r.tick, r.agent, "negative tick or agent id");
      return out;
    }
  }
  std::vector<std::vector<const TraceRow*>> by_tick(size_t(max_tick + 1));
  for (const TraceRow& r : rows) by_tick[size_t(r.tick)].push_back(&r);

  // Tick 0 defines the agent set.
  std::vector<const TraceRow*> prev(size_t(max_agent + 1), nullptr);
  int agent_count = 0;
  for (const TraceRow* r : by_tick[0]) {
    if (r->action != TraceRow::Start)
      flag(0, r->agent, "tick 0 row is not a start row");
    if (prev[size_t(r->agent)]) flag(0, r->agent, "duplicate agent at tick 0");
    prev[size_t(r->agent)] = r;
    ++agent_count;
  }
  for (int a = 0; a <= max_agent; ++a)
    if (!prev[size_t(a)]) flag(0, a, "agent missing from tick 0");

  LockLedger locks(map.cache_count(), max_agent);
  auto apply_lock_event = [&](const TraceRow& r) {
    if (r.lock_event.empty()) return;
    const size_t colon = r.lock_event.find(':');
    const std::string op = r.lock_event.substr(0, colon);
    int cache_id = -1;
    try {
      cache_id = std::stoi(r.lock_event.substr(colon + 1));
    } catch (const std::exception&) {
      flag(r.tick, r.agent, "unparseable lock event '" + r.lock_event + "'");
      return;
    }
    if (cache_id < 0 || cache_id >= map.cache_count()) {
      flag(r.tick, r.agent,
           "lock event names unknown cache " + std::to_string(cache_id));
      return;
    }
    auto& readers = locks.readers[size_t(cache_id)];
    int& writer = locks.writer[size_t(cache_id)];
    int& held = locks.held_by_agent[size_t(r.agent)];
    if (op == "acq_r" || op == "acq_w") {
      if (held != -1) {
        flag(r.tick, r.agent,
             "acquires cache " + std::to_string(cache_id) +
                 " while already holding a lock on cache " + std::to_string(held));
        return;
      }
      if (writer != -1) {
        flag(r.tick, r.agent,
             "acquires cache " + std::to_string(cache_id) +
                 " already write-locked by agent " + std::to_string(writer));
        return;
      }
      if (op == "acq_w" && !readers.empty()) {
        flag(r.tick, r.agent,
             "write-locks cache " + std::to_string(cache_id) +
                 " while readers hold it");
        return;
      }
      if (op == "acq_r") readers.push_back(r.agent);
      else writer = r.agent;
      held = cache_id;
    } else {  // rel
      if (held != cache_id) {
        flag(r.tick, r.agent,
             "releases cache " + std::to_string(cache_id) + " it does not hold");
        return;
      }
      if (!(map.cache_cells[size_t(cache_id)] == r.loc))
        flag(r.tick, r.agent,
             "releases cache " + std::to_string(cache_id) +
                 " away from its cell");
      if (writer == r.agent) {
        writer = -1;
      } else {
        auto it = std::find(readers.begin(), readers.end(), r.agent);
        if (it == readers.end()) {
          flag(r.tick, r.agent, "release without a matching acquire");
        } else {
          readers.erase(it);
        }
      }
      held = -1;
    }
  };
  // Within one tick, arrival releases happen before any new grant, so a
  // freed lock may be re-acquired by another agent in the same tick. Replay
  // the releases first; grants then apply in row (agent id) order, which is
  // the order the engine considers them.
  auto apply_tick_events = [&](const std::vector<const TraceRow*>& tick_rows) {
    for (const TraceRow* r : tick_rows)
      if (r->lock_event.rfind("rel:", 0) == 0) apply_lock_event(*r);
    for (const TraceRow* r : tick_rows)
      if (!r->lock_event.empty() && r->lock_event.rfind("rel:", 0) != 0)
        apply_lock_event(*r);
  };
  apply_tick_events(by_tick[0]);

  for (long t = 1; t <= max_tick; ++t) {
    std::vector<const TraceRow*> seen(size_t(max_agent + 1), nullptr);
    for (const TraceRow* r : by_tick[size_t(t)]) {
      if (seen[size_t(r->agent)]) {
        flag(t, r->agent, "duplicate row for agent");
        continue;
      }
      seen[size_t(r->agent)] = r;
      const TraceRow* p = prev[size_t(r->agent)];
      if (!p) continue;  // already flagged at tick 0
      if (r->action == TraceRow::Start)
        flag(t, r->agent, "start row after tick 0");
      if (!map.in_bounds(r->loc) || !map.passable(r->loc))
        flag(t, r->agent, "enters blocked cell " + to_string(r->loc));
      else if (!adjacent_or_equal(p->loc, r->loc))
        flag(t, r->agent,
             "teleports " + to_string(p->loc) + " -> " + to_string(r->loc));
      const bool moved = !(p->loc == r->loc);
      if (moved && r->action == TraceRow::Wait)
        flag(t, r->agent, "wait row changes cell");
      if (!moved && r->action == TraceRow::Move)
        flag(t, r->agent, "move row stays in place");
    }
    for (int a = 0; a <= max_agent; ++a)
      if (prev[size_t(a)] && !seen[size_t(a)])
        flag(t, a, "agent missing from tick");

    // Vertex and swap checks across the joint step.
    std::map<std::pair<int, int>, int> occupied;
    for (int a = 0; a <= max_agent; ++a) {
      const TraceRow* r = seen[size_t(a)];
      if (!r) continue;
      auto key = std::make_pair(r->loc.row, r->loc.col);
      auto [it, fresh] = occupied.emplace(key, a);
      if (!fresh)
        flag(t, a,
             "vertex collision with agent " + std::to_string(it->second) +
                 " at " + to_string(r->loc));
    }
    std::map<std::pair<int, int>, int> before_at;
    for (int a = 0; a <= max_agent; ++a)
      if (prev[size_t(a)] && seen[size_t(a)])
        before_at[{prev[size_t(a)]->loc.row, prev[size_t(a)]->loc.col}] = a;
    for (int a = 0; a <= max_agent; ++a) {
      const TraceRow* r = seen[size_t(a)];
      const TraceRow* p = prev[size_t(a)];
      if (!r || !p || r->loc == p->loc) continue;
      const auto it = before_at.find({r->loc.row, r->loc.col});
      if (it == before_at.end() || it->second == a) continue;
      const int b = it->second;
      if (seen[size_t(b)]->loc == p->loc && a < b)
        flag(t, a, "swap with agent " + std::to_string(b) + " at " +
                       to_string(r->loc));
    }
    std::vector<const TraceRow*> tick_rows;
    tick_rows.reserve(size_t(max_agent + 1));
    for (int a = 0; a <= max_agent; ++a)
      if (seen[size_t(a)]) {
        tick_rows.push_back(seen[size_t(a)]);
        prev[size_t(a)] = seen[size_t(a)];
      }
    apply_tick_events(tick_rows);
  }
  return out;
}

std::string metrics_to_json(const RunMetrics& m, const SimConfig& cfg) {
  ordered_json j;
  j["completed"] = m.completed;
  j["makespan"] = m.makespan;
  j["throughput"] = m.throughput;
  j["hits"] = m.hits;
  j["misses"] = m.misses;
  j["hit_rate"] = m.hit_rate;
  j["moves"] = m.moves;
  j["waits"] = m.waits;
  j["aborted"] = m.aborted;
  j["abort_reason"] = m.abort_reason;
  ordered_json st;
  for (int s = 0; s < kStatusCount; ++s)
    st[status_name(Status(s))] = m.status_ticks[size_t(s)];
  j["status_ticks"] = st;
  j["trace_rows"] = m.trace_rows;
  j["map"] = ordered_json{{"height", m.height}, {"width", m.width}};
  int agents = 0, caches = 0;
  for (const GroupSpec& g : cfg.groups) {
    agents += g.agent_count;
    caches += int(g.cache_cells.size());
  }
  j["config"] = ordered_json{{"agents", agents},
                             {"caches", caches},
                             {"groups", cfg.groups.size()},
                             {"policy", policy_name(cfg.policy)},
                             {"planner", planner_name(cfg.planner)},
                             {"dist", dist_name(cfg.dist)},
                             {"max_carry", cfg.max_carry},
                             {"cache_capacity", cfg.cache_capacity},
                             {"tasks", cfg.task_limit},
                             {"watchdog", cfg.watchdog},
                             {"seed", cfg.seed}};
  ordered_json grid = ordered_json::array();
  for (int r = 0; r < m.height; ++r) {
    ordered_json row = ordered_json::array();
    for (int c = 0; c < m.width; ++c)
      row.push_back(m.wait_counts[size_t(r * m.width + c)]);
    grid.push_back(std::move(row));
  }
  j["wait_counts"] = std::move(grid);
  return j.dump(2) + "\n";
}

void write_heatmap_pgm(std::ostream& out, const GridMap& map,
                       const std::vector<long>& wait_counts) {
  if (wait_counts.size() != map.cells.size())
    throw std::invalid_argument("heatmap: wait_counts size mismatch");
  long max_count = 0;
  for (size_t i = 0; i < wait_counts.size(); ++i)
    if (map.cells[i] != CellKind::Obstacle)
      max_count = std::max(max_count, wait_counts[i]);
  out << "P5\n" << map.width << " " << map.height << "\n255\n";
  for (size_t i = 0; i < wait_counts.size(); ++i) {
    unsigned char px;
    if (map.cells[i] == CellKind::Obstacle) {
      px = 128;
    } else if (max_count == 0) {
      px = 255;
    } else {
      const double frac = double(wait_counts[i]) / double(max_count);
      px = static_cast<unsigned char>(255 - std::lround(255.0 * frac));
    }
    out.put(char(px));
  }
}

std::string heatmap_to_csv(const GridMap& map,
                           const std::vector<long>& wait_counts) {
  if (wait_counts.size() != map.cells.size())
    throw std::invalid_argument("heatmap: wait_counts size mismatch");
  std::ostringstream out;
  for (int r = 0; r < map.height; ++r) {
    for (int c = 0; c < map.width; ++c) {
      if (c) out << ',';
      out << wait_counts[size_t(r * map.width + c)];
    }
    out << '\n';
  }
  return out.str();
}

namespace {

Coord json_coord(const nlohmann::json& v, const char* what) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
      !v[1].is_number_integer())
    throw std::runtime_error(std::string("scenario: ") + what +
                             " must be [row, col]");
  return {v[0].get<int>(), v[1].get<int>()};
}

}  // namespace

std::vector<GroupSpec> parse_scenario_json(const std::string& text,
                                           const GridMap& map) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("scenario: invalid json: ") + e.what());
  }
  if (!j.is_object() || !j.contains("groups") || !j["groups"].is_array() ||
      j["groups"].empty())
    throw std::runtime_error("scenario: expected a non-empty 'groups' array");
  std::vector<GroupSpec> groups;
  for (const auto& jg : j["groups"]) {
    GroupSpec g;
    if (!jg.is_object() || !jg.contains("port") || !jg.contains("agents"))
      throw std::runtime_error("scenario: group needs 'port' and 'agents'");
    g.port = json_coord(jg["port"], "port");
    if (!map.in_bounds(g.port) || map.kind(g.port) != CellKind::Port)
      throw std::runtime_error("scenario: " + to_string(g.port) +
                               " is not a port cell");
    if (!jg["agents"].is_number_integer() || jg["agents"].get<int>() < 1)
      throw std::runtime_error("scenario: 'agents' must be a positive integer");
    g.agent_count = jg["agents"].get<int>();
    if (jg.contains("caches")) {
      if (!jg["caches"].is_array())
        throw std::runtime_error("scenario: 'caches' must be an array");
      for (const auto& jc : jg["caches"]) {
        const Coord c = json_coord(jc, "cache");
        if (!map.in_bounds(c))
          throw std::runtime_error("scenario: cache " + to_string(c) +
                                   " out of bounds");
        switch (map.kind(c)) {
          case CellKind::Cache: g.cache_cells.push_back(c); break;
          case CellKind::Aisle: break;  // trimmed away by remove_caches
          default:
            throw std::runtime_error("scenario: cache " + to_string(c) +
                                     " is not a cache cell");
        }
      }
    }
    if (jg.contains("starts")) {
      if (!jg["starts"].is_array())
        throw std::runtime_error("scenario: 'starts' must be an array");
      for (const auto& js : jg["starts"])
        g.starts.push_back(json_coord(js, "start"));
    }
    groups.push_back(std::move(g));
  }
  if (j.value("single_port", false) && groups.size() > 1) {
    GroupSpec merged = groups[0];
    for (size_t i = 1; i < groups.size(); ++i) {
      const GroupSpec& g = groups[size_t(i)];
      merged.agent_count += g.agent_count;
      merged.cache_cells.insert(merged.cache_cells.end(),
                                g.cache_cells.begin(), g.cache_cells.end());
      merged.starts.insert(merged.starts.end(), g.starts.begin(),
                           g.starts.end());
    }
    if (!merged.starts.empty() &&
        int(merged.starts.size()) != merged.agent_count)
      throw std::runtime_error(
          "scenario: single_port merge needs starts for all groups or none");
    return {merged};
  }
  return groups;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace wcsim
