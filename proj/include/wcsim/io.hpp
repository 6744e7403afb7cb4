#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wcsim/grid_map.hpp"
#include "wcsim/sim.hpp"

namespace wcsim {

// --- trace ---------------------------------------------------------------
// CSV columns: tick,agent,status,row,col,action,lock_event
// Tick 0 rows record starting cells (action "start"); each later tick has
// exactly one row per agent. lock_event is empty or acq_r:N / acq_w:N / rel:N.

std::string trace_to_csv(const std::vector<TraceRow>& rows);
// Throws std::runtime_error on malformed input (bad header, bad fields).
std::vector<TraceRow> parse_trace_csv(const std::string& text);

struct TraceViolation {
  long tick = 0;
  int agent = -1;
  std::string what;
};

// Structural safety audit of a recorded run: per-tick agent coverage,
// adjacency/passability of every move, vertex and swap collisions, action
// consistency, and the cache lock protocol (exclusive writer, no writer
// alongside readers, releases only on the locked cache's cell).
std::vector<TraceViolation> validate_trace(const std::vector<TraceRow>& rows,
                                           const GridMap& map);

// --- metrics -------------------------------------------------------------
// Stable key order, 2-space indent, trailing newline; byte-identical for
// identical runs.
std::string metrics_to_json(const RunMetrics& m, const SimConfig& cfg);

// --- heatmap -------------------------------------------------------------
// 8-bit binary PGM: darker = more waiting; obstacles mid-gray; an all-zero
// field renders white.
void write_heatmap_pgm(std::ostream& out, const GridMap& map,
                       const std::vector<long>& wait_counts);
std::string heatmap_to_csv(const GridMap& map,
                           const std::vector<long>& wait_counts);

// --- scenario ------------------------------------------------------------
// JSON: {"groups":[{"port":[r,c],"caches":[[r,c],...],"agents":N,
//                   "starts":[[r,c],...]?}, ...], "single_port":false}
// Cache entries that the map no longer marks as caches (trimmed away) are
// dropped; entries on cells that could never be caches are errors.
// single_port=true folds every group onto the first group's port.
std::vector<GroupSpec> parse_scenario_json(const std::string& text,
                                           const GridMap& map);

// --- small helpers -------------------------------------------------------
std::string read_text_file(const std::string& path);   // throws on failure
void write_text_file(const std::string& path, const std::string& content);

}  // namespace wcsim
