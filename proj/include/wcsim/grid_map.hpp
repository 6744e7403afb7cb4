#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "wcsim/geometry.hpp"

namespace wcsim {

enum class CellKind : uint8_t { Obstacle, Aisle, Shelf, Cache, Port };

char cell_char(CellKind k);

// Warehouse grid. Built once by parse_map + kind assignment, then read-only
// for the rest of the run (distance fields and the engine share it freely).
struct GridMap {
  int height = 0;
  int width = 0;
  std::vector<CellKind> cells;     // row-major, height*width
  std::vector<int> shelf_kind_at;  // item kind stored at cell, -1 elsewhere
  std::vector<int> cache_id_at;    // dense cache id, -1 elsewhere
  std::vector<int> port_id_at;     // dense port id, -1 elsewhere
  std::vector<Coord> shelf_of_kind;  // kind -> shelf cell (bijective)
  std::vector<Coord> cache_cells;    // cache id -> cell
  std::vector<Coord> port_cells;     // port id -> cell

  int idx(Coord c) const { return c.row * width + c.col; }
  bool in_bounds(Coord c) const {
    return c.row >= 0 && c.row < height && c.col >= 0 && c.col < width;
  }
  CellKind kind(Coord c) const { return cells[size_t(idx(c))]; }
  bool passable(Coord c) const {
    return in_bounds(c) && kind(c) != CellKind::Obstacle;
  }
  int kind_count() const { return int(shelf_of_kind.size()); }
  int cache_count() const { return int(cache_cells.size()); }
  int port_count() const { return int(port_cells.size()); }
  std::string render() const;  // text form, same grammar parse_map accepts
};

// Parses the map grammar:
//   type warehouse
//   height H
//   width W
//   map
//   <H rows of W chars drawn from {@ . B C U}>
// Throws std::runtime_error naming the line on any malformed input.
GridMap parse_map(const std::string& text);

// Assigns item kinds 0..M-1 to the M shelf cells via a seeded Fisher-Yates
// permutation of the row-major shelf order. Deterministic in `seed`.
void assign_item_kinds(GridMap& map, uint64_t seed);

// Loads an explicit kind table: header "row,col,kind", one line per shelf.
// Every shelf cell must be covered exactly once and the kinds must form a
// bijection onto 0..M-1.
void apply_kinds_csv(GridMap& map, const std::string& csv_text);

// Returns a copy with only the first `keep` cache cells retained, ordered by
// (column, row); the rest become aisle. Cache ids are re-densified row-major.
GridMap remove_caches(const GridMap& map, int keep);

// Structural invariants (dimension consistency, dense ids, kind bijection).
// Throws std::logic_error on violation; cheap enough to call in tests freely.
void validate_map(const GridMap& map);

// Single-source BFS distances over passable cells; -1 marks unreachable.
struct DistanceField {
  static constexpr int kUnreachable = -1;
  Coord source{};
  int width = 0;
  std::vector<int> dist;
  int at(Coord c) const { return dist[size_t(c.row * width + c.col)]; }
};

DistanceField distance_field(const GridMap& map, Coord source);

// Memoizes one field per *target* cell: planners and the assigner always ask
// "how far is X from this fixed target", and on an undirected grid
// dist(target -> x) == dist(x -> target).
class DistanceCache {
 public:
  explicit DistanceCache(const GridMap& map) : map_(&map) {}

  const DistanceField& field(Coord target);
  // Hop distance from `from` to `target`; kUnreachable if disconnected.
  int hops(Coord from, Coord target);
  const GridMap& map() const { return *map_; }

 private:
  const GridMap* map_;
  std::unordered_map<int, DistanceField> fields_;
};

}  // namespace wcsim
