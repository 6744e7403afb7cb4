#include "wcsim/grid_map.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wcsim/rng.hpp"

namespace wcsim {

char cell_char(CellKind k) {
  switch (k) {
    case CellKind::Obstacle: return '@';
    case CellKind::Aisle: return '.';
    case CellKind::Shelf: return 'B';
    case CellKind::Cache: return 'C';
    case CellKind::Port: return 'U';
  }
  return '?';
}

namespace {

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("map parse error, line " + std::to_string(line_no) +
                           ": " + what);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      lines.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) {
    if (cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
  }
  return lines;
}

int parse_header_int(const std::string& line, const std::string& key,
                     int line_no) {
  if (line.size() <= key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
      line[key.size()] != ' ')
    parse_fail(line_no, "expected '" + key + " <n>', got '" + line + "'");
  const std::string num = line.substr(key.size() + 1);
  size_t used = 0;
  int value = 0;
  try {
    value = std::stoi(num, &used);
  } catch (const std::exception&) {
    parse_fail(line_no, "bad integer '" + num + "'");
  }
  if (used != num.size() || value <= 0)
    parse_fail(line_no, "bad " + key + " value '" + num + "'");
  return value;
}

// Rebuilds every derived index from `cells`; kinds are left unassigned.
void build_indexes(GridMap& m) {
  const size_t n = size_t(m.height) * size_t(m.width);
  m.shelf_kind_at.assign(n, -1);
  m.cache_id_at.assign(n, -1);
  m.port_id_at.assign(n, -1);
  m.shelf_of_kind.clear();
  m.cache_cells.clear();
  m.port_cells.clear();
  for (int r = 0; r < m.height; ++r) {
    for (int c = 0; c < m.width; ++c) {
      const Coord at{r, c};
      const size_t i = size_t(m.idx(at));
      switch (m.cells[i]) {
        case CellKind::Shelf:
          m.shelf_of_kind.push_back(at);  // placeholder slot; kind set later
          break;
        case CellKind::Cache:
          m.cache_id_at[i] = int(m.cache_cells.size());
          m.cache_cells.push_back(at);
          break;
        case CellKind::Port:
          m.port_id_at[i] = int(m.port_cells.size());
          m.port_cells.push_back(at);
          break;
        default:
          break;
      }
    }
  }
}

}  // namespace

std::string GridMap::render() const {
  std::ostringstream out;
  out << "type warehouse\n"
      << "height " << height << "\n"
      << "width " << width << "\n"
      << "map\n";
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out << cell_char(kind({r, c}));
    out << "\n";
  }
  return out.str();
}

GridMap parse_map(const std::string& text) {
  const std::vector<std::string> lines = split_lines(text);
  if (lines.size() < 4) throw std::runtime_error("map parse error: truncated header");
  if (lines[0] != "type warehouse")
    parse_fail(1, "expected 'type warehouse', got '" + lines[0] + "'");
  GridMap m;
  m.height = parse_header_int(lines[1], "height", 2);
  m.width = parse_header_int(lines[2], "width", 3);
  if (lines[3] != "map") parse_fail(4, "expected 'map', got '" + lines[3] + "'");
  if (int(lines.size()) < 4 + m.height)
    throw std::runtime_error("map parse error: expected " +
                             std::to_string(m.height) + " grid rows, got " +
                             std::to_string(lines.size() - 4));
  for (size_t extra = size_t(4 + m.height); extra < lines.size(); ++extra)
    if (!lines[extra].empty())
      parse_fail(int(extra + 1), "unexpected content after grid rows");

  m.cells.reserve(size_t(m.height) * size_t(m.width));
  for (int r = 0; r < m.height; ++r) {
    const std::string& row = lines[size_t(4 + r)];
    const int line_no = 5 + r;
    if (int(row.size()) != m.width)
      parse_fail(line_no, "row has " + std::to_string(row.size()) +
                              " cells, width is " + std::to_string(m.width));
    for (char ch : row) {
      switch (ch) {
        case '@': m.cells.push_back(CellKind::Obstacle); break;
        case '.': m.cells.push_back(CellKind::Aisle); break;
        case 'B': m.cells.push_back(CellKind::Shelf); break;
        case 'C': m.cells.push_back(CellKind::Cache); break;
        case 'U': m.cells.push_back(CellKind::Port); break;
        default:
          parse_fail(line_no, std::string("unknown cell character '") + ch + "'");
      }
    }
  }
  build_indexes(m);
  return m;
}

void assign_item_kinds(GridMap& map, uint64_t seed) {
  const int m_kinds = map.kind_count();
  std::vector<int> perm(static_cast<size_t>(m_kinds));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  // shelf_of_kind currently lists shelves in row-major order; shelf i gets
  // kind perm[i].
  std::vector<Coord> shelves = map.shelf_of_kind;
  int next = 0;
  for (const Coord& at : shelves) {
    const int kind = perm[size_t(next++)];
    map.shelf_kind_at[size_t(map.idx(at))] = kind;
    map.shelf_of_kind[size_t(kind)] = at;
  }
}

void apply_kinds_csv(GridMap& map, const std::string& csv_text) {
  const std::vector<std::string> lines = split_lines(csv_text);
  if (lines.empty() || lines[0] != "row,col,kind")
    throw std::runtime_error("kinds csv: expected header 'row,col,kind'");
  const int m_kinds = map.kind_count();
  std::vector<char> kind_seen(size_t(m_kinds), 0);
  std::vector<char> shelf_seen(map.cells.size(), 0);
  std::fill(map.shelf_kind_at.begin(), map.shelf_kind_at.end(), -1);

  for (size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    std::istringstream row(lines[li]);
    int r = 0, c = 0, k = 0;
    char comma1 = 0, comma2 = 0;
    if (!(row >> r >> comma1 >> c >> comma2 >> k) || comma1 != ',' ||
        comma2 != ',' || !(row >> std::ws).eof())
      throw std::runtime_error("kinds csv: malformed line " +
                               std::to_string(li + 1) + ": '" + lines[li] + "'");
    const Coord at{r, c};
    if (!map.in_bounds(at) || map.kind(at) != CellKind::Shelf)
      throw std::runtime_error("kinds csv: line " + std::to_string(li + 1) +
                               ": " + to_string(at) + " is not a shelf cell");
    if (k < 0 || k >= m_kinds)
      throw std::runtime_error("kinds csv: line " + std::to_string(li + 1) +
                               ": kind " + std::to_string(k) +
                               " outside [0," + std::to_string(m_kinds) + ")");
    if (shelf_seen[size_t(map.idx(at))]++)
      throw std::runtime_error("kinds csv: shelf " + to_string(at) +
                               " assigned twice");
    if (kind_seen[size_t(k)]++)
      throw std::runtime_error("kinds csv: kind " + std::to_string(k) +
                               " assigned twice");
    map.shelf_kind_at[size_t(map.idx(at))] = k;
    map.shelf_of_kind[size_t(k)] = at;
  }
  for (int k = 0; k < m_kinds; ++k)
    if (!kind_seen[size_t(k)])
      throw std::runtime_error("kinds csv: kind " + std::to_string(k) +
                               " never assigned; table must cover every shelf");
}

GridMap remove_caches(const GridMap& map, int keep) {
  if (keep < 0 || keep > map.cache_count())
    throw std::runtime_error("remove_caches: keep=" + std::to_string(keep) +
                             " outside [0," + std::to_string(map.cache_count()) +
                             "]");
  std::vector<Coord> order = map.cache_cells;
  std::sort(order.begin(), order.end(), [](const Coord& a, const Coord& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  GridMap out = map;
  for (size_t i = size_t(keep); i < order.size(); ++i)
    out.cells[size_t(out.idx(order[i]))] = CellKind::Aisle;
  const std::vector<int> kinds = out.shelf_kind_at;  // survives re-indexing
  build_indexes(out);
  out.shelf_kind_at = kinds;
  for (int r = 0; r < out.height; ++r)
    for (int c = 0; c < out.width; ++c) {
      const Coord at{r, c};
      const int k = out.shelf_kind_at[size_t(out.idx(at))];
      if (k >= 0) out.shelf_of_kind[size_t(k)] = at;
    }
  return out;
}

void validate_map(const GridMap& map) {
  const size_t n = size_t(map.height) * size_t(map.width);
  if (map.height <= 0 || map.width <= 0 || map.cells.size() != n ||
      map.shelf_kind_at.size() != n || map.cache_id_at.size() != n ||
      map.port_id_at.size() != n)
    throw std::logic_error("map: dimension tables inconsistent");
  std::vector<char> kind_seen(map.shelf_of_kind.size(), 0);
  int shelves = 0, caches = 0, ports = 0;
  for (int r = 0; r < map.height; ++r)
    for (int c = 0; c < map.width; ++c) {
      const Coord at{r, c};
      const size_t i = size_t(map.idx(at));
      const int sk = map.shelf_kind_at[i];
      const int ci = map.cache_id_at[i];
      const int pi = map.port_id_at[i];
      switch (map.kind(at)) {
        case CellKind::Shelf: {
          ++shelves;
          if (sk < 0 || sk >= map.kind_count() || kind_seen[size_t(sk)]++)
            throw std::logic_error("map: shelf kinds not a bijection at " +
                                   to_string(at));
          if (!(map.shelf_of_kind[size_t(sk)] == at))
            throw std::logic_error("map: shelf_of_kind mismatch at " +
                                   to_string(at));
          break;
        }
        case CellKind::Cache:
          if (ci != caches++ || !(map.cache_cells[size_t(ci)] == at))
            throw std::logic_error("map: cache ids not dense row-major at " +
                                   to_string(at));
          break;
        case CellKind::Port:
          if (pi != ports++ || !(map.port_cells[size_t(pi)] == at))
            throw std::logic_error("map: port ids not dense row-major at " +
                                   to_string(at));
          break;
        default:
          if (sk != -1 || ci != -1 || pi != -1)
            throw std::logic_error("map: stale index entry at " + to_string(at));
      }
    }
  if (shelves != map.kind_count() || caches != map.cache_count() ||
      ports != map.port_count())
    throw std::logic_error("map: cell counts disagree with index tables");
}

DistanceField distance_field(const GridMap& map, Coord source) {
  if (!map.in_bounds(source) || !map.passable(source))
    throw std::runtime_error("distance_field: source " + to_string(source) +
                             " is not a passable cell");
  DistanceField f;
  f.source = source;
  f.width = map.width;
  f.dist.assign(map.cells.size(), DistanceField::kUnreachable);
  std::deque<Coord> queue{source};
  f.dist[size_t(map.idx(source))] = 0;
  while (!queue.empty()) {
    const Coord cur = queue.front();
    queue.pop_front();
    const int d = f.dist[size_t(map.idx(cur))];
    for (const Coord& step : kDirections) {
      const Coord nxt = cur + step;
      if (!map.passable(nxt)) continue;
      int& slot = f.dist[size_t(map.idx(nxt))];
      if (slot != DistanceField::kUnreachable) continue;
      slot = d + 1;
      queue.push_back(nxt);
    }
  }
  return f;
}

const DistanceField& DistanceCache::field(Coord target) {
  const int key = map_->idx(target);
  auto it = fields_.find(key);
  if (it == fields_.end())
    it = fields_.emplace(key, distance_field(*map_, target)).first;
  return it->second;
}

int DistanceCache::hops(Coord from, Coord target) {
  return field(target).at(from);
}

}  // namespace wcsim
