#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

namespace wcsim {

// Grid coordinate, row 0 at the top. All movement is 4-connected.
struct Coord {
  int row = 0;
  int col = 0;

  friend bool operator==(const Coord& a, const Coord& b) {
    return a.row == b.row && a.col == b.col;
  }
  friend bool operator!=(const Coord& a, const Coord& b) { return !(a == b); }
  friend bool operator<(const Coord& a, const Coord& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  }
};

// Candidate order used everywhere a tie must break deterministically:
// up, down, left, right (then "stay" where applicable).
inline constexpr std::array<Coord, 4> kDirections = {
    Coord{-1, 0}, Coord{1, 0}, Coord{0, -1}, Coord{0, 1}};

inline Coord operator+(const Coord& a, const Coord& b) {
  return {a.row + b.row, a.col + b.col};
}

inline bool adjacent_or_equal(const Coord& a, const Coord& b) {
  const int dr = a.row - b.row;
  const int dc = a.col - b.col;
  return (dr == 0 && dc == 0) || (dr * dr + dc * dc == 1);
}

inline std::string to_string(const Coord& c) {
  return "(" + std::to_string(c.row) + "," + std::to_string(c.col) + ")";
}

struct CoordHash {
  size_t operator()(const Coord& c) const {
    return std::hash<int64_t>()((int64_t(c.row) << 32) ^ uint32_t(c.col));
  }
};

}  // namespace wcsim
