#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace wcsim {

// Sliding-window distribution: any `window` consecutive tasks draw from at
// most `active` distinct kinds; the active pool slowly rotates when the kind
// universe is larger than the pool.
struct MkParams {
  int window = 200;  // M
  int active = 20;   // K
};

// Fixed three-class skew: 70% of kinds share 10% of the probability mass,
// 20% share 20%, and the remaining 10% of kinds carry 70%.
struct ZhangParams {};

// Explicit weight table (kind id, weight).
struct RddParams {
  std::vector<std::pair<int, double>> weights;
};

using DistParams = std::variant<MkParams, ZhangParams, RddParams>;

const char* dist_name(const DistParams& params);  // "mk" | "zhang" | "rdd"

class TaskStream {
 public:
  virtual ~TaskStream() = default;
  virtual int next_kind() = 0;
};

// `kinds` is the size of the item-kind universe (the map's shelf count).
// Throws std::runtime_error on unsatisfiable parameters.
std::unique_ptr<TaskStream> make_stream(const DistParams& params, int kinds,
                                        uint64_t seed);

// Oracle: index of the first length-`window` run of `seq` containing more
// than `max_kinds` distinct values, if any.
std::optional<size_t> first_window_violation(const std::vector<int>& seq,
                                             int window, int max_kinds);

// Parses "item_kind,weight" CSV (header required, weights > 0).
RddParams parse_rdd_csv(const std::string& text);

}  // namespace wcsim
