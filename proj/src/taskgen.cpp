#include "wcsim/taskgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "wcsim/rng.hpp"

namespace wcsim {

const char* dist_name(const DistParams& params) {
  if (std::holds_alternative<MkParams>(params)) return "mk";
  if (std::holds_alternative<ZhangParams>(params)) return "zhang";
  return "rdd";
}

namespace {

// Active-pool rotation keeps the window bound: the retired kind leaves the
// pool immediately and its replacement only becomes drawable after `window`
// further emissions, so no window can see both.
class MkStream final : public TaskStream {
 public:
  MkStream(MkParams p, int kinds, uint64_t seed)
      : window_(p.window), rng_(seed) {
    if (p.window < 1) throw std::runtime_error("mk: window must be >= 1");
    if (p.active < 1) throw std::runtime_error("mk: active must be >= 1");
    if (kinds < 1) throw std::runtime_error("mk: kinds must be >= 1");
    active_ = std::min(p.active, kinds);
    std::vector<int> perm(static_cast<size_t>(kinds));
    std::iota(perm.begin(), perm.end(), 0);
    rng_.shuffle(perm);
    pool_.assign(perm.begin(), perm.begin() + active_);
    outside_.assign(perm.begin() + active_, perm.end());
    // A pool of one can never rotate without putting two kinds in a window,
    // except in the degenerate window == 1 case.
    can_rotate_ = !outside_.empty() && (active_ >= 2 || window_ == 1);
  }

  int next_kind() override {
    if (incoming_ >= 0 && emitted_ >= incoming_due_) {
      pool_.push_back(incoming_);
      incoming_ = -1;
    }
    if (incoming_ < 0 && can_rotate_ && rng_.below(window_) == 0) {
      const int out_idx = rng_.below(int(pool_.size()));
      const int retired = pool_[size_t(out_idx)];
      pool_.erase(pool_.begin() + out_idx);
      const int in_idx = rng_.below(int(outside_.size()));
      incoming_ = outside_[size_t(in_idx)];
      outside_[size_t(in_idx)] = retired;
      incoming_due_ = emitted_ + window_;
      if (pool_.empty()) {
        // Only reachable with a pool of one and window == 1, where rotation
        // is allowed to be instantaneous: no window can straddle the swap.
        pool_.push_back(incoming_);
        incoming_ = -1;
      }
    }
    const int kind = pool_[size_t(rng_.below(int(pool_.size())))];
    ++emitted_;
    return kind;
  }

 private:
  int window_;
  int active_;
  bool can_rotate_ = false;
  std::vector<int> pool_;
  std::vector<int> outside_;  // kinds currently not drawable
  int incoming_ = -1;
  long incoming_due_ = 0;
  long emitted_ = 0;
  Rng rng_;
};

class ZhangStream final : public TaskStream {
 public:
  ZhangStream(int kinds, uint64_t seed) : rng_(seed) {
    const int n_cold = int(std::lround(0.7 * kinds));
    const int n_mid = int(std::lround(0.2 * kinds));
    const int n_hot = kinds - n_cold - n_mid;
    if (n_cold < 1 || n_mid < 1 || n_hot < 1)
      throw std::runtime_error(
          "zhang: kind universe too small for a 70/20/10 split (kinds=" +
          std::to_string(kinds) + ")");
    std::vector<int> perm(static_cast<size_t>(kinds));
    std::iota(perm.begin(), perm.end(), 0);
    rng_.shuffle(perm);
    cold_.assign(perm.begin(), perm.begin() + n_cold);
    mid_.assign(perm.begin() + n_cold, perm.begin() + n_cold + n_mid);
    hot_.assign(perm.begin() + n_cold + n_mid, perm.end());
  }

  int next_kind() override {
    const double x = rng_.unit();
    const std::vector<int>& cls = x < 0.10 ? cold_ : x < 0.30 ? mid_ : hot_;
    return cls[size_t(rng_.below(int(cls.size())))];
  }

 private:
  std::vector<int> cold_, mid_, hot_;
  Rng rng_;
};

class RddStream final : public TaskStream {
 public:
  RddStream(const RddParams& p, int kinds, uint64_t seed) : rng_(seed) {
    if (p.weights.empty()) throw std::runtime_error("rdd: empty weight table");
    weights_.assign(size_t(kinds), 0.0);
    bool needs_remap = false;
    for (const auto& [id, w] : p.weights) {
      if (w <= 0) throw std::runtime_error("rdd: weights must be positive");
      if (id < 0 || id >= kinds) needs_remap = true;
    }
    if (!needs_remap) {
      for (const auto& [id, w] : p.weights) weights_[size_t(id)] += w;
    } else {
      // Table ids outsize the map's kind universe: fold each distinct id
      // onto a seeded permutation of the kinds, accumulating weights that
      // land on the same kind.
      std::vector<int> perm(static_cast<size_t>(kinds));
      std::iota(perm.begin(), perm.end(), 0);
      rng_.shuffle(perm);
      std::map<int, int> id_to_kind;
      for (const auto& [id, w] : p.weights) {
        auto [it, fresh] = id_to_kind.emplace(
            id, perm[id_to_kind.size() % size_t(kinds)]);
        (void)fresh;
        weights_[size_t(it->second)] += w;
      }
    }
    kinds_with_weight_ = 0;
    for (double w : weights_)
      if (w > 0) ++kinds_with_weight_;
    if (kinds_with_weight_ == 0)
      throw std::runtime_error("rdd: no kind received any weight");
  }

  int next_kind() override { return rng_.pick_weighted(weights_); }

 private:
  std::vector<double> weights_;
  int kinds_with_weight_ = 0;
  Rng rng_;
};

}  // namespace

std::unique_ptr<TaskStream> make_stream(const DistParams& params, int kinds,
                                        uint64_t seed) {
  if (kinds < 1) throw std::runtime_error("task stream: kinds must be >= 1");
  if (const auto* mk = std::get_if<MkParams>(&params))
    return std::make_unique<MkStream>(*mk, kinds, seed);
  if (std::holds_alternative<ZhangParams>(params))
    return std::make_unique<ZhangStream>(kinds, seed);
  return std::make_unique<RddStream>(std::get<RddParams>(params), kinds, seed);
}

std::optional<size_t> first_window_violation(const std::vector<int>& seq,
                                             int window, int max_kinds) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  std::map<int, int> counts;
  for (size_t i = 0; i < seq.size(); ++i) {
    counts[seq[i]] += 1;
    if (i >= size_t(window)) {
      auto it = counts.find(seq[i - size_t(window)]);
      if (--it->second == 0) counts.erase(it);
    }
    if (i + 1 >= size_t(window) && int(counts.size()) > max_kinds)
      return i + 1 - size_t(window);
  }
  return std::nullopt;
}

RddParams parse_rdd_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      (line != "item_kind,weight" && line != "item_kind,weight\r"))
    throw std::runtime_error("rdd csv: expected header 'item_kind,weight'");
  RddParams out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    int id = 0;
    double w = 0;
    char comma = 0;
    if (!(row >> id >> comma >> w) || comma != ',' || !(row >> std::ws).eof())
      throw std::runtime_error("rdd csv: malformed line " +
                               std::to_string(line_no) + ": '" + line + "'");
    if (!(w > 0))
      throw std::runtime_error("rdd csv: non-positive weight on line " +
                               std::to_string(line_no));
    out.weights.emplace_back(id, w);
  }
  if (out.weights.empty()) throw std::runtime_error("rdd csv: no entries");
  return out;
}

}  // namespace wcsim
