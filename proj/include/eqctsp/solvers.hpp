#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/parallel.hpp"
#include "eqctsp/rng.hpp"
#include "eqctsp/tour.hpp"

namespace eqctsp {

inline constexpr int kBruteForceMaxNodes = 10;
inline constexpr int kHeldKarpMaxNodes = 20;

/// Greedy nearest-unvisited construction; ties to the lowest index. The
/// result is rotated so node 0 leads, which preserves the visit sequence
/// whenever start == 0.
inline Tour solve_nearest_neighbor(const TspInstance& inst, int start = 0) {
  if (start < 0 || start >= inst.n) throw InvalidActionError("start node out of range");
  std::vector<int> order;
  order.reserve(inst.n);
  std::vector<bool> visited(inst.n, false);
  int current = start;
  order.push_back(current);
  visited[current] = true;
  for (int step = 1; step < inst.n; ++step) {
    int nearest = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int cand = 0; cand < inst.n; ++cand) {
      if (visited[cand]) continue;
      const double d = inst.d(current, cand);
      if (d < best) {
        best = d;
        nearest = cand;
      }
    }
    visited[nearest] = true;
    order.push_back(nearest);
    current = nearest;
  }
  rotate_to_zero(order);
  return make_tour(inst, std::move(order));
}

/// Exhaustive minimum over all (n-1)!/2 closed tours anchored at node 0.
/// Enumeration is lexicographic with reversed duplicates skipped, so ties
/// resolve to the lexicographically smallest order.
inline Tour solve_brute_force(const TspInstance& inst) {
  if (inst.n > kBruteForceMaxNodes)
    throw SizeLimitError("brute force supports n <= " + std::to_string(kBruteForceMaxNodes) +
                         ", got n = " + std::to_string(inst.n));
  std::vector<int> rest(inst.n - 1);
  std::iota(rest.begin(), rest.end(), 1);
  std::vector<int> best_order;
  double best_len = std::numeric_limits<double>::infinity();
  std::vector<int> order(inst.n);
  order[0] = 0;
  do {
    if (inst.n > 2 && rest.front() > rest.back()) continue;  // orientation duplicate
    std::copy(rest.begin(), rest.end(), order.begin() + 1);
    double len = 0.0;
    for (int i = 0; i + 1 < inst.n; ++i) len += inst.d(order[i], order[i + 1]);
    len += inst.d(order.back(), 0);
    if (len < best_len) {
      best_len = len;
      best_order = order;
    }
  } while (std::next_permutation(rest.begin(), rest.end()));
  return make_tour(inst, std::move(best_order));
}

/// Subset dynamic program over paths from node 0. Memory grows as 2^n * n,
/// which bounds the method to n <= 20.
inline Tour solve_held_karp(const TspInstance& inst) {
  if (inst.n > kHeldKarpMaxNodes)
    throw SizeLimitError("Held-Karp supports n <= " + std::to_string(kHeldKarpMaxNodes) +
                         ", got n = " + std::to_string(inst.n) +
                         "; use the local-search solver for larger instances");
  const int m = inst.n - 1;  // nodes 1..n-1 mapped to bits 0..m-1
  if (m == 0) throw ValidationError("instance must have at least 2 nodes");
  const std::size_t full = (std::size_t{1} << m) - 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dp((full + 1) * m, inf);
  std::vector<std::int8_t> parent((full + 1) * m, -1);
  for (int j = 0; j < m; ++j) dp[(std::size_t{1} << j) * m + j] = inst.d(0, j + 1);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    if ((mask & (mask - 1)) == 0) continue;  // singletons are the base case
    for (int j = 0; j < m; ++j) {
      if (!(mask & (std::size_t{1} << j))) continue;
      const std::size_t prev = mask ^ (std::size_t{1} << j);
      double best = inf;
      int best_i = -1;
      for (int i = 0; i < m; ++i) {
        if (!(prev & (std::size_t{1} << i))) continue;
        const double cand = dp[prev * m + i] + inst.d(i + 1, j + 1);
        if (cand < best) {
          best = cand;
          best_i = i;
        }
      }
      dp[mask * m + j] = best;
      parent[mask * m + j] = static_cast<std::int8_t>(best_i);
    }
  }
  double best = inf;
  int last = -1;
  for (int j = 0; j < m; ++j) {
    const double cand = dp[full * m + j] + inst.d(j + 1, 0);
    if (cand < best) {
      best = cand;
      last = j;
    }
  }
  std::vector<int> order;
  order.reserve(inst.n);
  std::size_t mask = full;
  int j = last;
  while (j >= 0) {
    order.push_back(j + 1);
    const int i = parent[mask * m + j];
    mask ^= std::size_t{1} << j;
    j = i;
  }
  order.push_back(0);
  std::reverse(order.begin(), order.end());
  canonicalize(order);
  return make_tour(inst, std::move(order));
}

namespace detail {

inline constexpr double kGainEps = 1e-12;

// 2-opt + Or-opt improvement engine with sorted neighbor candidate lists and
// a dirty-node queue. optimize() runs to a joint local optimum of both move
// classes.
class TourImprover {
 public:
  explicit TourImprover(const TspInstance& inst) : inst_(&inst), n_(inst.n) {
    const int k = std::min(n_ - 1, 12);
    neighbors_.resize(n_);
    std::vector<int> idx(n_);
    for (int c = 0; c < n_; ++c) {
      idx.clear();
      for (int o = 0; o < n_; ++o)
        if (o != c) idx.push_back(o);
      std::sort(idx.begin(), idx.end(), [&](int x, int y) {
        const double dx = inst.d(c, x), dy = inst.d(c, y);
        return dx < dy || (dx == dy && x < y);
      });
      neighbors_[c].assign(idx.begin(), idx.begin() + k);
    }
  }

  void load(std::vector<int> order) {
    order_ = std::move(order);
    pos_.resize(n_);
    for (int i = 0; i < n_; ++i) pos_[order_[i]] = i;
    length_ = 0.0;
    for (int i = 0; i < n_; ++i) length_ += inst_->d(order_[i], order_[(i + 1) % n_]);
  }

  const std::vector<int>& order() const { return order_; }
  double length() const { return length_; }

  void optimize_all() {
    queue_.clear();
    queued_.assign(n_, 1);
    for (int c = 0; c < n_; ++c) queue_.push_back(c);
    drain();
  }

  void optimize_dirty(const std::vector<int>& dirty) {
    queue_.clear();
    queued_.assign(n_, 0);
    for (int c : dirty) enqueue(c);
    drain();
  }

  // Double-bridge 4-opt perturbation; returns the cities at the new joints.
  std::vector<int> double_bridge(SplitMix64& rng) {
    int a = 1 + static_cast<int>(rng.next_below(n_ - 3));
    int b = a + 1 + static_cast<int>(rng.next_below(n_ - a - 2));
    int c = b + 1 + static_cast<int>(rng.next_below(n_ - b - 1));
    std::vector<int> next;
    next.reserve(n_);
    next.insert(next.end(), order_.begin(), order_.begin() + a);
    next.insert(next.end(), order_.begin() + b, order_.begin() + c);
    next.insert(next.end(), order_.begin() + a, order_.begin() + b);
    next.insert(next.end(), order_.begin() + c, order_.end());
    std::vector<int> joints = {next[0],     next[a - 1],         next[a],
                               next[b - 1], next[(c - 1) % n_],  next[c % n_],
                               next[n_ - 1]};
    load(std::move(next));
    return joints;
  }

 private:
  int succ(int c) const { return order_[(pos_[c] + 1) % n_]; }
  int pred(int c) const { return order_[(pos_[c] + n_ - 1) % n_]; }

  void enqueue(int c) {
    if (!queued_[c]) {
      queued_[c] = 1;
      queue_.push_back(c);
    }
  }

  void drain() {
    while (!queue_.empty()) {
      const int c = queue_.front();
      queue_.pop_front();
      queued_[c] = 0;
      if (try_two_opt(c) || try_or_opt(c)) enqueue(c);
    }
  }

  // Removes tour edges e1 and e2 (edge i joins order_[i] and order_[i+1]),
  // reconnecting by reversing the enclosed span.
  void apply_two_opt(int e1, int e2) {
    int lo = std::min(e1, e2), hi = std::max(e1, e2);
    std::reverse(order_.begin() + lo + 1, order_.begin() + hi + 1);
    for (int i = lo + 1; i <= hi; ++i) pos_[order_[i]] = i;
  }

  bool try_two_opt(int t1) {
    for (int dir = 0; dir < 2; ++dir) {
      const int t2 = dir == 0 ? succ(t1) : pred(t1);
      const double d12 = inst_->d(t1, t2);
      for (int t3 : neighbors_[t1]) {
        const double d13 = inst_->d(t1, t3);
        if (d13 >= d12) break;  // candidates sorted by distance
        const int t4 = dir == 0 ? succ(t3) : pred(t3);
        if (t3 == t2 || t4 == t1) continue;
        const double gain = d12 + inst_->d(t3, t4) - d13 - inst_->d(t2, t4);
        if (gain > kGainEps) {
          const int e1 = dir == 0 ? pos_[t1] : (pos_[t1] + n_ - 1) % n_;
          const int e2 = dir == 0 ? pos_[t3] : (pos_[t3] + n_ - 1) % n_;
          apply_two_opt(e1, e2);
          length_ -= gain;
          for (int c : {t1, t2, t3, t4}) enqueue(c);
          return true;
        }
      }
    }
    return false;
  }

  // Relocates the 1..3-node segment headed by t1, in either orientation,
  // next to a near neighbor of one of its endpoints.
  bool try_or_opt(int t1) {
    for (int seg_len = 1; seg_len <= 3 && seg_len <= n_ - 3; ++seg_len) {
      const int i = pos_[t1];
      if (i + seg_len > n_) continue;  // segments do not wrap
      const int s_first = order_[i];
      const int s_last = order_[i + seg_len - 1];
      const int p = order_[(i + n_ - 1) % n_];
      const int q = order_[(i + seg_len) % n_];
      if (p == s_last || q == s_first) continue;
      const double removed =
          inst_->d(p, s_first) + inst_->d(s_last, q) - inst_->d(p, q);
      if (removed <= kGainEps) continue;
      for (int side = 0; side < 2; ++side) {
        for (int c : neighbors_[side == 0 ? s_first : s_last]) {
          const int pc = pos_[c];
          if ((pc >= i && pc < i + seg_len) || c == p) continue;
          const int c2 = succ(c);
          const int pc2 = pos_[c2];
          if (pc2 >= i && pc2 < i + seg_len) continue;
          const double base = removed + inst_->d(c, c2);
          const double fwd = base - inst_->d(c, s_first) - inst_->d(s_last, c2);
          const double rev = base - inst_->d(c, s_last) - inst_->d(s_first, c2);
          const bool reversed = rev > fwd;
          const double gain = reversed ? rev : fwd;
          if (gain > kGainEps) {
            apply_or_opt(i, seg_len, c, reversed);
            length_ -= gain;
            for (int v : {p, q, c, c2, s_first, s_last}) enqueue(v);
            return true;
          }
        }
      }
    }
    return false;
  }

  void apply_or_opt(int i, int seg_len, int c, bool reversed) {
    std::vector<int> seg(order_.begin() + i, order_.begin() + i + seg_len);
    if (reversed) std::reverse(seg.begin(), seg.end());
    std::vector<int> next;
    next.reserve(n_);
    for (int k = 0; k < n_; ++k) {
      if (k >= i && k < i + seg_len) continue;
      next.push_back(order_[k]);
      if (order_[k] == c) next.insert(next.end(), seg.begin(), seg.end());
    }
    order_ = std::move(next);
    for (int k = 0; k < n_; ++k) pos_[order_[k]] = k;
  }

  const TspInstance* inst_;
  int n_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> order_, pos_;
  std::deque<int> queue_;
  std::vector<std::uint8_t> queued_;
  double length_ = 0.0;
};

}  // namespace detail

/// Multi-restart local search: nearest-neighbor construction, 2-opt and
/// Or-opt to a joint local optimum, then a double-bridge perturbation loop
/// that keeps strict improvements. Deterministic for a fixed (restarts, seed);
/// restart 0 always starts from node 0, later restarts from random nodes.
inline Tour solve_local_search(const TspInstance& inst, int restarts, std::uint64_t seed) {
  if (inst.n < 4)
    throw ValidationError("local search requires n >= 4, got n = " + std::to_string(inst.n));
  if (restarts < 1) throw ValidationError("restarts must be >= 1");
  detail::TourImprover improver(inst);
  std::vector<int> best_order;
  double best_len = std::numeric_limits<double>::infinity();
  const int kicks = 30 + 10 * inst.n;
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 rng(child_seed(seed, static_cast<std::uint64_t>(r)));
    const int start = r == 0 ? 0 : static_cast<int>(rng.next_below(inst.n));
    improver.load(solve_nearest_neighbor(inst, start).order);
    improver.optimize_all();
    std::vector<int> current = improver.order();
    double current_len = improver.length();
    for (int k = 0; k < kicks; ++k) {
      improver.load(current);
      const std::vector<int> joints = improver.double_bridge(rng);
      improver.optimize_dirty(joints);
      if (improver.length() < current_len - detail::kGainEps) {
        current = improver.order();
        current_len = improver.length();
      }
    }
    if (current_len < best_len - detail::kGainEps) {
      best_len = current_len;
      best_order = std::move(current);
    }
  }
  canonicalize(best_order);
  return make_tour(inst, std::move(best_order));
}

// ---------------------------------------------------------------------------
// Reference solutions for datasets
// ---------------------------------------------------------------------------

enum class ReferenceMethod { brute_force, held_karp, local_search, auto_select };

inline ReferenceMethod reference_method_from_string(const std::string& s) {
  if (s == "brute" || s == "brute-force") return ReferenceMethod::brute_force;
  if (s == "held-karp") return ReferenceMethod::held_karp;
  if (s == "local-search") return ReferenceMethod::local_search;
  if (s == "auto") return ReferenceMethod::auto_select;
  throw ValidationError("unknown solver method: \"" + s + "\"");
}

/// Exact methods yield true optimality gaps; local search yields reference
/// gaps against a heuristic baseline.
inline bool reference_is_exact(const std::string& solver_tag) {
  return solver_tag.rfind("brute-force", 0) == 0 || solver_tag.rfind("held-karp", 0) == 0;
}

inline ReferenceSolution solve_reference(const TspInstance& inst, ReferenceMethod method,
                                         int restarts, std::uint64_t seed) {
  ReferenceMethod m = method;
  if (m == ReferenceMethod::auto_select)
    m = inst.n <= 15 ? ReferenceMethod::held_karp : ReferenceMethod::local_search;
  Tour tour;
  std::string tag;
  switch (m) {
    case ReferenceMethod::brute_force:
      tour = solve_brute_force(inst);
      tag = "brute-force";
      break;
    case ReferenceMethod::held_karp:
      tour = solve_held_karp(inst);
      tag = "held-karp";
      break;
    default:
      tour = solve_local_search(inst, restarts, seed);
      tag = "local-search-" + std::to_string(restarts);
      break;
  }
  return {tour.length, std::move(tour.order), std::move(tag)};
}

/// Populates dataset references in parallel; per-instance seeds derive from
/// base_seed so results are independent of the thread count.
inline void compute_references(Dataset& ds, ReferenceMethod method = ReferenceMethod::auto_select,
                               int restarts = 20, std::uint64_t base_seed = 0x5eedULL) {
  ds.optimal.resize(ds.instances.size());
  parallel_for(ds.instances.size(), [&](std::size_t i) {
    ds.optimal[i] = solve_reference(ds.instances[i], method, restarts,
                                    child_seed(base_seed, static_cast<std::uint64_t>(i)));
  });
}

}  // namespace eqctsp
