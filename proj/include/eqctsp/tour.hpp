#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"

namespace eqctsp {

/// Closed tour: a permutation of 0..n-1 anchored at node 0, plus its length.
struct Tour {
  std::vector<int> order;
  double length = 0.0;
};

inline void validate_permutation(const TspInstance& inst, std::span<const int> order) {
  if (static_cast<int>(order.size()) != inst.n)
    throw InvalidActionError("tour has " + std::to_string(order.size()) + " entries, expected " +
                             std::to_string(inst.n));
  std::vector<bool> seen(inst.n, false);
  for (int v : order) {
    if (v < 0 || v >= inst.n) throw InvalidActionError("tour index out of range: " + std::to_string(v));
    if (seen[v]) throw InvalidActionError("tour repeats node " + std::to_string(v));
    seen[v] = true;
  }
}

/// Length of the closed tour: consecutive edges plus the closing edge.
inline double tour_length(const TspInstance& inst, std::span<const int> order) {
  validate_permutation(inst, order);
  double len = 0.0;
  for (std::size_t i = 0; i + 1 < order.size(); ++i) len += inst.d(order[i], order[i + 1]);
  len += inst.d(order.back(), order.front());
  return len;
}

/// Rotates the cycle so node 0 leads. Preserves orientation and length.
inline void rotate_to_zero(std::vector<int>& order) {
  auto it = std::find(order.begin(), order.end(), 0);
  std::rotate(order.begin(), it, order.end());
}

/// Canonical representative of the cycle: starts at 0, and of the two
/// orientations keeps the one with the smaller second node. Makes equal-optimum
/// solvers return identical orders.
inline void canonicalize(std::vector<int>& order) {
  rotate_to_zero(order);
  if (order.size() > 2 && order[1] > order.back())
    std::reverse(order.begin() + 1, order.end());
}

inline Tour make_tour(const TspInstance& inst, std::vector<int> order) {
  Tour t;
  t.length = tour_length(inst, order);
  t.order = std::move(order);
  return t;
}

}  // namespace eqctsp
