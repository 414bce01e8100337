#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/signed_log.hpp"

namespace eqctsp {

/// The two shared parameters of one ansatz layer: gamma scales the pair
/// rotations ZZ(gamma*e_ij), beta scales the single-qubit mixers Rx(s_i*beta).
struct EqcParams {
  double gamma = 0.0;
  double beta = 0.0;
};

/// Per-node visited flags; 1 = unexplored (mixer angle pi), 0 = visited.
using VisitedFlags = std::vector<std::uint8_t>;

/// sin(pi*x) with explicit reduction so integer x yields exactly 0.
inline double sin_pi(double x) {
  const double k = std::nearbyint(x);
  const double r = x - k;  // in [-0.5, 0.5]
  const double s = std::sin(std::numbers::pi * r);
  const bool odd = std::fmod(std::fabs(k), 2.0) == 1.0;
  return odd ? -s : s;
}

/// cos(pi*x); exactly 0 at half-integer x.
inline double cos_pi(double x) { return sin_pi(x + 0.5); }

inline int sign_of(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

namespace detail {

inline void check_state_action(const TspInstance& inst, const VisitedFlags& unexplored, int t,
                               int a) {
  if (t < 0 || t >= inst.n || a < 0 || a >= inst.n)
    throw InvalidActionError("node index out of range");
  if (a == t) throw InvalidActionError("action equals the current node");
  if (static_cast<int>(unexplored.size()) != inst.n)
    throw InvalidActionError("visited-flag vector size does not match the instance");
  if (!unexplored[a]) throw InvalidActionError("action node is already explored");
  if (unexplored[t]) throw InvalidActionError("current node is marked unexplored");
}

// Cosine factors cos(gamma*e_ak) for k != t, a. Sorted before accumulation so
// the result is invariant under node relabeling, bit for bit.
inline void collect_cos_factors(const TspInstance& inst, double gamma, int t, int a,
                                std::vector<double>& out) {
  out.clear();
  out.reserve(inst.n);
  for (int k = 0; k < inst.n; ++k) {
    if (k == t || k == a) continue;
    out.push_back(std::cos(gamma * inst.e(a, k)));
  }
  std::sort(out.begin(), out.end());
}

}  // namespace detail

/// Pair expectation of the depth-1 ansatz in closed form:
///   sin(pi*beta) * sin(gamma*e_ta) * prod_{k != t,a} cos(gamma*e_ak).
/// The product may equivalently run over k != t, since the k = a factor is
/// cos(gamma*e_aa) = cos(0) = 1. Result lies in [-1, 1].
inline double zz_expectation(const TspInstance& inst, const VisitedFlags& unexplored, int t, int a,
                             const EqcParams& p) {
  detail::check_state_action(inst, unexplored, t, a);
  double prod = 1.0;
  std::vector<double> factors;
  detail::collect_cos_factors(inst, p.gamma, t, a, factors);
  for (double f : factors) prod *= f;
  return sin_pi(p.beta) * std::sin(p.gamma * inst.e(t, a)) * prod;
}

/// Action value Q = d_ta * <Z_t Z_a>, in signed-log form. Any exactly-zero
/// factor yields sign 0 rather than -inf arithmetic.
inline SignedLogValue q_value(const TspInstance& inst, const VisitedFlags& unexplored, int t, int a,
                              const EqcParams& p) {
  detail::check_state_action(inst, unexplored, t, a);
  const double d = inst.d(t, a);
  const double sin_beta = sin_pi(p.beta);
  const double sin_edge = std::sin(p.gamma * inst.e(t, a));
  if (d == 0.0 || sin_beta == 0.0 || sin_edge == 0.0) return SignedLogValue::zero();

  std::vector<double> factors;
  detail::collect_cos_factors(inst, p.gamma, t, a, factors);
  int sign = sign_of(sin_beta) * sign_of(sin_edge);
  std::vector<double> logs;
  logs.reserve(factors.size());
  for (double f : factors) {
    if (f == 0.0) return SignedLogValue::zero();
    if (f < 0.0) sign = -sign;
    logs.push_back(std::log(std::fabs(f)));
  }
  std::sort(logs.begin(), logs.end());
  double log_mag = std::log(d) + std::log(std::fabs(sin_beta)) + std::log(std::fabs(sin_edge));
  for (double l : logs) log_mag += l;
  return {sign, log_mag};
}

/// Linear-domain Q; underflows to 0 once the cosine product drops below
/// double range (expected for large n at moderate gamma).
inline double q_value_linear(const TspInstance& inst, const VisitedFlags& unexplored, int t, int a,
                             const EqcParams& p) {
  return inst.d(t, a) * zz_expectation(inst, unexplored, t, a, p);
}

struct QGradient {
  double dgamma = 0.0;
  double dbeta = 0.0;
};

/// Analytical partials of Q with respect to (gamma, beta). Linear-domain;
/// intended for trainable sizes where the cosine product is representable.
inline QGradient q_gradient(const TspInstance& inst, const VisitedFlags& unexplored, int t, int a,
                            const EqcParams& p) {
  detail::check_state_action(inst, unexplored, t, a);
  const double d = inst.d(t, a);
  const double e_ta = inst.e(t, a);
  const double sin_beta = sin_pi(p.beta);
  const double cos_beta = cos_pi(p.beta);
  const double sin_edge = std::sin(p.gamma * e_ta);
  const double cos_edge = std::cos(p.gamma * e_ta);

  // Leave-one-out products via prefix/suffix, no division.
  std::vector<double> cosk, ek;
  cosk.reserve(inst.n);
  ek.reserve(inst.n);
  for (int k = 0; k < inst.n; ++k) {
    if (k == t || k == a) continue;
    ek.push_back(inst.e(a, k));
    cosk.push_back(std::cos(p.gamma * inst.e(a, k)));
  }
  const std::size_t m = cosk.size();
  std::vector<double> prefix(m + 1, 1.0), suffix(m + 1, 1.0);
  for (std::size_t i = 0; i < m; ++i) prefix[i + 1] = prefix[i] * cosk[i];
  for (std::size_t i = m; i > 0; --i) suffix[i - 1] = suffix[i] * cosk[i - 1];
  const double prod = prefix[m];

  double sum_loo = 0.0;  // sum_k e_ak * sin(gamma*e_ak) * prod_{j != k} cos
  for (std::size_t i = 0; i < m; ++i)
    sum_loo += ek[i] * std::sin(p.gamma * ek[i]) * prefix[i] * suffix[i + 1];

  QGradient g;
  g.dbeta = d * std::numbers::pi * cos_beta * sin_edge * prod;
  g.dgamma = d * sin_beta * (e_ta * cos_edge * prod - sin_edge * sum_loo);
  return g;
}

/// Largest gamma keeping every cos(gamma*e_ij) strictly positive:
/// (pi/2) / max_{i<j} e_ij.
inline double gamma_max(const TspInstance& inst) {
  double max_e = 0.0;
  for (int i = 0; i < inst.n; ++i)
    for (int j = i + 1; j < inst.n; ++j) max_e = std::max(max_e, inst.e(i, j));
  if (max_e == 0.0)
    throw ValidationError("degenerate instance: all edge weights are zero");
  return (std::numbers::pi / 2.0) / max_e;
}

struct QTableEntry {
  int action = -1;
  SignedLogValue q;
  double d_ta = 0.0;
  double e_ta = 0.0;
};

/// Q-values of every unexplored action from (state, t), ordered by action index.
struct QTable {
  int current = -1;
  std::vector<QTableEntry> entries;
};

inline QTable build_qtable(const TspInstance& inst, const VisitedFlags& unexplored, int t,
                           const EqcParams& p) {
  QTable table;
  table.current = t;
  for (int a = 0; a < inst.n; ++a) {
    if (!unexplored[a] || a == t) continue;
    table.entries.push_back({a, q_value(inst, unexplored, t, a, p), inst.d(t, a), inst.e(t, a)});
  }
  return table;
}

/// Maximal-Q action; ties resolved to the lowest action index. Sign-0 values
/// order above any negative value, matching linear-domain comparison.
inline int qtable_argmax(const QTable& table) {
  if (table.entries.empty()) throw InvalidActionError("no unexplored action available");
  const QTableEntry* best = &table.entries.front();
  for (const auto& e : table.entries)
    if (value_less(best->q, e.q)) best = &e;
  return best->action;
}

/// Per-(instance, gamma) cache for greedy rollouts. Builds the full cosine
/// matrix once, then scores any (t, a) pair in O(1):
///   R(t,a) = d_ta * sin(gamma*e_ta) * prod_{k != t,a} cos(gamma*e_ak)
/// via the all-k product with the k = t factor divided back out in log space.
/// R deliberately excludes the sin(pi*beta) factor: it is common to every
/// action, so the argmax only needs R and the sign of sin(pi*beta). Keeping it
/// out makes policies bitwise identical across beta values of equal sign.
class PolicyContext {
 public:
  PolicyContext(const TspInstance& inst, double gamma)
      : inst_(&inst), gamma_(gamma), n_(inst.n) {
    const std::size_t n = static_cast<std::size_t>(n_);
    cos_.resize(n * n, 1.0);
    log_sum_.assign(n, 0.0);
    negatives_.assign(n, 0);
    zeros_.assign(n, 0);
    for (int a = 0; a < n_; ++a) {
      for (int k = 0; k < n_; ++k) {
        if (k == a) continue;
        const double c = std::cos(gamma * inst.e(a, k));
        cos_[n * a + k] = c;
        if (c == 0.0)
          ++zeros_[a];
        else {
          if (c < 0.0) ++negatives_[a];
          log_sum_[a] += std::log(std::fabs(c));
        }
      }
    }
  }

  const TspInstance& instance() const { return *inst_; }
  double gamma() const { return gamma_; }

  SignedLogValue score(int t, int a) const {
    const double d = inst_->d(t, a);
    if (d == 0.0) return SignedLogValue::zero();
    const double sin_edge = std::sin(gamma_ * inst_->e(t, a));
    if (sin_edge == 0.0) return SignedLogValue::zero();
    const double c_at = cos_[static_cast<std::size_t>(n_) * a + t];
    const int zeros = zeros_[a] - (c_at == 0.0 ? 1 : 0);
    if (zeros > 0) return SignedLogValue::zero();
    const int negs = negatives_[a] - (c_at < 0.0 ? 1 : 0);
    int sign = sign_of(sin_edge) * ((negs & 1) ? -1 : 1);
    double log_mag = std::log(d) + std::log(std::fabs(sin_edge)) + log_sum_[a];
    if (c_at != 0.0) log_mag -= std::log(std::fabs(c_at));
    return {sign, log_mag};
  }

  /// Full Q including the mixer factor, for reporting.
  SignedLogValue q(int t, int a, double beta) const {
    const double sb = sin_pi(beta);
    if (sb == 0.0) return SignedLogValue::zero();
    SignedLogValue r = score(t, a);
    if (r.is_zero()) return r;
    return {r.sign * sign_of(sb), r.log_mag + std::log(std::fabs(sb))};
  }

 private:
  const TspInstance* inst_;
  double gamma_;
  int n_;
  std::vector<double> cos_;
  std::vector<double> log_sum_;
  std::vector<int> negatives_;
  std::vector<int> zeros_;
};

/// Greedy action under Q = sigma*|sin(pi*beta)|*R: maximizes sigma*R over
/// unexplored actions, ties to the lowest index. sigma = 0 (integer beta)
/// leaves all Q equal, so the lowest-index unexplored node is returned.
inline int select_greedy(const PolicyContext& ctx, const VisitedFlags& unexplored, int t,
                         int sigma) {
  int best = -1;
  SignedLogValue best_score;
  const int n = ctx.instance().n;
  for (int a = 0; a < n; ++a) {
    if (!unexplored[a] || a == t) continue;
    if (best < 0) {
      best = a;
      if (sigma == 0) return best;
      best_score = ctx.score(t, a);
      continue;
    }
    const SignedLogValue s = ctx.score(t, a);
    const bool better = sigma > 0 ? value_less(best_score, s) : value_less(s, best_score);
    if (better) {
      best = a;
      best_score = s;
    }
  }
  if (best < 0) throw InvalidActionError("no unexplored action available");
  return best;
}

}  // namespace eqctsp
