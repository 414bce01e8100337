#pragma once

#include <vector>

#include "eqctsp/eqc.hpp"
#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/rng.hpp"
#include "eqctsp/statevector.hpp"
#include "eqctsp/tour.hpp"

namespace eqctsp {

/// Partial-tour state. partial_length always includes the closing edge back
/// to node 0, so episode rewards telescope to minus the final tour length.
struct MdpState {
  VisitedFlags unexplored;  // 1 = unexplored
  int current = 0;
  std::vector<int> partial_tour;
  double partial_length = 0.0;
  int unexplored_count = 0;

  bool terminal() const { return unexplored_count == 0; }
};

struct Transition {
  MdpState state;
  int action = -1;
  double reward = 0.0;
  MdpState next;
  bool terminal = false;
};

/// Tours start at node 0; a single visited node has closing length 0.
inline MdpState initial_state(const TspInstance& inst) {
  MdpState st;
  st.unexplored.assign(inst.n, 1);
  st.unexplored[0] = 0;
  st.current = 0;
  st.partial_tour = {0};
  st.partial_length = 0.0;
  st.unexplored_count = inst.n - 1;
  return st;
}

/// Advances the state in place; returns the reward (negative length increase).
inline double apply_step(const TspInstance& inst, MdpState& st, int a) {
  if (a < 0 || a >= inst.n) throw InvalidActionError("action out of range: " + std::to_string(a));
  if (!st.unexplored[a])
    throw InvalidActionError("node " + std::to_string(a) + " was already visited");
  const double path = st.partial_length - inst.d(st.current, 0);
  const double next_length = path + inst.d(st.current, a) + inst.d(a, 0);
  const double reward = st.partial_length - next_length;
  st.unexplored[a] = 0;
  --st.unexplored_count;
  st.partial_tour.push_back(a);
  st.current = a;
  st.partial_length = next_length;
  return reward;
}

/// Deterministic transition record (spec-level operation).
inline Transition step(const TspInstance& inst, const MdpState& state, int a) {
  Transition tr;
  tr.state = state;
  tr.action = a;
  tr.next = state;
  tr.reward = apply_step(inst, tr.next, a);
  tr.terminal = tr.next.terminal();
  return tr;
}

inline int first_unexplored(const MdpState& st) {
  for (std::size_t i = 0; i < st.unexplored.size(); ++i)
    if (st.unexplored[i]) return static_cast<int>(i);
  throw InvalidActionError("no unexplored node remains");
}

/// Depth-1 policy backed by the closed form.
class ClosedFormPolicy {
 public:
  ClosedFormPolicy(const TspInstance& inst, const EqcParams& p)
      : ctx_(inst, p.gamma), sigma_(sign_of(sin_pi(p.beta))) {}

  int select(const MdpState& st) const {
    return select_greedy(ctx_, st.unexplored, st.current, sigma_);
  }

  const PolicyContext& context() const { return ctx_; }
  int sigma() const { return sigma_; }

 private:
  PolicyContext ctx_;
  int sigma_;
};

/// Depth-p policy backed by the statevector oracle (n <= 12). One simulation
/// per state scores every candidate action.
class DepthOraclePolicy {
 public:
  DepthOraclePolicy(const TspInstance& inst, DepthParams params)
      : inst_(&inst), params_(std::move(params)) {}

  int select(const MdpState& st) const {
    const StateVector sv = simulate_eqc(*inst_, st.unexplored, params_);
    int best = -1;
    double best_q = 0.0;
    for (int a = 0; a < inst_->n; ++a) {
      if (!st.unexplored[a] || a == st.current) continue;
      const double q = inst_->d(st.current, a) * expectation_zz(sv, st.current, a);
      if (best < 0 || q > best_q) {
        best = a;
        best_q = q;
      }
    }
    if (best < 0) throw InvalidActionError("no unexplored action available");
    return best;
  }

  const DepthParams& params() const { return params_; }

 private:
  const TspInstance* inst_;
  DepthParams params_;
};

/// Greedy episode: argmax action each step; the last remaining node is taken
/// without scoring (no competing action exists).
template <class Policy>
Tour greedy_rollout(const TspInstance& inst, const Policy& policy) {
  MdpState st = initial_state(inst);
  while (!st.terminal()) {
    const int a = st.unexplored_count == 1 ? first_unexplored(st) : policy.select(st);
    apply_step(inst, st, a);
  }
  return make_tour(inst, std::move(st.partial_tour));
}

inline Tour greedy_rollout(const TspInstance& inst, const EqcParams& p) {
  return greedy_rollout(inst, ClosedFormPolicy(inst, p));
}

/// Epsilon-greedy episode returning the full transition sequence for replay.
/// Deterministic for a fixed seed; the forced final move is still recorded.
template <class Policy>
std::vector<Transition> epsilon_greedy_rollout(const TspInstance& inst, const Policy& policy,
                                               double epsilon, std::uint64_t seed) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw ValidationError("epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  SplitMix64 rng(seed);
  std::vector<Transition> episode;
  MdpState st = initial_state(inst);
  while (!st.terminal()) {
    int a;
    if (st.unexplored_count == 1) {
      a = first_unexplored(st);
    } else if (rng.next_double() < epsilon) {
      int pick = static_cast<int>(rng.next_below(st.unexplored_count));
      a = -1;
      for (int i = 0; i < inst.n; ++i) {
        if (!st.unexplored[i]) continue;
        if (pick-- == 0) {
          a = i;
          break;
        }
      }
    } else {
      a = policy.select(st);
    }
    Transition tr = step(inst, st, a);
    st = tr.next;
    episode.push_back(std::move(tr));
  }
  return episode;
}

inline std::vector<Transition> epsilon_greedy_rollout(const TspInstance& inst, const EqcParams& p,
                                                      double epsilon, std::uint64_t seed) {
  return epsilon_greedy_rollout(inst, ClosedFormPolicy(inst, p), epsilon, seed);
}

}  // namespace eqctsp
