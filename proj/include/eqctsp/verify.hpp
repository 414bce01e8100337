#pragma once

#include <cmath>
#include <cstdint>

#include "eqctsp/eqc.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/mdp.hpp"
#include "eqctsp/rng.hpp"
#include "eqctsp/statevector.hpp"

namespace eqctsp {

/// Random mid-episode state: a uniformly chosen visited prefix of random
/// length in [1, n-1], current node = last visited.
inline MdpState random_partial_state(const TspInstance& inst, SplitMix64& rng) {
  MdpState st = initial_state(inst);
  const int steps = static_cast<int>(rng.next_below(inst.n - 1));  // 0..n-2 extra moves
  for (int s = 0; s < steps; ++s) {
    int pick = static_cast<int>(rng.next_below(st.unexplored_count));
    for (int a = 0; a < inst.n; ++a) {
      if (!st.unexplored[a]) continue;
      if (pick-- == 0) {
        apply_step(inst, st, a);
        break;
      }
    }
  }
  return st;
}

struct VerificationResult {
  double max_abs_dev = 0.0;
  std::size_t tuples = 0;
  double tol = 0.0;
  bool passed = false;
};

/// Cross-checks the closed-form pair expectation against the statevector
/// oracle on random (instance, state, action, gamma, beta) tuples per size.
inline VerificationResult verify_statevector(int n_lo, int n_hi, int samples_per_n, double tol,
                                             std::uint64_t seed) {
  if (n_lo < 2 || n_hi < n_lo || n_hi > kMaxOracleQubits)
    throw ValidationError("verification sizes must satisfy 2 <= lo <= hi <= " +
                          std::to_string(kMaxOracleQubits));
  VerificationResult res;
  res.tol = tol;
  std::uint64_t k = 0;
  for (int n = n_lo; n <= n_hi; ++n) {
    for (int s = 0; s < samples_per_n; ++s, ++k) {
      SplitMix64 rng(child_seed(seed, k));
      const TspInstance inst = generate_instance(n, rng.next_u64(), "verify");
      MdpState st = random_partial_state(inst, rng);
      if (st.unexplored_count == 0) st = initial_state(inst);
      int pick = static_cast<int>(rng.next_below(st.unexplored_count));
      int action = -1;
      for (int a = 0; a < inst.n; ++a) {
        if (!st.unexplored[a]) continue;
        if (pick-- == 0) {
          action = a;
          break;
        }
      }
      const EqcParams p{rng.next_double() * 2.0 * std::numbers::pi, rng.next_double() * 2.0};
      const double closed = zz_expectation(inst, st.unexplored, st.current, action, p);
      const StateVector sv = simulate_eqc(inst, st.unexplored, DepthParams::from_depth1(p));
      const double oracle = expectation_zz(sv, st.current, action);
      res.max_abs_dev = std::max(res.max_abs_dev, std::fabs(closed - oracle));
      ++res.tuples;
    }
  }
  res.passed = res.max_abs_dev < tol;
  return res;
}

}  // namespace eqctsp
