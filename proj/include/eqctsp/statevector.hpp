#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "eqctsp/eqc.hpp"
#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"

namespace eqctsp {

/// Per-layer parameter sequences for a depth-p ansatz.
struct DepthParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  int depth() const { return static_cast<int>(gammas.size()); }

  static DepthParams uniform(int p, double gamma, double beta) {
    DepthParams d;
    d.gammas.assign(p, gamma);
    d.betas.assign(p, beta);
    return d;
  }

  static DepthParams from_depth1(const EqcParams& p) { return uniform(1, p.gamma, p.beta); }
};

inline constexpr int kMaxOracleQubits = 12;

/// Dense statevector over n qubits; qubit i is bit i of the basis index.
///
/// Gate conventions, frozen project-wide: ZZ(theta) = exp(-i*(theta/2)*Z(x)Z)
/// and Rx(theta) = exp(-i*(theta/2)*X). Under these half-angle conventions the
/// depth-1 pair expectation reproduces the closed form in eqc.hpp exactly
/// (checked against the two-qubit case, where the product term is empty).
class StateVector {
 public:
  explicit StateVector(int n_qubits)
      : n_(n_qubits), amps_(std::size_t{1} << n_qubits, {0.0, 0.0}) {
    if (n_qubits < 1 || n_qubits > kMaxOracleQubits)
      throw SizeLimitError("statevector supports 1.." + std::to_string(kMaxOracleQubits) +
                           " qubits, got " + std::to_string(n_qubits));
    amps_[0] = {1.0, 0.0};
  }

  int qubits() const { return n_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amps_; }

  void apply_hadamard(int q) {
    constexpr double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * step) {
      for (std::size_t i = base; i < base + step; ++i) {
        const auto a0 = amps_[i];
        const auto a1 = amps_[i + step];
        amps_[i] = (a0 + a1) * inv_sqrt2;
        amps_[i + step] = (a0 - a1) * inv_sqrt2;
      }
    }
  }

  void apply_hadamard_all() {
    for (int q = 0; q < n_; ++q) apply_hadamard(q);
  }

  /// exp(-i*(theta/2)*X) on qubit q.
  void apply_rx(int q, double theta) {
    const double c = std::cos(theta / 2.0);
    const std::complex<double> ms{0.0, -std::sin(theta / 2.0)};
    const std::size_t step = std::size_t{1} << q;
    for (std::size_t base = 0; base < amps_.size(); base += 2 * step) {
      for (std::size_t i = base; i < base + step; ++i) {
        const auto a0 = amps_[i];
        const auto a1 = amps_[i + step];
        amps_[i] = c * a0 + ms * a1;
        amps_[i + step] = ms * a0 + c * a1;
      }
    }
  }

  /// exp(-i*(theta/2)*Z(x)Z) on qubits (q1, q2): diagonal phase, e^{-i theta/2}
  /// on aligned bits and e^{+i theta/2} on anti-aligned bits.
  void apply_zz(int q1, int q2, double theta) {
    const std::complex<double> same{std::cos(theta / 2.0), -std::sin(theta / 2.0)};
    const std::complex<double> diff = std::conj(same);
    const std::size_t m1 = std::size_t{1} << q1;
    const std::size_t m2 = std::size_t{1} << q2;
    for (std::size_t b = 0; b < amps_.size(); ++b) {
      const bool aligned = ((b & m1) != 0) == ((b & m2) != 0);
      amps_[b] *= aligned ? same : diff;
    }
  }

  double norm() const {
    double s = 0.0;
    for (const auto& a : amps_) s += std::norm(a);
    return std::sqrt(s);
  }

 private:
  int n_;
  std::vector<std::complex<double>> amps_;
};

/// Full circuit: H on every qubit, then per layer l the pair rotations
/// ZZ(gamma_l*e_ij) on all i<j followed by mixers Rx(s_i*beta_l), where
/// s_i = pi for unexplored nodes and 0 (identity) for visited ones.
inline StateVector simulate_eqc(const TspInstance& inst, const VisitedFlags& unexplored,
                                const DepthParams& params) {
  if (inst.n > kMaxOracleQubits)
    throw SizeLimitError("statevector oracle is limited to n <= " +
                         std::to_string(kMaxOracleQubits) + ", got n = " + std::to_string(inst.n));
  if (params.gammas.size() != params.betas.size() || params.gammas.empty())
    throw ValidationError("depth parameters must provide equal nonzero counts of gammas/betas");
  if (static_cast<int>(unexplored.size()) != inst.n)
    throw ValidationError("visited-flag vector size does not match the instance");

  StateVector sv(inst.n);
  sv.apply_hadamard_all();
  for (int layer = 0; layer < params.depth(); ++layer) {
    const double gamma = params.gammas[layer];
    const double beta = params.betas[layer];
    for (int i = 0; i < inst.n; ++i)
      for (int j = i + 1; j < inst.n; ++j) sv.apply_zz(i, j, gamma * inst.e(i, j));
    for (int i = 0; i < inst.n; ++i) {
      if (!unexplored[i]) continue;  // Rx(0) is the identity
      sv.apply_rx(i, std::numbers::pi * beta);
    }
  }
  return sv;
}

/// <Z_t Z_a>: sum of |amplitude|^2 signed by the parity of bits t and a.
inline double expectation_zz(const StateVector& sv, int t, int a) {
  if (t == a) throw InvalidActionError("pair observable requires two distinct qubits");
  if (t < 0 || a < 0 || t >= sv.qubits() || a >= sv.qubits())
    throw InvalidActionError("qubit index out of range");
  const std::size_t mt = std::size_t{1} << t;
  const std::size_t ma = std::size_t{1} << a;
  const auto& amps = sv.amplitudes();
  double value = 0.0;
  for (std::size_t b = 0; b < amps.size(); ++b) {
    const bool aligned = ((b & mt) != 0) == ((b & ma) != 0);
    const double p = std::norm(amps[b]);
    value += aligned ? p : -p;
  }
  return value;
}

/// Depth-p action value Q = d_ta * <Z_t Z_a> by direct simulation.
inline double q_value_depth_p(const TspInstance& inst, const VisitedFlags& unexplored, int t, int a,
                              const DepthParams& params) {
  detail::check_state_action(inst, unexplored, t, a);
  const StateVector sv = simulate_eqc(inst, unexplored, params);
  return inst.d(t, a) * expectation_zz(sv, t, a);
}

}  // namespace eqctsp
