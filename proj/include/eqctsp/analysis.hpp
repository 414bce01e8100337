#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eqctsp/eqc.hpp"
#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/mdp.hpp"
#include "eqctsp/parallel.hpp"
#include "eqctsp/solvers.hpp"

namespace eqctsp {

enum class ReferenceProvenance { exact, heuristic };

/// Per-instance optimality gaps heuristic/reference with mean, worst (max)
/// and best (min) aggregates. Gaps below 1 are possible only against
/// heuristic references, which the provenance flag records.
struct GapReport {
  std::vector<double> per_instance;
  double mean = 0.0;
  double worst = 0.0;
  double best = 0.0;
  ReferenceProvenance provenance = ReferenceProvenance::exact;
};

inline const char* to_string(ReferenceProvenance p) {
  return p == ReferenceProvenance::exact ? "exact" : "heuristic";
}

inline ReferenceProvenance dataset_provenance(const Dataset& ds) {
  for (const auto& ref : ds.optimal)
    if (!reference_is_exact(ref.solver)) return ReferenceProvenance::heuristic;
  return ReferenceProvenance::exact;
}

inline GapReport gap_report(std::span<const double> lengths, std::span<const double> references,
                            ReferenceProvenance provenance = ReferenceProvenance::exact) {
  if (lengths.size() != references.size())
    throw ValidationError("gap report requires equally many lengths and references");
  if (lengths.empty()) throw ValidationError("gap report requires at least one instance");
  GapReport r;
  r.provenance = provenance;
  r.per_instance.reserve(lengths.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(references[i] > 0.0))
      throw ValidationError("reference length must be positive at index " + std::to_string(i));
    r.per_instance.push_back(lengths[i] / references[i]);
    sum += r.per_instance.back();
  }
  r.mean = sum / static_cast<double>(lengths.size());
  r.worst = *std::max_element(r.per_instance.begin(), r.per_instance.end());
  r.best = *std::min_element(r.per_instance.begin(), r.per_instance.end());
  return r;
}

/// Greedy-policy tour lengths over a dataset, in instance order.
inline std::vector<double> rollout_lengths(const Dataset& ds, const EqcParams& params) {
  std::vector<double> lengths(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    lengths[i] = greedy_rollout(ds.instances[i], params).length;
  });
  return lengths;
}

inline std::vector<double> reference_lengths(const Dataset& ds) {
  if (!ds.has_references())
    throw ValidationError("dataset carries no reference lengths");
  std::vector<double> refs(ds.optimal.size());
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i] = ds.optimal[i].length;
  return refs;
}

/// Mean/worst/best gap of the greedy policy against dataset references.
inline GapReport evaluate_policy(const Dataset& ds, const EqcParams& params) {
  const auto lengths = rollout_lengths(ds, params);
  const auto refs = reference_lengths(ds);
  return gap_report(lengths, refs, dataset_provenance(ds));
}

inline double mean_gap(const Dataset& ds, const EqcParams& params) {
  return evaluate_policy(ds, params).mean;
}

// ---------------------------------------------------------------------------
// (gamma, beta) heatmap
// ---------------------------------------------------------------------------

/// Mean-gap matrix with one row per beta and one column per gamma.
struct HeatmapResult {
  std::vector<double> gammas;
  std::vector<double> betas;
  std::vector<std::vector<double>> rows;  // rows[b][g]
};

inline HeatmapResult heatmap(const Dataset& val, std::span<const double> gammas,
                             std::span<const double> betas) {
  if (!val.has_references()) throw ValidationError("heatmap requires reference lengths");
  const auto refs = reference_lengths(val);
  HeatmapResult res;
  res.gammas.assign(gammas.begin(), gammas.end());
  res.betas.assign(betas.begin(), betas.end());
  res.rows.assign(betas.size(), std::vector<double>(gammas.size(), 0.0));
  const std::size_t cells = gammas.size() * betas.size();
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t b = cell / gammas.size();
    const std::size_t g = cell % gammas.size();
    const EqcParams p{gammas[g], betas[b]};
    double sum = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i)
      sum += greedy_rollout(val.instances[i], p).length / refs[i];
    res.rows[b][g] = sum / static_cast<double>(val.size());
  });
  return res;
}

// ---------------------------------------------------------------------------
// Policy-critical rate and average margin
// ---------------------------------------------------------------------------

/// Stability of the greedy argmax along a gamma grid: the rate at which a
/// +-delta perturbation of gamma flips the chosen action, and the mean
/// absolute difference of the top-two Q-values. Only steps with at least two
/// unexplored nodes count; the rate normalizer includes one count per
/// perturbation direction (factor 2), the margin normalizer does not.
struct StabilityReport {
  std::vector<double> gammas;
  std::vector<double> pc_rate;
  std::vector<double> avg_margin;
  std::vector<std::uint64_t> flips;
  std::uint64_t counted_steps = 0;  // per gamma: instances * (n - 2)
  double delta = 0.0;
  double beta = 0.0;
};

inline StabilityReport pc_rate_and_margin(const Dataset& ds, std::span<const double> gammas,
                                          double delta, double beta) {
  if (!(delta > 0.0)) throw ValidationError("perturbation delta must be positive");
  if (ds.n < 3) throw ValidationError("stability study requires n >= 3");
  StabilityReport rep;
  rep.gammas.assign(gammas.begin(), gammas.end());
  rep.delta = delta;
  rep.beta = beta;
  const int sigma = sign_of(sin_pi(beta));
  const std::size_t count = gammas.size() * ds.size();
  std::vector<std::uint64_t> flips(count, 0);
  std::vector<double> margins(count, 0.0);
  parallel_for(count, [&](std::size_t slot) {
    const std::size_t g = slot / ds.size();
    const std::size_t i = slot % ds.size();
    const TspInstance& inst = ds.instances[i];
    const double gamma = gammas[g];
    const PolicyContext ctx(inst, gamma);
    const PolicyContext ctx_lo(inst, gamma - delta);
    const PolicyContext ctx_hi(inst, gamma + delta);
    MdpState st = initial_state(inst);
    std::uint64_t f = 0;
    double margin_sum = 0.0;
    while (st.unexplored_count >= 2) {
      const int a0 = select_greedy(ctx, st.unexplored, st.current, sigma);
      if (select_greedy(ctx_lo, st.unexplored, st.current, sigma) != a0) ++f;
      if (select_greedy(ctx_hi, st.unexplored, st.current, sigma) != a0) ++f;
      // top-two |Q| margin in the linear domain
      SignedLogValue top1, top2;
      bool have1 = false, have2 = false;
      for (int a = 0; a < inst.n; ++a) {
        if (!st.unexplored[a] || a == st.current) continue;
        const SignedLogValue q = ctx.q(st.current, a, beta);
        if (!have1 || value_less(top1, q)) {
          top2 = top1;
          have2 = have1;
          top1 = q;
          have1 = true;
        } else if (!have2 || value_less(top2, q)) {
          top2 = q;
          have2 = true;
        }
      }
      if (have2) margin_sum += std::fabs(top1.to_linear() - top2.to_linear());
      apply_step(inst, st, a0);
    }
    flips[slot] = f;
    margins[slot] = margin_sum;
  });
  const std::uint64_t steps_per_gamma =
      static_cast<std::uint64_t>(ds.size()) * static_cast<std::uint64_t>(ds.n - 2);
  rep.counted_steps = steps_per_gamma;
  rep.pc_rate.resize(gammas.size());
  rep.avg_margin.resize(gammas.size());
  rep.flips.resize(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    std::uint64_t f = 0;
    double m = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      f += flips[g * ds.size() + i];
      m += margins[g * ds.size() + i];
    }
    rep.flips[g] = f;
    rep.pc_rate[g] = static_cast<double>(f) / (2.0 * static_cast<double>(steps_per_gamma));
    rep.avg_margin[g] = m / static_cast<double>(steps_per_gamma);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Policy visualization data
// ---------------------------------------------------------------------------

struct ScatterRecord {
  double d = 0.0;        // distance from the current node to the candidate
  double q_linear = 0.0; // 0 when not representable in double range
  int q_sign = 0;
  double q_log_mag = 0.0;
  bool linear_ok = true;
  bool selected = false;
};

/// Nearest-neighbor-rank histogram and Q-vs-distance records at a fixed tour
/// position (1-based; position 1 is the first decision from node 0).
struct PolicyProfile {
  std::vector<std::uint64_t> rank_counts;  // rank_counts[r-1] = times rank r chosen
  std::vector<ScatterRecord> records;
};

inline PolicyProfile policy_profile(const Dataset& ds, const EqcParams& params, int position) {
  if (position < 1 || position > ds.n - 2)
    throw ValidationError("tour position must lie in [1, n-2], got " + std::to_string(position));
  PolicyProfile prof;
  prof.rank_counts.assign(ds.n - 1, 0);
  std::vector<PolicyProfile> parts(ds.size());
  const int sigma = sign_of(sin_pi(params.beta));
  parallel_for(ds.size(), [&](std::size_t i) {
    const TspInstance& inst = ds.instances[i];
    const PolicyContext ctx(inst, params.gamma);
    MdpState st = initial_state(inst);
    for (int s = 1; s < position; ++s)
      apply_step(inst, st, select_greedy(ctx, st.unexplored, st.current, sigma));
    const int chosen = select_greedy(ctx, st.unexplored, st.current, sigma);
    const double d_sel = inst.d(st.current, chosen);
    int rank = 1;
    PolicyProfile& part = parts[i];
    for (int a = 0; a < inst.n; ++a) {
      if (!st.unexplored[a] || a == st.current) continue;
      const double d = inst.d(st.current, a);
      if (a != chosen && (d < d_sel || (d == d_sel && a < chosen))) ++rank;
      const SignedLogValue q = ctx.q(st.current, a, params.beta);
      ScatterRecord rec;
      rec.d = d;
      rec.q_sign = q.sign;
      rec.q_log_mag = q.log_mag;
      rec.linear_ok = q.is_zero() || std::fabs(q.log_mag) < 700.0;
      rec.q_linear = rec.linear_ok ? q.to_linear() : 0.0;
      rec.selected = (a == chosen);
      part.records.push_back(rec);
    }
    part.rank_counts.assign(ds.n - 1, 0);
    part.rank_counts[rank - 1] = 1;
  });
  for (const auto& part : parts) {
    for (std::size_t r = 0; r < part.rank_counts.size(); ++r)
      prof.rank_counts[r] += part.rank_counts[r];
    prof.records.insert(prof.records.end(), part.records.begin(), part.records.end());
  }
  return prof;
}

/// Rank histogram at position 1 for a fixed gamma: the cross-size transfer
/// comparison data (e.g. the small-instance optimum applied to a larger size).
inline std::vector<std::uint64_t> gamma_transfer(const Dataset& ds, double gamma, double beta) {
  return policy_profile(ds, EqcParams{gamma, beta}, 1).rank_counts;
}

}  // namespace eqctsp
