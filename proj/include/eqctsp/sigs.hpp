#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "eqctsp/analysis.hpp"
#include "eqctsp/eqc.hpp"
#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/mdp.hpp"
#include "eqctsp/parallel.hpp"

namespace eqctsp {

/// Grid search over gamma with beta held fixed in the sin(pi*beta) < 0 band.
/// The defaults place all 16 grid points inside [0.1, 1.7), which stays below
/// gamma_max for unit-square instances (max edge <= sqrt(2) implies
/// gamma_max >= 1.644), so every cosine factor remains strictly positive.
struct SigsConfig {
  double beta = 1.01;
  double grid_start = 0.1;
  double grid_step = 0.1;
  int grid_count = 16;
  std::optional<double> refine;  // optional coarse-to-fine step
};

struct SigsPoint {
  double gamma = 0.0;
  double mean_gap = 0.0;
  bool refined = false;
};

struct SigsResult {
  double gamma_star = 0.0;
  double coarse_gamma_star = 0.0;  // differs from gamma_star only when refining
  std::vector<SigsPoint> per_gamma;
  GapReport test;
  int unsafe_instances = 0;  // validation instances with gamma_max below the grid top
  double val_seconds = 0.0;
  double test_seconds = 0.0;
};

inline void validate_sigs_beta(double beta) {
  if (!(sin_pi(beta) < 0.0))
    throw ValidationError(
        "beta=" + std::to_string(beta) +
        " has sin(pi*beta) >= 0; with all cosine factors positive such a policy ranks distant "
        "nodes above near ones and cannot be optimal — choose beta with sin(pi*beta) < 0, "
        "e.g. any beta in (1, 2)");
}

namespace detail {

/// Validation mean gap at each gamma; (gamma, instance) pairs evaluated in
/// parallel with a deterministic index-ordered reduction.
inline std::vector<double> mean_gaps_over_grid(const Dataset& val,
                                               const std::vector<double>& gammas, double beta) {
  const auto refs = reference_lengths(val);
  std::vector<double> gaps(gammas.size() * val.size());
  parallel_for(gaps.size(), [&](std::size_t slot) {
    const std::size_t g = slot / val.size();
    const std::size_t i = slot % val.size();
    gaps[slot] =
        greedy_rollout(val.instances[i], EqcParams{gammas[g], beta}).length / refs[i];
  });
  std::vector<double> means(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    double sum = 0.0;
    for (std::size_t i = 0; i < val.size(); ++i) sum += gaps[g * val.size() + i];
    means[g] = sum / static_cast<double>(val.size());
  }
  return means;
}

inline std::size_t argmin_tie_smallest(const std::vector<double>& gammas,
                                       const std::vector<double>& means) {
  std::size_t best = 0;
  for (std::size_t g = 1; g < means.size(); ++g)
    if (means[g] < means[best] || (means[g] == means[best] && gammas[g] < gammas[best]))
      best = g;
  return best;
}

}  // namespace detail

/// Selects gamma by validation mean gap (ties to the smaller gamma), then
/// reports test-set metrics once at the selection. With `refine` set, a second
/// pass searches [gamma* - step, gamma* + step] at the finer spacing first.
inline SigsResult run_sigs(const Dataset& val, const Dataset& test, const SigsConfig& cfg) {
  validate_sigs_beta(cfg.beta);
  if (!(cfg.grid_start > 0.0) || !(cfg.grid_step > 0.0) || cfg.grid_count < 1)
    throw ValidationError("grid start/step must be positive and count >= 1");
  if (!val.has_references() || !test.has_references())
    throw ValidationError("SIGS requires reference lengths on both validation and test sets");

  using clock = std::chrono::steady_clock;
  SigsResult res;

  std::vector<double> grid(cfg.grid_count);
  for (int g = 0; g < cfg.grid_count; ++g) grid[g] = cfg.grid_start + g * cfg.grid_step;

  for (const auto& inst : val.instances)
    if (gamma_max(inst) <= grid.back()) ++res.unsafe_instances;

  const auto t0 = clock::now();
  const auto coarse_means = detail::mean_gaps_over_grid(val, grid, cfg.beta);
  for (std::size_t g = 0; g < grid.size(); ++g)
    res.per_gamma.push_back({grid[g], coarse_means[g], false});
  const std::size_t coarse_best = detail::argmin_tie_smallest(grid, coarse_means);
  res.coarse_gamma_star = grid[coarse_best];
  res.gamma_star = res.coarse_gamma_star;

  if (cfg.refine) {
    if (!(*cfg.refine > 0.0) || *cfg.refine >= cfg.grid_step)
      throw ValidationError("refine step must be positive and finer than the grid step");
    std::vector<double> fine;
    const double lo = res.coarse_gamma_star - cfg.grid_step;
    const double hi = res.coarse_gamma_star + cfg.grid_step;
    for (int k = 0;; ++k) {
      const double g = lo + k * *cfg.refine;
      if (g > hi + 1e-12) break;
      if (g > 0.0) fine.push_back(g);
    }
    const auto fine_means = detail::mean_gaps_over_grid(val, fine, cfg.beta);
    for (std::size_t g = 0; g < fine.size(); ++g)
      res.per_gamma.push_back({fine[g], fine_means[g], true});
    const std::size_t fine_best = detail::argmin_tie_smallest(fine, fine_means);
    res.gamma_star = fine[fine_best];
  }
  res.val_seconds = std::chrono::duration<double>(clock::now() - t0).count();

  const auto t1 = clock::now();
  res.test = evaluate_policy(test, EqcParams{res.gamma_star, cfg.beta});
  res.test_seconds = std::chrono::duration<double>(clock::now() - t1).count();
  return res;
}

// ---------------------------------------------------------------------------
// Grid-discretization error bound
// ---------------------------------------------------------------------------

/// Discretization error of a coarse grid search measured against a finer
/// proxy grid, with the bracketing bound
///   0 <= eps <= min{ f(gamma-) - f(gamma~), f(gamma+) - f(gamma~) }
/// where gamma+- are the coarse points around the fine-grid minimizer gamma~.
struct DiscretizationReport {
  double gamma_sigs = 0.0;   // coarse-grid minimizer
  double f_sigs = 0.0;       // its mean gap (fine-map value)
  double gamma_tilde = 0.0;  // fine-grid proxy minimizer
  double f_tilde = 0.0;
  double epsilon = 0.0;  // f_sigs - f_tilde
  double bracket_low = 0.0, bracket_high = 0.0;
  double bound = 0.0;
  bool holds = false;
};

inline DiscretizationReport discretization_bound(std::vector<SigsPoint> fine,
                                                 std::vector<SigsPoint> coarse) {
  if (fine.empty() || coarse.empty())
    throw ValidationError("discretization bound requires nonempty grids");
  auto by_gamma = [](const SigsPoint& a, const SigsPoint& b) { return a.gamma < b.gamma; };
  std::sort(fine.begin(), fine.end(), by_gamma);
  std::sort(coarse.begin(), coarse.end(), by_gamma);

  auto fine_value_at = [&](double gamma) {
    for (const auto& p : fine)
      if (std::fabs(p.gamma - gamma) <= 1e-12) return p.mean_gap;
    throw ValidationError("misaligned grids: coarse point " + std::to_string(gamma) +
                          " is absent from the fine grid");
  };

  DiscretizationReport rep;
  const SigsPoint* coarse_min = &coarse.front();
  for (const auto& p : coarse)
    if (p.mean_gap < coarse_min->mean_gap) coarse_min = &p;
  const SigsPoint* fine_min = &fine.front();
  for (const auto& p : fine)
    if (p.mean_gap < fine_min->mean_gap) fine_min = &p;

  rep.gamma_sigs = coarse_min->gamma;
  rep.f_sigs = fine_value_at(coarse_min->gamma);
  rep.gamma_tilde = fine_min->gamma;
  rep.f_tilde = fine_min->mean_gap;
  rep.epsilon = rep.f_sigs - rep.f_tilde;

  // Coarse points bracketing the proxy minimizer.
  const SigsPoint* lo = nullptr;
  const SigsPoint* hi = nullptr;
  for (const auto& p : coarse) {
    if (p.gamma <= rep.gamma_tilde + 1e-12) lo = &p;
    if (p.gamma >= rep.gamma_tilde - 1e-12 && !hi) hi = &p;
  }
  double bound = std::numeric_limits<double>::infinity();
  if (lo) {
    rep.bracket_low = lo->gamma;
    bound = std::min(bound, fine_value_at(lo->gamma) - rep.f_tilde);
  }
  if (hi) {
    rep.bracket_high = hi->gamma;
    bound = std::min(bound, fine_value_at(hi->gamma) - rep.f_tilde);
  }
  if (!lo && !hi)
    throw ValidationError("fine minimizer lies outside the coarse grid range");
  rep.bound = bound;
  rep.holds = rep.epsilon >= -1e-12 && rep.epsilon <= rep.bound + 1e-12;
  return rep;
}

/// Fine-grid evaluation helper for the discretization study: mean validation
/// gap at every gamma in [start, stop] with the given step.
inline std::vector<SigsPoint> evaluate_gamma_grid(const Dataset& val, double beta, double start,
                                                  double step, double stop) {
  validate_sigs_beta(beta);
  std::vector<double> gammas;
  for (int k = 0;; ++k) {
    const double g = start + k * step;
    if (g > stop + 1e-12) break;
    gammas.push_back(g);
  }
  const auto means = detail::mean_gaps_over_grid(val, gammas, beta);
  std::vector<SigsPoint> points(gammas.size());
  for (std::size_t i = 0; i < gammas.size(); ++i) points[i] = {gammas[i], means[i], false};
  return points;
}

// ---------------------------------------------------------------------------
// Selected gamma across sizes
// ---------------------------------------------------------------------------

struct SizedSplit {
  int n = 0;
  const Dataset* val = nullptr;
  const Dataset* test = nullptr;
};

/// gamma* per instance size (the scaling-trend curve).
inline std::vector<std::pair<int, double>> gamma_trend(const std::vector<SizedSplit>& splits,
                                                       const SigsConfig& cfg) {
  std::vector<std::pair<int, double>> out;
  out.reserve(splits.size());
  for (const auto& s : splits) {
    const SigsResult r = run_sigs(*s.val, *s.test, cfg);
    out.emplace_back(s.n, r.gamma_star);
  }
  return out;
}

}  // namespace eqctsp
