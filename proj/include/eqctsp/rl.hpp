#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "eqctsp/analysis.hpp"
#include "eqctsp/eqc.hpp"
#include "eqctsp/errors.hpp"
#include "eqctsp/instance.hpp"
#include "eqctsp/mdp.hpp"
#include "eqctsp/parallel.hpp"
#include "eqctsp/rng.hpp"
#include "eqctsp/statevector.hpp"

namespace eqctsp {

/// Q-learning configuration, field names mirrored in the JSON config format.
struct RlConfig {
  int max_episodes = 20000;
  double lr = 1e-3;
  int buffer_capacity = 10000;
  int batch_size = 10;
  int train_interval_episodes = 10;
  int target_update_episodes = 30;
  double epsilon_init = 1.0;
  double epsilon_decay = 0.999;  // applied once per episode
  double epsilon_min = 0.01;
  int patience_updates = 50;
  double min_decrease = 0.001;  // improvement threshold on the validation gap
  double discount = 1.0;
  double init_gamma = 1.0;
  double init_beta = 1.0;
  int val_stride = 1;  // validate every val_stride-th update
};

struct ReplayItem {
  const TspInstance* inst = nullptr;
  Transition tr;
};

/// Capacity-bounded ring of transitions; sampling is uniform with replacement
/// over the current contents.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ValidationError("replay buffer capacity must be positive");
  }

  void push(ReplayItem item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);  // oldest-first eviction
      next_ = (next_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  std::vector<ReplayItem> sample(SplitMix64& rng, int count) const {
    if (items_.empty()) throw ValidationError("cannot sample from an empty replay buffer");
    std::vector<ReplayItem> batch;
    batch.reserve(count);
    for (int i = 0; i < count; ++i) batch.push_back(items_[rng.next_below(items_.size())]);
    return batch;
  }

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<ReplayItem> items_;
};

// ---------------------------------------------------------------------------
// Models: closed-form depth 1 and statevector-backed depth p
// ---------------------------------------------------------------------------

/// Depth-1 model evaluated through the closed form, with analytical gradients.
struct ClosedFormModel {
  using Params = EqcParams;
  static constexpr int param_count = 2;

  static double q(const TspInstance& inst, const MdpState& st, int a, const Params& p) {
    return q_value_linear(inst, st.unexplored, st.current, a, p);
  }

  static std::vector<double> q_grad(const TspInstance& inst, const MdpState& st, int a,
                                    const Params& p) {
    const QGradient g = q_gradient(inst, st.unexplored, st.current, a, p);
    return {g.dgamma, g.dbeta};
  }

  static ClosedFormPolicy policy(const TspInstance& inst, const Params& p) {
    return ClosedFormPolicy(inst, p);
  }

  static void sgd_step(Params& p, std::span<const double> grad, double lr) {
    p.gamma -= lr * grad[0];
    p.beta -= lr * grad[1];
  }
};

/// Depth-p model evaluated through the statevector oracle; gradients by
/// central finite differences on every layer parameter.
struct DepthOracleModel {
  int depth = 1;
  double fd_step = 1e-4;

  using Params = DepthParams;

  double q(const TspInstance& inst, const MdpState& st, int a, const Params& p) const {
    return q_value_depth_p(inst, st.unexplored, st.current, a, p);
  }

  std::vector<double> q_grad(const TspInstance& inst, const MdpState& st, int a,
                             const Params& p) const {
    std::vector<double> grad(2 * depth, 0.0);
    Params probe = p;
    for (int l = 0; l < depth; ++l) {
      probe.gammas[l] = p.gammas[l] + fd_step;
      const double up = q(inst, st, a, probe);
      probe.gammas[l] = p.gammas[l] - fd_step;
      const double down = q(inst, st, a, probe);
      probe.gammas[l] = p.gammas[l];
      grad[l] = (up - down) / (2.0 * fd_step);
    }
    for (int l = 0; l < depth; ++l) {
      probe.betas[l] = p.betas[l] + fd_step;
      const double up = q(inst, st, a, probe);
      probe.betas[l] = p.betas[l] - fd_step;
      const double down = q(inst, st, a, probe);
      probe.betas[l] = p.betas[l];
      grad[depth + l] = (up - down) / (2.0 * fd_step);
    }
    return grad;
  }

  DepthOraclePolicy policy(const TspInstance& inst, const Params& p) const {
    return DepthOraclePolicy(inst, p);
  }

  static void sgd_step(Params& p, std::span<const double> grad, double lr) {
    const int depth = p.depth();
    for (int l = 0; l < depth; ++l) p.gammas[l] -= lr * grad[l];
    for (int l = 0; l < depth; ++l) p.betas[l] -= lr * grad[depth + l];
  }
};

// ---------------------------------------------------------------------------
// Temporal-difference loss
// ---------------------------------------------------------------------------

template <typename Params>
struct TdStep {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean squared TD error over the batch with gradients through the behavior
/// Q only; targets y = r + discount * max_a' Q_target(s', a') are constants
/// (y = r on terminal transitions).
template <class Model>
TdStep<typename Model::Params> td_loss_and_grad(const Model& model,
                                                std::span<const ReplayItem> batch,
                                                const typename Model::Params& behavior,
                                                const typename Model::Params& target,
                                                double discount) {
  if (batch.empty()) throw ValidationError("TD loss requires a nonempty batch");
  TdStep<typename Model::Params> out;
  std::size_t grad_size = 0;
  for (const auto& item : batch) {
    const TspInstance& inst = *item.inst;
    const Transition& tr = item.tr;
    const double qb = model.q(inst, tr.state, tr.action, behavior);
    double y = tr.reward;
    if (!tr.terminal) {
      double best = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < inst.n; ++a) {
        if (!tr.next.unexplored[a] || a == tr.next.current) continue;
        best = std::max(best, model.q(inst, tr.next, a, target));
      }
      y += discount * best;
    }
    const double diff = qb - y;
    out.loss += diff * diff;
    const std::vector<double> g = model.q_grad(inst, tr.state, tr.action, behavior);
    if (out.grad.empty()) {
      out.grad.assign(g.size(), 0.0);
      grad_size = g.size();
    }
    for (std::size_t k = 0; k < grad_size; ++k) out.grad[k] += 2.0 * diff * g[k];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  out.loss *= inv;
  for (auto& g : out.grad) g *= inv;
  return out;
}

/// Convenience entry point matching the depth-1 surface.
inline std::pair<double, QGradient> td_loss_and_grad(std::span<const ReplayItem> batch,
                                                     const EqcParams& behavior,
                                                     const EqcParams& target, double discount) {
  const auto step = td_loss_and_grad(ClosedFormModel{}, batch, behavior, target, discount);
  return {step.loss, QGradient{step.grad[0], step.grad[1]}};
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct RlTimings {
  double episode_seconds = 0.0;
  double train_seconds = 0.0;
  double validation_seconds = 0.0;
  double test_seconds = 0.0;
};

template <typename Params>
struct RlResultT {
  Params final_params{};
  int episodes = 0;
  int updates = 0;
  bool early_stopped = false;
  double best_val_gap = std::numeric_limits<double>::infinity();
  std::vector<double> validation_curve;  // one entry per validated update
  GapReport test;
  RlTimings timing;
};

using RlResult = RlResultT<EqcParams>;
using RlDepthResult = RlResultT<DepthParams>;

namespace detail {

template <class Model>
double greedy_mean_gap(const Model& model, const Dataset& ds,
                       const typename Model::Params& params) {
  const auto refs = reference_lengths(ds);
  std::vector<double> gaps(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto policy = model.policy(ds.instances[i], params);
    gaps[i] = greedy_rollout(ds.instances[i], policy).length / refs[i];
  });
  double sum = 0.0;
  for (double g : gaps) sum += g;
  return sum / static_cast<double>(ds.size());
}

template <class Model>
GapReport greedy_gap_report(const Model& model, const Dataset& ds,
                            const typename Model::Params& params) {
  const auto refs = reference_lengths(ds);
  std::vector<double> lengths(ds.size());
  parallel_for(ds.size(), [&](std::size_t i) {
    const auto policy = model.policy(ds.instances[i], params);
    lengths[i] = greedy_rollout(ds.instances[i], policy).length;
  });
  return gap_report(lengths, refs, dataset_provenance(ds));
}

/// One train step every train_interval episodes, a hard target copy every
/// target_update episodes (after the train step when both fall due), a
/// validation pass per update, and early stopping once the validation gap
/// fails to improve by min_decrease for patience_updates consecutive updates.
/// Returns the best-validation parameters, not the last ones.
template <class Model>
RlResultT<typename Model::Params> train_impl(const Model& model,
                                             typename Model::Params initial,
                                             const Dataset& train_ds, const Dataset& val,
                                             const Dataset& test, const RlConfig& cfg,
                                             std::uint64_t seed) {
  if (train_ds.instances.empty()) throw ValidationError("training set is empty");
  if (!val.has_references() || !test.has_references())
    throw ValidationError("RL training requires reference lengths on validation and test sets");
  using clock = std::chrono::steady_clock;
  RlResultT<typename Model::Params> res;
  typename Model::Params behavior = initial;
  typename Model::Params target = initial;
  typename Model::Params best = initial;

  ReplayBuffer buffer(static_cast<std::size_t>(cfg.buffer_capacity));
  SplitMix64 pick_rng(child_seed(seed, 1));
  SplitMix64 sample_rng(child_seed(seed, 2));
  double epsilon = cfg.epsilon_init;
  int stall = 0;

  for (int ep = 1; ep <= cfg.max_episodes; ++ep) {
    const auto t_ep = clock::now();
    const TspInstance& inst = train_ds.instances[pick_rng.next_below(train_ds.size())];
    const auto policy = model.policy(inst, behavior);
    auto episode = epsilon_greedy_rollout(inst, policy, epsilon, child_seed(seed, 1000 + ep));
    for (auto& tr : episode) buffer.push({&inst, std::move(tr)});
    res.episodes = ep;
    epsilon = std::max(cfg.epsilon_min, epsilon * cfg.epsilon_decay);
    res.timing.episode_seconds += std::chrono::duration<double>(clock::now() - t_ep).count();

    bool stop = false;
    if (ep % cfg.train_interval_episodes == 0) {
      const auto t_train = clock::now();
      const auto batch = buffer.sample(sample_rng, cfg.batch_size);
      const auto step = td_loss_and_grad(model, batch, behavior, target, cfg.discount);
      Model::sgd_step(behavior, step.grad, cfg.lr);
      ++res.updates;
      res.timing.train_seconds += std::chrono::duration<double>(clock::now() - t_train).count();

      if (res.updates % cfg.val_stride == 0) {
        const auto t_val = clock::now();
        const double gap = greedy_mean_gap(model, val, behavior);
        res.validation_curve.push_back(gap);
        res.timing.validation_seconds +=
            std::chrono::duration<double>(clock::now() - t_val).count();
        if (gap < res.best_val_gap - cfg.min_decrease) {
          res.best_val_gap = gap;
          best = behavior;
          stall = 0;
        } else if (++stall >= cfg.patience_updates) {
          stop = true;
        }
      }
    }
    if (ep % cfg.target_update_episodes == 0) target = behavior;
    if (stop) {
      res.early_stopped = true;
      break;
    }
  }

  res.final_params = std::isfinite(res.best_val_gap) ? best : behavior;
  const auto t_test = clock::now();
  res.test = greedy_gap_report(model, test, res.final_params);
  res.timing.test_seconds += std::chrono::duration<double>(clock::now() - t_test).count();
  return res;
}

}  // namespace detail

/// Depth-1 Q-learning on (gamma, beta) through the closed form.
inline RlResult train(const Dataset& train_ds, const Dataset& val, const Dataset& test,
                      const RlConfig& cfg, std::uint64_t seed) {
  return detail::train_impl(ClosedFormModel{}, EqcParams{cfg.init_gamma, cfg.init_beta}, train_ds,
                            val, test, cfg, seed);
}

/// Depth-p Q-learning through the statevector oracle (n <= 10, p <= 4).
inline RlDepthResult train_depth_p(const Dataset& train_ds, const Dataset& val,
                                   const Dataset& test, const RlConfig& cfg, std::uint64_t seed,
                                   int depth) {
  if (depth < 1 || depth > 4)
    throw SizeLimitError("oracle-backed training supports depth 1..4, got " +
                         std::to_string(depth));
  if (train_ds.n > 10)
    throw SizeLimitError("oracle-backed training supports n <= 10, got n = " +
                         std::to_string(train_ds.n));
  DepthOracleModel model;
  model.depth = depth;
  return detail::train_impl(model, DepthParams::uniform(depth, cfg.init_gamma, cfg.init_beta),
                            train_ds, val, test, cfg, seed);
}

}  // namespace eqctsp
