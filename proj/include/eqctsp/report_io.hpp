#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "eqctsp/analysis.hpp"
#include "eqctsp/dataset_io.hpp"
#include "eqctsp/rl.hpp"
#include "eqctsp/sigs.hpp"

namespace eqctsp {

namespace detail {
inline std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write output file: " + path.string());
  return out;
}
}  // namespace detail

// All CSV emitters write a single header line followed by data rows; doubles
// use round-trip-exact decimal encoding.

inline void write_heatmap_csv(const HeatmapResult& hm, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "beta\\gamma";
  for (double g : hm.gammas) out << ',' << encode_double(g);
  out << '\n';
  for (std::size_t b = 0; b < hm.betas.size(); ++b) {
    out << encode_double(hm.betas[b]);
    for (double cell : hm.rows[b]) out << ',' << encode_double(cell);
    out << '\n';
  }
}

inline void write_stability_csv(const StabilityReport& rep, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "gamma,pc_rate,avg_margin,flips,counted_steps,delta,beta\n";
  for (std::size_t g = 0; g < rep.gammas.size(); ++g) {
    out << encode_double(rep.gammas[g]) << ',' << encode_double(rep.pc_rate[g]) << ','
        << encode_double(rep.avg_margin[g]) << ',' << rep.flips[g] << ',' << rep.counted_steps
        << ',' << encode_double(rep.delta) << ',' << encode_double(rep.beta) << '\n';
  }
}

inline void write_rank_histogram_csv(const std::vector<std::uint64_t>& counts,
                                     const std::filesystem::path& path) {
  std::uint64_t total = 0;
  for (auto c : counts) total += c;
  auto out = detail::open_out(path);
  out << "rank,count,frequency\n";
  for (std::size_t r = 0; r < counts.size(); ++r)
    out << (r + 1) << ',' << counts[r] << ','
        << encode_double(total ? static_cast<double>(counts[r]) / total : 0.0) << '\n';
}

inline void write_scatter_csv(const std::vector<ScatterRecord>& records,
                              const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "d,q,q_sign,q_log_magnitude,linear_representable,selected\n";
  for (const auto& r : records) {
    out << encode_double(r.d) << ',' << encode_double(r.q_linear) << ',' << r.q_sign << ','
        << encode_double(r.q_log_mag) << ',' << (r.linear_ok ? 1 : 0) << ','
        << (r.selected ? 1 : 0) << '\n';
  }
}

inline void write_gap_csv(const GapReport& rep, const Dataset& ds,
                          const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "index,instance_id,gap\n";
  for (std::size_t i = 0; i < rep.per_instance.size(); ++i)
    out << i << ',' << ds.instances[i].id << ',' << encode_double(rep.per_instance[i]) << '\n';
}

inline ordered_json gap_report_to_json(const GapReport& rep) {
  ordered_json j;
  j["mean"] = rep.mean;
  j["worst"] = rep.worst;
  j["best"] = rep.best;
  j["reference"] = to_string(rep.provenance);
  j["per_instance"] = rep.per_instance;
  return j;
}

inline void write_gap_json(const GapReport& rep, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << gap_report_to_json(rep).dump(1) << '\n';
}

inline void write_sigs_csv(const SigsResult& res, const std::filesystem::path& path) {
  auto out = detail::open_out(path);
  out << "gamma,mean_val_gap,phase\n";
  for (const auto& p : res.per_gamma)
    out << encode_double(p.gamma) << ',' << encode_double(p.mean_gap) << ','
        << (p.refined ? "refine" : "coarse") << '\n';
}

inline void write_sigs_json(const SigsResult& res, double beta,
                            const std::filesystem::path& path) {
  ordered_json j;
  j["gamma_star"] = res.gamma_star;
  j["coarse_gamma_star"] = res.coarse_gamma_star;
  j["beta"] = beta;
  ordered_json grid = ordered_json::array();
  for (const auto& p : res.per_gamma)
    grid.push_back({{"gamma", p.gamma},
                    {"mean_val_gap", p.mean_gap},
                    {"phase", p.refined ? "refine" : "coarse"}});
  j["per_gamma"] = std::move(grid);
  j["test"] = gap_report_to_json(res.test);
  j["unsafe_instances"] = res.unsafe_instances;
  j["val_seconds"] = res.val_seconds;
  j["test_seconds"] = res.test_seconds;
  auto out = detail::open_out(path);
  out << j.dump(1) << '\n';
}

inline void write_rl_json(const RlResult& res, const std::filesystem::path& path) {
  ordered_json j;
  j["gamma"] = res.final_params.gamma;
  j["beta"] = res.final_params.beta;
  j["episodes"] = res.episodes;
  j["updates"] = res.updates;
  j["early_stopped"] = res.early_stopped;
  j["best_val_gap"] = res.best_val_gap;
  j["validation_curve"] = res.validation_curve;
  j["test"] = gap_report_to_json(res.test);
  j["timing"] = {{"episode_seconds", res.timing.episode_seconds},
                 {"train_seconds", res.timing.train_seconds},
                 {"validation_seconds", res.timing.validation_seconds},
                 {"test_seconds", res.timing.test_seconds}};
  auto out = detail::open_out(path);
  out << j.dump(1) << '\n';
}

inline void write_rl_depth_json(const RlDepthResult& res, const std::filesystem::path& path) {
  ordered_json j;
  j["gammas"] = res.final_params.gammas;
  j["betas"] = res.final_params.betas;
  j["episodes"] = res.episodes;
  j["updates"] = res.updates;
  j["early_stopped"] = res.early_stopped;
  j["best_val_gap"] = res.best_val_gap;
  j["validation_curve"] = res.validation_curve;
  j["test"] = gap_report_to_json(res.test);
  j["timing"] = {{"episode_seconds", res.timing.episode_seconds},
                 {"train_seconds", res.timing.train_seconds},
                 {"validation_seconds", res.timing.validation_seconds},
                 {"test_seconds", res.timing.test_seconds}};
  auto out = detail::open_out(path);
  out << j.dump(1) << '\n';
}

inline RlConfig load_rl_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open RL config: " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("file " + path.string() + ": " + e.what());
  }
  RlConfig cfg;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j[key].get<std::decay_t<decltype(field)>>();
  };
  get("max_episodes", cfg.max_episodes);
  get("lr", cfg.lr);
  get("buffer_capacity", cfg.buffer_capacity);
  get("batch_size", cfg.batch_size);
  get("train_interval_episodes", cfg.train_interval_episodes);
  get("target_update_episodes", cfg.target_update_episodes);
  get("epsilon_init", cfg.epsilon_init);
  get("epsilon_decay", cfg.epsilon_decay);
  get("epsilon_min", cfg.epsilon_min);
  get("patience_updates", cfg.patience_updates);
  get("min_decrease", cfg.min_decrease);
  get("discount", cfg.discount);
  get("init_gamma", cfg.init_gamma);
  get("init_beta", cfg.init_beta);
  get("val_stride", cfg.val_stride);
  return cfg;
}

}  // namespace eqctsp
