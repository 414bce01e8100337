#pragma once

#include <chrono>
#include <cstdio>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eqctsp/analysis.hpp"
#include "eqctsp/dataset_io.hpp"
#include "eqctsp/manifest.hpp"
#include "eqctsp/parallel.hpp"
#include "eqctsp/report_io.hpp"
#include "eqctsp/rl.hpp"
#include "eqctsp/sigs.hpp"
#include "eqctsp/solvers.hpp"
#include "eqctsp/verify.hpp"
#include "eqctsp/version.hpp"

namespace eqctsp::cli {

namespace detail {

inline std::pair<int, int> parse_size_range(const std::string& s) {
  const auto dots = s.find("..");
  if (dots == std::string::npos) {
    const int n = std::stoi(s);
    return {n, n};
  }
  return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
}

/// "start:step:count" -> explicit grid values.
inline std::vector<double> parse_grid(const std::string& s) {
  double start = 0.0, step = 0.0;
  int count = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d", &start, &step, &count) != 3 || count < 1 ||
      step <= 0.0)
    throw ValidationError("grid must be start:step:count with positive step, got \"" + s + "\"");
  std::vector<double> grid(count);
  for (int i = 0; i < count; ++i) grid[i] = start + i * step;
  return grid;
}

inline Dataset load_dataset_with_refs(const std::string& path, const std::string& refs_path) {
  Dataset ds = load_dataset(path);
  if (!refs_path.empty()) attach_references(ds, load_solutions(refs_path));
  return ds;
}

class PhaseTimer {
 public:
  explicit PhaseTimer(RunManifest& m) : manifest_(&m) {}
  template <typename F>
  auto run(const std::string& phase, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      manifest_->wall_seconds[phase] = std::chrono::duration<double>(
          std::chrono::steady_clock::now() - t0).count();
    } else {
      auto result = fn();
      manifest_->wall_seconds[phase] = std::chrono::duration<double>(
          std::chrono::steady_clock::now() - t0).count();
      return result;
    }
  }

 private:
  RunManifest* manifest_;
};

inline RunManifest make_manifest(const std::string& command, int argc,
                                 const char* const* argv) {
  RunManifest m;
  m.command = command;
  for (int i = 0; i < argc; ++i) m.args.emplace_back(argv[i]);
  return m;
}

}  // namespace detail

/// Entry point behind the binary: parses argv, runs one subcommand.
/// Exit codes: 0 success, 1 usage error, 2 runtime error.
inline int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Closed-form depth-1 pair-ansatz policies for Euclidean TSP: dataset "
               "generation, reference solvers, grid-search and Q-learning training, "
               "statevector verification, and analysis data emitters"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "worker threads (default: EQC_TSP_THREADS or hardware concurrency)");

  std::function<void()> job;

  // ---- gen ----------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("gen", "generate a seeded dataset of TSP instances");
  struct {
    int size = 10;
    int count = 100;
    std::uint64_t seed = 42;
    std::string out;
    std::string role = "train";
    double rescale = 0.0;
    std::string refs = "none";
    int restarts = 20;
  } gen;
  gen_cmd->add_option("--size", gen.size, "nodes per instance")->required();
  gen_cmd->add_option("--count", gen.count, "number of instances")->required();
  gen_cmd->add_option("--seed", gen.seed, "dataset seed")->required();
  gen_cmd->add_option("--out", gen.out, "output dataset JSON")->required();
  gen_cmd->add_option("--role", gen.role, "train|validation|test");
  gen_cmd->add_option("--rescale-max-edge", gen.rescale,
                      "rescale distances so the longest edge equals this value");
  gen_cmd->add_option("--refs", gen.refs,
                      "attach reference tours: none|auto|brute|held-karp|local-search");
  gen_cmd->add_option("--restarts", gen.restarts, "local-search restarts when --refs uses it");
  gen_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("gen", argc, argv);
      detail::PhaseTimer timer(manifest);
      Dataset ds = timer.run("generate", [&] {
        Dataset d = generate(gen.size, gen.count, gen.seed, dataset_role_from_string(gen.role));
        if (gen.rescale > 0.0) rescale_to_max_edge(d, gen.rescale);
        return d;
      });
      if (gen.refs != "none") {
        timer.run("references", [&] {
          compute_references(ds, reference_method_from_string(gen.refs), gen.restarts,
                             child_seed(gen.seed, 0xFEED));
        });
      }
      timer.run("write", [&] { save_dataset(ds, gen.out); });
      manifest.add_output(gen.out);
      manifest.write(gen.out);
    };
  });

  // ---- solve --------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "compute reference tours for a dataset");
  struct {
    std::string method;
    int restarts = 20;
    std::string in, out;
    std::uint64_t seed = 1905;
  } solve;
  solve_cmd->add_option("--method", solve.method, "brute|held-karp|local-search|auto")->required();
  solve_cmd->add_option("--restarts", solve.restarts, "restarts for local search");
  solve_cmd->add_option("--in", solve.in, "input dataset JSON")->required();
  solve_cmd->add_option("--out", solve.out, "output solutions JSON")->required();
  solve_cmd->add_option("--seed", solve.seed, "seed for the local-search restarts");
  solve_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("solve", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset ds = timer.run("load", [&] { return load_dataset(solve.in); });
      const ReferenceMethod method = reference_method_from_string(solve.method);
      std::vector<ReferenceSolution> sols(ds.size());
      timer.run("solve", [&] {
        parallel_for(ds.size(), [&](std::size_t i) {
          sols[i] = solve_reference(ds.instances[i], method, solve.restarts,
                                    child_seed(solve.seed, i));
        });
      });
      timer.run("write", [&] { save_solutions(sols, solve.out); });
      manifest.add_output(solve.out);
      manifest.write(solve.out);
    };
  });

  // ---- sigs ---------------------------------------------------------------
  auto* sigs_cmd = app.add_subcommand("sigs", "size-invariant grid search over gamma");
  struct {
    std::string val, test, val_refs, test_refs, out, csv;
    double beta = 1.01;
    double grid_start = 0.1, grid_step = 0.1;
    int grid_count = 16;
    double refine = 0.0;
  } sg;
  sigs_cmd->add_option("--val", sg.val, "validation dataset JSON")->required();
  sigs_cmd->add_option("--test", sg.test, "test dataset JSON")->required();
  sigs_cmd->add_option("--val-refs", sg.val_refs, "solutions JSON for the validation set");
  sigs_cmd->add_option("--test-refs", sg.test_refs, "solutions JSON for the test set");
  sigs_cmd->add_option("--beta", sg.beta, "fixed beta (must satisfy sin(pi*beta) < 0)");
  sigs_cmd->add_option("--grid-start", sg.grid_start, "first gamma grid point");
  sigs_cmd->add_option("--grid-step", sg.grid_step, "gamma grid spacing");
  sigs_cmd->add_option("--grid-count", sg.grid_count, "number of gamma grid points");
  sigs_cmd->add_option("--refine", sg.refine, "optional coarse-to-fine refinement step");
  sigs_cmd->add_option("--out", sg.out, "output result JSON")->required();
  sigs_cmd->add_option("--csv", sg.csv, "optional per-gamma CSV");
  sigs_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("sigs", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset val = timer.run("load", [&] {
        return detail::load_dataset_with_refs(sg.val, sg.val_refs);
      });
      const Dataset test = detail::load_dataset_with_refs(sg.test, sg.test_refs);
      SigsConfig cfg;
      cfg.beta = sg.beta;
      cfg.grid_start = sg.grid_start;
      cfg.grid_step = sg.grid_step;
      cfg.grid_count = sg.grid_count;
      if (sg.refine > 0.0) cfg.refine = sg.refine;
      const SigsResult res = timer.run("search", [&] { return run_sigs(val, test, cfg); });
      if (res.unsafe_instances > 0)
        std::fprintf(stderr,
                     "warning: %d validation instance(s) have gamma_max inside the grid; "
                     "cosine factors change sign there\n",
                     res.unsafe_instances);
      timer.run("write", [&] {
        write_sigs_json(res, cfg.beta, sg.out);
        if (!sg.csv.empty()) write_sigs_csv(res, sg.csv);
      });
      manifest.add_output(sg.out);
      if (!sg.csv.empty()) manifest.add_output(sg.csv);
      manifest.write(sg.out);
    };
  });

  // ---- rl -----------------------------------------------------------------
  auto* rl_cmd = app.add_subcommand("rl", "Q-learning on the ansatz parameters");
  struct {
    std::string config, train, val, test, out;
    std::string train_refs, val_refs, test_refs;
    std::uint64_t seed = 7;
    int depth = 1;
  } rl;
  rl_cmd->add_option("--config", rl.config, "RL config JSON (defaults when omitted)");
  rl_cmd->add_option("--train", rl.train, "training dataset JSON")->required();
  rl_cmd->add_option("--val", rl.val, "validation dataset JSON")->required();
  rl_cmd->add_option("--test", rl.test, "test dataset JSON")->required();
  rl_cmd->add_option("--val-refs", rl.val_refs, "solutions JSON for the validation set");
  rl_cmd->add_option("--test-refs", rl.test_refs, "solutions JSON for the test set");
  rl_cmd->add_option("--seed", rl.seed, "run seed");
  rl_cmd->add_option("--depth", rl.depth, "ansatz depth (1 = closed form, 2..4 = oracle)");
  rl_cmd->add_option("--out", rl.out, "output result JSON")->required();
  rl_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("rl", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset train_ds = timer.run("load", [&] { return load_dataset(rl.train); });
      const Dataset val = detail::load_dataset_with_refs(rl.val, rl.val_refs);
      const Dataset test = detail::load_dataset_with_refs(rl.test, rl.test_refs);
      const RlConfig cfg = rl.config.empty() ? RlConfig{} : load_rl_config(rl.config);
      timer.run("train", [&] {
        if (rl.depth == 1) {
          const RlResult res = train(train_ds, val, test, cfg, rl.seed);
          write_rl_json(res, rl.out);
        } else {
          const RlDepthResult res = train_depth_p(train_ds, val, test, cfg, rl.seed, rl.depth);
          write_rl_depth_json(res, rl.out);
        }
      });
      manifest.add_output(rl.out);
      manifest.write(rl.out);
    };
  });

  // ---- eval ---------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "gap report of a fixed (gamma, beta) policy");
  struct {
    std::string data, refs, out, csv;
    double gamma = 0.0, beta = 1.01;
  } ev;
  eval_cmd->add_option("--data", ev.data, "dataset JSON")->required();
  eval_cmd->add_option("--refs", ev.refs, "solutions JSON for the dataset");
  eval_cmd->add_option("--gamma", ev.gamma, "policy gamma")->required();
  eval_cmd->add_option("--beta", ev.beta, "policy beta");
  eval_cmd->add_option("--out", ev.out, "output gap JSON")->required();
  eval_cmd->add_option("--csv", ev.csv, "optional per-instance CSV");
  eval_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("eval", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset ds = timer.run("load", [&] {
        return detail::load_dataset_with_refs(ev.data, ev.refs);
      });
      const GapReport rep = timer.run("evaluate", [&] {
        return evaluate_policy(ds, EqcParams{ev.gamma, ev.beta});
      });
      timer.run("write", [&] {
        write_gap_json(rep, ev.out);
        if (!ev.csv.empty()) write_gap_csv(rep, ds, ev.csv);
      });
      manifest.add_output(ev.out);
      if (!ev.csv.empty()) manifest.add_output(ev.csv);
      manifest.write(ev.out);
    };
  });

  // ---- heatmap ------------------------------------------------------------
  auto* heat_cmd = app.add_subcommand("heatmap", "mean-gap matrix over a (gamma, beta) grid");
  struct {
    std::string val, refs, out;
    std::string gammas = "0.1:0.1:16";
    std::string betas = "0.1:0.2:10";
  } hm;
  heat_cmd->add_option("--val", hm.val, "dataset JSON")->required();
  heat_cmd->add_option("--refs", hm.refs, "solutions JSON for the dataset");
  heat_cmd->add_option("--gammas", hm.gammas, "gamma grid start:step:count");
  heat_cmd->add_option("--betas", hm.betas, "beta grid start:step:count");
  heat_cmd->add_option("--out", hm.out, "output CSV (rows beta, columns gamma)")->required();
  heat_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("heatmap", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset ds = timer.run("load", [&] {
        return detail::load_dataset_with_refs(hm.val, hm.refs);
      });
      const auto gammas = detail::parse_grid(hm.gammas);
      const auto betas = detail::parse_grid(hm.betas);
      const HeatmapResult res = timer.run("evaluate", [&] { return heatmap(ds, gammas, betas); });
      timer.run("write", [&] { write_heatmap_csv(res, hm.out); });
      manifest.add_output(hm.out);
      manifest.write(hm.out);
    };
  });

  // ---- pc-rate ------------------------------------------------------------
  auto* pc_cmd = app.add_subcommand("pc-rate",
                                    "policy-critical rate and average margin over a gamma grid");
  struct {
    std::string data, out;
    double delta = 0.01;
    double beta = 1.1;
    std::string grid = "0.1:0.1:63";
    bool rescale = false;
  } pc;
  pc_cmd->add_option("--data", pc.data, "dataset JSON")->required();
  pc_cmd->add_option("--delta", pc.delta, "gamma perturbation");
  pc_cmd->add_option("--beta", pc.beta, "policy beta");
  pc_cmd->add_option("--grid", pc.grid, "gamma grid start:step:count");
  pc_cmd->add_flag("--rescale", pc.rescale, "rescale instances to max edge sqrt(2) first");
  pc_cmd->add_option("--out", pc.out, "output CSV")->required();
  pc_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("pc-rate", argc, argv);
      detail::PhaseTimer timer(manifest);
      Dataset ds = timer.run("load", [&] { return load_dataset(pc.data); });
      if (pc.rescale) rescale_to_max_edge(ds, std::numbers::sqrt2);
      const auto grid = detail::parse_grid(pc.grid);
      const StabilityReport rep = timer.run("evaluate", [&] {
        return pc_rate_and_margin(ds, grid, pc.delta, pc.beta);
      });
      timer.run("write", [&] { write_stability_csv(rep, pc.out); });
      manifest.add_output(pc.out);
      manifest.write(pc.out);
    };
  });

  // ---- policy-vis ---------------------------------------------------------
  auto* vis_cmd = app.add_subcommand(
      "policy-vis", "rank histogram and Q-vs-distance records at a tour position");
  struct {
    std::string data, prefix;
    double gamma = 0.9, beta = 1.1;
    int position = 1;
    bool rescale = false;
  } vis;
  vis_cmd->add_option("--data", vis.data, "dataset JSON")->required();
  vis_cmd->add_option("--gamma", vis.gamma, "policy gamma")->required();
  vis_cmd->add_option("--beta", vis.beta, "policy beta");
  vis_cmd->add_option("--position", vis.position, "1-based tour position");
  vis_cmd->add_flag("--rescale", vis.rescale, "rescale instances to max edge sqrt(2) first");
  vis_cmd->add_option("--out-prefix", vis.prefix,
                      "output prefix; writes <prefix>_ranks.csv and <prefix>_qvals.csv")
      ->required();
  vis_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("policy-vis", argc, argv);
      detail::PhaseTimer timer(manifest);
      Dataset ds = timer.run("load", [&] { return load_dataset(vis.data); });
      if (vis.rescale) rescale_to_max_edge(ds, std::numbers::sqrt2);
      const PolicyProfile prof = timer.run("evaluate", [&] {
        return policy_profile(ds, EqcParams{vis.gamma, vis.beta}, vis.position);
      });
      const std::string ranks = vis.prefix + "_ranks.csv";
      const std::string qvals = vis.prefix + "_qvals.csv";
      timer.run("write", [&] {
        write_rank_histogram_csv(prof.rank_counts, ranks);
        write_scatter_csv(prof.records, qvals);
      });
      manifest.add_output(ranks);
      manifest.add_output(qvals);
      manifest.write(vis.prefix);
    };
  });

  // ---- gamma-transfer -------------------------------------------------------
  auto* gt_cmd = app.add_subcommand(
      "gamma-transfer", "rank histogram of a fixed gamma applied to another size's dataset");
  struct {
    std::string data, out;
    double gamma = 0.9, beta = 1.1;
  } gt;
  gt_cmd->add_option("--data", gt.data, "dataset JSON")->required();
  gt_cmd->add_option("--gamma", gt.gamma, "transferred gamma")->required();
  gt_cmd->add_option("--beta", gt.beta, "policy beta");
  gt_cmd->add_option("--out", gt.out, "output CSV")->required();
  gt_cmd->callback([&] {
    job = [&, argc, argv] {
      RunManifest manifest = detail::make_manifest("gamma-transfer", argc, argv);
      detail::PhaseTimer timer(manifest);
      const Dataset ds = timer.run("load", [&] { return load_dataset(gt.data); });
      const auto counts = timer.run("evaluate", [&] {
        return gamma_transfer(ds, gt.gamma, gt.beta);
      });
      timer.run("write", [&] { write_rank_histogram_csv(counts, gt.out); });
      manifest.add_output(gt.out);
      manifest.write(gt.out);
    };
  });

  // ---- verify ---------------------------------------------------------------
  auto* ver_cmd = app.add_subcommand("verify", "closed form vs statevector oracle");
  struct {
    bool statevector = false;
    std::string sizes = "3..8";
    int samples = 50;
    double tol = 1e-9;
    std::uint64_t seed = 2024;
  } ver;
  ver_cmd->add_flag("--statevector", ver.statevector, "run the statevector equivalence suite");
  ver_cmd->add_option("--sizes", ver.sizes, "size range lo..hi");
  ver_cmd->add_option("--samples", ver.samples, "random tuples per size");
  ver_cmd->add_option("--tol", ver.tol, "max allowed |closed form - oracle|");
  ver_cmd->add_option("--seed", ver.seed, "verification seed");
  ver_cmd->callback([&] {
    job = [&] {
      if (!ver.statevector)
        throw ValidationError("nothing to verify: pass --statevector");
      const auto [lo, hi] = detail::parse_size_range(ver.sizes);
      const VerificationResult res = verify_statevector(lo, hi, ver.samples, ver.tol, ver.seed);
      std::printf("statevector equivalence: %zu tuples, max |deviation| = %.3e (tol %.3e): %s\n",
                  res.tuples, res.max_abs_dev, res.tol, res.passed ? "PASS" : "FAIL");
      if (!res.passed)
        throw Error("statevector verification failed: max deviation exceeds tolerance");
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // help/version exit 0, usage errors exit 1
  }
  if (threads > 0) set_thread_count(threads);
  try {
    job();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}

}  // namespace eqctsp::cli
