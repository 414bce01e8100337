#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "eqctsp/errors.hpp"
#include "eqctsp/rng.hpp"

namespace eqctsp {

/// Dense symmetric n×n matrix, row-major.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(int n) : n_(n), v_(static_cast<std::size_t>(n) * n, 0.0) {}

  int size() const { return n_; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i) * n_ + j]; }
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i) * n_ + j]; }
  const std::vector<double>& data() const { return v_; }

  bool operator==(const SquareMatrix&) const = default;

 private:
  int n_ = 0;
  std::vector<double> v_;
};

/// Planar Euclidean TSP instance with precomputed distance matrix d and
/// scaled edge weights e = arctan(d).
struct TspInstance {
  std::string id;
  int n = 0;
  std::uint64_t seed = 0;
  std::optional<double> scale;  // factor applied on top of the raw unit-square draw
  std::vector<std::array<double, 2>> coords;
  SquareMatrix d;
  SquareMatrix e;

  double dist(int i, int j) const { return d(i, j); }
  double edge_weight(int i, int j) const { return e(i, j); }
};

enum class DatasetRole { train, validation, test };

inline const char* to_string(DatasetRole role) {
  switch (role) {
    case DatasetRole::train: return "train";
    case DatasetRole::validation: return "validation";
    case DatasetRole::test: return "test";
  }
  return "train";
}

inline DatasetRole dataset_role_from_string(const std::string& s) {
  if (s == "train") return DatasetRole::train;
  if (s == "validation") return DatasetRole::validation;
  if (s == "test") return DatasetRole::test;
  throw ParseError("unknown dataset role: \"" + s + "\"");
}

/// Reference tour attached to a dataset entry, with solver provenance.
struct ReferenceSolution {
  double length = 0.0;
  std::vector<int> tour;
  std::string solver;
};

struct Dataset {
  DatasetRole role = DatasetRole::train;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<TspInstance> instances;
  std::vector<ReferenceSolution> optimal;  // empty, or one entry per instance

  bool has_references() const { return !optimal.empty(); }
  std::size_t size() const { return instances.size(); }
};

/// Fills d and e from coords. e is elementwise arctan of d.
inline void rebuild_metrics(TspInstance& inst) {
  const int n = inst.n;
  inst.d = SquareMatrix(n);
  inst.e = SquareMatrix(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double dx = inst.coords[i][0] - inst.coords[j][0];
      const double dy = inst.coords[i][1] - inst.coords[j][1];
      const double dist = std::sqrt(dx * dx + dy * dy);
      inst.d(i, j) = inst.d(j, i) = dist;
      const double w = std::atan(dist);
      inst.e(i, j) = inst.e(j, i) = w;
    }
  }
}

inline double max_edge(const TspInstance& inst) {
  double m = 0.0;
  for (int i = 0; i < inst.n; ++i)
    for (int j = i + 1; j < inst.n; ++j) m = std::max(m, inst.d(i, j));
  return m;
}

/// One instance with coordinates drawn uniformly from the unit square.
inline TspInstance generate_instance(int n, std::uint64_t seed, std::string id) {
  TspInstance inst;
  inst.id = std::move(id);
  inst.n = n;
  inst.seed = seed;
  inst.coords.resize(n);
  SplitMix64 rng(seed);
  for (int i = 0; i < n; ++i) {
    inst.coords[i][0] = rng.next_double();
    inst.coords[i][1] = rng.next_double();
  }
  rebuild_metrics(inst);
  return inst;
}

/// Seeded dataset of `count` instances of size n. Per-instance seeds are
/// derived from (seed, index), so generation parallelizes and is
/// byte-reproducible for a fixed argument triple.
inline Dataset generate(int n, int count, std::uint64_t seed,
                        DatasetRole role = DatasetRole::train) {
  if (n < 2) throw ValidationError("instance size must be at least 2, got " + std::to_string(n));
  if (count < 1) throw ValidationError("instance count must be at least 1");
  Dataset ds;
  ds.role = role;
  ds.seed = seed;
  ds.n = n;
  ds.instances.resize(count);
  for (int i = 0; i < count; ++i) {
    const std::uint64_t inst_seed = child_seed(seed, static_cast<std::uint64_t>(i));
    char id[64];
    std::snprintf(id, sizeof(id), "n%d-s%llu-i%06d", n,
                  static_cast<unsigned long long>(seed), i);
    ds.instances[i] = generate_instance(n, inst_seed, id);
  }
  return ds;
}

/// Uniformly rescales distances so the longest edge equals `target`,
/// recording the applied factor in the instance metadata.
inline TspInstance rescale_to_max_edge(const TspInstance& inst, double target) {
  if (target <= 0.0) throw ValidationError("rescale target must be positive");
  const double m = max_edge(inst);
  if (m == 0.0) throw ValidationError("degenerate instance: all pairwise distances are zero");
  const double factor = target / m;
  TspInstance out = inst;
  for (auto& c : out.coords) {
    c[0] *= factor;
    c[1] *= factor;
  }
  out.scale = inst.scale.value_or(1.0) * factor;
  rebuild_metrics(out);
  return out;
}

inline void rescale_to_max_edge(Dataset& ds, double target) {
  for (auto& inst : ds.instances) inst = rescale_to_max_edge(inst, target);
}

/// Validation-set sizes per size band.
inline int default_validation_count(int n) {
  if (n <= 15) return 100;
  if (n <= 30) return 50;
  return 30;
}

inline constexpr int kDefaultTrainCount = 500;
inline constexpr int kDefaultTestCount = 1000;

}  // namespace eqctsp
