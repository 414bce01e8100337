#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "eqctsp/instance.hpp"
#include "eqctsp/tour.hpp"

namespace eqctsp {

using ordered_json = nlohmann::ordered_json;

/// Shortest decimal string that round-trips the double exactly.
inline std::string encode_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

inline double decode_double(const std::string& s, const std::string& field) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + s.size() || s.empty())
    throw ParseError("field " + field + ": not a decimal number: \"" + s + "\"");
  if (!std::isfinite(v)) throw ParseError("field " + field + ": non-finite coordinate \"" + s + "\"");
  return v;
}

inline ordered_json instance_to_json(const TspInstance& inst) {
  ordered_json j;
  j["id"] = inst.id;
  j["n"] = inst.n;
  j["seed"] = inst.seed;
  if (inst.scale) j["scale"] = encode_double(*inst.scale);
  ordered_json coords = ordered_json::array();
  for (const auto& c : inst.coords)
    coords.push_back({encode_double(c[0]), encode_double(c[1])});
  j["coords"] = std::move(coords);
  return j;
}

inline TspInstance instance_from_json(const ordered_json& j, const std::string& ctx) {
  TspInstance inst;
  try {
    inst.id = j.at("id").get<std::string>();
    inst.n = j.at("n").get<int>();
    inst.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("scale")) {
      if (j["scale"].is_string())
        inst.scale = decode_double(j["scale"].get<std::string>(), ctx + ".scale");
      else
        inst.scale = j["scale"].get<double>();
    }
    const auto& coords = j.at("coords");
    if (!coords.is_array()) throw ParseError("field " + ctx + ".coords: expected array");
    int idx = 0;
    for (const auto& pair : coords) {
      if (!pair.is_array() || pair.size() != 2)
        throw ParseError("field " + ctx + ".coords[" + std::to_string(idx) + "]: expected [x, y]");
      std::array<double, 2> pt{};
      for (int k = 0; k < 2; ++k) {
        const auto& v = pair[k];
        const std::string field =
            ctx + ".coords[" + std::to_string(idx) + "][" + std::to_string(k) + "]";
        if (v.is_string())
          pt[k] = decode_double(v.get<std::string>(), field);
        else if (v.is_number())
          pt[k] = v.get<double>();
        else
          throw ParseError("field " + field + ": expected number or decimal string");
        if (!std::isfinite(pt[k])) throw ParseError("field " + field + ": non-finite coordinate");
      }
      inst.coords.push_back(pt);
      ++idx;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("field " + ctx + ": " + e.what());
  }
  if (static_cast<int>(inst.coords.size()) != inst.n)
    throw ValidationError("instance " + inst.id + ": n=" + std::to_string(inst.n) + " but " +
                          std::to_string(inst.coords.size()) + " coordinates present");
  if (inst.n < 2) throw ValidationError("instance " + inst.id + ": fewer than 2 nodes");
  rebuild_metrics(inst);
  return inst;
}

inline ordered_json dataset_to_json(const Dataset& ds) {
  ordered_json j;
  j["role"] = to_string(ds.role);
  j["seed"] = ds.seed;
  j["n"] = ds.n;
  ordered_json instances = ordered_json::array();
  for (const auto& inst : ds.instances) instances.push_back(instance_to_json(inst));
  j["instances"] = std::move(instances);
  if (!ds.optimal.empty()) {
    ordered_json opt = ordered_json::array();
    for (const auto& ref : ds.optimal) {
      ordered_json r;
      r["length"] = encode_double(ref.length);
      r["tour"] = ref.tour;
      r["solver"] = ref.solver;
      opt.push_back(std::move(r));
    }
    j["optimal"] = std::move(opt);
  }
  return j;
}

inline void validate_references(Dataset& ds) {
  if (ds.optimal.empty()) return;
  if (ds.optimal.size() != ds.instances.size())
    throw ValidationError("dataset has " + std::to_string(ds.optimal.size()) +
                          " reference solutions for " + std::to_string(ds.instances.size()) +
                          " instances");
  for (std::size_t i = 0; i < ds.optimal.size(); ++i) {
    const double recomputed = tour_length(ds.instances[i], ds.optimal[i].tour);
    if (std::fabs(recomputed - ds.optimal[i].length) > 1e-9)
      throw ValidationError("reference length for instance " + ds.instances[i].id +
                            " does not match its stored tour");
  }
}

inline Dataset dataset_from_json(const ordered_json& j, const std::filesystem::path& base_dir);

inline Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file: " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("file " + path.string() + ": " + e.what());
  }
  return dataset_from_json(j, path.parent_path());
}

inline Dataset dataset_from_json(const ordered_json& j, const std::filesystem::path& base_dir) {
  Dataset ds;
  try {
    ds.role = dataset_role_from_string(j.at("role").get<std::string>());
    ds.seed = j.at("seed").get<std::uint64_t>();
    ds.n = j.at("n").get<int>();
    int idx = 0;
    for (const auto& item : j.at("instances")) {
      if (item.is_string()) {
        // file reference, relative to the manifest location
        std::ifstream in(base_dir / item.get<std::string>());
        if (!in) throw ParseError("cannot open referenced instance file: " + item.get<std::string>());
        ordered_json sub;
        in >> sub;
        ds.instances.push_back(instance_from_json(sub, "instances[" + std::to_string(idx) + "]"));
      } else {
        ds.instances.push_back(instance_from_json(item, "instances[" + std::to_string(idx) + "]"));
      }
      ++idx;
    }
    if (j.contains("optimal")) {
      for (const auto& r : j["optimal"]) {
        ReferenceSolution ref;
        if (r.at("length").is_string())
          ref.length = decode_double(r["length"].get<std::string>(), "optimal.length");
        else
          ref.length = r.at("length").get<double>();
        ref.tour = r.at("tour").get<std::vector<int>>();
        ref.solver = r.at("solver").get<std::string>();
        ds.optimal.push_back(std::move(ref));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("dataset: ") + e.what());
  }
  for (const auto& inst : ds.instances)
    if (inst.n != ds.n)
      throw ValidationError("instance " + inst.id + " has size " + std::to_string(inst.n) +
                            ", dataset declares " + std::to_string(ds.n));
  validate_references(ds);
  return ds;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset file: " + path.string());
  out << dataset_to_json(ds).dump(1) << '\n';
}

/// Standalone reference-solution file (output of the `solve` subcommand).
inline void save_solutions(const std::vector<ReferenceSolution>& sols,
                           const std::filesystem::path& path) {
  ordered_json j;
  ordered_json arr = ordered_json::array();
  for (const auto& s : sols) {
    ordered_json r;
    r["length"] = encode_double(s.length);
    r["tour"] = s.tour;
    r["solver"] = s.solver;
    arr.push_back(std::move(r));
  }
  j["solutions"] = std::move(arr);
  std::ofstream out(path);
  if (!out) throw Error("cannot write solutions file: " + path.string());
  out << j.dump(1) << '\n';
}

inline std::vector<ReferenceSolution> load_solutions(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open solutions file: " + path.string());
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("file " + path.string() + ": " + e.what());
  }
  std::vector<ReferenceSolution> sols;
  for (const auto& r : j.at("solutions")) {
    ReferenceSolution ref;
    if (r.at("length").is_string())
      ref.length = decode_double(r["length"].get<std::string>(), "solutions.length");
    else
      ref.length = r.at("length").get<double>();
    ref.tour = r.at("tour").get<std::vector<int>>();
    ref.solver = r.at("solver").get<std::string>();
    sols.push_back(std::move(ref));
  }
  return sols;
}

/// Attaches reference solutions loaded from a solutions file to a dataset.
inline void attach_references(Dataset& ds, std::vector<ReferenceSolution> sols) {
  ds.optimal = std::move(sols);
  validate_references(ds);
}

}  // namespace eqctsp
