#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqctsp/errors.hpp"
#include "eqctsp/version.hpp"

namespace eqctsp {

/// FNV-1a 64-bit digest of a file's bytes.
inline std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open output for digesting: " + path.string());
  std::uint64_t h = 1469598103934665603ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ULL;
    }
    if (!in) break;
  }
  return h;
}

/// Record of one CLI run: command, flags, timings, and a content digest per
/// output file. Identical runs produce identical digests; timings vary.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::map<std::string, double> wall_seconds;
  std::vector<std::pair<std::string, std::string>> outputs;  // (path, fnv1a hex)

  void add_output(const std::filesystem::path& path) {
    char hex[20];
    std::snprintf(hex, sizeof(hex), "%016llx",
                  static_cast<unsigned long long>(fnv1a_file(path)));
    outputs.emplace_back(path.string(), hex);
  }

  /// Written alongside the primary output as <out>.manifest.json.
  void write(const std::filesystem::path& primary_output) const {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["args"] = args;
    j["version"] = kVersion;
    nlohmann::ordered_json times = nlohmann::ordered_json::object();
    for (const auto& [phase, secs] : wall_seconds) times[phase] = secs;
    j["wall_seconds"] = std::move(times);
    nlohmann::ordered_json outs = nlohmann::ordered_json::array();
    for (const auto& [path, digest] : outputs)
      outs.push_back({{"path", path}, {"digest", digest}});
    j["outputs"] = std::move(outs);
    const std::filesystem::path manifest_path = primary_output.string() + ".manifest.json";
    std::ofstream out(manifest_path);
    if (!out) throw Error("cannot write manifest: " + manifest_path.string());
    out << j.dump(1) << '\n';
  }
};

}  // namespace eqctsp
