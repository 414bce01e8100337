#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "eqctsp/dataset_io.hpp"
#include "eqctsp/instance.hpp"

using namespace eqctsp;

namespace {
std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}
}  // namespace

TEST_CASE("generation is deterministic and byte-identical") {
  const Dataset a = generate(5, 20, 42);
  const Dataset b = generate(5, 20, 42);
  REQUIRE(a.size() == 20);
  const auto pa = temp_file("eqctsp_det_a.json");
  const auto pb = temp_file("eqctsp_det_b.json");
  save_dataset(a, pa);
  save_dataset(b, pb);
  std::ifstream fa(pa), fb(pb);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  REQUIRE(sa.str() == sb.str());
  REQUIRE(!sa.str().empty());
}

TEST_CASE("n=2 instance has the single sampled edge") {
  const Dataset ds = generate(2, 1, 0);
  const TspInstance& inst = ds.instances[0];
  const double dx = inst.coords[0][0] - inst.coords[1][0];
  const double dy = inst.coords[0][1] - inst.coords[1][1];
  REQUIRE(inst.d(0, 1) == Catch::Approx(std::sqrt(dx * dx + dy * dy)).epsilon(0));
  REQUIRE(inst.d(0, 0) == 0.0);
  REQUIRE(inst.d(1, 0) == inst.d(0, 1));
}

TEST_CASE("generator rejects invalid sizes") {
  REQUIRE_THROWS_AS(generate(1, 10, 3), ValidationError);
  REQUIRE_THROWS_AS(generate(0, 10, 3), ValidationError);
  REQUIRE_THROWS_AS(generate(5, 0, 3), ValidationError);
}

TEST_CASE("pairwise distances are distinct on generated data") {
  const Dataset ds = generate(10, 100, 7);
  for (const auto& inst : ds.instances) {
    std::set<double> seen;
    for (int i = 0; i < inst.n; ++i)
      for (int j = i + 1; j < inst.n; ++j) seen.insert(inst.d(i, j));
    REQUIRE(seen.size() == 45);
  }
}

TEST_CASE("e equals arctan of d elementwise") {
  const Dataset ds = generate(8, 50, 11);
  for (const auto& inst : ds.instances)
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.n; ++j)
        REQUIRE(std::fabs(inst.e(i, j) - std::atan(inst.d(i, j))) <= 1e-15);
}

TEST_CASE("no duplicate distances across 1000 TSP-10 instances") {
  const Dataset ds = generate(10, 1000, 20240901);
  for (const auto& inst : ds.instances) {
    std::set<double> seen;
    int pairs = 0;
    for (int i = 0; i < inst.n; ++i)
      for (int j = i + 1; j < inst.n; ++j) {
        seen.insert(inst.d(i, j));
        ++pairs;
      }
    REQUIRE(static_cast<int>(seen.size()) == pairs);
  }
}

TEST_CASE("rescale_to_max_edge") {
  SECTION("scales all distances linearly") {
    TspInstance inst = generate_instance(6, 99, "t");
    const double target = std::sqrt(2.0);
    const TspInstance scaled = rescale_to_max_edge(inst, target);
    REQUIRE(max_edge(scaled) == Catch::Approx(target).margin(1e-12));
    const double factor = target / max_edge(inst);
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.n; ++j) {
        REQUIRE(scaled.d(i, j) == Catch::Approx(inst.d(i, j) * factor).margin(1e-12));
        REQUIRE(scaled.e(i, j) == Catch::Approx(std::atan(scaled.d(i, j))).margin(1e-15));
      }
    REQUIRE(scaled.scale.has_value());
  }

  SECTION("is the identity when the max edge already matches") {
    TspInstance inst = generate_instance(5, 123, "t");
    const TspInstance once = rescale_to_max_edge(inst, std::sqrt(2.0));
    const TspInstance twice = rescale_to_max_edge(once, std::sqrt(2.0));
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.n; ++j)
        REQUIRE(twice.d(i, j) == Catch::Approx(once.d(i, j)).margin(1e-12));
  }

  SECTION("keeps a right triangle with hypotenuse sqrt(2) unchanged") {
    TspInstance inst;
    inst.id = "tri";
    inst.n = 3;
    inst.coords = {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
    rebuild_metrics(inst);
    const TspInstance scaled = rescale_to_max_edge(inst, std::sqrt(2.0));
    REQUIRE(scaled.d(0, 1) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(scaled.d(0, 2) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(scaled.d(1, 2) == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
  }

  SECTION("rejects a degenerate all-zero instance") {
    TspInstance inst;
    inst.id = "zero";
    inst.n = 2;
    inst.coords = {{0.5, 0.5}, {0.5, 0.5}};
    rebuild_metrics(inst);
    REQUIRE_THROWS_AS(rescale_to_max_edge(inst, 1.0), ValidationError);
  }
}

TEST_CASE("dataset save/load round trip") {
  Dataset ds = generate(5, 10, 77, DatasetRole::validation);
  const auto path = temp_file("eqctsp_roundtrip.json");
  save_dataset(ds, path);
  const Dataset loaded = load_dataset(path);
  REQUIRE(loaded.role == ds.role);
  REQUIRE(loaded.seed == ds.seed);
  REQUIRE(loaded.n == ds.n);
  REQUIRE(loaded.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(loaded.instances[i].id == ds.instances[i].id);
    REQUIRE(loaded.instances[i].seed == ds.instances[i].seed);
    // coordinates must survive bit for bit
    for (int v = 0; v < ds.n; ++v) {
      REQUIRE(loaded.instances[i].coords[v][0] == ds.instances[i].coords[v][0]);
      REQUIRE(loaded.instances[i].coords[v][1] == ds.instances[i].coords[v][1]);
    }
    REQUIRE(loaded.instances[i].d == ds.instances[i].d);
    REQUIRE(loaded.instances[i].e == ds.instances[i].e);
  }
}

TEST_CASE("load rejects inconsistent and malformed files") {
  SECTION("coordinate count mismatch") {
    const auto path = temp_file("eqctsp_badn.json");
    std::ofstream out(path);
    out << R"({"role":"test","seed":1,"n":5,"instances":[
      {"id":"x","n":5,"seed":2,"coords":[["0.1","0.2"],["0.3","0.4"],["0.5","0.6"],["0.7","0.8"]]}]})";
    out.close();
    REQUIRE_THROWS_AS(load_dataset(path), ValidationError);
  }

  SECTION("NaN coordinate") {
    const auto path = temp_file("eqctsp_nan.json");
    std::ofstream out(path);
    out << R"({"role":"test","seed":1,"n":2,"instances":[
      {"id":"x","n":2,"seed":2,"coords":[["nan","0.2"],["0.3","0.4"]]}]})";
    out.close();
    REQUIRE_THROWS_AS(load_dataset(path), ParseError);
  }

  SECTION("garbage coordinate string") {
    const auto path = temp_file("eqctsp_garbage.json");
    std::ofstream out(path);
    out << R"({"role":"test","seed":1,"n":2,"instances":[
      {"id":"x","n":2,"seed":2,"coords":[["zzz","0.2"],["0.3","0.4"]]}]})";
    out.close();
    REQUIRE_THROWS_AS(load_dataset(path), ParseError);
  }

  SECTION("missing file") {
    REQUIRE_THROWS_AS(load_dataset("/nonexistent/nowhere.json"), ParseError);
  }
}

TEST_CASE("validation size bands") {
  REQUIRE(default_validation_count(5) == 100);
  REQUIRE(default_validation_count(15) == 100);
  REQUIRE(default_validation_count(16) == 50);
  REQUIRE(default_validation_count(30) == 50);
  REQUIRE(default_validation_count(31) == 30);
  REQUIRE(default_validation_count(350) == 30);
}
