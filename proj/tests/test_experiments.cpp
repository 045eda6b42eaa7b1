#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pseur/experiments.hpp"

using namespace pseur;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("pipeline: noiseless single interferer gets a deep notch") {
  Scenario sc;
  sc.array = ArraySpec{12, 0.5, 0.9};
  sc.sources = {{0.0, 1.0, SourceKind::Soi},
                {36.0, 100.0, SourceKind::Interferer}};
  sc.noise_power = 0.0;
  sc.seed = 12;
  const auto batch = synthesize(sc, 40);

  PipelineConfig config;
  config.source_count = 2;
  const auto result = run_pseur_pipeline(batch, 0.0, sc.array, config);
  CHECK(!result.degraded);
  CHECK(std::abs(result.weights.w.dot(result.weights.assumed_soi) -
                 Complex(1.0, 0.0)) <= 1e-10);
  const CVector a_int = steering_vector(36.0, sc.array);
  CHECK(std::abs(result.weights.w.dot(a_int)) < 1e-3);
}

TEST_CASE("pipeline: bitwise deterministic for a fixed batch") {
  Scenario sc = example_scenario(1);
  sc.seed = 5;
  const auto batch = synthesize(sc, 30);
  PipelineConfig config;
  config.source_count = 3;
  const auto r1 = run_pseur_pipeline(batch, 10.0, sc.array, config);
  const auto r2 = run_pseur_pipeline(batch, 10.0, sc.array, config);
  CHECK((r1.weights.w - r2.weights.w).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pipeline: all-zero interference degrades to the matched filter") {
  SnapshotBatch batch;
  batch.snapshots = 20;
  batch.data = CMatrix::Zero(12, 20);
  PipelineConfig config;
  config.source_count = 3;
  const ArraySpec spec{12, 0.5, 0.9};
  const auto result = run_pseur_pipeline(batch, 0.0, spec, config);
  CHECK(result.degraded);
  CHECK(!result.warning.empty());
  const CVector a = steering_vector(result.assumed_soi_deg, spec);
  CHECK((result.weights.w - a / 12.0).norm() < 1e-12);
}

TEST_CASE("pipeline: refined look direction under recoverable mismatch") {
  Scenario sc = example_scenario(2);
  sc.seed = 8;
  const auto batch = synthesize(sc, 30);
  PipelineConfig config;
  config.source_count = 3;
  const auto result = run_pseur_pipeline(batch, 10.0, sc.array, config);
  CHECK(result.soi_refined);
  const double true_soi = batch.truth.source_directions_deg(0, 0);
  CHECK(std::abs(result.assumed_soi_deg - true_soi) <= 0.9);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::Optimal, Method::Pseur, Method::CaponIpn,
                   Method::MepsIpn, Method::Smi}) {
    CHECK(method_from_name(method_name(m)) == m);
  }
  CHECK_THROWS_AS(method_from_name("NOPE"), std::invalid_argument);
}

TEST_CASE("run_sweep: optimal rows have zero deviation") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {0.0, 10.0};
  plan.trials = 1;
  plan.methods = {Method::Optimal};
  const auto rows = run_sweep(plan);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) {
    CHECK(row.method == "OPTIMAL");
    CHECK(std::abs(row.mean_dev_db) <= 1e-9);
    CHECK(row.failures == 0);
  }
}

TEST_CASE("run_sweep: validates the plan") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {10.0, 5.0};
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
  plan.values = {};
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
  plan.values = {5.0};
  plan.trials = 0;
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
  plan.trials = 1;
  plan.axis = SweepAxis::Snapshots;
  plan.values = {10.5};
  CHECK_THROWS_AS(run_sweep(plan), std::invalid_argument);
}

TEST_CASE("run_sweep: hard failures are counted, sweep continues") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.axis = SweepAxis::Snapshots;
  plan.values = {10.0};  // N < M and unloaded SMI cannot invert
  plan.trials = 4;
  plan.methods = {Method::Smi, Method::Pseur};
  const auto rows = run_sweep(plan);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].method == "PSEUR");
  CHECK(rows[0].failures == 0);
  CHECK(rows[1].method == "SMI");
  CHECK(rows[1].failures == 4);
  CHECK(std::isnan(rows[1].mean_sinr_db));
}

TEST_CASE("run_sweep: deviations are non-negative and rows are ordered") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {0.0, 10.0};
  plan.trials = 5;
  plan.methods = {Method::Pseur, Method::Optimal, Method::CaponIpn};
  const auto rows = run_sweep(plan);
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const bool ordered =
        rows[i - 1].sweep_value < rows[i].sweep_value ||
        (rows[i - 1].sweep_value == rows[i].sweep_value &&
         rows[i - 1].method < rows[i].method);
    CHECK(ordered);
  }
  for (const auto& row : rows) {
    CHECK(row.mean_dev_db >= -1e-9);
  }
}

TEST_CASE("csv: export is byte-stable across runs and thread counts") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {5.0, 10.0};
  plan.trials = 6;
  plan.base_seed = 42;
  plan.methods = {Method::Optimal, Method::Pseur};

  plan.threads = 1;
  const std::string serial = sweep_csv(run_sweep(plan));
  plan.threads = 4;
  const std::string threaded = sweep_csv(run_sweep(plan));
  const std::string repeated = sweep_csv(run_sweep(plan));
  CHECK(serial == threaded);
  CHECK(threaded == repeated);
}

TEST_CASE("csv: empty table writes a header-only file") {
  const std::string path = temp_path("pseur_empty.csv");
  export_csv(sweep_csv({}), path);
  CHECK(read_file(path) ==
        "sweep_value,method,mean_sinr_db,std_db,mean_dev_db,trials,"
        "failures\n");
  std::remove(path.c_str());
}

TEST_CASE("csv: sweep table round-trips exactly") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {10.0};
  plan.trials = 3;
  plan.methods = {Method::Optimal, Method::Pseur};
  const auto rows = run_sweep(plan);

  const std::string path = temp_path("pseur_roundtrip.csv");
  export_csv(sweep_csv(rows), path);
  const std::string first = read_file(path);
  const auto loaded = load_sweep_csv(path);
  export_csv(sweep_csv(loaded), path);
  CHECK(read_file(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("csv: beampattern round-trips exactly") {
  Beampattern pattern;
  pattern.theta_deg = RVector::LinSpaced(5, -90.0, 90.0);
  pattern.gain_db = RVector::LinSpaced(5, -60.0, 0.0);
  const std::string path = temp_path("pseur_pattern.csv");
  export_csv(beampattern_csv(pattern), path);
  const std::string first = read_file(path);
  const auto loaded = load_beampattern_csv(path);
  export_csv(beampattern_csv(loaded), path);
  CHECK(read_file(path) == first);
  std::remove(path.c_str());
}

TEST_CASE("csv: unwritable path carries the path in the error") {
  try {
    export_csv("x\n", "/nonexistent-dir/out.csv");
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/out.csv") !=
          std::string::npos);
  }
}

TEST_CASE("plan_from_json: example shorthand and explicit fields") {
  const auto plan = plan_from_json(R"({
    "example": 2,
    "axis": "snapshots",
    "values": [10, 20, 30],
    "trials": 7,
    "seed": 99,
    "methods": ["PSEUR", "OPTIMAL"]
  })");
  CHECK(plan.scenario.mismatch.kind == MismatchKind::LookDirection);
  CHECK(plan.axis == SweepAxis::Snapshots);
  CHECK(plan.values.size() == 3);
  CHECK(plan.trials == 7);
  CHECK(plan.base_seed == 99);
  REQUIRE(plan.methods.size() == 2);
  CHECK(plan.methods[0] == Method::Pseur);

  CHECK_THROWS_AS(plan_from_json("{}"), std::invalid_argument);
  CHECK_THROWS_AS(plan_from_json(R"({"example": 1, "axis": "bogus"})"),
                  std::invalid_argument);
}

TEST_CASE("snapshot sweep: more data never hurts much") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.axis = SweepAxis::Snapshots;
  plan.values = {20.0, 40.0, 80.0};
  plan.trials = 20;
  plan.methods = {Method::Pseur};
  const auto rows = run_sweep(plan);
  REQUIRE(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mean_sinr_db >= rows[i - 1].mean_sinr_db - 0.3);
  }
}
