// Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
// Run directly (with -s for full doctest output) or through ctest.
#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "pseur/experiments.hpp"
#include "pseur/rng.hpp"

using namespace pseur;

namespace {

void report(int criterion, const std::string& what, bool ok) {
  std::printf("[criterion %d] %-58s %s\n", criterion, what.c_str(),
              ok ? "PASS" : "FAIL");
  std::fflush(stdout);
  CHECK_MESSAGE(ok, "criterion ", criterion, ": ", what);
}

double seconds_since(
    const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

CMatrix random_orthonormal(int rows, int cols, Rng& rng) {
  CMatrix g(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      g(r, c) = Complex(rng.gaussian(), rng.gaussian());
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(g);
  return CMatrix(qr.householderQ()).leftCols(cols);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in),
          std::istreambuf_iterator<char>()};
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentPlan ordering_plan(int example, SweepAxis axis, bool with_smi) {
  ExperimentPlan plan;
  plan.scenario = example_scenario(example);
  plan.axis = axis;
  plan.values = axis == SweepAxis::SnrDb ? default_snr_axis()
                                         : default_snapshot_axis();
  plan.trials = 100;
  plan.base_seed = 20240000 + example;
  plan.methods = {Method::Pseur, Method::CaponIpn, Method::MepsIpn};
  if (with_smi) plan.methods.push_back(Method::Smi);
  return plan;
}

double row_value(const std::vector<ResultRow>& rows, double sweep,
                 const std::string& method) {
  for (const auto& r : rows) {
    if (r.sweep_value == sweep && r.method == method) return r.mean_sinr_db;
  }
  REQUIRE(false);
  return 0.0;
}

}  // namespace

TEST_CASE("criterion 1: Woodbury inverse versus the dense oracle") {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(11);
  bool inverses_agree = true;
  bool products_identity = true;
  for (int rep = 0; rep < 200; ++rep) {
    const int m = (rep % 2 == 0) ? 8 : 20;
    const int r = 1 + static_cast<int>(rng.next_u64() % 7);
    EigenSystem sys;
    sys.vectors = random_orthonormal(m, r, rng);
    sys.values = RVector(r);
    for (int i = 0; i < r; ++i) {
      sys.values[i] = std::pow(10.0, rng.uniform(-4.0, 1.0));
    }
    std::sort(sys.values.data(), sys.values.data() + r,
              std::greater<double>());
    const double low = std::pow(10.0, rng.uniform(-2.0, 1.0));
    const double high = low * (1.0 + std::pow(10.0, rng.uniform(0.0, 4.0)));

    const CMatrix assembled =
        kTwoPi * low * CMatrix::Identity(m, m) +
        (high - low) * CMatrix(sys.vectors * sys.values.asDiagonal() *
                               sys.vectors.adjoint());
    const CMatrix dense = assembled.inverse();
    const CMatrix fast = woodbury_inverse(low, high, sys);
    if ((fast - dense).norm() > 1e-8 * dense.norm()) inverses_agree = false;
    if ((assembled * fast - CMatrix::Identity(m, m)).norm() >
        1e-8 * std::sqrt(double(m))) {
      products_identity = false;
    }
  }
  const double elapsed = seconds_since(start);
  report(1, "Woodbury = dense inverse over 200 configs", inverses_agree);
  report(1, "identity residual <= 1e-8 over 200 configs", products_identity);
  report(1, "runtime under 10 s", elapsed < 10.0);
}

TEST_CASE("criterion 2: Bessel integral identity to 1e-6 up to M=32") {
  // 1e5-point trapezoid of the steering outer-product integral; entries
  // depend on the element lag only, so the lag integrals carry every M <= 32.
  const int points = 100000;
  const int max_m = 32;
  std::vector<double> lag_integral(max_m, 0.0);
  std::vector<double> lag_imag(max_m, 0.0);
  for (int i = 0; i < points; ++i) {
    const double theta = -kPi + kTwoPi * i / points;
    const double s = std::sin(theta);
    for (int k = 0; k < max_m; ++k) {
      lag_integral[k] += std::cos(k * kPi * s);
      lag_imag[k] += std::sin(k * kPi * s);
    }
  }
  double worst = 0.0;
  for (int k = 0; k < max_m; ++k) {
    lag_integral[k] *= kTwoPi / points;
    lag_imag[k] *= kTwoPi / points;
    worst = std::max(worst, std::abs(lag_imag[k]));
  }
  for (int m = 1; m <= max_m; ++m) {
    const RMatrix b = bessel_matrix(m);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) {
        worst = std::max(worst, std::abs(lag_integral[std::abs(r - c)] -
                                         kTwoPi * b(r, c)));
      }
    }
  }
  report(2, "quadrature vs 2*pi*bessel_matrix, max err " +
                std::to_string(worst),
         worst <= 1e-6);
}

TEST_CASE("criterion 3: MUSIC direction accuracy") {
  const Scenario sc = example_scenario(1);
  const auto analytic_eig = hermitian_eig(analytic_covariance(sc));
  const auto analytic_doas =
      music_doas(partition_subspaces(analytic_eig, 3).noise_basis,
                 angle_grid(sc.array), sc.array, 3);
  const bool analytic_ok = std::abs(analytic_doas[0] + 50.0) <= 0.9 &&
                           std::abs(analytic_doas[1] - 10.0) <= 0.9 &&
                           std::abs(analytic_doas[2] - 30.0) <= 0.9;
  report(3, "analytic covariance within one grid step", analytic_ok);

  const double truth[3] = {-50.0, 10.0, 30.0};
  double sum_sq = 0.0;
  int count = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Scenario trial_sc = example_scenario(1);
    trial_sc.seed = 5000 + trial;
    const auto batch = synthesize(trial_sc, 30);
    const auto eig = hermitian_eig(sample_covariance(batch));
    const auto doas = music_doas(partition_subspaces(eig, 3).noise_basis,
                                 angle_grid(trial_sc.array), trial_sc.array,
                                 3);
    for (double est : doas) {
      double best = 1e9;
      for (double t : truth) best = std::min(best, std::abs(est - t));
      sum_sq += best * best;
      ++count;
    }
  }
  const double rms = std::sqrt(sum_sq / count);
  report(3, "RMS error over 100 trials = " + std::to_string(rms) + " deg",
         rms <= 1.0);
}

TEST_CASE("criterion 4: drift-inversion exactness") {
  bool exact = true;
  for (double sweep : {0.0, 1.0, 2.0, 4.0}) {
    for (int n : {29, 30}) {
      const auto traj = drift_directions(-50.0, sweep, n);
      const auto recovered = drift_inversion(traj, -50.0);
      if (recovered.empty()) exact = false;
      for (double v : recovered) {
        if (std::abs(v - sweep) > 1e-9) exact = false;
      }
    }
  }
  report(4, "sweeps {0,1,2,4} deg recovered to 1e-9", exact);

  // Even N: the t = N/2 snapshot would divide by zero; poison it and check
  // it is never consumed.
  std::vector<double> doas(30, 12.0);
  doas[14] = std::numeric_limits<double>::infinity();
  bool finite = true;
  for (double v : drift_inversion(doas, 12.0)) {
    if (!std::isfinite(v)) finite = false;
  }
  report(4, "midpoint snapshot excluded (no division by zero)", finite);
}

TEST_CASE("criterion 5: interference and noise power estimation") {
  std::vector<double> estimates;
  for (int trial = 0; trial < 100; ++trial) {
    Scenario sc = example_scenario(1);
    sc.seed = 6000 + trial;
    const auto batch = synthesize(sc, 30);
    estimates.push_back(
        interference_power(batch, steering_vector(-50.4, sc.array), 1.0)
            .power);
  }
  std::nth_element(estimates.begin(), estimates.begin() + 50,
                   estimates.end());
  const double median = estimates[50];
  report(5, "interference power median = " + std::to_string(median),
         std::abs(median - 1000.0) <= 200.0);

  bool noise_ok = true;
  for (int seed = 0; seed < 5; ++seed) {
    Scenario sc = example_scenario(1);
    sc.noise_power = 4.0;
    for (auto& src : sc.sources) src.power *= 4.0;
    sc.seed = 7000 + seed;
    const auto batch = synthesize(sc, 1000);
    const auto eig = hermitian_eig(sample_covariance(batch));
    const double est = estimate_noise_power(partition_subspaces(eig, 3),
                                            NoisePowerMode::Mean);
    if (std::abs(est - 4.0) > 0.4) noise_ok = false;
  }
  report(5, "noise power within 10% of 4 at N=1000", noise_ok);
}

TEST_CASE("criterion 6: near-optimal SINR across the Example-1 SNR axis") {
  const auto start = std::chrono::steady_clock::now();
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = default_snr_axis();
  plan.trials = 100;
  plan.base_seed = 61;
  plan.methods = {Method::Pseur};
  const auto rows = run_sweep(plan);
  bool all_close = true;
  for (const auto& row : rows) {
    const bool ok = row.failures == 0 && row.mean_dev_db <= 1.5;
    if (!ok) {
      std::printf("  SNR %+6.1f dB: mean deviation %.3f dB, %d failures\n",
                  row.sweep_value, row.mean_dev_db, row.failures);
      all_close = false;
    }
  }
  const double elapsed = seconds_since(start);
  report(6, "mean deviation <= 1.5 dB at every SNR point", all_close);
  report(6, "runtime under 5 minutes", elapsed < 300.0);
}

TEST_CASE("criterion 7: ordering against the reconstruction baselines") {
  int violations = 0;
  for (int example = 1; example <= 4; ++example) {
    for (SweepAxis axis : {SweepAxis::SnrDb, SweepAxis::Snapshots}) {
      const bool with_smi = example == 1 && axis == SweepAxis::SnrDb;
      const auto plan = ordering_plan(example, axis, with_smi);
      const auto rows = run_sweep(plan);
      for (double value : plan.values) {
        const double ours = row_value(rows, value, "PSEUR");
        const double capon = row_value(rows, value, "IPN-CC");
        const double meps = row_value(rows, value, "IPN-MEPS");
        if (ours < capon || ours < meps) {
          std::printf(
              "  example %d %s %.0f: PSEUR %.3f, IPN-CC %.3f, IPN-MEPS "
              "%.3f\n",
              example, axis == SweepAxis::SnrDb ? "SNR" : "N", value, ours,
              capon, meps);
          ++violations;
        }
      }
      if (with_smi) {
        const double gap =
            row_value(rows, 10.0, "PSEUR") - row_value(rows, 10.0, "SMI");
        report(7, "SMI trails PSEUR by >= 3 dB at 10 dB SNR (gap " +
                      std::to_string(gap) + ")",
               gap >= 3.0);
      }
    }
  }
  report(7, "PSEUR >= IPN-CC and IPN-MEPS at every sweep point",
         violations == 0);
}

TEST_CASE("criterion 8: notch depth and closed-form prediction") {
  // Fixture frozen from a pilot over these seeds: worst measured notch was
  // -53.6 dB and prediction/measured stayed within [0.66, 0.98].
  PipelineConfig config;
  config.source_count = 3;
  bool depth_ok = true;
  bool prediction_ok = true;
  for (int seed = 1; seed <= 10; ++seed) {
    Scenario sc = example_scenario(1);
    sc.seed = seed;
    const auto batch = synthesize(sc, 30);
    const auto result = run_pseur_pipeline(batch, 10.0, sc.array, config);
    REQUIRE(!result.degraded);
    const CVector& w = result.weights.w;
    // Distortionless response: |w^H a(assumed)| = 1 defines the 0 dB level.
    for (double theta : {-50.0, 30.0}) {
      const CVector a = steering_vector(theta, sc.array);
      const double gain_db = 20.0 * std::log10(std::abs(w.dot(a)));
      if (gain_db > -35.0) depth_ok = false;

      bool inside = false;
      for (const auto& s : result.recon.spectrum.sectors) {
        if (theta >= s.lo() && theta <= s.hi()) inside = true;
      }
      if (!inside) continue;
      const double predicted = notch_prediction(
          result.recon, result.weights.assumed_soi, theta, sc.array);
      const double measured = std::abs(w.dot(a));
      const double ratio = predicted / measured;
      if (ratio < 0.5 || ratio > 2.0) prediction_ok = false;
    }
  }
  report(8, "gain at -50 and +30 deg <= -35 dB over 10 seeds", depth_ok);
  report(8, "Eq-form prediction within a factor of 2 in-notch",
         prediction_ok);
}

TEST_CASE("criterion 9: byte-identical CSVs under reruns and concurrency") {
  ExperimentPlan plan;
  plan.scenario = example_scenario(1);
  plan.values = {-10.0, 10.0, 30.0};
  plan.trials = 25;
  plan.base_seed = 99;
  plan.methods = {Method::Optimal, Method::Pseur, Method::CaponIpn};

  plan.threads = 4;
  const std::string first = sweep_csv(run_sweep(plan));
  const std::string second = sweep_csv(run_sweep(plan));
  plan.threads = 1;
  const std::string serial = sweep_csv(run_sweep(plan));
  report(9, "two concurrent runs byte-identical", first == second);
  report(9, "concurrent equals single-threaded", first == serial);

#ifdef PSEUR_CLI_PATH
  const std::string out1 = temp_path("pseur_accept_cli1.csv");
  const std::string out2 = temp_path("pseur_accept_cli2.csv");
  const std::string base = std::string(PSEUR_CLI_PATH) +
                           " sweep-snr --example 1 --trials 10 --seed 5 "
                           "--points=-5,10 --methods PSEUR,OPTIMAL --out ";
  const int rc1 = std::system((base + out1 + " > /dev/null").c_str());
  const int rc2 = std::system((base + out2 + " > /dev/null").c_str());
  report(9, "CLI exits cleanly", rc1 == 0 && rc2 == 0);
  report(9, "CLI output byte-identical across runs",
         read_file(out1) == read_file(out2));
  const int rc_bad = std::system((std::string(PSEUR_CLI_PATH) +
                                  " sweep-snr --example 9 2> /dev/null")
                                     .c_str());
  report(9, "config error exits with code 1", WEXITSTATUS(rc_bad) == 1);
  std::remove(out1.c_str());
  std::remove(out2.c_str());
#endif
}
