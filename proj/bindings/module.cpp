#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pseur/experiments.hpp"

namespace py = pybind11;
using namespace pseur;

PYBIND11_MODULE(_pseur, m) {
  m.doc() =
      "Uniform-linear-array adaptive beamforming: two-level spectral "
      "interference-plus-noise covariance reconstruction, closed-form "
      "baselines and Monte-Carlo sweeps";

  py::class_<ArraySpec>(m, "ArraySpec")
      .def(py::init<>())
      .def(py::init([](int elements, double spacing, double grid_step) {
             return ArraySpec{elements, spacing, grid_step};
           }),
           py::arg("elements") = 20, py::arg("spacing_wavelengths") = 0.5,
           py::arg("grid_step_deg") = 0.9)
      .def_readwrite("elements", &ArraySpec::elements)
      .def_readwrite("spacing_wavelengths", &ArraySpec::spacing_wavelengths)
      .def_readwrite("grid_step_deg", &ArraySpec::grid_step_deg);

  py::enum_<SourceKind>(m, "SourceKind")
      .value("SOI", SourceKind::Soi)
      .value("INTERFERER", SourceKind::Interferer);

  py::class_<SourceSpec>(m, "SourceSpec")
      .def(py::init([](double direction_deg, double power, SourceKind kind) {
             return SourceSpec{direction_deg, power, kind};
           }),
           py::arg("direction_deg"), py::arg("power"),
           py::arg("kind") = SourceKind::Interferer)
      .def_readwrite("direction_deg", &SourceSpec::direction_deg)
      .def_readwrite("power", &SourceSpec::power)
      .def_readwrite("kind", &SourceSpec::kind);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("array", &Scenario::array)
      .def_readwrite("sources", &Scenario::sources)
      .def_readwrite("noise_power", &Scenario::noise_power)
      .def_readwrite("interferer_drift_deg", &Scenario::interferer_drift_deg)
      .def_readwrite("seed", &Scenario::seed);

  py::class_<SnapshotTruth>(m, "SnapshotTruth")
      .def_readonly("source_directions_deg",
                    &SnapshotTruth::source_directions_deg)
      .def_readonly("soi_signature", &SnapshotTruth::soi_signature)
      .def_readonly("soi_power", &SnapshotTruth::soi_power)
      .def_readonly("ipn_covariance", &SnapshotTruth::ipn_covariance);

  py::class_<SnapshotBatch>(m, "SnapshotBatch")
      .def_readonly("snapshots", &SnapshotBatch::snapshots)
      .def_readonly("data", &SnapshotBatch::data)
      .def_readonly("truth", &SnapshotBatch::truth);

  py::class_<EigenSystem>(m, "EigenSystem")
      .def_readonly("values", &EigenSystem::values)
      .def_readonly("vectors", &EigenSystem::vectors);

  py::class_<AngularSector>(m, "AngularSector")
      .def(py::init([](double center, double half_width) {
             return AngularSector{center, half_width};
           }),
           py::arg("center_deg"), py::arg("half_width_deg"))
      .def_readonly("center_deg", &AngularSector::center_deg)
      .def_readonly("half_width_deg", &AngularSector::half_width_deg);

  py::class_<BeamformerWeights>(m, "BeamformerWeights")
      .def_readonly("w", &BeamformerWeights::w)
      .def_readonly("method", &BeamformerWeights::method)
      .def_readonly("assumed_soi", &BeamformerWeights::assumed_soi);

  py::enum_<NoisePowerMode>(m, "NoisePowerMode")
      .value("MEAN", NoisePowerMode::Mean)
      .value("PAPER_SQUARED", NoisePowerMode::PaperSquared);

  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("noise_mode", &PipelineConfig::noise_mode)
      .def_readwrite("source_count", &PipelineConfig::source_count)
      .def_readwrite("correlation_halfwidth_deg",
                     &PipelineConfig::correlation_halfwidth_deg)
      .def_readwrite("desired_halfwidth_deg",
                     &PipelineConfig::desired_halfwidth_deg)
      .def_readwrite("sector_samples", &PipelineConfig::sector_samples)
      .def_readwrite("spectrum_samples", &PipelineConfig::spectrum_samples)
      .def_readwrite("rank_threshold", &PipelineConfig::rank_threshold)
      .def_readwrite("soi_accept_ratio", &PipelineConfig::soi_accept_ratio)
      .def_readwrite("per_sector_levels", &PipelineConfig::per_sector_levels)
      .def_readwrite("smi_loading", &PipelineConfig::smi_loading);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("weights", &PipelineResult::weights)
      .def_readonly("assumed_soi_deg", &PipelineResult::assumed_soi_deg)
      .def_readonly("soi_refined", &PipelineResult::soi_refined)
      .def_readonly("interferer_doas_deg",
                    &PipelineResult::interferer_doas_deg)
      .def_readonly("interferer_powers", &PipelineResult::interferer_powers)
      .def_readonly("sectors", &PipelineResult::sectors)
      .def_readonly("noise_power_estimate",
                    &PipelineResult::noise_power_estimate)
      .def_readonly("degraded", &PipelineResult::degraded)
      .def_readonly("warning", &PipelineResult::warning);

  py::class_<ResultRow>(m, "ResultRow")
      .def_readonly("sweep_value", &ResultRow::sweep_value)
      .def_readonly("method", &ResultRow::method)
      .def_readonly("mean_sinr_db", &ResultRow::mean_sinr_db)
      .def_readonly("std_db", &ResultRow::std_db)
      .def_readonly("mean_dev_db", &ResultRow::mean_dev_db)
      .def_readonly("trials", &ResultRow::trials)
      .def_readonly("failures", &ResultRow::failures);

  m.def("steering_vector", &steering_vector, py::arg("theta_deg"),
        py::arg("spec"),
        "Plane-wave array response with unit-modulus elements");
  m.def("bessel_j0", &bessel_j0, py::arg("x"));
  m.def("bessel_matrix", &bessel_matrix, py::arg("elements"));
  m.def(
      "hermitian_eig",
      [](const CMatrix& a) {
        const EigenSystem eig = hermitian_eig(a);
        return py::make_tuple(eig.values, eig.vectors);
      },
      py::arg("matrix"),
      "Descending eigenvalues and phase-fixed orthonormal eigenvectors");
  m.def(
      "woodbury_inverse",
      [](double low, double high, const RVector& values,
         const CMatrix& vectors) {
        return woodbury_inverse(low, high, EigenSystem{values, vectors});
      },
      py::arg("low_level"), py::arg("high_level"), py::arg("values"),
      py::arg("vectors"));
  m.def("sample_covariance",
        [](const CMatrix& data) {
          SnapshotBatch batch;
          batch.snapshots = static_cast<int>(data.cols());
          batch.data = data;
          return sample_covariance(batch);
        },
        py::arg("data"), "Columns are snapshots");
  m.def(
      "music_doas",
      [](const CMatrix& noise_basis, const ArraySpec& spec, int sources) {
        return music_doas(noise_basis, angle_grid(spec), spec, sources);
      },
      py::arg("noise_basis"), py::arg("spec"), py::arg("sources"));
  m.def("angle_grid", &angle_grid, py::arg("spec"));
  m.def("detect_source_count", &detect_source_count, py::arg("eigenvalues"),
        "Eigenvalue-gap source counter (values above 10x the median)");
  m.def("analytic_covariance", &analytic_covariance, py::arg("scenario"));
  m.def("example_scenario", &example_scenario, py::arg("example"),
        py::arg("snr_db") = 10.0);
  m.def("scenario_from_json", &scenario_from_json, py::arg("json_text"));
  m.def("synthesize", &synthesize, py::arg("scenario"), py::arg("snapshots"));
  m.def("run_pseur_pipeline", &run_pseur_pipeline, py::arg("batch"),
        py::arg("presumed_soi_deg"), py::arg("spec"),
        py::arg("config") = PipelineConfig{});
  m.def("output_sinr_db", &output_sinr_db, py::arg("weights"),
        py::arg("truth"));
  m.def(
      "beampattern",
      [](const BeamformerWeights& w, const ArraySpec& spec) {
        const Beampattern p = beampattern(w, angle_grid(spec), spec);
        return py::make_tuple(p.theta_deg, p.gain_db);
      },
      py::arg("weights"), py::arg("spec"));
  m.def("baseline_optimal", &baseline_optimal, py::arg("truth"));
  m.def("baseline_smi", &baseline_smi, py::arg("batch"),
        py::arg("assumed_soi"), py::arg("loading") = 0.0);
  m.def("baseline_capon_ipn", &baseline_capon_ipn, py::arg("batch"),
        py::arg("presumed_soi_deg"), py::arg("spec"),
        py::arg("spectrum_samples") = 188,
        py::arg("desired_halfwidth_deg") = kDesiredSectorHalfWidthDeg);
  m.def("baseline_meps_ipn", &baseline_meps_ipn, py::arg("batch"),
        py::arg("presumed_soi_deg"), py::arg("spec"),
        py::arg("spectrum_samples") = 188,
        py::arg("desired_halfwidth_deg") = kDesiredSectorHalfWidthDeg);
  m.def(
      "run_example_sweep",
      [](int example, const std::string& axis,
         const std::vector<double>& values, int trials, std::uint64_t seed,
         const std::vector<std::string>& methods, int threads) {
        ExperimentPlan plan;
        plan.scenario = example_scenario(example);
        plan.axis = axis == "snapshots" ? SweepAxis::Snapshots
                                        : SweepAxis::SnrDb;
        plan.values = values.empty()
                          ? (plan.axis == SweepAxis::SnrDb
                                 ? default_snr_axis()
                                 : default_snapshot_axis())
                          : values;
        plan.trials = trials;
        plan.base_seed = seed;
        plan.threads = threads;
        if (!methods.empty()) {
          plan.methods.clear();
          for (const auto& name : methods) {
            plan.methods.push_back(method_from_name(name));
          }
        }
        return run_sweep(plan);
      },
      py::arg("example"), py::arg("axis") = "snr_db",
      py::arg("values") = std::vector<double>{}, py::arg("trials") = 100,
      py::arg("seed") = 1, py::arg("methods") = std::vector<std::string>{},
      py::arg("threads") = 0);
  m.def("sweep_csv", &sweep_csv, py::arg("rows"));

  m.attr("__version__") = "0.1.0";
}
