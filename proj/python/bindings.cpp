#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "carenkf/benchmarks.hpp"
#include "carenkf/errors.hpp"
#include "carenkf/filters.hpp"
#include "carenkf/harness.hpp"
#include "carenkf/measurement.hpp"

namespace py = pybind11;
using namespace carenkf;

namespace {

py::dict stats_dict(const MeasStats& ms) {
  py::dict d;
  d["z_ensemble"] = ms.z_ensemble;
  d["z_mean"] = ms.z_mean;
  d["z_anoms"] = ms.z_anoms;
  d["cross_cov"] = ms.cross_cov;
  d["mismatch"] = ms.mismatch;
  return d;
}

py::dict result_dict(const AggregateResult& r) {
  py::dict d;
  d["filter"] = to_string(r.filter.variant);
  d["mode"] = to_string(r.filter.mode);
  d["noise_scale"] = r.noise_scale;
  d["runs"] = r.runs;
  d["diverged_runs"] = r.diverged_runs;
  d["rmse"] = r.rmse;
  d["mean_beta"] = r.mean_beta;
  d["acceptance_rate"] = r.acceptance_rate;
  d["time_avg_rmse"] = r.time_avg_rmse;
  return d;
}

}  // namespace

PYBIND11_MODULE(_carenkf, m) {
  m.doc() = "Conventional and covariance-adaptive recalibrated ensemble Kalman filters";

  py::register_exception<NotPositiveDefinite>(m, "NotPositiveDefinite", PyExc_ArithmeticError);
  py::register_exception<NotPsd>(m, "NotPsd", PyExc_ArithmeticError);
  py::register_exception<NonFiniteState>(m, "NonFiniteState", PyExc_ArithmeticError);

  m.def("spd_solve", &spd_solve, py::arg("a"), py::arg("b"));
  m.def("sym_sqrt_psd", &sym_sqrt_psd, py::arg("a"));
  m.def("wrap_angle", &wrap_angle, py::arg("angle"));

  m.def(
      "ensemble_stats",
      [](const Matrix& members) {
        const EnsembleStats s = stats(Ensemble(members));
        return py::make_tuple(s.mean, s.anomalies);
      },
      py::arg("members"), "(mean, anomalies) of an n x N ensemble");
  m.def(
      "inflate", [](const Matrix& members, double rho) { return inflate(Ensemble(members), rho).members(); },
      py::arg("members"), py::arg("rho"));
  m.def(
      "recenter",
      [](const Matrix& members, const Vector& mean) { return recenter(Ensemble(members), mean).members(); },
      py::arg("members"), py::arg("mean"));

  m.def(
      "measure_stats",
      [](const Matrix& members, const std::function<Vector(const Vector&)>& h, Index dim) {
        return stats_dict(measure_stats(Ensemble(members), MeasurementMap::plain(dim, h)));
      },
      py::arg("members"), py::arg("h"), py::arg("dim"),
      "Measurement-space statistics for a Python measurement function h with `dim` outputs");

  m.def("conventional_etkf_transform", &conventional_etkf_transform, py::arg("z_anoms"),
        py::arg("r"));
  m.def("car_etkf_transform", &car_etkf_transform, py::arg("zf_anoms"), py::arg("zrc_anoms"),
        py::arg("r"), py::arg("beta"), py::arg("d_f"), py::arg("d_rc"));
  m.def(
      "posterior_target_trace",
      [](double trace_forecast, const Matrix& gain, const Matrix& s, const Matrix& pxz_rc) {
        return posterior_target_trace(trace_forecast, gain, s, pxz_rc).target;
      },
      py::arg("trace_forecast"), py::arg("gain"), py::arg("s_used"), py::arg("cross_cov_rc"));

  m.def("lorenz96_rhs", &lorenz96_rhs, py::arg("x"), py::arg("forcing") = 8.0);
  m.def("rk4_step", &rk4_step, py::arg("x"), py::arg("dt"), py::arg("forcing") = 8.0);
  m.def("lorenz96_measure", &lorenz96_measure, py::arg("x"));
  m.def("slam_measure", &slam_measure, py::arg("x"), py::arg("landmarks"));

  m.def(
      "make_truth",
      [](const std::string& benchmark, std::uint64_t run_seed, int steps, double noise_scale) {
        const auto model = make_benchmark(parse_benchmark(benchmark), noise_scale);
        const TruthTrajectory t = make_truth(*model, run_seed, steps);
        Matrix states(model->state_dim(), t.steps());
        for (int k = 0; k < t.steps(); ++k) states.col(k) = t.states[static_cast<std::size_t>(k)];
        py::dict d;
        d["initial"] = t.initial;
        d["states"] = states;
        d["observations"] = t.observations;
        d["active"] = t.active;
        return d;
      },
      py::arg("benchmark"), py::arg("run_seed"), py::arg("steps"), py::arg("noise_scale") = 1.0);

  m.def("standard_noise_grid", &standard_noise_grid);

  m.def(
      "run_experiment",
      [](const std::string& benchmark, const std::string& variant, const std::string& mode,
         int runs, std::uint64_t seed, double noise_scale, int steps, Index ensemble_size,
         unsigned threads) {
        ExperimentConfig cfg;
        cfg.benchmark = parse_benchmark(benchmark);
        cfg.runs = runs;
        cfg.base_seed = seed;
        cfg.noise_scales = {noise_scale};
        cfg.steps = steps;
        cfg.ensemble_size = ensemble_size;
        cfg.threads = threads;
        FilterConfig f = cfg.filter;
        f.variant = parse_variant(variant);
        f.mode = parse_mode(mode);
        AggregateResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(cfg, f, noise_scale);
        }
        return result_dict(r);
      },
      py::arg("benchmark"), py::arg("variant"), py::arg("mode"), py::arg("runs") = 10,
      py::arg("seed") = 20240501, py::arg("noise_scale") = 1.0, py::arg("steps") = 0,
      py::arg("ensemble_size") = 0, py::arg("threads") = 0,
      "Monte-Carlo RMSE experiment for one filter; returns a dict of curves and summaries");
}
