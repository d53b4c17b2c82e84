// carenkf: Monte-Carlo benchmark harness for conventional and CAR ensemble
// Kalman filters on the SLAM and Lorenz-96 benchmarks.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carenkf/errors.hpp"
#include "carenkf/harness.hpp"
#include "carenkf/oracles.hpp"
#include "carenkf/report.hpp"

namespace {

using namespace carenkf;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct CommonFlags {
  std::string config;
  std::string benchmark;
  std::string filter;
  std::string mode;
  std::string noise_scale;
  std::string out;
  std::uint64_t seed = 0;
  int runs = 0;
  int steps = 0;
  long ensemble_size = 0;
  unsigned threads = 0;
  bool strict = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value experiment file; flags override it");
  cmd->add_option("--benchmark", f.benchmark, "slam | lorenz96");
  cmd->add_option("--filter", f.filter, "stochastic,etkf | all");
  cmd->add_option("--mode", f.mode, "conventional,i1,car | all");
  cmd->add_option("--noise-scale", f.noise_scale, "scale or comma list; 'grid' = 10^-1..10^2");
  cmd->add_option("--runs", f.runs, "Monte-Carlo runs");
  cmd->add_option("--seed", f.seed, "base seed (run seed = seed xor run index)");
  cmd->add_option("--steps", f.steps, "assimilation steps (default: benchmark)");
  cmd->add_option("--ensemble-size", f.ensemble_size, "ensemble size (default: benchmark)");
  cmd->add_option("--threads", f.threads, "worker threads (default: all cores)");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_flag("--strict", f.strict, "exit with code 2 if any run diverged");
}

ExperimentConfig build_config(CLI::App* cmd, const CommonFlags& f, ExperimentConfig cfg) {
  if (!f.config.empty()) apply_config_file(cfg, f.config);
  auto set = [&](const char* flag, const char* key, const std::string& value) {
    if (cmd->count(flag) > 0) apply_config_value(cfg, key, value);
  };
  set("--benchmark", "benchmark", f.benchmark);
  set("--filter", "filter", f.filter);
  set("--mode", "mode", f.mode);
  set("--noise-scale", "noise_scale", f.noise_scale);
  set("--out", "out", f.out);
  if (cmd->count("--runs") > 0) cfg.runs = f.runs;
  if (cmd->count("--seed") > 0) cfg.base_seed = f.seed;
  if (cmd->count("--steps") > 0) cfg.steps = f.steps;
  if (cmd->count("--ensemble-size") > 0) cfg.ensemble_size = f.ensemble_size;
  if (cmd->count("--threads") > 0) cfg.threads = f.threads;
  if (f.strict) cfg.strict = true;
  cfg.validate();
  return cfg;
}

std::string file_stem(const ExperimentConfig& cfg, const FilterConfig& f) {
  return to_string(cfg.benchmark) + "_" + to_string(f.variant) + "_" + to_string(f.mode);
}

int run_curve(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  const double scale = cfg.noise_scales.front();
  if (cfg.noise_scales.size() > 1) {
    std::cerr << "warning: curve uses only the first noise scale (" << scale << ")\n";
  }
  std::vector<PlotSeries> series;
  int diverged = 0;
  std::printf("%-22s %14s %10s %9s\n", "filter", "rmse(11+)", "accept", "diverged");
  for (const FilterConfig& f : cfg.filters()) {
    const auto start = std::chrono::steady_clock::now();
    const AggregateResult r = run_experiment(cfg, f, scale);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::string stem = cfg.output_dir + "/curve_" + file_stem(cfg, f);
    write_curve_csv(stem + ".csv", r.rmse);
    write_beta_csv(cfg.output_dir + "/beta_" + file_stem(cfg, f) + ".csv", r.mean_beta);
    diverged += r.diverged_runs;
    std::printf("%-22s %14.6g %10.3f %9d   (%.1fs)\n", f.label().c_str(), r.time_avg_rmse,
                r.acceptance_rate, r.diverged_runs, secs);
    PlotSeries s{to_string(f.variant) + " " + to_string(f.mode), {}, r.rmse};
    for (std::size_t k = 0; k < r.rmse.size(); ++k) s.x.push_back(static_cast<double>(k + 1));
    series.push_back(std::move(s));
  }
  PlotSpec spec;
  spec.title = to_string(cfg.benchmark) + " RMSE, noise scale " + format_real(scale);
  spec.x_label = "step";
  spec.y_label = "RMSE";
  try {
    write_svg(cfg.output_dir + "/curve_" + to_string(cfg.benchmark) + ".svg", series, spec);
  } catch (const std::invalid_argument& e) {
    std::cerr << "warning: plot skipped: " << e.what() << "\n";
  }
  std::cout << "wrote results to " << cfg.output_dir << "\n";
  return cfg.strict && diverged > 0 ? kExitDiverged : kExitOk;
}

int run_sweep_command(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  std::vector<std::string> warnings;
  const std::vector<SweepRow> rows = run_sweep(cfg, warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  int diverged = 0;
  std::printf("%12s %-12s %-14s %14s %9s\n", "scale", "filter", "mode", "rmse(11+)", "diverged");
  for (const SweepRow& r : rows) {
    diverged += r.diverged_runs;
    std::printf("%12.5g %-12s %-14s %14.6g %9d\n", r.scale, to_string(r.variant).c_str(),
                to_string(r.mode).c_str(), r.rmse_avg, r.diverged_runs);
  }
  const std::string stem = cfg.output_dir + "/sweep_" + to_string(cfg.benchmark);
  write_sweep_csv(stem + ".csv", rows);
  PlotSpec spec;
  spec.title = to_string(cfg.benchmark) + " noise sweep";
  spec.x_label = "noise scale s";
  spec.y_label = "time-averaged RMSE";
  spec.log_x = true;
  try {
    write_svg(stem + ".svg", sweep_series(rows), spec);
  } catch (const std::invalid_argument& e) {
    std::cerr << "warning: plot skipped: " << e.what() << "\n";
  }
  std::cout << "wrote " << stem << ".csv\n";
  return cfg.strict && diverged > 0 ? kExitDiverged : kExitOk;
}

int run_selftest(std::uint64_t seed) {
  const std::vector<oracles::Outcome> outcomes{
      oracles::etkf_target_covariance(20, 40, 20, 50, 0.0, seed),
      oracles::etkf_target_covariance(20, 40, 20, 50, 2.0, seed + 1),
      oracles::stochastic_target_covariance(5, 3, 10, 2000, 2.0, seed + 2),
      oracles::linear_reduction(100, seed + 3),
      oracles::quadratic_mismatch(100, seed + 4),
  };
  bool ok = true;
  for (const auto& o : outcomes) {
    std::printf("[%s] %-30s %s\n", o.passed ? "PASS" : "FAIL", o.name.c_str(), o.detail.c_str());
    ok = ok && o.passed;
  }
  return ok ? kExitOk : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conventional and CAR ensemble Kalman filter benchmarks"};
  app.require_subcommand(1);

  CommonFlags curve_flags;
  auto* curve = app.add_subcommand("curve", "fixed-parameter experiment: RMSE versus step");
  add_common(curve, curve_flags);

  CommonFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "measurement-noise sweep: time-averaged RMSE per scale");
  add_common(sweep, sweep_flags);

  std::uint64_t selftest_seed = 12345;
  auto* selftest = app.add_subcommand("selftest", "run the filter-algebra oracles");
  selftest->add_option("--seed", selftest_seed, "oracle seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*curve) {
      ExperimentConfig defaults;
      return run_curve(build_config(curve, curve_flags, defaults));
    }
    if (*sweep) {
      ExperimentConfig defaults;
      defaults.runs = 50;
      defaults.noise_scales = standard_noise_grid();
      return run_sweep_command(build_config(sweep, sweep_flags, defaults));
    }
    if (*selftest) {
      return run_selftest(selftest_seed);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return kExitOk;
}
