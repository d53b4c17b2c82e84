#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "carenkf/benchmarks.hpp"
#include "carenkf/filters.hpp"

namespace carenkf {

enum class BenchmarkKind { Slam, Lorenz96 };

std::string to_string(BenchmarkKind b);
BenchmarkKind parse_benchmark(std::string_view name);

/// Benchmark model with its baseline measurement noise scaled by `noise_scale`.
std::unique_ptr<BenchmarkModel> make_benchmark(BenchmarkKind kind, double noise_scale);

/// The 13 log-spaced scales 10^-1, 10^-0.75, ..., 10^2.
std::vector<double> standard_noise_grid();

struct ExperimentConfig {
  BenchmarkKind benchmark = BenchmarkKind::Lorenz96;
  std::vector<Variant> variants{Variant::Stochastic, Variant::Etkf};
  std::vector<Mode> modes{Mode::Conventional, Mode::Improvement1, Mode::Car};
  FilterConfig filter;  // rho, beta0, lambda, mu shared by every filter
  int runs = 100;
  std::uint64_t base_seed = 20240501;
  std::vector<double> noise_scales{1.0};
  int steps = 0;              // 0: benchmark default
  Index ensemble_size = 0;    // 0: benchmark default
  int skip_steps = 10;        // time averages start at step skip_steps + 1
  unsigned threads = 0;       // 0: hardware concurrency
  std::string output_dir = "results";
  bool strict = false;

  /// Cross product of variants and modes, carrying the shared parameters.
  std::vector<FilterConfig> filters() const;
  /// Throws ConfigError on invalid settings.
  void validate() const;
};

/// Applies flat `key = value` text (one pair per line, '#' comments) on top
/// of `cfg`. Throws ConfigError with the line number on bad input.
void apply_config_text(ExperimentConfig& cfg, std::string_view text);
void apply_config_file(ExperimentConfig& cfg, const std::string& path);
/// Applies one key/value pair; keys as in the config file.
void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value);

struct RunRecord {
  int run_index = 0;
  bool diverged = false;
  std::string failure;
  std::vector<double> squared_error;  // per step, summed over metric coordinates
  std::vector<StepReport> reports;
};

/// One Monte-Carlo run: fresh truth and initial ensemble from the run seed.
RunRecord run_single(const BenchmarkModel& model, const FilterConfig& filter,
                     std::uint64_t base_seed, int run_index, int steps, Index ensemble_size);

struct AggregateResult {
  FilterConfig filter;
  double noise_scale = 1.0;
  int runs = 0;
  int diverged_runs = 0;
  std::vector<double> rmse;       // per step 1..steps, over non-diverged runs
  std::vector<double> mean_beta;  // per step
  double acceptance_rate = 1.0;   // over steps with measurements
  double time_avg_rmse = 0.0;     // mean of rmse over steps skip+1..end

  std::string label() const { return filter.label(); }
};

AggregateResult aggregate(const std::vector<RunRecord>& records, const FilterConfig& filter,
                          double noise_scale, Index metric_count, int skip_steps);

/// Runs cfg.runs independent runs of one filter at one noise scale. Runs are
/// spread over cfg.threads workers; the result does not depend on the
/// thread count.
AggregateResult run_experiment(const ExperimentConfig& cfg, const FilterConfig& filter,
                               double noise_scale);

struct SweepRow {
  double scale = 0.0;
  Variant variant = Variant::Etkf;
  Mode mode = Mode::Car;
  double rmse_avg = 0.0;
  int diverged_runs = 0;
};

/// Drops repeated scales (keeping first occurrences in order) and reports
/// each drop in `warnings`.
std::vector<double> dedupe_scales(const std::vector<double>& scales,
                                  std::vector<std::string>& warnings);

/// One row per (scale, filter), scales in config order after deduplication.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::vector<std::string>& warnings);

}  // namespace carenkf
