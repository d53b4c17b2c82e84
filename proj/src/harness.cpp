#include "carenkf/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "carenkf/errors.hpp"

namespace carenkf {

std::string to_string(BenchmarkKind b) {
  return b == BenchmarkKind::Slam ? "slam" : "lorenz96";
}

BenchmarkKind parse_benchmark(std::string_view name) {
  if (name == "slam") return BenchmarkKind::Slam;
  if (name == "lorenz96" || name == "lorenz") return BenchmarkKind::Lorenz96;
  throw ConfigError("unknown benchmark '" + std::string(name) + "' (expected slam|lorenz96)");
}

std::unique_ptr<BenchmarkModel> make_benchmark(BenchmarkKind kind, double noise_scale) {
  if (kind == BenchmarkKind::Slam) {
    return std::make_unique<SlamModel>(SlamParams::with_noise_scale(noise_scale));
  }
  return std::make_unique<Lorenz96Model>(Lorenz96Params::with_noise_scale(noise_scale));
}

std::vector<double> standard_noise_grid() {
  std::vector<double> grid;
  for (int k = -4; k <= 8; ++k) {
    grid.push_back(std::pow(10.0, 0.25 * k));
  }
  return grid;
}

std::vector<FilterConfig> ExperimentConfig::filters() const {
  std::vector<FilterConfig> out;
  for (const Variant v : variants) {
    for (const Mode m : modes) {
      FilterConfig f = filter;
      f.variant = v;
      f.mode = m;
      out.push_back(f);
    }
  }
  return out;
}

void ExperimentConfig::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (noise_scales.empty()) throw ConfigError("noise scale list is empty");
  for (const double s : noise_scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("noise scales must be positive");
  }
  if (variants.empty() || modes.empty()) throw ConfigError("no filter selected");
  if (steps < 0) throw ConfigError("steps must be >= 0 (0 selects the benchmark default)");
  if (ensemble_size != 0 && ensemble_size < 2) throw ConfigError("ensemble size must be >= 2");
  if (skip_steps < 0) throw ConfigError("skip steps must be >= 0");
  try {
    filter.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> items;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = trim(s.substr(start, comma == std::string_view::npos ? comma : comma - start));
    if (!item.empty()) items.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return items;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "'");
  }
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string copy(value);
  char* end = nullptr;
  const double out = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size()) {
    throw ConfigError("invalid value '" + copy + "' for '" + std::string(key) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for '" + std::string(key) + "'");
}

}  // namespace

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  try {
    if (key == "benchmark") {
      cfg.benchmark = parse_benchmark(value);
    } else if (key == "filter") {
      cfg.variants.clear();
      for (const auto item : split_list(value)) {
        if (item == "all") {
          cfg.variants = {Variant::Stochastic, Variant::Etkf};
          break;
        }
        cfg.variants.push_back(parse_variant(item));
      }
    } else if (key == "mode") {
      cfg.modes.clear();
      for (const auto item : split_list(value)) {
        if (item == "all") {
          cfg.modes = {Mode::Conventional, Mode::Improvement1, Mode::Car};
          break;
        }
        cfg.modes.push_back(parse_mode(item));
      }
    } else if (key == "runs") {
      cfg.runs = parse_number<int>(key, value);
    } else if (key == "seed") {
      cfg.base_seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "noise_scale" || key == "noise-scale") {
      cfg.noise_scales.clear();
      if (value == "grid") {
        cfg.noise_scales = standard_noise_grid();
      } else {
        for (const auto item : split_list(value)) cfg.noise_scales.push_back(parse_real(key, item));
      }
    } else if (key == "steps") {
      cfg.steps = parse_number<int>(key, value);
    } else if (key == "ensemble_size" || key == "ensemble-size") {
      cfg.ensemble_size = parse_number<Index>(key, value);
    } else if (key == "skip_steps") {
      cfg.skip_steps = parse_number<int>(key, value);
    } else if (key == "threads") {
      cfg.threads = parse_number<unsigned>(key, value);
    } else if (key == "out") {
      cfg.output_dir = std::string(value);
    } else if (key == "strict") {
      cfg.strict = parse_bool(key, value);
    } else if (key == "rho") {
      cfg.filter.rho = parse_real(key, value);
    } else if (key == "beta0") {
      cfg.filter.beta0 = parse_real(key, value);
    } else if (key == "lambda") {
      cfg.filter.lambda = parse_real(key, value);
    } else if (key == "mu") {
      cfg.filter.mu = parse_real(key, value);
    } else {
      throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text) {
  int line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    apply_config_text(cfg, buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

RunRecord run_single(const BenchmarkModel& model, const FilterConfig& filter,
                     std::uint64_t base_seed, int run_index, int steps, Index ensemble_size) {
  RunRecord record;
  record.run_index = run_index;
  const std::uint64_t seed = run_seed(base_seed, static_cast<std::uint64_t>(run_index));
  const std::vector<Index> metric = model.metric_indices();
  try {
    const TruthTrajectory truth = make_truth(model, seed, steps);
    GaussianSampler init = GaussianSampler::for_stream(seed, Stream::InitialEnsemble);
    Ensemble ensemble = make_initial_ensemble(model, truth.initial, ensemble_size, init);
    FilterRng rng = FilterRng::for_run(seed);
    CompensationState comp = CompensationState::initial(filter);
    for (int k = 1; k <= steps; ++k) {
      const auto idx = static_cast<std::size_t>(k - 1);
      StepResult result = step(ensemble, model, k - 1, truth.active[idx], truth.observations[idx],
                               filter, comp, rng);
      ensemble = std::move(result.analysis);
      comp = result.comp;
      const Vector mean = ensemble.members().rowwise().mean();
      double sq = 0.0;
      for (const Index i : metric) {
        const double err = mean(i) - truth.states[idx](i);
        sq += err * err;
      }
      record.squared_error.push_back(sq);
      record.reports.push_back(result.report);
    }
  } catch (const NumericalError& e) {
    record.diverged = true;
    record.failure = e.what();
  }
  return record;
}

AggregateResult aggregate(const std::vector<RunRecord>& records, const FilterConfig& filter,
                          double noise_scale, Index metric_count, int skip_steps) {
  AggregateResult result;
  result.filter = filter;
  result.noise_scale = noise_scale;
  result.runs = static_cast<int>(records.size());

  std::size_t steps = 0;
  int good = 0;
  for (const RunRecord& r : records) {
    if (r.diverged) {
      ++result.diverged_runs;
    } else {
      steps = std::max(steps, r.squared_error.size());
      ++good;
    }
  }
  if (good == 0) {
    result.time_avg_rmse = std::numeric_limits<double>::quiet_NaN();
    result.acceptance_rate = std::numeric_limits<double>::quiet_NaN();
    return result;
  }

  std::vector<double> sq(steps, 0.0);
  std::vector<double> beta(steps, 0.0);
  long updates = 0;
  long accepted = 0;
  // Fixed reduction order: records are indexed by run.
  for (const RunRecord& r : records) {
    if (r.diverged) continue;
    for (std::size_t k = 0; k < steps; ++k) {
      sq[k] += r.squared_error[k];
      beta[k] += r.reports[k].beta_after;
      if (r.reports[k].m > 0) {
        ++updates;
        accepted += r.reports[k].accepted ? 1 : 0;
      }
    }
  }
  const double denom = static_cast<double>(good) * static_cast<double>(metric_count);
  result.rmse.resize(steps);
  result.mean_beta.resize(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    result.rmse[k] = std::sqrt(sq[k] / denom);
    result.mean_beta[k] = beta[k] / good;
  }
  result.acceptance_rate = updates > 0 ? static_cast<double>(accepted) / updates : 1.0;

  const auto first = static_cast<std::size_t>(std::max(skip_steps, 0));
  if (first < steps) {
    double total = 0.0;
    for (std::size_t k = first; k < steps; ++k) total += result.rmse[k];
    result.time_avg_rmse = total / static_cast<double>(steps - first);
  } else {
    result.time_avg_rmse = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

AggregateResult run_experiment(const ExperimentConfig& cfg, const FilterConfig& filter,
                               double noise_scale) {
  cfg.validate();
  filter.validate();
  const std::unique_ptr<BenchmarkModel> model = make_benchmark(cfg.benchmark, noise_scale);
  const int steps = cfg.steps > 0 ? cfg.steps : model->default_steps();
  const Index size = cfg.ensemble_size > 0 ? cfg.ensemble_size : model->default_ensemble_size();

  std::vector<RunRecord> records(static_cast<std::size_t>(cfg.runs));
  unsigned workers = cfg.threads > 0 ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(cfg.runs));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < cfg.runs; i = next++) {
      try {
        records[static_cast<std::size_t>(i)] =
            run_single(*model, filter, cfg.base_seed, i, steps, size);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  return aggregate(records, filter, noise_scale, static_cast<Index>(model->metric_indices().size()),
                   cfg.skip_steps);
}

std::vector<double> dedupe_scales(const std::vector<double>& scales,
                                  std::vector<std::string>& warnings) {
  std::vector<double> out;
  for (const double s : scales) {
    const bool seen = std::any_of(out.begin(), out.end(), [s](double t) {
      return std::abs(t - s) <= 1e-12 * std::max(std::abs(t), std::abs(s));
    });
    if (seen) {
      std::ostringstream msg;
      msg << "duplicate noise scale " << s << " ignored";
      warnings.push_back(msg.str());
    } else {
      out.push_back(s);
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::vector<std::string>& warnings) {
  cfg.validate();
  const std::vector<double> scales = dedupe_scales(cfg.noise_scales, warnings);
  std::vector<SweepRow> rows;
  for (const double s : scales) {
    for (const FilterConfig& f : cfg.filters()) {
      const AggregateResult r = run_experiment(cfg, f, s);
      rows.push_back(SweepRow{s, f.variant, f.mode, r.time_avg_rmse, r.diverged_runs});
    }
  }
  return rows;
}

}  // namespace carenkf
