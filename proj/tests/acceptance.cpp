// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carenkf/harness.hpp"
#include "carenkf/oracles.hpp"

using namespace carenkf;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c, d);
  return buf;
}

Verdict from(const oracles::Outcome& o) { return {o.passed, o.detail}; }

Verdict with_budget(Verdict v, double seconds, double budget) {
  v.detail += fmt("; %.1f s (budget %.0f s)", seconds, budget);
  v.passed = v.passed && seconds < budget;
  return v;
}

// Time-averaged RMSE (steps 11+) per filter on one benchmark at one noise scale.
std::map<std::string, double> curve_rmse(BenchmarkKind kind, int runs, double scale,
                                         const std::vector<Mode>& modes, int& diverged) {
  ExperimentConfig cfg;
  cfg.benchmark = kind;
  cfg.runs = runs;
  cfg.modes = modes;
  std::map<std::string, double> out;
  for (const FilterConfig& f : cfg.filters()) {
    const AggregateResult r = run_experiment(cfg, f, scale);
    diverged += r.diverged_runs;
    out[f.label()] = r.time_avg_rmse;
  }
  return out;
}

Verdict etkf_target_covariance() {
  const auto t0 = Clock::now();
  const oracles::Outcome a = oracles::etkf_target_covariance(100, 40, 20, 50, 0.0, 101);
  const oracles::Outcome b = oracles::etkf_target_covariance(100, 40, 20, 50, 2.0, 102);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  Verdict v{a.passed && b.passed,
            fmt("worst relative Frobenius error %.3g (beta=0), %.3g (beta=2), bound 1e-8",
                a.measured, b.measured)};
  return with_budget(v, secs, 10.0);
}

Verdict stochastic_target_covariance() {
  const auto t0 = Clock::now();
  const oracles::Outcome o = oracles::stochastic_target_covariance(5, 3, 10, 10000, 2.0, 201);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  return with_budget(from(o), secs, 30.0);
}

Verdict lorenz() {
  const auto t0 = Clock::now();
  int diverged = 0;
  const auto rmse = curve_rmse(BenchmarkKind::Lorenz96, 100, 1.0,
                               {Mode::Conventional, Mode::Improvement1, Mode::Car}, diverged);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool ok = diverged == 0;
  std::string detail;
  for (const char* variant : {"stochastic", "etkf"}) {
    const std::string v(variant);
    const double conv = rmse.at(v + "/conventional");
    const double car = rmse.at(v + "/car") / conv;
    const double i1 = rmse.at(v + "/i1") / conv;
    ok = ok && car < 0.1 && i1 < 0.5;
    detail += v + fmt(": conv %.3g, CAR/conv %.3f (<0.1), I1/conv %.3f (<0.5); ", conv, car, i1);
  }
  detail += "diverged runs " + std::to_string(diverged);
  return with_budget({ok, detail}, secs, 600.0);
}

Verdict slam() {
  const auto t0 = Clock::now();
  int diverged = 0;
  const auto rmse = curve_rmse(BenchmarkKind::Slam, 100, 1.0,
                               {Mode::Conventional, Mode::Improvement1, Mode::Car}, diverged);
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  bool ok = diverged == 0;
  std::string detail;
  for (const char* variant : {"stochastic", "etkf"}) {
    const std::string v(variant);
    const double conv = rmse.at(v + "/conventional");
    const double car = rmse.at(v + "/car") / conv;
    const double i1 = rmse.at(v + "/i1") / conv;
    ok = ok && car <= 0.7 && i1 <= 0.95;
    detail += v + fmt(": conv %.3g, CAR/conv %.3f (<=0.7), I1/conv %.3f (<=0.95); ", conv, car, i1);
  }
  detail += "diverged runs " + std::to_string(diverged);
  return with_budget({ok, detail}, secs, 900.0);
}

Verdict sweep_trend() {
  ExperimentConfig cfg;
  cfg.benchmark = BenchmarkKind::Slam;
  cfg.runs = 50;
  cfg.modes = {Mode::Conventional, Mode::Car};
  cfg.noise_scales = {0.1, std::pow(10.0, -0.5), 1.0, 10.0, 100.0};
  std::vector<std::string> warnings;
  const std::vector<SweepRow> rows = run_sweep(cfg, warnings);

  bool ok = true;
  std::string detail;
  for (const Variant v : cfg.variants) {
    std::map<double, std::pair<double, double>> by_scale;  // conventional, CAR
    int diverged = 0;
    for (const SweepRow& r : rows) {
      if (r.variant != v) continue;
      diverged += r.diverged_runs;
      (r.mode == Mode::Car ? by_scale[r.scale].second : by_scale[r.scale].first) = r.rmse_avg;
    }
    std::vector<double> ratios;
    for (const auto& [s, pair] : by_scale) ratios.push_back(pair.second / pair.first);
    const bool smallest_first =
        std::all_of(ratios.begin() + 1, ratios.end(), [&](double r) { return r > ratios.front(); });
    const bool converges = ratios.back() >= 0.5 && ratios.back() <= 1.05;
    ok = ok && smallest_first && converges && diverged == 0;
    detail += to_string(v) + ": CAR/conv ratios";
    for (const double r : ratios) detail += fmt(" %.3f", r);
    detail += "; ";
  }
  detail += "scales 0.1, 0.316, 1, 10, 100 with 50 runs each";
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criterion numbers")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"CAR-ETKF realises the target covariance", etkf_target_covariance},
      {"CAR-stochastic covariance in expectation", stochastic_target_covariance},
      {"Linear reduction to the conventional ETKF",
       [] { return from(oracles::linear_reduction(100, 301)); }},
      {"Quadratic mismatch closed form", [] { return from(oracles::quadratic_mismatch(100, 401)); }},
      {"Lorenz-96 desk-scale RMSE reduction", lorenz},
      {"SLAM desk-scale RMSE reduction", slam},
      {"SLAM noise-sweep trend", sweep_trend},
      {"NIS consistency on a linear-Gaussian system",
       [] { return from(oracles::nis_consistency(2000, 801)); }},
      {"Initial ensemble-mean error", [] { return from(oracles::initial_mean_error(500, 50, 901)); }},
      {"RK4 convergence order", [] { return from(oracles::rk4_order()); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i + 1);
    if (!selected.empty() && !selected.count(number)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += v.passed ? 0 : 1;
    std::printf("[%s] %2d. %s: %s\n", v.passed ? "PASS" : "FAIL", number, criteria[i].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
