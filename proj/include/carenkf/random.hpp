#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace carenkf {

// Independent random streams used inside one Monte-Carlo run.
enum class Stream : std::uint64_t {
  Truth = 1,
  InitialEnsemble = 2,
  ProcessNoise = 3,
  ObservationPerturbation = 4,
  Oracle = 5,
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of run `run_index` under experiment seed `base_seed`.
constexpr std::uint64_t run_seed(std::uint64_t base_seed, std::uint64_t run_index) {
  return base_seed ^ run_index;
}

/// Seed of one purpose-specific stream of a run. Streams are decorrelated by
/// two rounds of splitmix64 over (run_seed, purpose).
std::uint64_t stream_seed(std::uint64_t run_seed, Stream purpose);

/// Single-owner Gaussian/uniform source. Move-only: copying would silently
/// duplicate a stream.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed);

  static GaussianSampler for_stream(std::uint64_t run_seed, Stream purpose) {
    return GaussianSampler(stream_seed(run_seed, purpose));
  }

  GaussianSampler(GaussianSampler&&) noexcept = default;
  GaussianSampler& operator=(GaussianSampler&&) noexcept = default;
  GaussianSampler(const GaussianSampler&) = delete;
  GaussianSampler& operator=(const GaussianSampler&) = delete;

  std::uint64_t seed() const { return seed_; }

  double normal();
  double uniform(double lo, double hi);

  // Column-major fill, so results depend only on the seed and the shape.
  Eigen::MatrixXd standard_normal(Eigen::Index rows, Eigen::Index cols);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace carenkf
