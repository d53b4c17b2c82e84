#include "carenkf/random.hpp"

namespace carenkf {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t run_seed, Stream purpose) {
  std::uint64_t state = run_seed;
  const std::uint64_t mixed = splitmix64(state);
  state = mixed ^ (static_cast<std::uint64_t>(purpose) * 0xD1B54A32D192ED03ULL);
  return splitmix64(state);
}

GaussianSampler::GaussianSampler(std::uint64_t seed) : seed_(seed), engine_(seed) {}

double GaussianSampler::normal() { return normal_(engine_); }

double GaussianSampler::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

Eigen::MatrixXd GaussianSampler::standard_normal(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      out(i, j) = normal_(engine_);
    }
  }
  return out;
}

}  // namespace carenkf
