#include "carenkf/system_model.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace carenkf {

bool MeasurementMap::has_angular() const {
  return std::any_of(angular.begin(), angular.end(), [](bool a) { return a; });
}

MeasurementMap MeasurementMap::plain(Index dim, std::function<Vector(const Vector&)> eval) {
  return MeasurementMap{std::move(eval), std::vector<bool>(static_cast<std::size_t>(dim), false)};
}

LinearGaussianModel::LinearGaussianModel(Matrix transition, Matrix process_cov, Matrix observation,
                                         Matrix obs_cov)
    : transition_(std::move(transition)),
      noise_factor_(sym_sqrt_psd(process_cov)),
      observation_(std::move(observation)),
      obs_cov_(std::move(obs_cov)) {
  if (transition_.rows() != transition_.cols() || observation_.cols() != transition_.rows() ||
      obs_cov_.rows() != observation_.rows()) {
    throw std::invalid_argument("LinearGaussianModel: inconsistent dimensions");
  }
}

Vector LinearGaussianModel::advance(const Vector& x, int /*step*/) const { return transition_ * x; }

MeasurementMap LinearGaussianModel::measurement(const ActiveSet& active) const {
  Matrix rows(static_cast<Index>(active.size()), observation_.cols());
  for (std::size_t r = 0; r < active.size(); ++r) {
    rows.row(static_cast<Index>(r)) = observation_.row(active[r]);
  }
  return MeasurementMap::plain(rows.rows(), [rows](const Vector& x) { return Vector(rows * x); });
}

Matrix LinearGaussianModel::measurement_noise(const ActiveSet& active) const {
  const auto m = static_cast<Index>(active.size());
  Matrix r(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      r(i, j) = obs_cov_(active[i], active[j]);
    }
  }
  return r;
}

std::vector<Index> LinearGaussianModel::metric_indices() const {
  std::vector<Index> idx(static_cast<std::size_t>(state_dim()));
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

ActiveSet LinearGaussianModel::all_components() const {
  ActiveSet all(static_cast<std::size_t>(observation_.rows()));
  std::iota(all.begin(), all.end(), Index{0});
  return all;
}

}  // namespace carenkf
