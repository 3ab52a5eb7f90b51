#pragma once

#include <vector>

#include "bavardage/sampler.hpp"

namespace bavardage {

/// N x K responsibilities o_nk. Rows with clamped_label[n] >= 0 are labelled
/// support rows and stay one-hot on that label.
struct SoftAssignments {
  Matrix probs;
  std::vector<int> clamped_label;  // -1 for free (query) rows

  Eigen::Index rows() const { return probs.rows(); }
  Eigen::Index classes() const { return probs.cols(); }
  bool is_clamped(Eigen::Index n) const { return clamped_label[static_cast<std::size_t>(n)] >= 0; }

  /// N_k = sum_n o_nk.
  Vector class_mass() const { return probs.colwise().sum().transpose(); }

  /// Overwrites clamped rows with their one-hot label.
  void clamp();
};

/// Clamp vector for a task laid out as support rows followed by query rows.
std::vector<int> task_clamp(const TaskInstance& task);

struct SoftKmeansOptions {
  double t_km = 10.0;  // precision of the isotropic cluster covariance I / t_km
  int max_iter = 20;
  double tol = 1e-4;   // stop once the largest assignment change is below this
};

/// Soft-KMEANS on the stacked task rows (support first). Centroids start at
/// the support class means; each round computes query responsibilities
/// softmax_k(-t_km/2 * |x_n - mu_k|^2), then re-estimates every centroid from
/// all rows weighted by their responsibility.
SoftAssignments soft_kmeans(const Matrix& features, const std::vector<int>& clamped_label, int classes,
                            const SoftKmeansOptions& options);

SoftAssignments soft_kmeans_init(const TaskInstance& task, const SoftKmeansOptions& options);

}  // namespace bavardage
