#include "bavardage/softkmeans.hpp"

#include "bavardage/error.hpp"

namespace bavardage {

void SoftAssignments::clamp() {
  for (Eigen::Index n = 0; n < probs.rows(); ++n) {
    const int label = clamped_label[static_cast<std::size_t>(n)];
    if (label < 0) continue;
    probs.row(n).setZero();
    probs(n, label) = 1.0;
  }
}

std::vector<int> task_clamp(const TaskInstance& task) {
  std::vector<int> clamp = task.support_labels;
  clamp.resize(task.support_labels.size() + task.query_features.rows(), -1);
  return clamp;
}

namespace {

Matrix weighted_centroids(const Matrix& features, const Matrix& probs) {
  const Vector mass = probs.colwise().sum().transpose();
  Matrix centroids = probs.transpose() * features;
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    if (!(mass[k] > 0.0))
      throw Error("empty_class", "class " + std::to_string(k) + " has zero total responsibility");
    centroids.row(k) /= mass[k];
  }
  return centroids;
}

}  // namespace

SoftAssignments soft_kmeans(const Matrix& features, const std::vector<int>& clamped_label, int classes,
                            const SoftKmeansOptions& options) {
  if (!(options.t_km > 0.0)) throw Error("bad_config", "t_km must be positive");
  if (classes < 1) throw Error("bad_argument", "soft_kmeans needs at least one class");
  if (clamped_label.size() != static_cast<std::size_t>(features.rows()))
    throw Error("dimension_mismatch", "clamp vector length differs from the row count");
  for (int label : clamped_label)
    if (label >= classes) throw Error("bad_argument", "clamped label out of range");

  SoftAssignments out{Matrix::Constant(features.rows(), classes, 1.0 / classes), clamped_label};
  out.clamp();

  // Initial centroids: means of the clamped rows only.
  Matrix support_only = Matrix::Zero(features.rows(), classes);
  for (Eigen::Index n = 0; n < features.rows(); ++n)
    if (out.is_clamped(n)) support_only(n, clamped_label[static_cast<std::size_t>(n)]) = 1.0;
  Matrix centroids = weighted_centroids(features, support_only);

  for (int iter = 0; iter < options.max_iter; ++iter) {
    Matrix logits(features.rows(), classes);
    for (Eigen::Index k = 0; k < classes; ++k)
      logits.col(k) = -0.5 * options.t_km * (features.rowwise() - centroids.row(k)).rowwise().squaredNorm();

    Matrix updated = numerics::normalize_log_rows(logits);
    SoftAssignments next{std::move(updated), clamped_label};
    next.clamp();
    const double change = (next.probs - out.probs).cwiseAbs().maxCoeff();
    out = std::move(next);
    if (change < options.tol) break;
    centroids = weighted_centroids(features, out.probs);
  }
  return out;
}

SoftAssignments soft_kmeans_init(const TaskInstance& task, const SoftKmeansOptions& options) {
  return soft_kmeans(task.stacked_features(), task_clamp(task), task.ways(), options);
}

}  // namespace bavardage
