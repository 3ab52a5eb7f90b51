#include "bavardage/plda.hpp"

#include <algorithm>
#include <cmath>

#include "bavardage/error.hpp"

namespace bavardage {

Sphering build_sphering(const BaseStatistics& stats, double s_max) {
  if (!(s_max > 0.0)) throw Error("bad_config", "s_max must be positive");
  auto eig = numerics::sym_eigh(stats.scatter);
  Sphering out{std::move(eig.vectors), Vector(eig.values.size()), std::move(eig.values)};
  for (Eigen::Index i = 0; i < out.scaling.size(); ++i) {
    const double lambda = std::max(out.eigenvalues[i], kEigenvalueFloor);
    out.scaling[i] = std::min(1.0 / std::sqrt(lambda), s_max);
  }
  return out;
}

Matrix sphere(const Matrix& features, const Sphering& sphering) {
  if (features.cols() != sphering.rotation.rows())
    throw Error("dimension_mismatch", "feature dimension differs from the sphering transform");
  return (features * sphering.rotation) * sphering.scaling.asDiagonal();
}

Matrix estimate_offset_centroids(const Matrix& sphered, const SoftAssignments& assignments, double gamma) {
  if (gamma < 0.0) throw Error("bad_config", "gamma must be non-negative");
  if (assignments.rows() != sphered.rows())
    throw Error("dimension_mismatch", "assignments and features differ in row count");
  const Vector mass = assignments.class_mass();
  Matrix centroids = assignments.probs.transpose() * sphered;
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    const double denom = gamma + mass[k];
    if (!(denom > 0.0))
      throw Error("empty_class", "class " + std::to_string(k) + " has no mass and gamma is zero");
    centroids.row(k) /= denom;
  }
  return centroids;
}

Matrix between_scatter(const Matrix& centroids) {
  const Matrix centred = centroids.rowwise() - centroids.colwise().mean();
  Matrix psi = centred.transpose() * centred;
  return 0.5 * (psi + psi.transpose());
}

DiscriminantBasis discriminant_basis(const Matrix& centroids, int dims) {
  const Eigen::Index d = centroids.cols();
  if (dims < 0 || dims > d)
    throw Error("dimension_mismatch", "cannot extract " + std::to_string(dims) + " directions from dimension " +
                                          std::to_string(d));

  const Matrix centred = centroids.rowwise() - centroids.colwise().mean();
  const Matrix gram = centred * centred.transpose();
  const double trace = gram.trace();
  const auto eig = numerics::sym_eigh(gram);

  DiscriminantBasis out{Matrix::Zero(d, dims), Vector::Zero(dims), 0};
  auto orthogonalize = [&](Vector v, int filled) {
    for (int pass = 0; pass < 2; ++pass)
      for (int j = 0; j < filled; ++j) v -= out.basis.col(j).dot(v) * out.basis.col(j);
    return v;
  };

  int filled = 0;
  for (Eigen::Index i = 0; i < eig.values.size() && filled < dims; ++i) {
    if (!(trace > 0.0) || eig.values[i] <= 1e-10 * trace) break;
    Vector v = orthogonalize(centred.transpose() * eig.vectors.col(i), filled);
    const double norm = v.norm();
    if (!(norm > 0.0)) break;
    out.basis.col(filled) = v / norm;
    out.eigenvalues[filled] = eig.values[i];
    ++filled;
  }
  out.rank = filled;

  for (Eigen::Index axis = 0; axis < d && filled < dims; ++axis) {
    Vector v = orthogonalize(Vector::Unit(d, axis), filled);
    const double norm = v.norm();
    if (norm > 1e-6) out.basis.col(filled++) = v / norm;
  }
  numerics::canonicalize_signs(out.basis);
  return out;
}

DiscriminantBasis project_sphered(const Matrix& sphered, const SoftAssignments& assignments, double gamma,
                                  Matrix& reduced) {
  const auto k = assignments.classes();
  if (k < 2) throw Error("bad_argument", "projection needs at least two classes");
  const Matrix centroids = estimate_offset_centroids(sphered, assignments, gamma);
  auto basis = discriminant_basis(centroids, static_cast<int>(k - 1));
  reduced = sphered * basis.basis;
  return basis;
}

std::pair<SpheredTask, PldaProjection> plda_project(const Matrix& task_features, const Sphering& sphering,
                                                    const SoftAssignments& assignments, double gamma) {
  SpheredTask task{sphere(task_features, sphering), {}};
  auto basis = project_sphered(task.sphered, assignments, gamma, task.reduced);
  PldaProjection projection{sphering.rotation, sphering.scaling, std::move(basis.basis), {}};
  projection.composite = sphering.rotation * sphering.scaling.asDiagonal() * projection.basis;
  return {std::move(task), std::move(projection)};
}

std::pair<SpheredTask, PldaProjection> plda_project(const Matrix& task_features, const BaseStatistics& stats,
                                                    double s_max, const SoftAssignments& assignments,
                                                    double gamma) {
  return plda_project(task_features, build_sphering(stats, s_max), assignments, gamma);
}

}  // namespace bavardage
