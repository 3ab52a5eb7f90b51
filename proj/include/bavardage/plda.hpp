#pragma once

#include <limits>

#include "bavardage/featurestore.hpp"
#include "bavardage/softkmeans.hpp"

namespace bavardage {

/// Whitening transform derived from the base within-class scatter
/// S_w = R diag(lambda) R^T. A row x maps to x' = diag(s) R^T x, i.e.
/// X' = X R diag(s) for row-major data, with s_i = min(lambda_i^-1/2, s_max).
struct Sphering {
  Matrix rotation;     // D x D, eigenvectors of S_w as columns, descending
  Vector scaling;      // length D
  Vector eigenvalues;  // descending
};

inline constexpr double kEigenvalueFloor = 1e-12;

Sphering build_sphering(const BaseStatistics& stats, double s_max);

Matrix sphere(const Matrix& features, const Sphering& sphering);

/// m'_k = sum_n o_nk x'_n / (gamma + N_k). Throws when gamma = 0 and N_k = 0.
Matrix estimate_offset_centroids(const Matrix& sphered, const SoftAssignments& assignments, double gamma);

/// Psi = sum_k (m'_k - m')(m'_k - m')^T with m' the unweighted centroid mean.
Matrix between_scatter(const Matrix& centroids);

struct DiscriminantBasis {
  Matrix basis;        // D x dims, orthonormal columns
  Vector eigenvalues;  // matching eigenvalues of Psi, descending
  int rank = 0;        // columns backed by eigenvalues above 1e-10 * trace(Psi)
};

/// Top `dims` eigenvectors of the between-class scatter of `centroids`.
///
/// Psi = C^T C for the K x D matrix C of centred centroids, so its non-zero
/// spectrum is read off the K x K Gram matrix C C^T instead of a D x D
/// problem. Missing directions (rank < dims) are completed deterministically
/// by Gram-Schmidt against the coordinate axes.
DiscriminantBasis discriminant_basis(const Matrix& centroids, int dims);

struct PldaProjection {
  Matrix rotation;   // R
  Vector scaling;    // s
  Matrix basis;      // V, D x (K-1)
  Matrix composite;  // W, D x (K-1), u_n = W^T x_n
};

struct SpheredTask {
  Matrix sphered;  // X', N x D
  Matrix reduced;  // U = X' V, N x (K-1)
};

/// Offset centroids -> between scatter -> top K-1 directions, applied to rows
/// that are already sphered.
DiscriminantBasis project_sphered(const Matrix& sphered, const SoftAssignments& assignments, double gamma,
                                  Matrix& reduced);

std::pair<SpheredTask, PldaProjection> plda_project(const Matrix& task_features, const Sphering& sphering,
                                                    const SoftAssignments& assignments, double gamma);

std::pair<SpheredTask, PldaProjection> plda_project(const Matrix& task_features, const BaseStatistics& stats,
                                                    double s_max, const SoftAssignments& assignments,
                                                    double gamma);

}  // namespace bavardage
