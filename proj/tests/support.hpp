#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bavardage/featurestore.hpp"
#include "bavardage/sampler.hpp"
#include "bavardage/softkmeans.hpp"

namespace testing {

using bavardage::Matrix;
using bavardage::Vector;

inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("bavardage_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Matrix random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(gen);
  return m;
}

inline Matrix random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  const Matrix a = random_matrix(gen, n, n);
  return 0.5 * (a + a.transpose());
}

inline Matrix random_spd(std::mt19937_64& gen, Eigen::Index n, double ridge = 0.1) {
  const Matrix a = random_matrix(gen, n, n);
  return a * a.transpose() / static_cast<double>(n) + ridge * Matrix::Identity(n, n);
}

/// Random row-stochastic matrix with clamped rows one-hot.
inline bavardage::SoftAssignments random_assignments(std::mt19937_64& gen, Eigen::Index rows, int classes,
                                                     std::vector<int> clamp) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Matrix p(rows, classes);
  for (Eigen::Index n = 0; n < rows; ++n) {
    for (int k = 0; k < classes; ++k) p(n, k) = u(gen);
    p.row(n) /= p.row(n).sum();
  }
  bavardage::SoftAssignments a{p, std::move(clamp)};
  a.clamp();
  return a;
}

/// Task whose class k has `shots` support rows and `queries[k]` query rows,
/// each drawn around means.row(k) with isotropic noise `std_dev`.
inline bavardage::TaskInstance gaussian_task(std::mt19937_64& gen, const Matrix& means, int shots,
                                             const std::vector<int>& queries, double std_dev) {
  std::normal_distribution<double> normal(0.0, std_dev);
  const auto k_count = static_cast<int>(means.rows());
  const auto d = means.cols();
  bavardage::TaskInstance task;
  int total_queries = 0;
  for (int q : queries) total_queries += q;
  task.support_features.resize(k_count * shots, d);
  task.query_features.resize(total_queries, d);
  Eigen::Index row = 0;
  for (int k = 0; k < k_count; ++k) {
    task.class_map.push_back(k);
    for (int s = 0; s < shots; ++s, ++row) {
      for (Eigen::Index j = 0; j < d; ++j) task.support_features(row, j) = means(k, j) + normal(gen);
      task.support_labels.push_back(k);
      task.support_rows.push_back(row);
    }
  }
  Eigen::Index qrow = 0;
  for (int k = 0; k < k_count; ++k)
    for (int q = 0; q < queries[static_cast<std::size_t>(k)]; ++q, ++qrow) {
      for (Eigen::Index j = 0; j < d; ++j) task.query_features(qrow, j) = means(k, j) + normal(gen);
      task.query_labels_hidden.push_back(k);
      task.query_rows.push_back(row + qrow);
    }
  return task;
}

/// Base-split bundle with `classes` Gaussian classes sharing covariance `cov`.
inline bavardage::FeatureBundle gaussian_bundle(std::mt19937_64& gen, const Matrix& means, const Matrix& cov,
                                                int per_class, bavardage::SplitTag split) {
  const Eigen::LLT<Matrix> llt(cov);
  const Matrix chol = llt.matrixL();
  const auto d = means.cols();
  Matrix features(means.rows() * per_class, d);
  std::vector<std::string> labels;
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < means.rows(); ++c)
    for (int i = 0; i < per_class; ++i, ++r) {
      features.row(r) = means.row(c) + (chol * random_matrix(gen, d, 1)).transpose();
      labels.push_back("c" + std::to_string(c));
    }
  return bavardage::make_bundle(std::move(features), labels, split);
}

}  // namespace testing
