#include <doctest.h>

#include <numeric>

#include "bavardage/error.hpp"
#include "bavardage/pipeline.hpp"
#include "support.hpp"

using namespace bavardage;

namespace {

BaseStatistics isotropic_stats(Eigen::Index dims, double variance) {
  BaseStatistics s;
  s.mean = Vector::Zero(dims);
  s.scatter = variance * Matrix::Identity(dims, dims);
  return s;
}

Matrix separated_means(int classes, Eigen::Index dims, double distance) {
  // pairwise distance = distance
  Matrix means = Matrix::Zero(classes, dims);
  for (int k = 0; k < classes; ++k) means(k, k) = distance / std::sqrt(2.0);
  return means;
}

double accuracy(const Prediction& p, const TaskInstance& task) {
  int correct = 0;
  for (std::size_t i = 0; i < p.labels.size(); ++i) correct += p.labels[i] == task.query_labels_hidden[i];
  return static_cast<double>(correct) / static_cast<double>(p.labels.size());
}

// Relabels local classes: new id = perm[old id]. Support blocks are reordered
// so they stay grouped by the new ids.
TaskInstance permute_classes(const TaskInstance& task, const std::vector<int>& perm) {
  TaskInstance out = task;
  const int k = task.ways();
  const auto shots = task.support_features.rows() / k;
  std::vector<int> inverse(perm.size());
  for (int i = 0; i < k; ++i) inverse[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
  for (int c = 0; c < k; ++c) {
    out.support_features.middleRows(c * shots, shots) =
        task.support_features.middleRows(inverse[static_cast<std::size_t>(c)] * shots, shots);
    for (Eigen::Index s = 0; s < shots; ++s) out.support_labels[static_cast<std::size_t>(c * shots + s)] = c;
    out.class_map[static_cast<std::size_t>(c)] = task.class_map[static_cast<std::size_t>(inverse[static_cast<std::size_t>(c)])];
  }
  for (auto& label : out.query_labels_hidden) label = perm[static_cast<std::size_t>(label)];
  return out;
}

}  // namespace

TEST_CASE("three well-separated classes are classified perfectly") {
  std::mt19937_64 gen(41);
  const BavardageConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const auto task = testing::gaussian_task(gen, separated_means(3, 8, 10.0), 1, {10, 10, 10}, 1.0);
    const auto stats = isotropic_stats(8, 1.0);
    CHECK(accuracy(run_bavardage(task, stats, cfg), task) == 1.0);
    CHECK(accuracy(run_soft_kmeans_baseline(task, stats, cfg), task) == 1.0);
  }
}

TEST_CASE("one step and twenty steps agree on separable data") {
  std::mt19937_64 gen(43);
  BavardageConfig one;
  one.n_step = 1;
  const BavardageConfig twenty;
  for (int trial = 0; trial < 10; ++trial) {
    const auto task = testing::gaussian_task(gen, separated_means(4, 6, 10.0), 2, {8, 3, 11, 5}, 1.0);
    const auto stats = isotropic_stats(6, 1.0);
    CHECK(run_bavardage(task, stats, one).labels == run_bavardage(task, stats, twenty).labels);
  }
}

TEST_CASE("permuting class identities permutes the predictions") {
  std::mt19937_64 gen(47);
  const BavardageConfig cfg;
  std::vector<int> perm{2, 0, 3, 1};
  for (int trial = 0; trial < 10; ++trial) {
    const auto task = testing::gaussian_task(gen, testing::random_matrix(gen, 4, 5, 1.5), 1, {6, 9, 4, 7}, 1.0);
    const auto stats = isotropic_stats(5, 1.0);
    const auto base = run_bavardage(task, stats, cfg);
    const auto permuted = run_bavardage(permute_classes(task, perm), stats, cfg);
    REQUIRE(base.labels.size() == permuted.labels.size());
    for (std::size_t i = 0; i < base.labels.size(); ++i)
      CHECK(permuted.labels[i] == perm[static_cast<std::size_t>(base.labels[i])]);
    const auto s = task.support_features.rows();
    for (Eigen::Index q = s; q < base.assignments.rows(); ++q)
      for (int k = 0; k < 4; ++k)
        CHECK(std::abs(permuted.assignments.probs(q, perm[static_cast<std::size_t>(k)]) - base.assignments.probs(q, k)) <
              1e-8);
  }
}

TEST_CASE("baseline equals the initialization stage") {
  std::mt19937_64 gen(53);
  const BavardageConfig cfg;
  const auto task = testing::gaussian_task(gen, testing::random_matrix(gen, 5, 4), 1, {3, 7, 5, 2, 9}, 1.0);
  const auto baseline = run_soft_kmeans_baseline(task, cfg);
  const auto init = soft_kmeans_init(task, cfg.softkmeans());
  CHECK(baseline.assignments.probs == init.probs);
  CHECK(baseline.trace.empty());
}

TEST_CASE("support rows stay one-hot and labels are argmax of query rows") {
  std::mt19937_64 gen(59);
  BavardageConfig cfg;
  cfg.n_step = 7;
  for (int trial = 0; trial < 10; ++trial) {
    const auto task = testing::gaussian_task(gen, testing::random_matrix(gen, 3, 4, 0.8), 2, {5, 5, 5}, 1.0);
    const auto p = run_bavardage(task, isotropic_stats(4, 1.0), cfg);
    CHECK(p.trace.size() == 7u);
    for (Eigen::Index n = 0; n < task.support_features.rows(); ++n)
      for (int k = 0; k < 3; ++k)
        CHECK(p.assignments.probs(n, k) == (k == task.support_labels[static_cast<std::size_t>(n)] ? 1.0 : 0.0));
    for (std::size_t i = 0; i < p.labels.size(); ++i)
      CHECK(p.labels[i] ==
            numerics::argmax(p.assignments.probs.row(task.support_features.rows() + static_cast<Eigen::Index>(i))));
  }
}

TEST_CASE("identical inputs give bit-identical predictions") {
  std::mt19937_64 gen(61);
  const BavardageConfig cfg;
  const auto task = testing::gaussian_task(gen, testing::random_matrix(gen, 5, 6), 1, {10, 20, 5, 15, 25}, 1.0);
  const auto a = run_bavardage(task, isotropic_stats(6, 0.5), cfg);
  const auto b = run_bavardage(task, isotropic_stats(6, 0.5), cfg);
  CHECK(a.labels == b.labels);
  CHECK(a.assignments.probs == b.assignments.probs);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].elbo == b.trace[i].elbo);
}

TEST_CASE("scaling features and scatter leaves labels unchanged") {
  std::mt19937_64 gen(67);
  for (int trial = 0; trial < 10; ++trial) {
    const auto task = testing::gaussian_task(gen, testing::random_matrix(gen, 4, 5), 1, {6, 6, 6, 6}, 1.0);
    const Matrix scatter = testing::random_spd(gen, 5, 0.5);  // eigenvalues well above 1/s_max^2
    BaseStatistics stats;
    stats.mean = Vector::Zero(5);
    stats.scatter = scatter;
    for (double c : {0.1, 3.0, 40.0}) {
      BaseStatistics scaled = stats;
      scaled.scatter = c * c * scatter;
      BavardageConfig cfg;
      cfg.s_max = 1e6;  // keeps the clamp inactive at every scale
      const auto init = soft_kmeans_init(task, cfg.softkmeans());
      const auto a = refine_bavardage(task.stacked_features(), init, build_sphering(stats, cfg.s_max), cfg);
      const auto b = refine_bavardage(c * task.stacked_features(), init, build_sphering(scaled, cfg.s_max), cfg);
      CHECK(a.labels == b.labels);

      // The whole pipeline is invariant once t_km absorbs the scale too.
      TaskInstance scaled_task = task;
      scaled_task.support_features *= c;
      scaled_task.query_features *= c;
      BavardageConfig scaled_cfg = cfg;
      scaled_cfg.t_km = cfg.t_km / (c * c);
      CHECK(run_bavardage(task, stats, cfg).labels == run_bavardage(scaled_task, scaled, scaled_cfg).labels);
    }
  }
}

TEST_CASE("early stop ends the loop once assignments settle") {
  std::mt19937_64 gen(71);
  BavardageConfig cfg;
  cfg.n_step = 50;
  cfg.early_stop = 1e-5;
  const auto task = testing::gaussian_task(gen, separated_means(3, 4, 10.0), 1, {5, 5, 5}, 1.0);
  const auto p = run_bavardage(task, isotropic_stats(4, 1.0), cfg);
  CHECK(p.stopped_early);
  CHECK(p.trace.size() < 50u);
  CHECK(p.trace.back().max_change < 1e-5);
}

TEST_CASE("config validation") {
  BavardageConfig cfg;
  cfg.n_step = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.gamma = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.t_vb = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
