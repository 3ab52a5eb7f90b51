#pragma once

#include <optional>
#include <vector>

#include "bavardage/plda.hpp"
#include "bavardage/vb.hpp"

namespace bavardage {

struct BavardageConfig {
  double t_km = 10.0;
  double t_vb = 50.0;
  double s_max = 2.0;
  double alpha_o = 2.0;
  double beta_o = 10.0;
  double gamma = 10.0;  // centroid offset in the projection step
  int n_step = 20;
  int softkmeans_max_iter = 20;
  double softkmeans_tol = 1e-4;
  std::optional<double> early_stop;  // stop once max assignment change < this

  void validate() const;
  SoftKmeansOptions softkmeans() const { return {t_km, softkmeans_max_iter, softkmeans_tol}; }
  VBPriors priors() const { return {alpha_o, beta_o, {}, t_vb}; }
};

struct IterationRecord {
  double elbo = 0.0;
  double max_change = 0.0;
};

struct Prediction {
  std::vector<int> labels;  // per query row, argmax with lowest-index ties
  SoftAssignments assignments;
  std::vector<IterationRecord> trace;
  bool stopped_early = false;
};

/// argmax labels of the unclamped rows, in row order.
std::vector<int> query_argmax(const SoftAssignments& assignments);

/// Soft-KMEANS initialization, then n_step rounds of
/// {project with the current assignments, VB M-step, VB E-step}.
Prediction run_bavardage(const TaskInstance& task, const Sphering& sphering, const BavardageConfig& cfg);
Prediction run_bavardage(const TaskInstance& task, const BaseStatistics& stats, const BavardageConfig& cfg);

/// The same loop starting from given assignments; the task rows are sphered
/// once up front.
Prediction refine_bavardage(const Matrix& features, const SoftAssignments& init, const Sphering& sphering,
                            const BavardageConfig& cfg);

/// Soft-KMEANS alone.
Prediction run_soft_kmeans_baseline(const TaskInstance& task, const BavardageConfig& cfg);
Prediction run_soft_kmeans_baseline(const TaskInstance& task, const BaseStatistics& stats,
                                    const BavardageConfig& cfg);

}  // namespace bavardage
