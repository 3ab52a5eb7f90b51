#include "bavardage/pipeline.hpp"

#include "bavardage/error.hpp"

namespace bavardage {

void BavardageConfig::validate() const {
  if (!(t_km > 0.0) || !(t_vb > 0.0) || !(s_max > 0.0))
    throw Error("bad_config", "t_km, t_vb and s_max must be positive");
  if (!(alpha_o > 0.0) || !(beta_o > 0.0)) throw Error("bad_config", "alpha_o and beta_o must be positive");
  if (gamma < 0.0) throw Error("bad_config", "gamma must be non-negative");
  if (n_step < 1) throw Error("bad_config", "n_step must be at least 1");
  if (softkmeans_max_iter < 1) throw Error("bad_config", "softkmeans_max_iter must be at least 1");
  if (!(softkmeans_tol > 0.0)) throw Error("bad_config", "softkmeans_tol must be positive");
}

std::vector<int> query_argmax(const SoftAssignments& assignments) {
  std::vector<int> labels;
  for (Eigen::Index n = 0; n < assignments.rows(); ++n)
    if (!assignments.is_clamped(n)) labels.push_back(static_cast<int>(numerics::argmax(assignments.probs.row(n))));
  return labels;
}

Prediction refine_bavardage(const Matrix& features, const SoftAssignments& init, const Sphering& sphering,
                            const BavardageConfig& cfg) {
  cfg.validate();
  const VBPriors priors = cfg.priors();
  const Matrix sphered = sphere(features, sphering);

  Prediction out{{}, init, {}, false};
  Matrix reduced;
  for (int step = 0; step < cfg.n_step; ++step) {
    project_sphered(sphered, out.assignments, cfg.gamma, reduced);
    const VBPosterior posterior = m_step(reduced, out.assignments, priors);
    SoftAssignments next = e_step(reduced, posterior, priors, out.assignments.clamped_label);

    IterationRecord record;
    record.max_change = (next.probs - out.assignments.probs).cwiseAbs().maxCoeff();
    record.elbo = compute_elbo(reduced, next, posterior, priors);
    out.trace.push_back(record);
    out.assignments = std::move(next);
    if (cfg.early_stop && record.max_change < *cfg.early_stop) {
      out.stopped_early = true;
      break;
    }
  }
  out.labels = query_argmax(out.assignments);
  return out;
}

Prediction run_bavardage(const TaskInstance& task, const Sphering& sphering, const BavardageConfig& cfg) {
  cfg.validate();
  const Matrix features = task.stacked_features();
  const SoftAssignments init = soft_kmeans(features, task_clamp(task), task.ways(), cfg.softkmeans());
  return refine_bavardage(features, init, sphering, cfg);
}

Prediction run_bavardage(const TaskInstance& task, const BaseStatistics& stats, const BavardageConfig& cfg) {
  return run_bavardage(task, build_sphering(stats, cfg.s_max), cfg);
}

Prediction run_soft_kmeans_baseline(const TaskInstance& task, const BavardageConfig& cfg) {
  cfg.validate();
  Prediction out{{}, soft_kmeans_init(task, cfg.softkmeans()), {}, false};
  out.labels = query_argmax(out.assignments);
  return out;
}

Prediction run_soft_kmeans_baseline(const TaskInstance& task, const BaseStatistics&, const BavardageConfig& cfg) {
  return run_soft_kmeans_baseline(task, cfg);
}

}  // namespace bavardage
