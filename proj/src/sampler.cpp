#include "bavardage/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bavardage/error.hpp"

namespace bavardage {

std::string_view to_string(QuerySetting setting) {
  return setting == QuerySetting::balanced ? "balanced" : "dirichlet";
}

QuerySetting setting_from_string(std::string_view name) {
  if (name == "balanced") return QuerySetting::balanced;
  if (name == "dirichlet" || name == "unbalanced") return QuerySetting::dirichlet;
  throw Error("bad_config", "unknown query setting '" + std::string(name) + "'");
}

void TaskConfig::validate() const {
  if (ways < 2) throw Error("bad_config", "ways must be at least 2");
  if (shots < 1) throw Error("bad_config", "shots must be at least 1");
  if (query_total < 1) throw Error("bad_config", "query_total must be at least 1");
  if (!(alpha_star > 0.0)) throw Error("bad_config", "alpha_star must be positive");
  if (setting == QuerySetting::balanced && query_total % ways != 0)
    throw Error("infeasible_task", "balanced setting needs query_total (" + std::to_string(query_total) +
                                       ") divisible by ways (" + std::to_string(ways) + ")");
}

Matrix TaskInstance::stacked_features() const {
  Matrix all(support_features.rows() + query_features.rows(), support_features.cols());
  all.topRows(support_features.rows()) = support_features;
  all.bottomRows(query_features.rows()) = query_features;
  return all;
}

std::vector<int> apportion_counts(std::span<const double> proportions, int total) {
  if (proportions.empty()) throw Error("bad_argument", "apportion_counts needs at least one proportion");
  double sum = 0.0;
  for (double p : proportions) {
    if (!(p >= 0.0)) throw Error("bad_argument", "proportions must be non-negative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("bad_argument", "proportions must sum to 1");
  if (total < 0) throw Error("bad_argument", "total must be non-negative");

  const std::size_t k = proportions.size();
  std::vector<int> counts(k);
  std::vector<double> remainder(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = proportions[i] * total;
    counts[i] = static_cast<int>(std::floor(quota));
    remainder[i] = quota - counts[i];
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  // Rounding in quota can leave assigned slightly off either way; fix up in
  // remainder order.
  for (std::size_t i = 0; assigned < total; i = (i + 1) % k, ++assigned) ++counts[order[i]];
  for (std::size_t i = k; assigned > total;) {
    i = (i == 0 ? k : i) - 1;
    if (counts[order[i]] > 0) {
      --counts[order[i]];
      --assigned;
    }
  }
  return counts;
}

TaskInstance sample_task(const FeatureBundle& bundle, const TaskConfig& cfg, std::uint64_t task_index) {
  cfg.validate();
  const auto k = static_cast<std::size_t>(cfg.ways);
  if (bundle.num_classes() < k)
    throw Error("infeasible_task", "bundle has " + std::to_string(bundle.num_classes()) +
                                       " classes, task needs " + std::to_string(k));

  numerics::Rng rng(cfg.seed, task_index);

  std::vector<int> classes(bundle.num_classes());
  std::iota(classes.begin(), classes.end(), 0);
  rng.partial_shuffle(std::span<int>(classes), k);
  classes.resize(k);

  auto available = [&](std::size_t local) {
    return static_cast<int>(bundle.class_index[static_cast<std::size_t>(classes[local])].size());
  };

  std::vector<int> counts;
  if (cfg.setting == QuerySetting::balanced) {
    counts.assign(k, cfg.query_total / cfg.ways);
    for (std::size_t c = 0; c < k; ++c)
      if (available(c) < cfg.shots + counts[c])
        throw Error("class_exhausted", "class '" + bundle.class_names[static_cast<std::size_t>(classes[c])] +
                                           "' has " + std::to_string(available(c)) + " samples, needs " +
                                           std::to_string(cfg.shots + counts[c]));
  } else {
    constexpr int kMaxDraws = 100;
    std::size_t short_class = 0;
    bool feasible = false;
    for (int attempt = 0; attempt < kMaxDraws && !feasible; ++attempt) {
      const auto proportions = rng.dirichlet(cfg.alpha_star, k);
      counts = apportion_counts(proportions, cfg.query_total);
      feasible = true;
      for (std::size_t c = 0; c < k; ++c)
        if (available(c) < cfg.shots + counts[c]) {
          feasible = false;
          short_class = c;
          break;
        }
    }
    if (!feasible)
      throw Error("class_exhausted", "class '" + bundle.class_names[static_cast<std::size_t>(classes[short_class])] +
                                         "' lacks samples for the drawn query count after " +
                                         std::to_string(kMaxDraws) + " Dirichlet draws");
  }

  TaskInstance task;
  task.class_map = classes;
  std::vector<std::pair<Eigen::Index, int>> queries;  // (row, local id)
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<Eigen::Index> rows = bundle.class_index[static_cast<std::size_t>(classes[c])];
    const auto needed = static_cast<std::size_t>(cfg.shots + counts[c]);
    rng.partial_shuffle(std::span<Eigen::Index>(rows), needed);
    for (std::size_t i = 0; i < static_cast<std::size_t>(cfg.shots); ++i) {
      task.support_rows.push_back(rows[i]);
      task.support_labels.push_back(static_cast<int>(c));
    }
    for (std::size_t i = static_cast<std::size_t>(cfg.shots); i < needed; ++i)
      queries.emplace_back(rows[i], static_cast<int>(c));
  }
  rng.partial_shuffle(std::span<std::pair<Eigen::Index, int>>(queries), queries.size());

  const Eigen::Index d = bundle.dim();
  task.support_features.resize(static_cast<Eigen::Index>(task.support_rows.size()), d);
  for (std::size_t i = 0; i < task.support_rows.size(); ++i)
    task.support_features.row(static_cast<Eigen::Index>(i)) = bundle.features.row(task.support_rows[i]);
  task.query_features.resize(static_cast<Eigen::Index>(queries.size()), d);
  for (std::size_t i = 0; i < queries.size(); ++i) {
    task.query_features.row(static_cast<Eigen::Index>(i)) = bundle.features.row(queries[i].first);
    task.query_rows.push_back(queries[i].first);
    task.query_labels_hidden.push_back(queries[i].second);
  }
  return task;
}

std::vector<int> query_counts(const TaskInstance& task) {
  std::vector<int> counts(static_cast<std::size_t>(task.ways()), 0);
  for (int label : task.query_labels_hidden) ++counts[static_cast<std::size_t>(label)];
  return counts;
}

}  // namespace bavardage
