#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bavardage/featurestore.hpp"

namespace bavardage {

enum class QuerySetting { balanced, dirichlet };

std::string_view to_string(QuerySetting setting);
QuerySetting setting_from_string(std::string_view name);

struct TaskConfig {
  int ways = 5;          // K
  int shots = 1;         // L
  int query_total = 75;  // Q
  QuerySetting setting = QuerySetting::balanced;
  double alpha_star = 2.0;  // Dirichlet concentration for unbalanced queries
  std::uint64_t seed = 0;

  void validate() const;
};

/// One few-shot episode. Local class ids are in [0, ways); support rows are
/// grouped by local class, query rows are shuffled.
struct TaskInstance {
  Matrix support_features;              // (K*L) x D
  std::vector<int> support_labels;      // local ids
  Matrix query_features;                // Q x D
  std::vector<int> query_labels_hidden; // local ids, scoring only
  std::vector<int> class_map;           // local id -> bundle class id
  std::vector<Eigen::Index> support_rows;  // bundle row of each support sample
  std::vector<Eigen::Index> query_rows;

  int ways() const { return static_cast<int>(class_map.size()); }

  /// Support rows stacked on top of query rows, N = K*L + Q.
  Matrix stacked_features() const;
};

/// Largest-remainder apportionment of `total` over `proportions`; ties on the
/// remainder go to the lower index. Counts sum exactly to `total`.
std::vector<int> apportion_counts(std::span<const double> proportions, int total);

/// Draws task `task_index` of the stream defined by cfg.seed. The result
/// depends only on (bundle, cfg, task_index).
TaskInstance sample_task(const FeatureBundle& bundle, const TaskConfig& cfg, std::uint64_t task_index);

/// Per-class query counts of a task (index = local class id).
std::vector<int> query_counts(const TaskInstance& task);

}  // namespace bavardage
