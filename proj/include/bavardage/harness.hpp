#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bavardage/pipeline.hpp"
#include "bavardage/preproc.hpp"
#include "bavardage/sampler.hpp"

namespace bavardage {

enum class Method { bavardage, soft_kmeans };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct RunConfig {
  std::string base_path;
  std::string novel_path;
  TaskConfig task;
  BavardageConfig bavardage;
  PreprocConfig preproc;
  Method method = Method::bavardage;
  int tasks = 10000;
  int workers = 1;
  std::string output;
  std::string preset;
  bool keep_per_task = false;

  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
/// Reads fields present in `j` on top of `cfg`; absent fields keep their value.
void merge_json(const nlohmann::json& j, RunConfig& cfg);

/// Hyper-parameter presets. Generic names are "balanced" and "unbalanced";
/// dataset presets are "<dataset>[-<backbone>]-<balanced|unbalanced>" with
/// dataset in {mini, tiered, cub, fc100, cifar-fs} and backbone in
/// {wrn, rn18, rn12}.
void apply_preset(const std::string& name, RunConfig& cfg);
std::vector<std::string> preset_names();

struct EvaluationResult {
  double mean_accuracy = 0.0;
  double ci95 = 0.0;
  int tasks = 0;
  std::vector<double> per_task_accuracies;  // kept only when requested
  std::string task_checksum;
  std::vector<std::string> warnings;
  RunConfig config;
  double wall_time = 0.0;

  /// Canonical JSON. The "execution" block (wall time, worker count) is the
  /// only part that may differ between reruns of the same config.
  nlohmann::json to_json() const;
};

/// Mean and 1.96 * sample-std / sqrt(T) of per-task accuracies.
std::pair<double, double> mean_and_ci95(const std::vector<double>& accuracies);

/// Loads and preprocesses the bundles named in cfg, then evaluates.
EvaluationResult evaluate(const RunConfig& cfg);

/// Evaluates on splits that were already preprocessed into one space.
EvaluationResult evaluate_prepared(const PreparedSplits& splits, const RunConfig& cfg);

std::uint64_t task_checksum(const TaskInstance& task);

inline const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"t_km",    "t_vb",       "s_max", "beta_o",
                                             "alpha_o", "alpha_star", "shots", "query_total"};
  return axes;
}

void set_axis(RunConfig& cfg, const std::string& axis, double value);

struct SweepResult {
  std::string axis;
  std::vector<double> values;
  std::vector<EvaluationResult> results;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

SweepResult sweep(const RunConfig& cfg, const std::string& axis, const std::vector<double>& values);
SweepResult sweep_prepared(const PreparedSplits& splits, const RunConfig& cfg, const std::string& axis,
                           const std::vector<double>& values);

struct SynthConfig {
  int classes = 20;
  int dim = 32;
  int samples_per_class = 600;
  double cluster_std = 1.0;
  double separation = 10.0;
  double within_cov_skew = 0.0;
  std::uint64_t seed = 0;
};

/// Gaussian classes sharing one within-class covariance. Class means sit on a
/// sphere of radius `separation` (mutually orthogonal while classes <= dim).
/// The covariance has eigenvalues cluster_std^2 * exp(skew * t_i) / mean(...)
/// for t_i evenly spaced in [1, -1], under a random rotation, so the average
/// per-dimension variance stays cluster_std^2. The first classes/2 classes
/// form the base split, the rest the novel split.
std::pair<FeatureBundle, FeatureBundle> synth_generate(const SynthConfig& cfg);

}  // namespace bavardage
