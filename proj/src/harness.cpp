#include "bavardage/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bavardage/error.hpp"

namespace bavardage {

using nlohmann::json;

std::string_view to_string(Method method) {
  return method == Method::bavardage ? "bavardage" : "soft_kmeans";
}

Method method_from_string(std::string_view name) {
  if (name == "bavardage") return Method::bavardage;
  if (name == "soft_kmeans" || name == "soft-kmeans") return Method::soft_kmeans;
  throw Error("bad_config", "unknown method '" + std::string(name) + "'");
}

void RunConfig::validate() const {
  if (tasks < 1) throw Error("bad_config", "tasks must be at least 1");
  if (workers < 1) throw Error("bad_config", "workers must be at least 1");
  task.validate();
  bavardage.validate();
  preproc.validate();
}

json to_json(const RunConfig& cfg) {
  const auto& b = cfg.bavardage;
  json bav = {{"t_km", b.t_km},
              {"t_vb", b.t_vb},
              {"s_max", b.s_max},
              {"alpha_o", b.alpha_o},
              {"beta_o", b.beta_o},
              {"gamma", b.gamma},
              {"n_step", b.n_step},
              {"softkmeans_max_iter", b.softkmeans_max_iter},
              {"softkmeans_tol", b.softkmeans_tol},
              {"early_stop", b.early_stop ? json(*b.early_stop) : json(nullptr)}};
  json pre = {{"center", cfg.preproc.center},
              {"l2_normalize", cfg.preproc.l2_normalize},
              {"power_beta", cfg.preproc.power_beta ? json(*cfg.preproc.power_beta) : json(nullptr)}};
  json task = {{"ways", cfg.task.ways},
               {"shots", cfg.task.shots},
               {"query_total", cfg.task.query_total},
               {"setting", std::string(to_string(cfg.task.setting))},
               {"alpha_star", cfg.task.alpha_star},
               {"seed", cfg.task.seed}};
  return {{"base", cfg.base_path},
          {"novel", cfg.novel_path},
          {"task", task},
          {"bavardage", bav},
          {"preproc", pre},
          {"method", std::string(to_string(cfg.method))},
          {"tasks", cfg.tasks},
          {"output", cfg.output},
          {"preset", cfg.preset},
          {"keep_per_task", cfg.keep_per_task},
          {"rng_algorithm", std::string(numerics::kRngAlgorithm)}};
}

namespace {

template <typename T>
void read_if(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) out.reset();
  else out = j.at(key).get<T>();
}

}  // namespace

void merge_json(const json& j, RunConfig& cfg) {
  try {
    read_if(j, "base", cfg.base_path);
    read_if(j, "novel", cfg.novel_path);
    read_if(j, "tasks", cfg.tasks);
    read_if(j, "workers", cfg.workers);
    read_if(j, "output", cfg.output);
    read_if(j, "keep_per_task", cfg.keep_per_task);
    if (j.contains("preset") && j.at("preset").is_string() && !j.at("preset").get<std::string>().empty())
      apply_preset(j.at("preset").get<std::string>(), cfg);
    if (j.contains("method")) cfg.method = method_from_string(j.at("method").get<std::string>());
    if (j.contains("task")) {
      const auto& t = j.at("task");
      read_if(t, "ways", cfg.task.ways);
      read_if(t, "shots", cfg.task.shots);
      read_if(t, "query_total", cfg.task.query_total);
      read_if(t, "alpha_star", cfg.task.alpha_star);
      read_if(t, "seed", cfg.task.seed);
      if (t.contains("setting")) cfg.task.setting = setting_from_string(t.at("setting").get<std::string>());
    }
    if (j.contains("bavardage")) {
      const auto& b = j.at("bavardage");
      auto& c = cfg.bavardage;
      read_if(b, "t_km", c.t_km);
      read_if(b, "t_vb", c.t_vb);
      read_if(b, "s_max", c.s_max);
      read_if(b, "alpha_o", c.alpha_o);
      read_if(b, "beta_o", c.beta_o);
      read_if(b, "gamma", c.gamma);
      read_if(b, "n_step", c.n_step);
      read_if(b, "softkmeans_max_iter", c.softkmeans_max_iter);
      read_if(b, "softkmeans_tol", c.softkmeans_tol);
      read_optional(b, "early_stop", c.early_stop);
    }
    if (j.contains("preproc")) {
      const auto& p = j.at("preproc");
      read_if(p, "center", cfg.preproc.center);
      read_if(p, "l2_normalize", cfg.preproc.l2_normalize);
      read_optional(p, "power_beta", cfg.preproc.power_beta);
    }
  } catch (const json::exception& e) {
    throw Error("bad_config", std::string("run config: ") + e.what());
  }
}

namespace {

struct PresetValues {
  double t_km, t_vb, s_max;
};

const std::vector<std::string> kDatasets{"mini", "tiered", "cub", "fc100", "cifar-fs"};
const std::vector<std::string> kBackbones{"wrn", "rn18", "rn12"};

PresetValues dataset_values(const std::string& dataset, bool balanced) {
  if (dataset == "tiered") return balanced ? PresetValues{10, 100, 2} : PresetValues{100, 100, 1};
  if (dataset == "cub") return {10, 4, 5};
  return balanced ? PresetValues{10, 50, 2} : PresetValues{50, 50, 1};
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names{"balanced", "unbalanced"};
  for (const auto& d : kDatasets)
    for (const char* s : {"balanced", "unbalanced"}) {
      names.push_back(d + "-" + s);
      for (const auto& b : kBackbones) names.push_back(d + "-" + b + "-" + s);
    }
  return names;
}

void apply_preset(const std::string& name, RunConfig& cfg) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw Error("unknown_preset", "unknown preset '" + name + "'");

  const bool balanced = !name.ends_with("unbalanced");
  std::string dataset = "mini";
  for (const auto& d : kDatasets)
    if (name.rfind(d + "-", 0) == 0) dataset = d;

  const auto v = dataset_values(dataset, balanced);
  cfg.preset = name;
  cfg.bavardage.t_km = v.t_km;
  cfg.bavardage.t_vb = v.t_vb;
  cfg.bavardage.s_max = v.s_max;
  cfg.bavardage.alpha_o = 2.0;
  cfg.bavardage.beta_o = 10.0;
  cfg.task.ways = 5;
  cfg.task.query_total = 75;
  cfg.task.setting = balanced ? QuerySetting::balanced : QuerySetting::dirichlet;
  cfg.task.alpha_star = 2.0;
}

std::pair<double, double> mean_and_ci95(const std::vector<double>& accuracies) {
  if (accuracies.empty()) return {0.0, 0.0};
  double sum = 0.0;
  for (double a : accuracies) sum += a;
  const double mean = sum / static_cast<double>(accuracies.size());
  if (accuracies.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double a : accuracies) sq += (a - mean) * (a - mean);
  const double std = std::sqrt(sq / static_cast<double>(accuracies.size() - 1));
  return {mean, 1.96 * std / std::sqrt(static_cast<double>(accuracies.size()))};
}

std::uint64_t task_checksum(const TaskInstance& task) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  auto mix = [&h](std::uint64_t v) { h = numerics::splitmix64(h ^ v); };
  for (int c : task.class_map) mix(static_cast<std::uint64_t>(c));
  for (auto r : task.support_rows) mix(static_cast<std::uint64_t>(r));
  mix(0xffffffffffffffffULL);
  for (auto r : task.query_rows) mix(static_cast<std::uint64_t>(r));
  return h;
}

namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::string> overlap_warnings(const FeatureBundle& base, const FeatureBundle& novel) {
  const std::set<std::string> base_names(base.class_names.begin(), base.class_names.end());
  std::size_t shared = 0;
  for (const auto& n : novel.class_names) shared += base_names.count(n);
  if (shared == 0) return {};
  return {std::to_string(shared) + " class label(s) appear in both the base and novel bundles"};
}

}  // namespace

json EvaluationResult::to_json() const {
  json out = {{"method", std::string(bavardage::to_string(config.method))},
              {"mean_accuracy", mean_accuracy},
              {"ci95", ci95},
              {"tasks", tasks},
              {"task_checksum", task_checksum},
              {"rng_algorithm", std::string(numerics::kRngAlgorithm)},
              {"warnings", warnings},
              {"config", bavardage::to_json(config)},
              {"execution", {{"wall_time", wall_time}, {"workers", config.workers}}}};
  if (config.keep_per_task) out["per_task_accuracies"] = per_task_accuracies;
  return out;
}

EvaluationResult evaluate_prepared(const PreparedSplits& splits, const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();

  std::optional<Sphering> sphering;
  if (cfg.method == Method::bavardage) sphering = build_sphering(splits.stats, cfg.bavardage.s_max);

  const auto count = static_cast<std::size_t>(cfg.tasks);
  std::vector<double> accuracies(count, 0.0);
  std::vector<std::uint64_t> checksums(count, 0);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t error_index = count;
  std::exception_ptr error;

  auto worker = [&] {
    for (std::size_t t = next++; t < count; t = next++) {
      try {
        const TaskInstance task = sample_task(splits.novel, cfg.task, t);
        const Prediction pred = cfg.method == Method::bavardage
                                    ? run_bavardage(task, *sphering, cfg.bavardage)
                                    : run_soft_kmeans_baseline(task, cfg.bavardage);
        std::size_t correct = 0;
        for (std::size_t q = 0; q < pred.labels.size(); ++q)
          correct += pred.labels[q] == task.query_labels_hidden[q] ? 1 : 0;
        accuracies[t] = static_cast<double>(correct) / static_cast<double>(pred.labels.size());
        checksums[t] = task_checksum(task);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (t < error_index) {
          error_index = t;
          error = std::current_exception();
        }
      }
    }
  };

  {
    std::vector<std::jthread> pool;
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), count);
    for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  EvaluationResult result;
  result.config = cfg;
  result.tasks = cfg.tasks;
  std::tie(result.mean_accuracy, result.ci95) = mean_and_ci95(accuracies);
  std::uint64_t combined = 0;
  for (auto c : checksums) combined = numerics::splitmix64(combined ^ c);
  result.task_checksum = hex(combined);
  result.warnings = overlap_warnings(splits.base, splits.novel);
  if (cfg.keep_per_task) result.per_task_accuracies = std::move(accuracies);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

PreparedSplits load_and_prepare(const RunConfig& cfg) {
  if (cfg.base_path.empty() || cfg.novel_path.empty())
    throw Error("bad_config", "both a base and a novel bundle path are required");
  FeatureBundle base = load_bundle(cfg.base_path);
  base.split = SplitTag::base;
  FeatureBundle novel = load_bundle(cfg.novel_path);
  novel.split = SplitTag::novel;
  return prepare_splits(base, novel, cfg.preproc);
}

}  // namespace

EvaluationResult evaluate(const RunConfig& cfg) {
  cfg.validate();
  return evaluate_prepared(load_and_prepare(cfg), cfg);
}

void set_axis(RunConfig& cfg, const std::string& axis, double value) {
  auto as_count = [&](double v) {
    if (v != std::floor(v) || v < 0) throw Error("bad_config", "axis '" + axis + "' needs integer values");
    return static_cast<int>(v);
  };
  if (axis == "t_km") cfg.bavardage.t_km = value;
  else if (axis == "t_vb") cfg.bavardage.t_vb = value;
  else if (axis == "s_max") cfg.bavardage.s_max = value;
  else if (axis == "beta_o") cfg.bavardage.beta_o = value;
  else if (axis == "alpha_o") cfg.bavardage.alpha_o = value;
  else if (axis == "alpha_star") cfg.task.alpha_star = value;
  else if (axis == "shots") cfg.task.shots = as_count(value);
  else if (axis == "query_total") cfg.task.query_total = as_count(value);
  else throw Error("unknown_axis", "unknown sweep axis '" + axis + "'");
}

SweepResult sweep_prepared(const PreparedSplits& splits, const RunConfig& cfg, const std::string& axis,
                           const std::vector<double>& values) {
  if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
    throw Error("unknown_axis", "unknown sweep axis '" + axis + "'");
  SweepResult out{axis, values, {}};
  for (double v : values) {
    RunConfig point = cfg;
    set_axis(point, axis, v);
    out.results.push_back(evaluate_prepared(splits, point));
  }
  return out;
}

SweepResult sweep(const RunConfig& cfg, const std::string& axis, const std::vector<double>& values) {
  cfg.validate();
  if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
    throw Error("unknown_axis", "unknown sweep axis '" + axis + "'");
  return sweep_prepared(load_and_prepare(cfg), cfg, axis, values);
}

json SweepResult::to_json() const {
  json results_json = json::array();
  for (const auto& r : results) results_json.push_back(r.to_json());
  return {{"axis", axis}, {"values", values}, {"results", results_json}};
}

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << axis << ",mean_accuracy,ci95,tasks,task_checksum\n";
  for (std::size_t i = 0; i < results.size(); ++i)
    out << values[i] << ',' << results[i].mean_accuracy << ',' << results[i].ci95 << ',' << results[i].tasks
        << ',' << results[i].task_checksum << '\n';
  return out.str();
}

std::pair<FeatureBundle, FeatureBundle> synth_generate(const SynthConfig& cfg) {
  if (cfg.classes < 4) throw Error("bad_config", "synth needs at least 4 classes");
  if (cfg.dim < 1) throw Error("bad_config", "synth dimension must be positive");
  if (cfg.samples_per_class < 1) throw Error("bad_config", "samples_per_class must be positive");
  if (!(cfg.cluster_std > 0.0)) throw Error("bad_config", "cluster_std must be positive");
  if (!(cfg.separation >= 0.0)) throw Error("bad_config", "separation must be non-negative");
  if (!(cfg.within_cov_skew >= 0.0)) throw Error("bad_config", "within_cov_skew must be non-negative");

  numerics::Rng rng(cfg.seed, 0x5eed);
  const Eigen::Index d = cfg.dim;
  auto random_rotation = [&] {
    Matrix g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    return Matrix(qr.householderQ());
  };

  // Shared within-class covariance: rotated diagonal spectrum.
  const Matrix cov_rotation = random_rotation();
  Vector variances(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double t = d == 1 ? 0.0 : 1.0 - 2.0 * static_cast<double>(i) / static_cast<double>(d - 1);
    variances[i] = std::exp(cfg.within_cov_skew * t);
  }
  variances *= cfg.cluster_std * cfg.cluster_std / variances.mean();
  const Matrix noise_map = cov_rotation * variances.cwiseSqrt().asDiagonal();

  Matrix means(cfg.classes, d);
  if (cfg.classes <= cfg.dim) {
    const Matrix mean_rotation = random_rotation();
    for (int c = 0; c < cfg.classes; ++c) means.row(c) = cfg.separation * mean_rotation.col(c).transpose();
  } else {
    for (int c = 0; c < cfg.classes; ++c) {
      Vector v(d);
      for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.normal();
      means.row(c) = cfg.separation * v.normalized().transpose();
    }
  }

  const int base_classes = cfg.classes / 2;
  auto make_split = [&](int first, int last, SplitTag tag) {
    const Eigen::Index rows = static_cast<Eigen::Index>(last - first) * cfg.samples_per_class;
    Matrix features(rows, d);
    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(rows));
    Eigen::Index r = 0;
    for (int c = first; c < last; ++c) {
      char name[32];
      std::snprintf(name, sizeof name, "class_%03d", c);
      for (int s = 0; s < cfg.samples_per_class; ++s, ++r) {
        Vector z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
        features.row(r) = means.row(c) + (noise_map * z).transpose();
        labels.emplace_back(name);
      }
    }
    return make_bundle(std::move(features), labels, tag);
  };
  auto base = make_split(0, base_classes, SplitTag::base);
  auto novel = make_split(base_classes, cfg.classes, SplitTag::novel);
  return {std::move(base), std::move(novel)};
}

}  // namespace bavardage
