// Command-line front end: run, sweep, synth, validate.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bavardage/error.hpp"
#include "bavardage/harness.hpp"

namespace {

using bavardage::Error;
using bavardage::RunConfig;
using nlohmann::json;

struct RunFlags {
  std::string config_file;
  std::string preset;
  std::optional<std::string> base, novel, setting, method, output;
  std::optional<int> ways, shots, queries, tasks, workers, n_step, km_iter;
  std::optional<std::uint64_t> seed;
  std::optional<double> alpha_star, t_km, t_vb, s_max, alpha_o, beta_o, gamma, km_tol, early_stop, power_beta;
  bool per_task = false;
  bool no_center = false;
  bool no_l2 = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config_file, "JSON run config (same schema as the result's \"config\")");
  cmd->add_option("--preset", f.preset, "Hyper-parameter preset, e.g. unbalanced, mini-wrn-unbalanced");
  cmd->add_option("--base", f.base, "Base-split bundle (manifest .json or .csv)");
  cmd->add_option("--novel", f.novel, "Novel-split bundle (manifest .json or .csv)");
  cmd->add_option("--ways", f.ways, "K, classes per task");
  cmd->add_option("--shots", f.shots, "L, labelled samples per class");
  cmd->add_option("--queries", f.queries, "Q, total unlabelled samples per task");
  cmd->add_option("--setting", f.setting, "balanced | dirichlet")->check(CLI::IsMember({"balanced", "dirichlet", "unbalanced"}));
  cmd->add_option("--alpha-star", f.alpha_star, "Dirichlet concentration of unbalanced query counts");
  cmd->add_option("--tasks", f.tasks, "Number of tasks to evaluate");
  cmd->add_option("--seed", f.seed, "Task stream seed");
  cmd->add_option("--method", f.method, "bavardage | soft_kmeans")->check(CLI::IsMember({"bavardage", "soft_kmeans", "soft-kmeans"}));
  cmd->add_option("--t-km", f.t_km, "Soft-KMEANS temperature");
  cmd->add_option("--t-vb", f.t_vb, "VB precision scale");
  cmd->add_option("--s-max", f.s_max, "Upper bound on whitening scales");
  cmd->add_option("--alpha-o", f.alpha_o, "Dirichlet prior of the mixture weights");
  cmd->add_option("--beta-o", f.beta_o, "Prior strength of the class centroids");
  cmd->add_option("--gamma", f.gamma, "Centroid offset used by the projection");
  cmd->add_option("--n-step", f.n_step, "Projection + VB iterations");
  cmd->add_option("--softkmeans-max-iter", f.km_iter, "Soft-KMEANS iteration cap");
  cmd->add_option("--softkmeans-tol", f.km_tol, "Soft-KMEANS convergence threshold");
  cmd->add_option("--early-stop", f.early_stop, "Stop VB once assignments move less than this");
  cmd->add_option("--power-beta", f.power_beta, "Signed power transform exponent in (0, 1]");
  cmd->add_flag("--no-center", f.no_center, "Skip base-mean centering");
  cmd->add_flag("--no-l2", f.no_l2, "Skip L2 normalization");
  cmd->add_option("--workers", f.workers, "Worker threads");
  cmd->add_option("--output", f.output, "Write the JSON result here");
  cmd->add_flag("--per-task", f.per_task, "Keep per-task accuracies in the result");
}

RunConfig resolve(const RunFlags& f) {
  RunConfig cfg;
  if (!f.config_file.empty()) {
    std::ifstream in(f.config_file);
    if (!in) throw Error("missing_file", "cannot open config file " + f.config_file);
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw Error("bad_config", std::string("config file is not valid JSON: ") + e.what());
    }
    bavardage::merge_json(j, cfg);
  }
  if (!f.preset.empty()) bavardage::apply_preset(f.preset, cfg);

  auto set = [](const auto& opt, auto& field) {
    if (opt) field = *opt;
  };
  set(f.base, cfg.base_path);
  set(f.novel, cfg.novel_path);
  set(f.ways, cfg.task.ways);
  set(f.shots, cfg.task.shots);
  set(f.queries, cfg.task.query_total);
  if (f.setting) cfg.task.setting = bavardage::setting_from_string(*f.setting);
  set(f.alpha_star, cfg.task.alpha_star);
  set(f.tasks, cfg.tasks);
  set(f.seed, cfg.task.seed);
  if (f.method) cfg.method = bavardage::method_from_string(*f.method);
  set(f.t_km, cfg.bavardage.t_km);
  set(f.t_vb, cfg.bavardage.t_vb);
  set(f.s_max, cfg.bavardage.s_max);
  set(f.alpha_o, cfg.bavardage.alpha_o);
  set(f.beta_o, cfg.bavardage.beta_o);
  set(f.gamma, cfg.bavardage.gamma);
  set(f.n_step, cfg.bavardage.n_step);
  set(f.km_iter, cfg.bavardage.softkmeans_max_iter);
  set(f.km_tol, cfg.bavardage.softkmeans_tol);
  if (f.early_stop) cfg.bavardage.early_stop = *f.early_stop;
  if (f.power_beta) cfg.preproc.power_beta = *f.power_beta;
  if (f.no_center) cfg.preproc.center = false;
  if (f.no_l2) cfg.preproc.l2_normalize = false;
  set(f.workers, cfg.workers);
  set(f.output, cfg.output);
  if (f.per_task) cfg.keep_per_task = true;
  cfg.validate();
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("missing_file", "cannot write " + path);
  out << text;
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error("bad_config", "cannot parse sweep value '" + item + "'");
    }
  }
  if (values.empty()) throw Error("bad_config", "--values needs at least one number");
  return values;
}

json bundle_summary(const std::string& path) {
  const auto bundle = bavardage::load_bundle(path);
  bavardage::validate_bundle(bundle);
  std::size_t smallest = static_cast<std::size_t>(bundle.rows());
  for (const auto& rows : bundle.class_index) smallest = std::min(smallest, rows.size());
  return {{"path", path},
          {"n", bundle.rows()},
          {"d", bundle.dim()},
          {"classes", bundle.num_classes()},
          {"min_class_size", smallest},
          {"split", std::string(bavardage::to_string(bundle.split))},
          {"valid", true}};
}

void print_error(const std::string& code, const std::string& message) {
  std::cout << json{{"error", {{"code", code}, {"message", message}}}}.dump() << std::endl;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transductive few-shot evaluation with Soft-KMEANS, PLDA projection and VB inference"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Evaluate a method over many sampled tasks");
  add_run_flags(run, run_flags);

  RunFlags sweep_flags;
  std::string axis, values_text, csv_path;
  auto* sweep = app.add_subcommand("sweep", "Evaluate one hyper-parameter over a list of values");
  add_run_flags(sweep, sweep_flags);
  sweep->add_option("--axis", axis, "t_km | t_vb | s_max | beta_o | alpha_o | alpha_star | shots | query_total")
      ->required();
  sweep->add_option("--values", values_text, "Comma-separated values")->required();
  sweep->add_option("--csv", csv_path, "Write the sweep table as CSV here");

  bavardage::SynthConfig synth_cfg;
  std::string synth_out = "synth";
  std::string synth_dtype = "f32";
  bool synth_csv = false;
  auto* synth = app.add_subcommand("synth", "Generate synthetic base/novel bundles");
  synth->add_option("--classes", synth_cfg.classes, "Total classes (half base, half novel)");
  synth->add_option("--dim", synth_cfg.dim, "Feature dimension");
  synth->add_option("--samples-per-class", synth_cfg.samples_per_class);
  synth->add_option("--cluster-std", synth_cfg.cluster_std, "Average within-class standard deviation");
  synth->add_option("--separation", synth_cfg.separation, "Radius of the sphere holding class means");
  synth->add_option("--within-cov-skew", synth_cfg.within_cov_skew, "Log-spread of the covariance spectrum");
  synth->add_option("--seed", synth_cfg.seed);
  synth->add_option("--out", synth_out, "Output directory");
  synth->add_option("--dtype", synth_dtype)->check(CLI::IsMember({"f32", "f64"}));
  synth->add_flag("--csv", synth_csv, "Also write base.csv and novel.csv");

  std::vector<std::string> validate_paths;
  auto* validate = app.add_subcommand("validate", "Load and lint feature bundles");
  validate->add_option("paths", validate_paths, "Bundle manifests or CSV files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*run) {
      const auto cfg = resolve(run_flags);
      const auto result = bavardage::evaluate(cfg);
      for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
      const auto text = result.to_json().dump(2);
      if (!cfg.output.empty()) write_text(cfg.output, text + "\n");
      std::cout << text << std::endl;
    } else if (*sweep) {
      const auto cfg = resolve(sweep_flags);
      const auto result = bavardage::sweep(cfg, axis, parse_values(values_text));
      const auto text = result.to_json().dump(2);
      if (!cfg.output.empty()) write_text(cfg.output, text + "\n");
      if (!csv_path.empty()) write_text(csv_path, result.to_csv());
      std::cout << result.to_csv() << std::flush;
    } else if (*synth) {
      const auto [base, novel] = bavardage::synth_generate(synth_cfg);
      const auto dtype = synth_dtype == "f64" ? bavardage::StorageType::f64 : bavardage::StorageType::f32;
      const auto base_path = bavardage::save_bundle(base, synth_out, "base", dtype);
      const auto novel_path = bavardage::save_bundle(novel, synth_out, "novel", dtype);
      if (synth_csv) {
        bavardage::save_bundle_csv(base, std::filesystem::path(synth_out) / "base.csv");
        bavardage::save_bundle_csv(novel, std::filesystem::path(synth_out) / "novel.csv");
      }
      std::cout << json{{"base", base_path.string()}, {"novel", novel_path.string()}}.dump() << std::endl;
    } else if (*validate) {
      json report = json::array();
      for (const auto& p : validate_paths) report.push_back(bundle_summary(p));
      std::cout << report.dump(2) << std::endl;
    }
  } catch (const bavardage::BundleError& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::cout << json{{"error", {{"code", e.code()}, {"field", e.field()}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
