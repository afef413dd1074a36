// Command-line front end: run experiments, evaluate routing policies, sweep
// the Lagrangian knob, and validate the closed-form results.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "agentcodec/harness.hpp"
#include "agentcodec/serialization.hpp"
#include "agentcodec/theory.hpp"

namespace {

using namespace agentcodec;

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
  return values;
}

struct EvalArtifacts {
  std::vector<CacheEntry> router_cache;
  FoldPlan folds;
  ExperimentConfig config;
};

EvalArtifacts prepare(const std::string& config_path) {
  EvalArtifacts art;
  art.config = load_experiment_config(config_path);
  auto runs = load_run_cache(art.config.cache_dir);
  if (runs.empty())
    throw ValidationError("run cache is empty; execute `run` first (" + art.config.cache_dir +
                          ")");
  HashEmbedder embedder(art.config.embedding_dim);
  art.router_cache = build_router_cache(runs, art.config.tasks, embedder);
  art.folds = make_fold_plan(art.config.tasks, art.config.n_folds, art.config.seed);
  return art;
}

void write_or_print(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  std::cout << "wrote " << path << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reliability-coding toolkit for stochastic text channels"};
  app.require_subcommand(1);

  std::string config_path, output_path, json_path;
  std::string amplitudes_csv = "1,2", map_spec = "power:0.5", grid_csv, lambdas_csv;
  double sigma = 1.0, q0 = 0.5, noise_sd = 0.0;
  int trials = 100000, iters = 20;
  std::uint64_t seed = 0;

  auto* run_cmd = app.add_subcommand("run", "Execute the experiment grid into the run cache");
  run_cmd->add_option("--config", config_path, "Experiment config JSON")->required();

  auto* eval_cmd = app.add_subcommand("evaluate", "Compute the routing-policy table");
  eval_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  eval_cmd->add_option("--csv", output_path, "Write the table as CSV here");
  eval_cmd->add_option("--json", json_path, "Write the table as JSON here");

  auto* sweep_cmd = app.add_subcommand("sweep-lambda", "Quality/cost frontier over lambda");
  sweep_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  sweep_cmd->add_option("--lambdas", lambdas_csv, "Comma-separated lambda grid");
  sweep_cmd->add_option("--csv", output_path, "Write the frontier as CSV here");

  auto* theory_cmd = app.add_subcommand("theory", "Closed-form validators");
  theory_cmd->require_subcommand(1);
  auto* crossover_cmd =
      theory_cmd->add_subcommand("crossover", "MRC/EGC crossover under CSI noise");
  crossover_cmd->add_option("--amplitudes", amplitudes_csv, "Comma-separated branch amplitudes");
  crossover_cmd->add_option("--sigma", sigma, "Channel noise sd");
  crossover_cmd->add_option("--trials", trials, "Monte Carlo trials per grid point");
  crossover_cmd->add_option("--seed", seed, "Simulation seed");
  crossover_cmd->add_option("--grid", grid_csv, "Comma-separated sigma_w^2 grid");
  crossover_cmd->add_option("--csv", output_path, "Write the sweep as CSV here");
  auto* threshold_cmd =
      theory_cmd->add_subcommand("threshold", "Refinement fixed-point dynamics");
  threshold_cmd->add_option("--map", map_spec, "Quality map, e.g. power:0.5");
  threshold_cmd->add_option("--q0", q0, "Initial quality");
  threshold_cmd->add_option("--iters", iters, "Iterations");
  threshold_cmd->add_option("--noise", noise_sd, "Additive noise sd");
  threshold_cmd->add_option("--seed", seed, "Noise seed");
  threshold_cmd->add_option("--csv", output_path, "Write the trajectory as CSV here");

  auto* export_cmd = app.add_subcommand("export", "Write policy table and frontier to a directory");
  export_cmd->add_option("--config", config_path, "Experiment config JSON")->required();
  std::string export_dir = "export";
  export_cmd->add_option("--dir", export_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      auto config = load_experiment_config(config_path);
      int executed = run_experiment(config);
      std::cout << "executed " << executed << " new cells into " << config.cache_dir << '\n';
    } else if (eval_cmd->parsed()) {
      auto art = prepare(config_path);
      auto rows =
          evaluate_policies(art.router_cache, art.folds, art.config.lambdas, art.config.knn_k,
                            art.config.seed);
      write_or_print(policy_table_csv(rows), output_path);
      if (!json_path.empty()) write_or_print(policy_table_json(rows), json_path);
    } else if (sweep_cmd->parsed()) {
      auto art = prepare(config_path);
      auto lambdas = lambdas_csv.empty() ? art.config.lambdas : parse_list(lambdas_csv);
      auto rows = lambda_sweep(art.router_cache, lambdas, art.config.knn_k);
      std::ostringstream csv;
      csv << "lambda,mean_quality,mean_cost\n";
      for (const auto& r : rows)
        csv << r.lambda << ',' << r.mean_quality << ',' << r.mean_cost << '\n';
      write_or_print(csv.str(), output_path);
    } else if (crossover_cmd->parsed()) {
      AmplitudeProfile profile;
      profile.amplitudes = parse_list(amplitudes_csv);
      profile.sigma = sigma;
      auto critical = critical_csi_variance(profile);
      std::cout << "gamma_mrc=" << snr_mrc(profile) << " gamma_egc=" << snr_egc(profile)
                << " critical_sigma_w_sq=" << critical.value
                << (critical.degenerate ? " (degenerate)" : "") << '\n';
      std::vector<double> grid =
          grid_csv.empty()
              ? std::vector<double>{0.25 * critical.value, 0.5 * critical.value, critical.value,
                                    2.0 * critical.value, 4.0 * critical.value}
              : parse_list(grid_csv);
      write_or_print(crossover_sweep_csv(profile, grid, trials, seed), output_path);
    } else if (threshold_cmd->parsed()) {
      auto map = parse_quality_map(map_spec);
      auto trajectory = iterate_quality_map(map, q0, iters, noise_sd, seed);
      std::ostringstream csv;
      csv << "k,iterate,running_max\n";
      for (std::size_t k = 0; k < trajectory.size(); ++k)
        csv << k << ',' << trajectory[k].iterate << ',' << trajectory[k].running_max << '\n';
      write_or_print(csv.str(), output_path);
    } else if (export_cmd->parsed()) {
      auto art = prepare(config_path);
      std::filesystem::create_directories(export_dir);
      auto rows =
          evaluate_policies(art.router_cache, art.folds, art.config.lambdas, art.config.knn_k,
                            art.config.seed);
      write_or_print(policy_table_csv(rows),
                     (std::filesystem::path(export_dir) / "policies.csv").string());
      write_or_print(policy_table_json(rows),
                     (std::filesystem::path(export_dir) / "policies.json").string());
      auto sweep = lambda_sweep(art.router_cache, art.config.lambdas, art.config.knn_k);
      std::ostringstream csv;
      csv << "lambda,mean_quality,mean_cost\n";
      for (const auto& r : sweep)
        csv << r.lambda << ',' << r.mean_quality << ',' << r.mean_cost << '\n';
      write_or_print(csv.str(),
                     (std::filesystem::path(export_dir) / "lambda_sweep.csv").string());
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
