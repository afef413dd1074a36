#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "agentcodec/channel.hpp"
#include "agentcodec/embedding.hpp"
#include "agentcodec/routing.hpp"
#include "agentcodec/types.hpp"

namespace agentcodec {

/// One experiment: channels, judge, techniques, tasks, repeats, seed.
struct ExperimentConfig {
  std::vector<ChannelConfig> channels;
  ChannelConfig judge;
  std::vector<TechniqueConfig> techniques;
  std::vector<Task> tasks;
  int repeats = 1;
  std::uint64_t seed = 0;
  std::string cache_dir = "cache";
  std::size_t embedding_dim = 64;
  std::size_t knn_k = 20;
  std::vector<double> lambdas = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  int n_folds = 5;
  std::string checklist_file;  // optional judge checklist override
  std::string prompt_dir;      // optional prompt overrides
};

/// Parses the JSON config; "task_file" may point at a separate task file.
ExperimentConfig load_experiment_config(const std::string& path);

/// Executes every (task, technique, repeat) cell, writing one JSON file per
/// technique under cache_dir (an array of RunRecords). Cells already present
/// in the cache are skipped, so a complete cache re-runs with zero channel
/// calls. Returns the number of newly executed cells.
int run_experiment(const ExperimentConfig& config);

/// Cache loading: one file per technique under cache_dir.
std::map<std::string, std::vector<RunRecord>> load_run_cache(const std::string& cache_dir);

/// 5-fold assignment stratified by category; all repeats of a task share a
/// fold.
struct FoldPlan {
  int n_folds = 5;
  std::map<std::string, int> assignment;  // task_id -> fold
};

FoldPlan make_fold_plan(const std::vector<Task>& tasks, int n_folds, std::uint64_t seed);

/// Aggregates run records into router cache entries: per-technique mean
/// quality/cost over repeats, hash (or supplied) embeddings, text statistics,
/// and the difficulty proxy 1 - mean baseline quality.
std::vector<CacheEntry> build_router_cache(
    const std::map<std::string, std::vector<RunRecord>>& cache, const std::vector<Task>& tasks,
    const Embedder& embedder);

/// One row of the policy comparison table.
struct PolicyRow {
  std::string policy;
  double mean_quality = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_cost = 0.0;
  double quality_per_dollar = 0.0;
  double rho = 1.0;       // mean per-task cost ratio vs baseline
  double gain = 0.0;      // mean paired quality diff vs baseline
  double delta_q = 0.0;   // vs cross-validated fixed-best
  double wilcoxon_p = 1.0;  // paired vs cross-validated fixed-best
};

/// Computes the policy table: oracle, feasible (leave-one-out semKNN),
/// semKNN per lambda (out-of-fold), ridge/logit routers (CV), per-category
/// and difficulty-bin comparators (CV), cross-validated fixed-best, and
/// always-baseline.
std::vector<PolicyRow> evaluate_policies(const std::vector<CacheEntry>& cache,
                                         const FoldPlan& folds,
                                         const std::vector<double>& lambdas, std::size_t k = 20,
                                         std::uint64_t seed = 0);

std::string policy_table_csv(const std::vector<PolicyRow>& rows);
std::string policy_table_json(const std::vector<PolicyRow>& rows);

}  // namespace agentcodec
