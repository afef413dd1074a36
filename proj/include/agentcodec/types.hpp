#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace agentcodec {

/// One channel use: the generated text plus full cost instrumentation.
struct AgentOutput {
  std::string text;
  std::string model_id;
  double temperature = 0.0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  double cost_usd = 0.0;
  double latency_s = 0.0;
  std::optional<std::vector<double>> token_logprobs;
  std::optional<double> mean_logprob;
};

enum class ScoreKind { Checklist, Blended, Differential, SyntheticOracle };

std::string to_string(ScoreKind k);
ScoreKind score_kind_from_string(const std::string& s);

/// A scalar quality in [0,1] with provenance.
struct QualityScore {
  double value = 0.0;
  ScoreKind kind = ScoreKind::Checklist;
  /// (objective part, judge part) when kind == Blended.
  std::optional<std::pair<double, double>> components;
};

/// A weighted regex check contributing to the objective score.
struct ObjectiveCheck {
  std::string pattern;
  double weight = 1.0;
};

struct Task {
  std::string id;
  std::string prompt;
  std::string category = "other";  // qa | reasoning | creative | code | other
  std::optional<std::string> difficulty_tier;
  std::optional<std::string> reference;
  std::vector<ObjectiveCheck> objective_checks;
};

/// One technique execution on one task.
struct RunRecord {
  std::string task_id;
  std::string technique;
  int repeat_index = 0;
  std::vector<AgentOutput> individual_outputs;
  std::vector<AgentOutput> overhead_outputs;  // synthesizer / critic / voter / judge
  std::vector<double> individual_scores;      // judge scores of individual outputs, where measured
  std::string combined_text;
  double final_quality = 0.0;
  int rounds = 1;
  double total_cost = 0.0;
  std::set<std::string> flags;
  std::optional<double> difficulty;              // ACM pilot estimate
  std::optional<std::string> selected_profile;   // ACM profile name

  /// Recomputes total_cost as the sum over individual and overhead outputs.
  void finalize_cost();
};

/// Operator choice plus all hyperparameters. Defaults match each
/// technique's standalone defaults.
struct TechniqueConfig {
  std::string technique = "baseline";
  int branches = 2;           // diversity d
  int n_samples = 5;          // SC-N / discrete-MRC-N pool size
  int max_rounds = 5;         // HARQ rounds / turbo iterations
  double tau = 0.85;          // HARQ threshold (turbo default overrides to 0.9)
  bool early_exit = false;
  double alpha0 = 0.5;
  std::string severity_floor = "major";
  int max_corrections = 2;
  int n_max = 10;             // fountain
  int n_min = 2;
  double gamma = 0.85;
  double code_rate = 0.5;     // FEC
};

}  // namespace agentcodec
