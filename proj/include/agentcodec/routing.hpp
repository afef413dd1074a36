#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

/// Pilot-probe difficulty estimate plus the probe calls for cost accounting.
struct PilotResult {
  double difficulty = 1.0;
  std::vector<AgentOutput> probe_outputs;
  bool degraded = false;  // both estimation paths failed; maximum protection
};

/// Short probe with logprobs: difficulty = clamp(1 - exp(mean logprob));
/// falls back to an LLM self-rating at temperature 0.1 without logprob
/// support, and to difficulty 1.0 (degraded) when both paths fail.
PilotResult pilot_difficulty(const ChannelPtr& channel, const Task& task,
                             const PromptLibrary& lib = PromptLibrary::instance());

/// One row of the modulation-and-coding-scheme table. Ranges are half-open
/// [lo, hi); the first matching profile wins; a catch-all row guarantees a
/// selection for out-of-range difficulties.
struct McsProfile {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  TechniqueConfig params;
  std::string model_id;  // informational; channel wiring is the caller's

  bool contains(double difficulty) const { return difficulty >= lo && difficulty < hi; }
};

/// First profile containing the difficulty, else the last profile
/// (maximum-protection fallthrough).
const McsProfile& select_profile(const std::vector<McsProfile>& profiles, double difficulty);

/// Adaptive coding: estimate difficulty with a pilot probe, select the first
/// matching profile, run its technique, and record the selection.
RunRecord run_acm(const TechniqueContext& ctx, const Task& task,
                  const std::vector<McsProfile>& profiles);

/// Per-task aggregate the router reads: embedding plus per-technique mean
/// quality/cost over repeats.
struct CacheEntry {
  std::string task_id;
  std::vector<double> embedding;
  std::string category = "other";
  double difficulty = 0.0;
  std::vector<double> text_features;  // extended prompt statistics for the ridge router
  std::map<std::string, std::pair<double, double>> per_technique;  // id -> (mean q, mean cost)
  double baseline_cost = 0.0;
};

/// Cost-aware semantic-KNN dispatch: average per-technique quality and
/// baseline-normalized cost over the k nearest neighbors by cosine
/// similarity, then argmax of q - lambda * c/c_baseline; ties go to the
/// cheaper technique.
std::string semknn_dispatch(const std::vector<CacheEntry>& cache,
                            const std::vector<double>& task_embedding, double lambda,
                            std::size_t k = 20);

/// Learned-router weights (multinomial logit or per-technique ridge).
struct RouterWeights {
  std::string kind;  // "multinomial-logit" | "ridge"
  std::vector<std::string> feature_spec;
  std::vector<std::string> techniques;
  std::vector<std::vector<double>> coefficients;  // one row per technique
  double l2_penalty = 0.0;
  std::vector<double> fold_metrics;
  bool constant_router = false;  // degenerate single-class training data
};

/// Logit features: [1, difficulty, category one-hot over `categories`].
std::vector<double> logit_features(const CacheEntry& entry,
                                   const std::vector<std::string>& categories);

/// Ridge features: logit features plus the entry's text statistics.
std::vector<double> ridge_features(const CacheEntry& entry,
                                   const std::vector<std::string>& categories);

/// Prompt statistics for the ridge feature vector: log word count, has-code,
/// has-math, has-numbers, has-question, log sentence count, mean word length.
std::vector<double> text_statistics(const std::string& prompt);

/// L2-regularized multinomial logistic regression on the per-task
/// argmax-technique label, fit by Newton iterations to gradient norm < 1e-6
/// or 500 iterations. The intercept is not penalized.
RouterWeights fit_logit_router(const std::vector<CacheEntry>& cache, double l2);

/// Closed-form ridge regression per technique predicting quality from the
/// extended features; requires l2 > 0.
RouterWeights fit_ridge_router(const std::vector<CacheEntry>& cache, double l2);

/// Technique chosen by a fitted router for one cache entry. The category
/// list is recovered from the stored feature spec.
std::string route_with_weights(const RouterWeights& weights, const CacheEntry& entry);

struct LambdaSweepRow {
  double lambda = 0.0;
  double mean_quality = 0.0;
  double mean_cost = 0.0;
};

/// One semantic-KNN dispatch pass per lambda over the cache's own tasks.
std::vector<LambdaSweepRow> lambda_sweep(const std::vector<CacheEntry>& cache,
                                         const std::vector<double>& lambdas, std::size_t k = 20);

}  // namespace agentcodec
