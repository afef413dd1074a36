#pragma once

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

/// Cluster labels produced by the voter, or the singleton fallback.
struct ClusterAssignment {
  std::vector<std::string> labels;  // one per sample
  bool singleton_fallback = false;
};

/// Parses a voter reply into exactly n labels: raw, fenced, or inline JSON
/// arrays of integers or strings. Returns the singleton fallback otherwise.
ClusterAssignment parse_cluster_labels(const std::string& reply, std::size_t n);

/// Selection combining: argmax-score branch, no synthesizer call.
RunRecord run_sc(const TechniqueContext& ctx, const Task& task);

/// Maximal-ratio combining: score-proportional weights, LLM synthesis with
/// dominance fast path, identity detection, and best-of-sequence guard.
RunRecord run_mrc(const TechniqueContext& ctx, const Task& task);

/// Equal-gain combining: uniform weights, no dominance fast path.
RunRecord run_egc(const TechniqueContext& ctx, const Task& task);

/// Wide-pool selection: n samples cycled round-robin through the channel
/// pool at temperature 0.7; best sample wins.
RunRecord run_sc_n(const TechniqueContext& ctx, const Task& task, int n);

/// Discrete MRC over the wide pool: a voter clusters samples; the cluster
/// with the largest score sum wins and its top member is returned.
RunRecord run_mrc_discrete_n(const TechniqueContext& ctx, const Task& task, int n);

/// MRC with intrinsic-confidence weights; no judge call for weighting.
RunRecord run_soft_mrc(const TechniqueContext& ctx, const Task& task);

}  // namespace agentcodec
