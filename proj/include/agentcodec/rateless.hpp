#pragma once

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

/// Incremental-sampling fountain: draw samples round-robin across the channel
/// pool with a cycling temperature; from n_min onward stop once the decode
/// confidence 0.6*mean + 0.4*agreement reaches gamma. Decode picks the best
/// sample outright when it dominates by > 0.20, otherwise drops samples more
/// than 0.10 below the best and synthesizes the rest with score-proportional
/// weights under the best-of-sequence guard.
RunRecord run_fountain(const TechniqueContext& ctx, const Task& task, int n_max = 10,
                       int n_min = 2, double gamma = 0.85);

/// Fountain with intrinsic confidences (exp mean logprob) replacing judge
/// scores in the stopping rule, the dominance fast path, and erasure marking
/// (c < 0.5 * c_max). Only the final candidate is judge-scored.
RunRecord run_soft_fountain(const TechniqueContext& ctx, const Task& task, int n_max = 10,
                            int n_min = 2, double gamma = 0.85);

}  // namespace agentcodec
