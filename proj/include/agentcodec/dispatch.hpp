#pragma once

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

/// Runs the named technique with its configured hyperparameters. "baseline"
/// is a single default-temperature generation plus one judge score.
RunRecord execute_technique(const TechniqueContext& ctx, const Task& task,
                            const TechniqueConfig& config);

/// All dispatchable technique ids, in canonical order.
const std::vector<std::string>& known_techniques();

}  // namespace agentcodec
