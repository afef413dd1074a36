#pragma once

#include <string>
#include <vector>

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

enum class ParityKind { Reasoning, Verification, Alternative, Confidence };

std::string to_string(ParityKind k);

/// One generated parity section.
struct ParitySection {
  ParityKind kind = ParityKind::Reasoning;
  AgentOutput output;
};

/// Maps a code rate to its ordered parity-section list:
/// 1.0 -> [], 0.75 -> [reasoning], 0.50 -> [reasoning, verification],
/// 0.33 -> [reasoning, verification, alternative], 0.25 -> all four.
/// Any other rate is a validation error.
std::vector<ParityKind> parity_plan(double rate);

/// Structured FEC: generate the main answer, then each parity section as a
/// separate call with the main answer in context; a syndrome-decoding call
/// (temperature 0.2) cross-checks the numbered blocks and emits a corrected
/// answer, differential-rescored under the best-of-sequence guard.
RunRecord run_fec(const TechniqueContext& ctx, const Task& task, double rate);

}  // namespace agentcodec
