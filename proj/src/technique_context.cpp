#include "agentcodec/technique_context.hpp"

#include "agentcodec/errors.hpp"

namespace agentcodec {

void TechniqueContext::validate(std::size_t min_channels) const {
  if (!scorer) throw ValidationError("technique context needs a scorer");
  if (channels.size() < min_channels)
    throw ValidationError("technique needs at least " + std::to_string(min_channels) +
                          " channel(s), got " + std::to_string(channels.size()));
}

void RunRecord::finalize_cost() {
  total_cost = 0.0;
  for (const auto& o : individual_outputs) total_cost += o.cost_usd;
  for (const auto& o : overhead_outputs) total_cost += o.cost_usd;
}

namespace detail {

void absorb(RunRecord& record, const ScoreResult& result) {
  record.overhead_outputs.insert(record.overhead_outputs.end(), result.judge_calls.begin(),
                                 result.judge_calls.end());
  if (result.degraded) record.flags.insert("degraded_score");
}

std::size_t best_branch(const std::vector<BranchResult>& branches) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < branches.size(); ++i)
    if (branches[i].score.value > branches[best].score.value) best = i;
  return best;
}

}  // namespace detail

}  // namespace agentcodec
