#pragma once

#include <vector>

#include "agentcodec/channel.hpp"
#include "agentcodec/prompts.hpp"
#include "agentcodec/scoring.hpp"
#include "agentcodec/types.hpp"

namespace agentcodec {

/// Channels and scorer shared by every technique. Branch generation may fan
/// out concurrently; combining is a deterministic fold over the collected
/// results.
struct TechniqueContext {
  std::vector<ChannelPtr> channels;   // generator pool
  ChannelPtr synthesizer;             // defaults to the judge channel
  ChannelPtr critic;                  // defaults to channels[0] (same-complexity decoder)
  ChannelPtr voter;                   // defaults to channels[0]
  const Scorer* scorer = nullptr;
  const PromptLibrary* prompts = nullptr;

  const PromptLibrary& lib() const {
    return prompts ? *prompts : PromptLibrary::instance();
  }
  ChannelPtr generator() const { return channels.at(0); }
  ChannelPtr synth() const { return synthesizer ? synthesizer : scorer->judge(); }
  ChannelPtr critic_channel() const { return critic ? critic : channels.at(0); }
  ChannelPtr voter_channel() const { return voter ? voter : channels.at(0); }

  void validate(std::size_t min_channels = 1) const;
};

/// One scored branch.
struct BranchResult {
  AgentOutput output;
  QualityScore score;
  std::size_t channel_index = 0;
};

namespace detail {

/// Appends a score result's judge calls to the record's overhead bucket.
void absorb(RunRecord& record, const ScoreResult& result);

/// Argmax score with lowest-index tie-break.
std::size_t best_branch(const std::vector<BranchResult>& branches);

}  // namespace detail

}  // namespace agentcodec
