#pragma once

// Shared fixtures: a scripted channel with canned replies plus factory
// helpers for synthetic channels and technique contexts.

#include <cmath>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "agentcodec/channel.hpp"
#include "agentcodec/scoring.hpp"
#include "agentcodec/technique_context.hpp"

namespace agentcodec::testing {

/// Replays a fixed list of replies (cycling when exhausted) and records every
/// prompt/temperature it was called with. Registers as an HTTP backend so the
/// scorer treats it as a real judge, but never touches the network.
class ScriptedChannel final : public Channel {
 public:
  explicit ScriptedChannel(std::vector<std::string> replies, double cost_per_call = 0.001,
                           bool with_logprobs = false)
      : replies_(std::move(replies)), cost_(cost_per_call), with_logprobs_(with_logprobs) {
    config_.backend = Backend::Http;
    config_.endpoint_url = "http://scripted.invalid";
    config_.model_id = "scripted";
    config_.supports_logprobs = with_logprobs;
  }

  AgentOutput generate(const std::string& prompt, std::optional<double> temperature,
                       bool want_logprobs) override {
    if (want_logprobs && !with_logprobs_)
      throw CapabilityError("scripted channel has no logprobs");
    prompts.push_back(prompt);
    temperatures.push_back(temperature.value_or(config_.default_temperature));
    if (replies_.empty()) throw TransportError("scripted channel exhausted");
    AgentOutput out;
    out.text = replies_[next_ % replies_.size()];
    ++next_;
    out.model_id = config_.model_id;
    out.temperature = temperatures.back();
    out.prompt_tokens = 10;
    out.completion_tokens = 10;
    out.cost_usd = cost_;
    if (want_logprobs) {
      // text "Q=x" carries confidence x: one token with logprob ln(x)
      auto marker = parse_quality_marker(out.text);
      double q = marker.value_or(0.5);
      out.token_logprobs = std::vector<double>{std::log(std::max(q, 1e-9))};
      out.mean_logprob = std::log(std::max(q, 1e-9));
    }
    return out;
  }

  const ChannelConfig& config() const override { return config_; }

  std::size_t calls() const { return next_; }

  std::vector<std::string> prompts;
  std::vector<double> temperatures;

 private:
  ChannelConfig config_;
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  double cost_;
  bool with_logprobs_;
};

/// A channel whose every call fails with a transport error.
class FailingChannel final : public Channel {
 public:
  FailingChannel() {
    config_.backend = Backend::Http;
    config_.endpoint_url = "http://down.invalid";
    config_.model_id = "failing";
  }
  AgentOutput generate(const std::string&, std::optional<double>, bool) override {
    throw TransportError("always down");
  }
  const ChannelConfig& config() const override { return config_; }

 private:
  ChannelConfig config_;
};

inline ChannelPtr scripted(std::vector<std::string> replies, double cost = 0.001,
                           bool with_logprobs = false) {
  return std::make_shared<ScriptedChannel>(std::move(replies), cost, with_logprobs);
}

inline ChannelPtr synthetic_channel(double base_quality = 0.7, double noise_sd = 0.0,
                                    std::int64_t seed = 0, int channel_index = 0,
                                    double correlation = 0.0) {
  ChannelConfig cfg;
  cfg.backend = Backend::Synthetic;
  cfg.synthetic = SyntheticChannelSpec{};
  cfg.synthetic->base_quality = base_quality;
  cfg.synthetic->quality_noise_sd = noise_sd;
  cfg.synthetic->branch_correlation = correlation;
  cfg.synthetic->seed = seed;
  return make_channel(cfg, channel_index);
}

inline ChannelPtr synthetic_judge() { return synthetic_channel(0.5); }

inline Task simple_task(const std::string& id = "t1") {
  Task task;
  task.id = id;
  task.prompt = "What is the airspeed of an unladen swallow?";
  task.category = "qa";
  return task;
}

/// Context with scripted generators and the marker-reading synthetic judge.
struct Fixture {
  std::vector<ChannelPtr> generators;
  ChannelPtr judge = synthetic_judge();
  std::unique_ptr<Scorer> scorer;
  TechniqueContext ctx;

  explicit Fixture(std::vector<ChannelPtr> gens) : generators(std::move(gens)) {
    scorer = std::make_unique<Scorer>(judge);
    ctx.channels = generators;
    ctx.scorer = scorer.get();
  }
};

}  // namespace agentcodec::testing
