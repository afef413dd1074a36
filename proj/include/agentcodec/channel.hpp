#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentcodec/quality_map.hpp"
#include "agentcodec/types.hpp"

namespace agentcodec {

enum class Backend { Http, Synthetic };

/// Parameters of the deterministic simulator. Identical (spec, seed,
/// call-index) yields bit-identical output.
struct SyntheticChannelSpec {
  double base_quality = 0.7;
  double quality_noise_sd = 0.0;
  double branch_correlation = 0.0;  // in [-1, 1], Gaussian copula on the latent noise
  QualityMap refinement_map = QualityMap::identity();
  double cost_per_call = 0.001;
  std::int64_t seed = 0;
};

struct ChannelConfig {
  Backend backend = Backend::Synthetic;
  std::optional<std::string> endpoint_url;  // required for http
  std::string model_id = "synthetic";
  double default_temperature = 0.7;
  double price_per_input_token = 0.0;
  double price_per_output_token = 0.0;
  bool supports_logprobs = true;
  std::string api_key_env = "AGENTCODEC_API_KEY";
  std::optional<long> max_tokens;                  // no default asserted
  std::vector<std::string> thinking_tags = {"think"};  // stripped from text, kept in cost
  std::optional<SyntheticChannelSpec> synthetic;
};

/// A stochastic text channel. Handles are shareable across concurrent
/// callers; every generate call is independent.
class Channel {
 public:
  virtual ~Channel() = default;

  virtual AgentOutput generate(const std::string& prompt,
                               std::optional<double> temperature = std::nullopt,
                               bool want_logprobs = false) = 0;

  virtual const ChannelConfig& config() const = 0;

  bool supports_logprobs() const { return config().supports_logprobs; }
  const std::string& model_id() const { return config().model_id; }
  Backend backend() const { return config().backend; }
};

using ChannelPtr = std::shared_ptr<Channel>;

/// channel_index distinguishes correlated synthetic branches drawn from the
/// same spec (the copula couples equal call indices across indices).
ChannelPtr make_channel(const ChannelConfig& config, int channel_index = 0);

/// Geometric-mean per-token probability exp(mean log p). Requires logprobs.
double intrinsic_confidence(const AgentOutput& out);

/// Removes <tag>...</tag> spans for each configured thinking tag.
std::string strip_thinking_blocks(const std::string& text,
                                  const std::vector<std::string>& tags);

/// Parses the synthetic payload marker "Q=<float>"; returns the last
/// occurrence, or nullopt when absent.
std::optional<double> parse_quality_marker(const std::string& text);

class SyntheticChannel final : public Channel {
 public:
  SyntheticChannel(ChannelConfig config, int channel_index);

  AgentOutput generate(const std::string& prompt,
                       std::optional<double> temperature,
                       bool want_logprobs) override;

  /// Deterministic draw at an explicit call index (the generate() path
  /// consumes indices from an internal counter).
  AgentOutput generate_at(const std::string& prompt, std::uint64_t call_index,
                          std::optional<double> temperature, bool want_logprobs) const;

  const ChannelConfig& config() const override { return config_; }
  std::uint64_t calls_made() const { return next_call_.load(); }

 private:
  ChannelConfig config_;
  int channel_index_;
  std::atomic<std::uint64_t> next_call_{0};
};

class HttpChannel final : public Channel {
 public:
  explicit HttpChannel(ChannelConfig config);

  AgentOutput generate(const std::string& prompt,
                       std::optional<double> temperature,
                       bool want_logprobs) override;

  const ChannelConfig& config() const override { return config_; }

  /// Backoff schedule in seconds before attempts 2 and 3; exposed so tests
  /// can run without sleeping.
  std::vector<double>& retry_backoff_s() { return backoff_s_; }

 private:
  ChannelConfig config_;
  std::vector<double> backoff_s_{1.0, 2.0, 4.0};
};

}  // namespace agentcodec
