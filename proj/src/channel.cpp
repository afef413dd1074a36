#include "agentcodec/channel.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>
#include "json.hpp"

#include "agentcodec/errors.hpp"
#include "rng.hpp"

namespace agentcodec {

using nlohmann::json;

QualityMap parse_quality_map(const std::string& text) {
  auto colon = text.find(':');
  QualityMap map;
  map.kind = text.substr(0, colon);
  if (colon != std::string::npos) {
    std::stringstream ss(text.substr(colon + 1));
    std::string item;
    while (std::getline(ss, item, ',')) map.parameters.push_back(std::stod(item));
  }
  map.eval(0.5);  // validates kind and arity
  return map;
}

double intrinsic_confidence(const AgentOutput& out) {
  if (!out.token_logprobs || out.token_logprobs->empty())
    throw CapabilityError("intrinsic_confidence requires token logprobs");
  const auto& lp = *out.token_logprobs;
  double mean = std::accumulate(lp.begin(), lp.end(), 0.0) / static_cast<double>(lp.size());
  return std::exp(mean);
}

std::string strip_thinking_blocks(const std::string& text,
                                  const std::vector<std::string>& tags) {
  std::string result = text;
  for (const auto& tag : tags) {
    const std::string open = "<" + tag + ">";
    const std::string close = "</" + tag + ">";
    std::size_t pos;
    while ((pos = result.find(open)) != std::string::npos) {
      std::size_t end = result.find(close, pos);
      if (end == std::string::npos) {
        result.erase(pos);
        break;
      }
      result.erase(pos, end + close.size() - pos);
    }
  }
  // trim leading whitespace left behind by a stripped block
  std::size_t start = result.find_first_not_of(" \t\n\r");
  return start == std::string::npos ? std::string{} : result.substr(start);
}

std::optional<double> parse_quality_marker(const std::string& text) {
  static const std::regex marker(R"(Q=([0-9]*\.?[0-9]+))");
  std::optional<double> last;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), marker);
       it != std::sregex_iterator(); ++it) {
    last = std::stod((*it)[1].str());
  }
  return last;
}

namespace {

/// Max over every embedded quality marker; drives the refinement map when a
/// prompt quotes previous outputs.
std::optional<double> max_quality_marker(const std::string& text) {
  static const std::regex marker(R"(Q=([0-9]*\.?[0-9]+))");
  std::optional<double> best;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), marker);
       it != std::sregex_iterator(); ++it) {
    double v = std::stod((*it)[1].str());
    if (!best || v > *best) best = v;
  }
  return best;
}

long approx_token_count(const std::string& text) {
  long words = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return std::max<long>(words, 1);
}

}  // namespace

SyntheticChannel::SyntheticChannel(ChannelConfig config, int channel_index)
    : config_(std::move(config)), channel_index_(channel_index) {
  if (!config_.synthetic) config_.synthetic = SyntheticChannelSpec{};
}

AgentOutput SyntheticChannel::generate(const std::string& prompt,
                                       std::optional<double> temperature,
                                       bool want_logprobs) {
  return generate_at(prompt, next_call_.fetch_add(1), temperature, want_logprobs);
}

AgentOutput SyntheticChannel::generate_at(const std::string& prompt,
                                          std::uint64_t call_index,
                                          std::optional<double> temperature,
                                          bool want_logprobs) const {
  if (prompt.empty()) throw ValidationError("prompt must be non-empty");
  if (want_logprobs && !config_.supports_logprobs)
    throw CapabilityError("backend does not support logprobs: " + config_.model_id);
  const auto& spec = *config_.synthetic;
  const double temp = temperature.value_or(config_.default_temperature);
  if (temp < 0.0) throw ValidationError("temperature must be >= 0");

  // Prompts quoting earlier outputs carry quality markers; the drawn quality
  // is then the refinement map applied to the best quoted quality.
  auto quoted = max_quality_marker(prompt);
  double center = quoted ? spec.refinement_map(*quoted) : spec.base_quality;

  // Temperature scales the sampling noise; the copula couples branches that
  // share (spec, seed, call-index).
  double sd = spec.quality_noise_sd * temp;
  double rho = spec.branch_correlation;
  const auto seed = static_cast<std::uint64_t>(spec.seed);
  double z_common = detail::keyed_normal(seed, call_index, 0xC0FFEEULL);
  double z_own = detail::keyed_normal(seed, call_index,
                                      0x1000ULL + static_cast<std::uint64_t>(channel_index_));
  double eps;
  if (rho >= 0.0) {
    eps = std::sqrt(rho) * z_common + std::sqrt(1.0 - rho) * z_own;
  } else {
    // Negative correlation: opposite signs on the shared component for
    // even/odd branch indices (pairwise -|rho| for a two-branch pool).
    double sign = (channel_index_ % 2 == 0) ? 1.0 : -1.0;
    eps = std::sqrt(-rho) * sign * z_common + std::sqrt(1.0 + rho) * z_own;
  }
  double q = QualityMap::clamp01(center + sd * eps);

  AgentOutput out;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "Q=%.6f", q);
  out.text = buf;
  out.model_id = config_.model_id;
  out.temperature = temp;
  out.prompt_tokens = approx_token_count(prompt);
  out.completion_tokens = 8;
  out.cost_usd = spec.cost_per_call;
  out.latency_s = 0.0;
  if (want_logprobs) {
    double lp = std::log(std::max(q, 1e-9));
    out.token_logprobs = std::vector<double>(static_cast<std::size_t>(out.completion_tokens), lp);
    out.mean_logprob = lp;
  }
  return out;
}

HttpChannel::HttpChannel(ChannelConfig config) : config_(std::move(config)) {
  if (!config_.endpoint_url)
    throw ValidationError("http backend requires endpoint_url");
}

AgentOutput HttpChannel::generate(const std::string& prompt,
                                  std::optional<double> temperature,
                                  bool want_logprobs) {
  if (prompt.empty()) throw ValidationError("prompt must be non-empty");
  if (want_logprobs && !config_.supports_logprobs)
    throw CapabilityError("backend does not support logprobs: " + config_.model_id);
  const double temp = temperature.value_or(config_.default_temperature);
  if (temp < 0.0) throw ValidationError("temperature must be >= 0");

  json body{{"model", config_.model_id},
            {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", temp}};
  if (want_logprobs) body["logprobs"] = true;
  if (config_.max_tokens) body["max_tokens"] = *config_.max_tokens;

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()))
    headers.emplace("Authorization", std::string("Bearer ") + key);

  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  for (std::size_t attempt = 0; attempt <= backoff_s_.size(); ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(
          std::chrono::duration<double>(backoff_s_[attempt - 1]));
    httplib::Client client(*config_.endpoint_url);
    client.set_read_timeout(120, 0);
    auto res = client.Post("/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400)
      throw TransportError("terminal client error " + std::to_string(res->status) + ": " +
                           res->body);

    json reply = json::parse(res->body);
    const auto& choice = reply.at("choices").at(0);

    AgentOutput out;
    out.text = strip_thinking_blocks(choice.at("message").at("content").get<std::string>(),
                                     config_.thinking_tags);
    out.model_id = config_.model_id;
    out.temperature = temp;
    if (reply.contains("usage")) {
      out.prompt_tokens = reply["usage"].value("prompt_tokens", 0L);
      out.completion_tokens = reply["usage"].value("completion_tokens", 0L);
    }
    out.cost_usd = static_cast<double>(out.prompt_tokens) * config_.price_per_input_token +
                   static_cast<double>(out.completion_tokens) * config_.price_per_output_token;
    out.latency_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (want_logprobs && choice.contains("logprobs") && !choice["logprobs"].is_null()) {
      std::vector<double> lps;
      for (const auto& tok : choice["logprobs"].at("content"))
        lps.push_back(tok.at("logprob").get<double>());
      if (!lps.empty()) {
        out.mean_logprob =
            std::accumulate(lps.begin(), lps.end(), 0.0) / static_cast<double>(lps.size());
        out.token_logprobs = std::move(lps);
      }
    }
    return out;
  }
  throw TransportError("endpoint unreachable after retries: " + last_error);
}

ChannelPtr make_channel(const ChannelConfig& config, int channel_index) {
  if (config.backend == Backend::Synthetic)
    return std::make_shared<SyntheticChannel>(config, channel_index);
  return std::make_shared<HttpChannel>(config);
}

}  // namespace agentcodec
