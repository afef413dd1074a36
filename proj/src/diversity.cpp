#include "agentcodec/diversity.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "agentcodec/errors.hpp"

namespace agentcodec {

using detail::absorb;
using detail::best_branch;

namespace {

/// Draws one branch per channel; tolerates partial failures but requires at
/// least one success.
std::vector<BranchResult> generate_branches(const TechniqueContext& ctx, const Task& task,
                                            RunRecord& record,
                                            std::optional<double> temperature = std::nullopt,
                                            bool want_logprobs = false) {
  std::vector<BranchResult> branches;
  std::string last_error;
  for (std::size_t i = 0; i < ctx.channels.size(); ++i) {
    try {
      BranchResult br;
      br.output = ctx.channels[i]->generate(task.prompt, temperature, want_logprobs);
      br.channel_index = i;
      branches.push_back(std::move(br));
    } catch (const TransportError& e) {
      record.flags.insert("branch_failed");
      last_error = e.what();
    }
  }
  if (branches.empty())
    throw TransportError("all branches failed: " + last_error);
  return branches;
}

void score_branches(const TechniqueContext& ctx, const Task& task,
                    std::vector<BranchResult>& branches, RunRecord& record) {
  for (auto& br : branches) {
    auto res = ctx.scorer->score(task, br.output.text);
    br.score = res.score;
    absorb(record, res);
  }
}

void store_branches(RunRecord& record, const std::vector<BranchResult>& branches,
                    bool with_scores = true) {
  for (const auto& br : branches) {
    record.individual_outputs.push_back(br.output);
    record.individual_scores.push_back(with_scores ? br.score.value : -1.0);
  }
}

std::string weighted_synthesis_prompt(const PromptLibrary& lib, const std::string& header_key,
                                      const Task& task,
                                      const std::vector<BranchResult>& branches,
                                      const std::vector<double>& weights,
                                      std::size_t best) {
  std::ostringstream p;
  p << lib.get(header_key) << "\nTask:\n" << task.prompt << "\n\n";
  auto emit = [&](std::size_t i, const std::string& tag) {
    p << "[" << tag << "] (score=" << branches[i].score.value << ", weight=" << weights[i]
      << ")\n"
      << branches[i].output.text << "\n\n";
  };
  emit(best, "BEST");
  int alt = 1;
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (i != best) emit(i, "ALT-" + std::to_string(alt++));
  return p.str();
}

/// Shared MRC/EGC tail: synthesize, apply identity detection and the
/// best-of-sequence guard, fall back to SC on synthesizer failure.
void combine_with_guard(const TechniqueContext& ctx, const Task& task,
                        const std::vector<BranchResult>& branches,
                        const std::vector<double>& weights, std::size_t best,
                        const std::string& header_key, double synth_temperature,
                        RunRecord& record) {
  const auto& best_text = branches[best].output.text;
  const double best_score = branches[best].score.value;

  AgentOutput synth;
  try {
    synth = ctx.synth()->generate(
        weighted_synthesis_prompt(ctx.lib(), header_key, task, branches, weights, best),
        synth_temperature, false);
  } catch (const TransportError&) {
    record.flags.insert("synth_failed");
    record.combined_text = best_text;
    record.final_quality = best_score;
    return;
  }
  record.overhead_outputs.push_back(synth);

  if (synth.text == best_text) {
    // identity detection: reuse the best score, no rescore
    record.flags.insert("identity_synthesis");
    record.combined_text = best_text;
    record.final_quality = best_score;
    return;
  }

  auto delta = ctx.scorer->differential_score(task, synth.text, best_text, best_score);
  absorb(record, delta);
  if (delta.score.value > best_score) {
    record.combined_text = synth.text;
    record.final_quality = delta.score.value;
  } else {
    record.flags.insert("synthesis_reverted");
    record.combined_text = best_text;
    record.final_quality = best_score;
  }
}

std::vector<double> mrc_weights(const std::vector<BranchResult>& branches) {
  double sum = 0.0;
  for (const auto& br : branches) sum += br.score.value;
  std::vector<double> w(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i)
    w[i] = sum > 0.0 ? branches[i].score.value / sum : 1.0 / static_cast<double>(branches.size());
  return w;
}

}  // namespace

RunRecord run_sc(const TechniqueContext& ctx, const Task& task) {
  ctx.validate(1);
  RunRecord record{task.id, "sc"};
  auto branches = generate_branches(ctx, task, record);
  score_branches(ctx, task, branches, record);
  store_branches(record, branches);
  auto best = best_branch(branches);
  record.combined_text = branches[best].output.text;
  record.final_quality = branches[best].score.value;
  record.finalize_cost();
  return record;
}

RunRecord run_mrc(const TechniqueContext& ctx, const Task& task) {
  ctx.validate(2);
  RunRecord record{task.id, "mrc"};
  auto branches = generate_branches(ctx, task, record);
  score_branches(ctx, task, branches, record);
  store_branches(record, branches);
  auto best = best_branch(branches);
  const double q_max = branches[best].score.value;

  // dominance fast path: every non-best score < 0.5 * q_max
  bool dominated = true;
  for (std::size_t i = 0; i < branches.size(); ++i)
    if (i != best && branches[i].score.value >= 0.5 * q_max) dominated = false;
  if (branches.size() >= 2 && dominated) {
    record.flags.insert("mrc_fast_path");
    record.combined_text = branches[best].output.text;
    record.final_quality = q_max;
    record.finalize_cost();
    return record;
  }

  combine_with_guard(ctx, task, branches, mrc_weights(branches), best, "mrc_synthesis", 0.1,
                     record);
  record.finalize_cost();
  return record;
}

RunRecord run_egc(const TechniqueContext& ctx, const Task& task) {
  ctx.validate(1);
  RunRecord record{task.id, "egc"};
  auto branches = generate_branches(ctx, task, record);
  score_branches(ctx, task, branches, record);
  store_branches(record, branches);
  auto best = best_branch(branches);
  if (branches.size() < 2) {  // d=1 degenerates to SC
    record.combined_text = branches[best].output.text;
    record.final_quality = branches[best].score.value;
    record.finalize_cost();
    return record;
  }
  std::vector<double> weights(branches.size(), 1.0 / static_cast<double>(branches.size()));
  combine_with_guard(ctx, task, branches, weights, best, "egc_synthesis", 0.2, record);
  record.finalize_cost();
  return record;
}

namespace {

std::vector<BranchResult> sample_pool(const TechniqueContext& ctx, const Task& task, int n,
                                      RunRecord& record) {
  std::vector<BranchResult> samples;
  std::string last_error;
  const auto d = ctx.channels.size();
  for (int i = 1; i <= n; ++i) {
    auto ch = static_cast<std::size_t>(i - 1) % d;
    try {
      BranchResult br;
      br.output = ctx.channels[ch]->generate(task.prompt, 0.7, false);
      br.channel_index = ch;
      samples.push_back(std::move(br));
    } catch (const TransportError& e) {
      record.flags.insert("branch_failed");
      last_error = e.what();
    }
  }
  if (samples.empty()) throw TransportError("all samples failed: " + last_error);
  return samples;
}

}  // namespace

RunRecord run_sc_n(const TechniqueContext& ctx, const Task& task, int n) {
  ctx.validate(1);
  if (n < 1) throw ValidationError("sc_n requires n >= 1");
  RunRecord record{task.id, "sc_n"};
  auto samples = sample_pool(ctx, task, n, record);
  score_branches(ctx, task, samples, record);
  store_branches(record, samples);
  auto best = best_branch(samples);
  record.combined_text = samples[best].output.text;
  record.final_quality = samples[best].score.value;
  record.rounds = n;
  record.finalize_cost();
  return record;
}

ClusterAssignment parse_cluster_labels(const std::string& reply, std::size_t n) {
  using nlohmann::json;
  ClusterAssignment fallback;
  for (std::size_t i = 0; i < n; ++i) fallback.labels.push_back("s" + std::to_string(i));
  fallback.singleton_fallback = true;

  // raw -> stripped backticks -> first inline [...] span
  std::vector<std::string> attempts{reply};
  std::string stripped = reply;
  std::erase(stripped, '`');
  attempts.push_back(stripped);
  auto lb = reply.find('[');
  auto rb = reply.rfind(']');
  if (lb != std::string::npos && rb != std::string::npos && rb > lb)
    attempts.push_back(reply.substr(lb, rb - lb + 1));

  for (const auto& text : attempts) {
    json parsed = json::parse(text, nullptr, false);
    if (!parsed.is_array() || parsed.size() != n) continue;
    ClusterAssignment out;
    bool ok = true;
    for (const auto& item : parsed) {
      if (item.is_number_integer())
        out.labels.push_back(std::to_string(item.get<long>()));
      else if (item.is_string())
        out.labels.push_back(item.get<std::string>());
      else {
        ok = false;
        break;
      }
    }
    if (ok) return out;
  }
  return fallback;
}

RunRecord run_mrc_discrete_n(const TechniqueContext& ctx, const Task& task, int n) {
  ctx.validate(1);
  if (n < 2) throw ValidationError("mrc_discrete_n requires n >= 2");
  RunRecord record{task.id, "mrc_discrete_n"};
  auto samples = sample_pool(ctx, task, n, record);
  score_branches(ctx, task, samples, record);
  store_branches(record, samples);
  record.rounds = n;

  ClusterAssignment clusters;
  {
    std::ostringstream p;
    p << ctx.lib().get("voter") << "\nTask:\n" << task.prompt << "\n\nCandidates:\n";
    for (std::size_t i = 0; i < samples.size(); ++i)
      p << (i + 1) << ". " << samples[i].output.text << "\n";
    try {
      auto reply = ctx.voter_channel()->generate(p.str(), 0.0, false);
      record.overhead_outputs.push_back(reply);
      clusters = parse_cluster_labels(reply.text, samples.size());
    } catch (const TransportError&) {
      record.flags.insert("voter_failed");
      clusters = parse_cluster_labels("", samples.size());
    }
  }
  if (clusters.singleton_fallback) record.flags.insert("singleton_fallback");

  // cluster with the largest score sum wins; ties go to the cluster whose
  // top member has the lowest index
  std::map<std::string, std::pair<double, std::size_t>> sums;  // label -> (sum, top index)
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, inserted] = sums.try_emplace(clusters.labels[i], 0.0, i);
    it->second.first += samples[i].score.value;
    if (samples[i].score.value > samples[it->second.second].score.value) it->second.second = i;
  }
  std::size_t winner = 0;
  double best_sum = -1.0;
  for (const auto& [label, entry] : sums) {
    auto [sum, top] = entry;
    if (sum > best_sum + 1e-12 ||
        (std::abs(sum - best_sum) <= 1e-12 && top < winner)) {
      best_sum = sum;
      winner = top;
    }
  }
  record.combined_text = samples[winner].output.text;
  record.final_quality = samples[winner].score.value;
  record.finalize_cost();
  return record;
}

RunRecord run_soft_mrc(const TechniqueContext& ctx, const Task& task) {
  ctx.validate(2);
  for (const auto& ch : ctx.channels)
    if (!ch->supports_logprobs())
      throw CapabilityError("soft MRC requires logprob support on every channel: " +
                            ch->model_id());

  RunRecord record{task.id, "soft_mrc"};
  auto branches = generate_branches(ctx, task, record, std::nullopt, /*want_logprobs=*/true);
  store_branches(record, branches, /*with_scores=*/false);

  std::vector<double> conf(branches.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < branches.size(); ++i) {
    conf[i] = intrinsic_confidence(branches[i].output);
    sum += conf[i];
  }
  std::vector<double> weights(branches.size());
  for (std::size_t i = 0; i < branches.size(); ++i)
    weights[i] = sum > 0.0 ? conf[i] / sum : 1.0 / static_cast<double>(branches.size());

  std::size_t best = 0;
  for (std::size_t i = 1; i < branches.size(); ++i)
    if (conf[i] > conf[best]) best = i;

  // the guard needs a judge score for the top-confidence branch only
  auto best_scored = ctx.scorer->score(task, branches[best].output.text);
  absorb(record, best_scored);
  record.individual_scores[best] = best_scored.score.value;
  const auto& best_text = branches[best].output.text;
  const double best_judge = best_scored.score.value;

  // shown scores in the synthesis prompt are the intrinsic confidences
  for (std::size_t i = 0; i < branches.size(); ++i) branches[i].score.value = conf[i];

  AgentOutput synth;
  try {
    synth = ctx.synth()->generate(
        weighted_synthesis_prompt(ctx.lib(), "mrc_synthesis", task, branches, weights, best),
        0.1, false);
  } catch (const TransportError&) {
    record.flags.insert("synth_failed");
    record.combined_text = best_text;
    record.final_quality = best_judge;
    record.finalize_cost();
    return record;
  }
  record.overhead_outputs.push_back(synth);

  if (synth.text == best_text) {
    record.flags.insert("identity_synthesis");
    record.combined_text = best_text;
    record.final_quality = best_judge;
  } else {
    auto delta = ctx.scorer->differential_score(task, synth.text, best_text, best_judge);
    absorb(record, delta);
    if (delta.score.value > best_judge) {
      record.combined_text = synth.text;
      record.final_quality = delta.score.value;
    } else {
      record.flags.insert("synthesis_reverted");
      record.combined_text = best_text;
      record.final_quality = best_judge;
    }
  }
  record.finalize_cost();
  return record;
}

}  // namespace agentcodec
