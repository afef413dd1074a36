#include "agentcodec/rateless.hpp"

#include <algorithm>
#include <sstream>

#include "agentcodec/errors.hpp"

namespace agentcodec {

using detail::absorb;

namespace {

constexpr double kFastPathGap = 0.20;
constexpr double kErasureGap = 0.10;
constexpr double kSynthTemp = 0.2;

/// agreement = 1 - (max - min) over the top ceil(n/2) values.
double agreement(std::vector<double> values) {
  std::sort(values.begin(), values.end(), std::greater<>());
  auto top = (values.size() + 1) / 2;
  double mx = values[0];
  double mn = values[top - 1];
  return 1.0 - (mx - mn);
}

double stop_confidence(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  return 0.6 * mean + 0.4 * agreement(values);
}

struct Sample {
  AgentOutput output;
  double value = 0.0;  // judge score or intrinsic confidence
};

std::string fountain_prompt(const PromptLibrary& lib, const Task& task,
                            const std::vector<Sample>& kept, const std::vector<double>& weights) {
  std::ostringstream ss;
  ss << lib.get("fountain_synthesis") << "\nTask:\n" << task.prompt << "\n";
  for (std::size_t i = 0; i < kept.size(); ++i) {
    ss << "\n[SAMPLE-" << i + 1 << "] (weight=" << weights[i] << ")\n" << kept[i].output.text
       << "\n";
  }
  return ss.str();
}

/// Shared sampling loop; `value_of` supplies the stopping-rule statistic
/// (judge score or intrinsic confidence) for a fresh sample.
template <typename ValueFn>
std::vector<Sample> draw_samples(const TechniqueContext& ctx, const Task& task, int n_max,
                                 int n_min, double gamma, bool want_logprobs, RunRecord& record,
                                 ValueFn value_of) {
  const auto d = ctx.channels.size();
  std::vector<Sample> samples;
  for (int n = 1; n <= n_max; ++n) {
    double temp = 0.5 + 0.1 * (n % 5);
    Sample s;
    try {
      s.output = ctx.channels[(n - 1) % d]->generate(task.prompt, temp, want_logprobs);
    } catch (const TransportError&) {
      record.flags.insert("sample_failed");
      continue;
    }
    s.value = value_of(s.output, record);
    samples.push_back(std::move(s));

    if (static_cast<int>(samples.size()) >= n_min) {
      std::vector<double> vals;
      for (const auto& sm : samples) vals.push_back(sm.value);
      if (stop_confidence(vals) >= gamma) {
        record.flags.insert("stopped_threshold");
        break;
      }
    }
  }
  if (samples.empty()) throw TransportError("all fountain samples failed");
  if (!record.flags.count("stopped_threshold")) record.flags.insert("stopped_max_samples");
  for (const auto& s : samples) {
    record.individual_outputs.push_back(s.output);
    record.individual_scores.push_back(s.value);
  }
  record.rounds = static_cast<int>(samples.size());
  return samples;
}

/// ML decode over samples whose `value` ranks them; `best_quality` is the
/// judge score of the best sample (equal to its value in the hard variant).
void decode(const TechniqueContext& ctx, const Task& task, const std::vector<Sample>& samples,
            double best_quality, RunRecord& record) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].value > samples[best].value) best = i;
  record.combined_text = samples[best].output.text;
  record.final_quality = best_quality;

  if (samples.size() < 2) return;
  double runner_up = -1.0;
  for (std::size_t i = 0; i < samples.size(); ++i)
    if (i != best) runner_up = std::max(runner_up, samples[i].value);
  if (samples[best].value - runner_up > kFastPathGap) {
    record.flags.insert("fountain_fast_path");
    return;
  }

  std::vector<Sample> kept;
  for (const auto& s : samples)
    if (samples[best].value - s.value <= kErasureGap) kept.push_back(s);
  if (kept.size() < samples.size()) record.flags.insert("erasure");
  if (kept.size() < 2) return;

  double total = 0.0;
  for (const auto& s : kept) total += s.value;
  std::vector<double> weights;
  for (const auto& s : kept)
    weights.push_back(total > 0.0 ? s.value / total : 1.0 / static_cast<double>(kept.size()));

  AgentOutput synth;
  try {
    synth = ctx.synth()->generate(fountain_prompt(ctx.lib(), task, kept, weights), kSynthTemp,
                                  false);
  } catch (const TransportError&) {
    record.flags.insert("synth_failed");
    return;
  }
  record.overhead_outputs.push_back(synth);
  if (synth.text == samples[best].output.text) {
    record.flags.insert("identity_synthesis");
    return;
  }
  auto scored = ctx.scorer->score(task, synth.text);
  absorb(record, scored);
  if (scored.score.value > best_quality) {
    record.combined_text = synth.text;
    record.final_quality = scored.score.value;
  } else {
    record.flags.insert("synthesis_reverted");
  }
}

}  // namespace

RunRecord run_fountain(const TechniqueContext& ctx, const Task& task, int n_max, int n_min,
                       double gamma) {
  ctx.validate(1);
  if (n_min < 1 || n_min > n_max) throw ValidationError("run_fountain needs 1 <= n_min <= n_max");

  RunRecord record;
  record.task_id = task.id;
  record.technique = "fountain";

  auto samples = draw_samples(ctx, task, n_max, n_min, gamma, false, record,
                              [&](const AgentOutput& out, RunRecord& rec) {
                                auto scored = ctx.scorer->score(task, out.text);
                                absorb(rec, scored);
                                return scored.score.value;
                              });
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].value > samples[best].value) best = i;
  decode(ctx, task, samples, samples[best].value, record);
  record.finalize_cost();
  return record;
}

RunRecord run_soft_fountain(const TechniqueContext& ctx, const Task& task, int n_max, int n_min,
                            double gamma) {
  ctx.validate(1);
  if (n_min < 1 || n_min > n_max)
    throw ValidationError("run_soft_fountain needs 1 <= n_min <= n_max");
  for (const auto& ch : ctx.channels)
    if (!ch->supports_logprobs())
      throw CapabilityError("soft fountain needs logprob support on every channel");

  RunRecord record;
  record.task_id = task.id;
  record.technique = "soft_fountain";

  auto samples = draw_samples(ctx, task, n_max, n_min, gamma, true, record,
                              [](const AgentOutput& out, RunRecord&) {
                                return intrinsic_confidence(out);
                              });

  // half-max erasure rule replaces the fixed-gap band for the soft variant
  std::size_t best = 0;
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].value > samples[best].value) best = i;
  double c_max = samples[best].value;
  std::vector<Sample> surviving;
  for (const auto& s : samples)
    if (s.value >= 0.5 * c_max) surviving.push_back(s);
  if (surviving.size() < samples.size()) record.flags.insert("erasure");

  // judge only the top-confidence sample; the decode guard rescores any synthesis
  auto best_scored = ctx.scorer->score(task, samples[best].output.text);
  absorb(record, best_scored);

  // individual_scores carries judge scores where measured; confidences drove
  // the stopping rule but are not qualities, so unjudged samples get the
  // unmeasured sentinel
  record.individual_scores.assign(samples.size(), -1.0);
  record.individual_scores[best] = best_scored.score.value;

  std::size_t sbest = 0;
  for (std::size_t i = 1; i < surviving.size(); ++i)
    if (surviving[i].value > surviving[sbest].value) sbest = i;

  record.combined_text = surviving[sbest].output.text;
  record.final_quality = best_scored.score.value;

  if (surviving.size() >= 2) {
    double runner_up = -1.0;
    for (std::size_t i = 0; i < surviving.size(); ++i)
      if (i != sbest) runner_up = std::max(runner_up, surviving[i].value);
    if (surviving[sbest].value - runner_up > kFastPathGap) {
      record.flags.insert("fountain_fast_path");
    } else {
      double total = 0.0;
      for (const auto& s : surviving) total += s.value;
      std::vector<double> weights;
      for (const auto& s : surviving)
        weights.push_back(total > 0.0 ? s.value / total
                                      : 1.0 / static_cast<double>(surviving.size()));
      AgentOutput synth;
      bool have_synth = true;
      try {
        synth = ctx.synth()->generate(fountain_prompt(ctx.lib(), task, surviving, weights),
                                      kSynthTemp, false);
      } catch (const TransportError&) {
        record.flags.insert("synth_failed");
        have_synth = false;
      }
      if (have_synth) {
        record.overhead_outputs.push_back(synth);
        if (synth.text == record.combined_text) {
          record.flags.insert("identity_synthesis");
        } else {
          auto scored = ctx.scorer->score(task, synth.text);
          absorb(record, scored);
          if (scored.score.value > record.final_quality) {
            record.combined_text = synth.text;
            record.final_quality = scored.score.value;
          } else {
            record.flags.insert("synthesis_reverted");
          }
        }
      }
    }
  }
  record.finalize_cost();
  return record;
}

}  // namespace agentcodec
