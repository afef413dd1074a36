#include "agentcodec/fec.hpp"

#include <cmath>
#include <sstream>

#include "agentcodec/errors.hpp"

namespace agentcodec {

using detail::absorb;

std::string to_string(ParityKind k) {
  switch (k) {
    case ParityKind::Reasoning: return "reasoning";
    case ParityKind::Verification: return "verification";
    case ParityKind::Alternative: return "alternative";
    case ParityKind::Confidence: return "confidence";
  }
  return "reasoning";
}

std::vector<ParityKind> parity_plan(double rate) {
  auto close = [&](double r) { return std::abs(rate - r) < 1e-9; };
  if (close(1.0)) return {};
  if (close(0.75)) return {ParityKind::Reasoning};
  if (close(0.50)) return {ParityKind::Reasoning, ParityKind::Verification};
  if (close(0.33))
    return {ParityKind::Reasoning, ParityKind::Verification, ParityKind::Alternative};
  if (close(0.25))
    return {ParityKind::Reasoning, ParityKind::Verification, ParityKind::Alternative,
            ParityKind::Confidence};
  throw ValidationError("unsupported code rate: " + std::to_string(rate));
}

namespace {

std::string parity_prompt(const PromptLibrary& lib, const Task& task, const std::string& main,
                          ParityKind kind) {
  std::ostringstream ss;
  ss << lib.get("parity_" + to_string(kind)) << "\nTask:\n" << task.prompt
     << "\n\nMain answer:\n" << main << "\n";
  return ss.str();
}

std::string syndrome_prompt(const PromptLibrary& lib, const Task& task, const std::string& main,
                            const std::vector<ParitySection>& sections) {
  std::ostringstream ss;
  ss << lib.get("syndrome_decode") << "\nCross-checks:\n";
  for (const auto& s : sections) ss << lib.get("syndrome_check_" + to_string(s.kind));
  ss << "\nTask:\n" << task.prompt << "\n\n[BLOCK-0: main answer]\n" << main << "\n";
  for (std::size_t i = 0; i < sections.size(); ++i) {
    ss << "\n[BLOCK-" << i + 1 << ": " << to_string(sections[i].kind) << "]\n"
       << sections[i].output.text << "\n";
  }
  return ss.str();
}

}  // namespace

RunRecord run_fec(const TechniqueContext& ctx, const Task& task, double rate) {
  ctx.validate(1);
  auto plan = parity_plan(rate);

  RunRecord record;
  record.task_id = task.id;
  record.technique = "fec";

  auto main = ctx.generator()->generate(task.prompt, std::nullopt, false);
  auto main_scored = ctx.scorer->score(task, main.text);
  absorb(record, main_scored);
  record.individual_outputs.push_back(main);
  record.individual_scores.push_back(main_scored.score.value);
  record.combined_text = main.text;
  record.final_quality = main_scored.score.value;

  std::vector<ParitySection> sections;
  for (ParityKind kind : plan) {
    ParitySection s;
    s.kind = kind;
    try {
      s.output = ctx.generator()->generate(parity_prompt(ctx.lib(), task, main.text, kind),
                                           std::nullopt, false);
    } catch (const TransportError&) {
      record.flags.insert("parity_failed");
      continue;
    }
    record.overhead_outputs.push_back(s.output);
    sections.push_back(std::move(s));
  }

  if (!plan.empty()) {
    AgentOutput decoded;
    bool have_decode = true;
    try {
      decoded = ctx.critic_channel()->generate(
          syndrome_prompt(ctx.lib(), task, main.text, sections), 0.2, false);
    } catch (const TransportError&) {
      record.flags.insert("decoder_failed");
      have_decode = false;
    }
    if (have_decode) {
      record.overhead_outputs.push_back(decoded);
      if (decoded.text == main.text) {
        record.flags.insert("identity_decode");
      } else {
        auto delta = ctx.scorer->differential_score(task, decoded.text, main.text,
                                                    main_scored.score.value);
        absorb(record, delta);
        if (delta.score.value > main_scored.score.value) {
          record.combined_text = decoded.text;
          record.final_quality = delta.score.value;
        } else {
          record.flags.insert("decode_reverted");
        }
      }
    }
  }
  record.rounds = 1;
  record.finalize_cost();
  return record;
}

}  // namespace agentcodec
