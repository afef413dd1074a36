#include "agentcodec/retransmit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "agentcodec/errors.hpp"
#include "json.hpp"

namespace agentcodec {

using detail::absorb;

std::optional<IssueType> parse_issue_type(const std::string& s) {
  if (s == "factual_error") return IssueType::FactualError;
  if (s == "missing_content") return IssueType::MissingContent;
  if (s == "reasoning_gap") return IssueType::ReasoningGap;
  if (s == "unclear") return IssueType::Unclear;
  return std::nullopt;
}

std::optional<Severity> parse_severity(const std::string& s) {
  if (s == "critical") return Severity::Critical;
  if (s == "major") return Severity::Major;
  if (s == "minor") return Severity::Minor;
  return std::nullopt;
}

std::string to_string(IssueType t) {
  switch (t) {
    case IssueType::FactualError: return "factual_error";
    case IssueType::MissingContent: return "missing_content";
    case IssueType::ReasoningGap: return "reasoning_gap";
    case IssueType::Unclear: return "unclear";
  }
  return "unclear";
}

std::string to_string(Severity s) {
  switch (s) {
    case Severity::Critical: return "critical";
    case Severity::Major: return "major";
    case Severity::Minor: return "minor";
  }
  return "major";
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Collapses runs of whitespace so dedup matching survives reformatting.
std::string normalize_ws(const std::string& s) {
  std::string out;
  bool in_ws = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_ws) out.push_back(' ');
      in_ws = true;
    } else {
      out.push_back(c);
      in_ws = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::optional<std::vector<CritiqueIssue>> issues_from_json_text(const std::string& text) {
  nlohmann::json parsed = nlohmann::json::parse(text, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_array()) return std::nullopt;
  std::vector<CritiqueIssue> issues;
  for (const auto& item : parsed) {
    if (!item.is_object()) continue;
    CritiqueIssue issue;
    issue.quote = item.value("quote", "");
    issue.fix = item.value("fix", "");
    if (issue.quote.empty() || issue.fix.empty()) continue;
    if (auto t = parse_issue_type(item.value("type", ""))) issue.issue_type = *t;
    if (auto s = parse_severity(item.value("severity", ""))) issue.severity = *s;
    issues.push_back(std::move(issue));
  }
  return issues;
}

std::string strip_fences(const std::string& s) {
  std::string t = trim(s);
  if (t.rfind("```", 0) != 0) return t;
  auto nl = t.find('\n');
  if (nl == std::string::npos) return t;
  std::string body = t.substr(nl + 1);
  auto close = body.rfind("```");
  if (close != std::string::npos) body = body.substr(0, close);
  return trim(body);
}

std::optional<std::string> first_fenced_block(const std::string& s) {
  auto open = s.find("```");
  if (open == std::string::npos) return std::nullopt;
  auto nl = s.find('\n', open);
  if (nl == std::string::npos) return std::nullopt;
  auto close = s.find("```", nl);
  if (close == std::string::npos) return std::nullopt;
  return trim(s.substr(nl + 1, close - nl - 1));
}

std::optional<std::string> inline_array_span(const std::string& s) {
  auto open = s.find('[');
  if (open == std::string::npos) return std::nullopt;
  int depth = 0;
  for (std::size_t i = open; i < s.size(); ++i) {
    if (s[i] == '[') ++depth;
    if (s[i] == ']' && --depth == 0) return s.substr(open, i - open + 1);
  }
  return std::nullopt;
}

}  // namespace

std::vector<CritiqueIssue> parse_critique(const std::string& reply) {
  std::string t = trim(reply);
  if (t == "[]" || t == "PASS") return {};

  std::vector<std::string> candidates = {t, strip_fences(t)};
  if (auto fenced = first_fenced_block(t)) candidates.push_back(*fenced);
  if (auto inl = inline_array_span(t)) candidates.push_back(*inl);
  for (const auto& c : candidates)
    if (auto issues = issues_from_json_text(c)) return *issues;

  CritiqueIssue unstructured;
  unstructured.fix = reply;
  return {unstructured};
}

namespace {

std::string chase_prompt(const PromptLibrary& lib, const Task& task,
                         const std::vector<AgentOutput>& attempts,
                         const std::vector<double>& scores) {
  std::ostringstream ss;
  ss << lib.get("chase_synthesis") << "\nTask:\n" << task.prompt << "\n";
  for (std::size_t i = 0; i < attempts.size(); ++i) {
    ss << "\n[ATTEMPT-" << i + 1 << "] (score=" << scores[i] << ")\n" << attempts[i].text << "\n";
  }
  return ss.str();
}

std::string critic_prompt(const PromptLibrary& lib, const Task& task, const std::string& best,
                          const std::vector<std::string>& addressed,
                          const std::string& lens = "") {
  std::ostringstream ss;
  ss << lib.get("critic");
  if (!lens.empty())
    ss << "Focus this review on " << lens << ".\n";
  ss << "\nTask:\n" << task.prompt << "\n\nCurrent answer:\n" << best << "\n";
  ss << "\nAlready-addressed issues:\n";
  if (addressed.empty())
    ss << "(none)\n";
  else
    for (const auto& q : addressed) ss << "- " << q << "\n";
  return ss.str();
}

std::string correction_prompt(const PromptLibrary& lib, const Task& task, const std::string& best,
                              const std::vector<CritiqueIssue>& issues) {
  std::ostringstream ss;
  ss << lib.get("correction_list") << "\nTask:\n" << task.prompt << "\n\nAnswer:\n" << best
     << "\n\nCorrections:\n";
  for (std::size_t i = 0; i < issues.size(); ++i) {
    ss << i + 1 << ". [" << to_string(issues[i].severity) << " " << to_string(issues[i].issue_type)
       << "] \"" << issues[i].quote << "\" -> " << issues[i].fix << "\n";
  }
  return ss.str();
}

std::string rewrite_prompt(const PromptLibrary& lib, const Task& task, const std::string& best,
                           const std::string& critique) {
  std::ostringstream ss;
  ss << lib.get("full_rewrite") << "\nTask:\n" << task.prompt << "\n\nAnswer:\n" << best
     << "\n\nCritique:\n" << critique << "\n";
  return ss.str();
}

struct IterationState {
  std::string best_text;
  double best_score = 0.0;
  std::vector<double> score_history;
  std::vector<std::string> applied_quotes;  // whitespace-normalized

  bool already_applied(const std::string& quote) const {
    auto norm = normalize_ws(quote);
    return std::find(applied_quotes.begin(), applied_quotes.end(), norm) != applied_quotes.end();
  }
};

bool plateaued(const std::vector<double>& history) {
  if (history.size() < 2) return false;
  double a = history[history.size() - 2];
  double b = history[history.size() - 1];
  return std::abs(a - b) < 0.015;
}

/// Shared generate-initial step for the iterative decoders.
IterationState initial_attempt(const TechniqueContext& ctx, const Task& task, RunRecord& record) {
  auto out = ctx.generator()->generate(task.prompt, std::nullopt, false);
  auto scored = ctx.scorer->score(task, out.text);
  absorb(record, scored);
  record.individual_outputs.push_back(out);
  record.individual_scores.push_back(scored.score.value);
  IterationState st;
  st.best_text = out.text;
  st.best_score = scored.score.value;
  st.score_history.push_back(st.best_score);
  return st;
}

}  // namespace

RunRecord run_harq_cc(const TechniqueContext& ctx, const Task& task, int max_rounds, double tau) {
  ctx.validate(1);
  if (max_rounds < 1) throw ValidationError("run_harq_cc needs max_rounds >= 1");

  RunRecord record;
  record.task_id = task.id;
  record.technique = "harq_cc";

  std::vector<AgentOutput> attempts;
  std::vector<double> scores;
  record.rounds = 0;
  for (int k = 0; k < max_rounds; ++k) {
    AgentOutput out;
    try {
      out = ctx.generator()->generate(task.prompt, std::nullopt, false);
    } catch (const TransportError&) {
      if (attempts.empty()) throw;
      record.flags.insert("round_failed");
      break;
    }
    auto scored = ctx.scorer->score(task, out.text);
    absorb(record, scored);
    attempts.push_back(out);
    scores.push_back(scored.score.value);
    record.individual_outputs.push_back(out);
    record.individual_scores.push_back(scored.score.value);
    ++record.rounds;
    if (scored.score.value >= tau) {
      record.flags.insert("early_stop");
      break;
    }
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  record.combined_text = attempts[best].text;
  record.final_quality = scores[best];

  if (attempts.size() >= 2 && !record.flags.count("early_stop")) {
    AgentOutput synth;
    bool have_synth = true;
    try {
      synth = ctx.synth()->generate(chase_prompt(ctx.lib(), task, attempts, scores), 0.3, false);
    } catch (const TransportError&) {
      record.flags.insert("synth_failed");
      have_synth = false;
    }
    if (have_synth) {
      record.overhead_outputs.push_back(synth);
      if (synth.text == attempts[best].text) {
        record.flags.insert("identity_synthesis");
      } else {
        auto delta =
            ctx.scorer->differential_score(task, synth.text, attempts[best].text, scores[best]);
        absorb(record, delta);
        if (delta.score.value > scores[best]) {
          record.combined_text = synth.text;
          record.final_quality = delta.score.value;
        } else {
          record.flags.insert("synthesis_reverted");
        }
      }
    }
  }
  record.finalize_cost();
  return record;
}

RunRecord run_harq_ir(const TechniqueContext& ctx, const Task& task, int max_rounds, double tau,
                      bool early_exit) {
  ctx.validate(1);
  if (max_rounds < 1) throw ValidationError("run_harq_ir needs max_rounds >= 1");

  RunRecord record;
  record.task_id = task.id;
  record.technique = "harq_ir";

  IterationState st = initial_attempt(ctx, task, record);

  for (int k = 0; k < max_rounds && st.best_score < tau; ++k) {
    ++record.rounds;
    std::vector<CritiqueIssue> issues;
    try {
      auto critique =
          ctx.critic_channel()->generate(critic_prompt(ctx.lib(), task, st.best_text,
                                                       st.applied_quotes),
                                         0.2, false);
      record.overhead_outputs.push_back(critique);
      issues = parse_critique(critique.text);
    } catch (const TransportError&) {
      record.flags.insert("critic_failed");
    }
    // drop issues the dedup list already covers
    issues.erase(std::remove_if(issues.begin(), issues.end(),
                                [&](const CritiqueIssue& i) {
                                  return i.structured() && st.already_applied(i.quote);
                                }),
                 issues.end());

    if (early_exit && issues.empty() && st.best_score >= 0.9 * tau) {
      record.flags.insert("early_exit_clean");
      break;
    }
    if (issues.empty()) continue;

    bool structured = std::all_of(issues.begin(), issues.end(),
                                  [](const CritiqueIssue& i) { return i.structured(); });
    std::string prompt =
        structured ? correction_prompt(ctx.lib(), task, st.best_text, issues)
                   : rewrite_prompt(ctx.lib(), task, st.best_text, issues.front().fix);

    AgentOutput candidate;
    try {
      candidate = ctx.generator()->generate(prompt, std::nullopt, false);
    } catch (const TransportError&) {
      record.flags.insert("round_failed");
      continue;
    }
    auto delta = ctx.scorer->differential_score(task, candidate.text, st.best_text, st.best_score);
    absorb(record, delta);
    record.individual_outputs.push_back(candidate);
    record.individual_scores.push_back(delta.score.value);

    if (delta.score.value >= st.best_score) {
      st.best_text = candidate.text;
      st.best_score = delta.score.value;
      for (const auto& i : issues)
        if (i.structured()) st.applied_quotes.push_back(normalize_ws(i.quote));
    } else {
      record.flags.insert("iteration_rejected");
    }
    st.score_history.push_back(st.best_score);
    if (early_exit && plateaued(st.score_history)) {
      record.flags.insert("early_exit_plateau");
      break;
    }
  }

  record.combined_text = st.best_text;
  record.final_quality = st.best_score;
  record.finalize_cost();
  return record;
}

RunRecord run_turbo(const TechniqueContext& ctx, const Task& task, int max_iterations, double tau,
                    double alpha0, Severity severity_floor, int max_corrections, bool early_exit) {
  ctx.validate(1);
  if (max_iterations < 1) throw ValidationError("run_turbo needs max_iterations >= 1");

  static const char* kLenses[4] = {"correctness", "completeness", "reasoning", "clarity"};

  RunRecord record;
  record.task_id = task.id;
  record.technique = "turbo";

  IterationState st = initial_attempt(ctx, task, record);
  double alpha = alpha0;
  int regressions = 0;

  for (int k = 0; k < max_iterations && st.best_score < tau; ++k) {
    ++record.rounds;
    std::vector<CritiqueIssue> issues;
    try {
      auto critique = ctx.critic_channel()->generate(
          critic_prompt(ctx.lib(), task, st.best_text, st.applied_quotes, kLenses[k % 4]), 0.2,
          false);
      record.overhead_outputs.push_back(critique);
      issues = parse_critique(critique.text);
    } catch (const TransportError&) {
      record.flags.insert("critic_failed");
    }
    issues.erase(std::remove_if(issues.begin(), issues.end(),
                                [&](const CritiqueIssue& i) {
                                  return i.structured() && st.already_applied(i.quote);
                                }),
                 issues.end());
    if (issues.empty()) continue;

    bool structured = std::all_of(issues.begin(), issues.end(),
                                  [](const CritiqueIssue& i) { return i.structured(); });
    std::string prompt;
    std::vector<CritiqueIssue> applied;
    if (structured) {
      // extrinsic scaling: severity floor, keep ceil(n*alpha) most severe, cap
      issues.erase(std::remove_if(issues.begin(), issues.end(),
                                  [&](const CritiqueIssue& i) {
                                    return static_cast<int>(i.severity) <
                                           static_cast<int>(severity_floor);
                                  }),
                   issues.end());
      if (issues.empty()) continue;
      std::stable_sort(issues.begin(), issues.end(),
                       [](const CritiqueIssue& a, const CritiqueIssue& b) {
                         return static_cast<int>(a.severity) > static_cast<int>(b.severity);
                       });
      auto keep = static_cast<std::size_t>(
          std::ceil(static_cast<double>(issues.size()) * alpha));
      keep = std::max<std::size_t>(keep, 1);
      keep = std::min({keep, issues.size(), static_cast<std::size_t>(max_corrections)});
      applied.assign(issues.begin(), issues.begin() + static_cast<std::ptrdiff_t>(keep));
      prompt = correction_prompt(ctx.lib(), task, st.best_text, applied);
    } else {
      prompt = rewrite_prompt(ctx.lib(), task, st.best_text, issues.front().fix);
    }

    bool accepted = false;
    try {
      auto candidate = ctx.generator()->generate(prompt, std::nullopt, false);
      auto delta =
          ctx.scorer->differential_score(task, candidate.text, st.best_text, st.best_score);
      absorb(record, delta);
      record.individual_outputs.push_back(candidate);
      record.individual_scores.push_back(delta.score.value);
      if (delta.score.value >= st.best_score) {
        accepted = true;
        st.best_text = candidate.text;
        st.best_score = delta.score.value;
        for (const auto& i : applied) st.applied_quotes.push_back(normalize_ws(i.quote));
      }
    } catch (const TransportError&) {
      record.flags.insert("round_failed");
    }

    if (accepted) {
      alpha = std::min(alpha0, 1.2 * alpha);
      regressions = 0;
    } else {
      record.flags.insert("iteration_rejected");
      alpha = std::max(0.1, 0.5 * alpha);
      ++regressions;
      if (regressions >= 2) {
        record.flags.insert("divergence_break");
        break;
      }
    }
    st.score_history.push_back(st.best_score);
    if (early_exit && plateaued(st.score_history)) {
      record.flags.insert("early_exit_plateau");
      break;
    }
  }

  record.combined_text = st.best_text;
  record.final_quality = st.best_score;
  record.finalize_cost();
  return record;
}

}  // namespace agentcodec
