#pragma once

#include <optional>
#include <string>
#include <vector>

#include "agentcodec/technique_context.hpp"

namespace agentcodec {

enum class IssueType { FactualError, MissingContent, ReasoningGap, Unclear };
enum class Severity { Minor = 0, Major = 1, Critical = 2 };

std::optional<IssueType> parse_issue_type(const std::string& s);
std::optional<Severity> parse_severity(const std::string& s);
std::string to_string(IssueType t);
std::string to_string(Severity s);

/// One critic finding. An empty quote marks an unstructured critique (the raw
/// critic reply could not be parsed as an issue array) and triggers a full
/// rewrite instead of a targeted correction list.
struct CritiqueIssue {
  std::string quote;
  IssueType issue_type = IssueType::Unclear;
  std::string fix;
  Severity severity = Severity::Major;

  bool structured() const { return !quote.empty(); }
};

/// Parses a critic reply into issues. Tries, in order: the raw reply, the
/// reply with backtick fences stripped, the first fenced block, and the first
/// inline [...] span. "[]" or "PASS" yield an empty list; anything
/// unparseable yields one unstructured issue carrying the raw reply as fix.
std::vector<CritiqueIssue> parse_critique(const std::string& reply);

/// Chase combining: resend the identical prompt up to max_rounds times, stop
/// early at score >= tau, otherwise synthesize all attempts (consensus +
/// unique-detail harvest) under the best-of-sequence guard.
RunRecord run_harq_cc(const TechniqueContext& ctx, const Task& task, int max_rounds = 5,
                      double tau = 0.85);

/// Incremental redundancy: each round a critic emits targeted issues which are
/// applied as a correction list (or a full rewrite when unstructured); a
/// candidate is accepted iff its differential score >= the running best.
RunRecord run_harq_ir(const TechniqueContext& ctx, const Task& task, int max_rounds = 5,
                      double tau = 0.85, bool early_exit = false);

/// Turbo decoding: generator/critic exchange with a rotating critique lens,
/// extrinsic scaling (severity floor, keep ceil(n*alpha), hard cap) and
/// adaptive damping of alpha with a two-regression divergence break.
RunRecord run_turbo(const TechniqueContext& ctx, const Task& task, int max_iterations = 5,
                    double tau = 0.9, double alpha0 = 0.5,
                    Severity severity_floor = Severity::Major, int max_corrections = 2,
                    bool early_exit = false);

}  // namespace agentcodec
