#pragma once

#include <string>
#include <vector>

#include "agentcodec/channel.hpp"
#include "agentcodec/types.hpp"

namespace agentcodec {

struct ChecklistCriterion {
  std::string id;
  std::string question;  // yes/no phrasing
  double weight = 0.0;
};

struct Checklist {
  std::vector<ChecklistCriterion> criteria;
  /// Exactly 15 criteria, weights summing to 1 +- 1e-9.
  void validate() const;
};

struct ChecklistSet {
  Checklist with_reference;
  Checklist without_reference;

  static ChecklistSet defaults();
  static ChecklistSet load(const std::string& path);
};

/// A score plus the judge calls it cost.
struct ScoreResult {
  QualityScore score;
  std::vector<AgentOutput> judge_calls;
  bool degraded = false;
};

/// The channel estimator: binary-checklist judge, objective/judge blending,
/// and differential (common-mode-cancelling) scoring. Stateless; safe for
/// concurrent use.
class Scorer {
 public:
  explicit Scorer(ChannelPtr judge, ChecklistSet checklists = ChecklistSet::defaults());

  /// Weighted yes-rate over the 15 criteria. On a synthetic judge the
  /// embedded quality marker is read instead of calling an LLM.
  ScoreResult checklist_score(const Task& task, const std::string& candidate) const;

  /// Primary scoring entry point: checklist score, blended with the
  /// objective regex-check score when the task carries objective checks.
  ScoreResult score(const Task& task, const std::string& candidate) const;

  /// clamp(baseline_score + score(candidate) - rescore(baseline)), both
  /// scored in the same call pattern.
  ScoreResult differential_score(const Task& task, const std::string& candidate,
                                 const std::string& baseline,
                                 double baseline_score) const;

  /// q = 0.6 * objective + 0.4 * judge.
  static QualityScore blended_score(double objective, double judge);

  /// Weighted proportion of regex checks matching the candidate.
  static double objective_score(const Task& task, const std::string& candidate);

  const ChannelPtr& judge() const { return judge_; }
  const ChecklistSet& checklists() const { return checklists_; }

 private:
  ScoreResult judge_checklist(const Task& task, const std::string& candidate) const;

  ChannelPtr judge_;
  ChecklistSet checklists_;
};

}  // namespace agentcodec
