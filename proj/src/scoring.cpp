#include "agentcodec/scoring.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "json.hpp"

#include "agentcodec/errors.hpp"

namespace agentcodec {

using nlohmann::json;

void Checklist::validate() const {
  if (criteria.size() != 15)
    throw ValidationError("checklist must have exactly 15 criteria, got " +
                          std::to_string(criteria.size()));
  double sum = 0.0;
  for (const auto& c : criteria) {
    if (c.weight <= 0.0) throw ValidationError("criterion weight must be positive: " + c.id);
    sum += c.weight;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("checklist weights must sum to 1, got " + std::to_string(sum));
}

namespace {

Checklist generic_checklist(bool with_reference) {
  // Weights front-loaded on correctness: 5 criteria at 0.10, 10 at 0.05.
  const std::string target = with_reference ? "the reference answer" : "the task";
  Checklist cl;
  cl.criteria = {
      {"c1", "Is the main claim or result of the answer correct with respect to " + target + "?", 0.10},
      {"c2", "Are all stated facts and figures accurate?", 0.10},
      {"c3", "Is the answer free of contradictions with " + target + "?", 0.10},
      {"c4", "Does the answer avoid fabricated or unsupported claims?", 0.10},
      {"c5", "Would an expert accept the final conclusion as correct?", 0.10},
      {"c6", "Does the answer address every part of the question?", 0.05},
      {"c7", "Are all required steps or components present?", 0.05},
      {"c8", "Is no important caveat or condition omitted?", 0.05},
      {"c9", "Is the reasoning chain logically valid from premise to conclusion?", 0.05},
      {"c10", "Are intermediate steps justified rather than asserted?", 0.05},
      {"c11", "Is the reasoning free of circularity and non sequiturs?", 0.05},
      {"c12", "Is the answer clearly organized and easy to follow?", 0.05},
      {"c13", "Is the level of detail appropriate to the question?", 0.05},
      {"c14", "Is the answer free of irrelevant or off-topic content?", 0.05},
      {"c15", "Is the final answer stated explicitly and unambiguously?", 0.05},
  };
  cl.validate();
  return cl;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// One line per criterion, "id: yes|no", case-insensitive, tolerant of
/// prefixed numbering and list bullets.
std::map<std::string, bool> parse_judge_reply(const std::string& reply,
                                              const Checklist& checklist) {
  std::map<std::string, bool> answers;
  std::stringstream ss(reply);
  std::string line;
  while (std::getline(ss, line)) {
    std::string l = lower(line);
    for (const auto& crit : checklist.criteria) {
      if (answers.count(crit.id)) continue;
      auto pos = l.find(lower(crit.id));
      if (pos == std::string::npos) continue;
      // id must end at a word boundary so "c1" does not match "c10"
      auto end = pos + crit.id.size();
      if (end < l.size() && std::isalnum(static_cast<unsigned char>(l[end]))) continue;
      auto rest = l.substr(end);
      auto yes = rest.find("yes");
      auto no = rest.find("no");
      if (yes != std::string::npos && (no == std::string::npos || yes < no))
        answers[crit.id] = true;
      else if (no != std::string::npos)
        answers[crit.id] = false;
    }
  }
  return answers;
}

std::string build_judge_prompt(const Task& task, const std::string& candidate,
                               const Checklist& checklist,
                               const std::vector<std::string>& only_ids = {}) {
  std::ostringstream p;
  p << "You are grading a candidate answer with a binary checklist.\n\nTask:\n"
    << task.prompt << "\n\n";
  if (task.reference) p << "Reference answer:\n" << *task.reference << "\n\n";
  p << "Candidate answer:\n" << candidate << "\n\n"
    << "Answer each criterion with exactly one line of the form \"<id>: yes\" or "
       "\"<id>: no\". No other text.\n\n";
  for (const auto& crit : checklist.criteria) {
    if (!only_ids.empty() &&
        std::find(only_ids.begin(), only_ids.end(), crit.id) == only_ids.end())
      continue;
    p << crit.id << ": " << crit.question << "\n";
  }
  return p.str();
}

}  // namespace

ChecklistSet ChecklistSet::defaults() {
  return ChecklistSet{generic_checklist(true), generic_checklist(false)};
}

ChecklistSet ChecklistSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open checklist file: " + path);
  json doc = json::parse(in);
  auto parse_list = [](const json& arr) {
    Checklist cl;
    for (const auto& item : arr)
      cl.criteria.push_back({item.at("id").get<std::string>(),
                             item.at("question").get<std::string>(),
                             item.at("weight").get<double>()});
    cl.validate();
    return cl;
  };
  return ChecklistSet{parse_list(doc.at("with_reference")),
                      parse_list(doc.at("without_reference"))};
}

Scorer::Scorer(ChannelPtr judge, ChecklistSet checklists)
    : judge_(std::move(judge)), checklists_(std::move(checklists)) {
  checklists_.with_reference.validate();
  checklists_.without_reference.validate();
}

QualityScore Scorer::blended_score(double objective, double judge) {
  if (objective < 0.0 || objective > 1.0 || judge < 0.0 || judge > 1.0)
    throw ValidationError("blended_score inputs must lie in [0,1]");
  QualityScore s;
  s.value = 0.6 * objective + 0.4 * judge;
  s.kind = ScoreKind::Blended;
  s.components = {objective, judge};
  return s;
}

double Scorer::objective_score(const Task& task, const std::string& candidate) {
  double total = 0.0, passed = 0.0;
  for (const auto& check : task.objective_checks) {
    total += check.weight;
    std::regex re(check.pattern, std::regex::ECMAScript);
    if (std::regex_search(candidate, re)) passed += check.weight;
  }
  return total > 0.0 ? passed / total : 0.0;
}

ScoreResult Scorer::judge_checklist(const Task& task, const std::string& candidate) const {
  const Checklist& checklist =
      task.reference ? checklists_.with_reference : checklists_.without_reference;

  ScoreResult result;
  auto reply = judge_->generate(build_judge_prompt(task, candidate, checklist), 0.0, false);
  result.judge_calls.push_back(reply);
  auto answers = parse_judge_reply(reply.text, checklist);

  if (answers.size() < checklist.criteria.size()) {
    // One re-ask for the unanswered criteria, then missing counts as "no".
    std::vector<std::string> missing;
    for (const auto& crit : checklist.criteria)
      if (!answers.count(crit.id)) missing.push_back(crit.id);
    auto retry = judge_->generate(build_judge_prompt(task, candidate, checklist, missing),
                                  0.0, false);
    result.judge_calls.push_back(retry);
    for (auto& [id, yes] : parse_judge_reply(retry.text, checklist))
      answers.emplace(id, yes);
    if (answers.size() < checklist.criteria.size()) result.degraded = true;
  }

  double value = 0.0;
  for (const auto& crit : checklist.criteria) {
    auto it = answers.find(crit.id);
    if (it != answers.end() && it->second) value += crit.weight;
  }
  result.score.value = QualityMap::clamp01(value);
  result.score.kind = ScoreKind::Checklist;
  return result;
}

ScoreResult Scorer::checklist_score(const Task& task, const std::string& candidate) const {
  if (candidate.empty()) throw ValidationError("candidate must be non-empty");
  if (judge_->backend() == Backend::Synthetic) {
    ScoreResult result;
    auto marker = parse_quality_marker(candidate);
    if (marker) {
      result.score.value = QualityMap::clamp01(*marker);
      result.score.kind = ScoreKind::SyntheticOracle;
    } else {
      result.degraded = true;
    }
    return result;
  }
  return judge_checklist(task, candidate);
}

ScoreResult Scorer::score(const Task& task, const std::string& candidate) const {
  auto result = checklist_score(task, candidate);
  if (!task.objective_checks.empty()) {
    double obj = objective_score(task, candidate);
    result.score = blended_score(obj, result.score.value);
  }
  return result;
}

ScoreResult Scorer::differential_score(const Task& task, const std::string& candidate,
                                       const std::string& baseline,
                                       double baseline_score) const {
  if (baseline_score < 0.0 || baseline_score > 1.0)
    throw ValidationError("baseline_score must lie in [0,1]");
  auto cand = score(task, candidate);
  auto base = score(task, baseline);

  ScoreResult result;
  result.judge_calls = std::move(cand.judge_calls);
  result.judge_calls.insert(result.judge_calls.end(), base.judge_calls.begin(),
                            base.judge_calls.end());
  result.degraded = cand.degraded || base.degraded;
  result.score.value =
      QualityMap::clamp01(baseline_score + (cand.score.value - base.score.value));
  result.score.kind = ScoreKind::Differential;
  return result;
}

std::string to_string(ScoreKind k) {
  switch (k) {
    case ScoreKind::Checklist: return "checklist";
    case ScoreKind::Blended: return "blended";
    case ScoreKind::Differential: return "differential";
    case ScoreKind::SyntheticOracle: return "synthetic-oracle";
  }
  return "checklist";
}

ScoreKind score_kind_from_string(const std::string& s) {
  if (s == "blended") return ScoreKind::Blended;
  if (s == "differential") return ScoreKind::Differential;
  if (s == "synthetic-oracle") return ScoreKind::SyntheticOracle;
  return ScoreKind::Checklist;
}

}  // namespace agentcodec
