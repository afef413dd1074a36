#include "agentcodec/prompts.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "agentcodec/errors.hpp"

namespace agentcodec {

namespace {

std::map<std::string, std::string> default_prompts() {
  std::map<std::string, std::string> p;

  p["mrc_synthesis"] =
      "You are combining multiple candidate answers into one. The candidate marked "
      "[BEST] has the highest quality score; the others are marked [ALT-i] with their "
      "scores and weights.\n"
      "Start from [BEST]. Add only details from the alternatives that do not "
      "contradict [BEST]. On any conflict, prefer the higher-quality response. "
      "Your output must contain ONLY information from the responses above; do not "
      "introduce external facts. Output the combined answer only.\n";

  p["egc_synthesis"] =
      "You are combining multiple candidate answers into one. All candidates are "
      "equally weighted.\n"
      "Merge them using majority reasoning: keep content that most candidates agree "
      "on, and resolve conflicts in favor of the majority. Your output must contain "
      "ONLY information from the responses above; do not introduce external facts. "
      "Output the combined answer only.\n";

  p["chase_synthesis"] =
      "You are combining several independent attempts at the same task, each shown "
      "with its quality score.\n"
      "1. Detect consensus: content shared by multiple attempts is a high-confidence "
      "signal; keep it.\n"
      "2. Harvest unique details: include correct details that appear in only one "
      "attempt.\n"
      "3. Resolve conflicts in favor of the higher-scoring attempt.\n"
      "Your output must contain ONLY information from the attempts above. Output the "
      "combined answer only.\n";

  p["fountain_synthesis"] =
      "You are combining several weighted candidate answers into one. Each candidate "
      "is shown with its weight.\n"
      "Trust the higher-weighted sample unconditionally on conflicts; add details "
      "from lower-weighted samples only when they do not contradict it. Your output "
      "must contain ONLY information from the samples above. Output the combined "
      "answer only.\n";

  p["critic"] =
      "You are a critic reviewing the current best answer to a task. Identify "
      "concrete problems.\n"
      "Return a JSON array of issues. Each issue is an object with fields:\n"
      "  \"quote\": the exact text span that is wrong or lacking,\n"
      "  \"type\": one of \"factual_error\", \"missing_content\", \"reasoning_gap\", "
      "\"unclear\",\n"
      "  \"fix\": the correction or the content to insert,\n"
      "  \"severity\": one of \"critical\", \"major\", \"minor\".\n"
      "Do not repeat any issue from the already-addressed list. If the answer has no "
      "remaining problems, return [].\n";

  p["correction_list"] =
      "Revise the answer below by applying ONLY the listed corrections. For each "
      "correction, replace or extend the quoted text as requested. Preserve every "
      "other part of the answer verbatim. Output the full revised answer only.\n";

  p["full_rewrite"] =
      "Rewrite the answer below to address the critique that follows. Keep "
      "everything that is correct and fix what the critique points out. Output the "
      "full revised answer only.\n";

  p["voter"] =
      "You are clustering candidate answers by semantic equivalence. Two answers "
      "belong to the same cluster when they give the same final result, even if "
      "worded differently.\n"
      "Return ONLY a JSON array of integer cluster IDs, one per candidate, in "
      "order. Example for four candidates: [0, 0, 1, 2]\n";

  p["parity_reasoning"] =
      "Re-derive the answer to the task from scratch using careful step-by-step "
      "reasoning, without copying the main answer. At the end, compare your "
      "conclusion with the main answer and flag any discrepancy explicitly.\n";

  p["parity_verification"] =
      "Check each claim in the main answer for correctness, logical validity, "
      "completeness, and internal consistency. For every issue you find, state the "
      "exact quote, the reason it is wrong, and the correction.\n";

  p["parity_alternative"] =
      "Solve the task using a different approach or strategy than the main answer, "
      "without referring to its reasoning. Then cross-check: does your independent "
      "solution agree with the main answer's conclusion?\n";

  p["parity_confidence"] =
      "Rate each claim in the main answer as HIGH, MEDIUM, or LOW confidence. Flag "
      "every LOW-confidence item as a potential error and explain why.\n";

  p["syndrome_decode"] =
      "You are cross-checking a main answer against independently generated parity "
      "sections, shown as numbered blocks below. Detect inconsistencies between the "
      "blocks, correct the main answer where the parity sections expose an error, "
      "and output the corrected final answer only.\n";

  p["syndrome_check_reasoning"] =
      "- Does the step-by-step re-derivation reach the same conclusion as the main "
      "answer? If not, decide which is right.\n";
  p["syndrome_check_verification"] =
      "- Did the verification section find errors? Apply any correction it "
      "justifies.\n";
  p["syndrome_check_alternative"] =
      "- Does the independent alternative solution agree with the main answer? "
      "Reconcile disagreements.\n";
  p["syndrome_check_confidence"] =
      "- Are the LOW-confidence items actually wrong? Fix the ones that are.\n";

  p["pilot_probe"] =
      "Answer the following task briefly, in 2-3 sentences. Do not elaborate.\n";

  p["difficulty_self_rating"] =
      "Rate the difficulty of the following task for you on a scale from 0.0 "
      "(trivial) to 1.0 (extremely hard). Reply with the number only.\n";

  return p;
}

}  // namespace

PromptLibrary::PromptLibrary() : prompts_(default_prompts()) {}

const std::string& PromptLibrary::get(const std::string& name) const {
  auto it = prompts_.find(name);
  if (it == prompts_.end()) throw ValidationError("unknown prompt: " + name);
  return it->second;
}

void PromptLibrary::set(const std::string& name, std::string text) {
  prompts_[name] = std::move(text);
}

void PromptLibrary::load_overrides(const std::string& dir) {
  namespace fs = std::filesystem;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path());
    std::ostringstream ss;
    ss << in.rdbuf();
    prompts_[entry.path().stem().string()] = ss.str();
  }
}

const PromptLibrary& PromptLibrary::instance() {
  static PromptLibrary lib;
  return lib;
}

}  // namespace agentcodec
