#include "agentcodec/dispatch.hpp"

#include "agentcodec/diversity.hpp"
#include "agentcodec/errors.hpp"
#include "agentcodec/fec.hpp"
#include "agentcodec/rateless.hpp"
#include "agentcodec/retransmit.hpp"

namespace agentcodec {

namespace {

RunRecord run_baseline(const TechniqueContext& ctx, const Task& task) {
  ctx.validate(1);
  RunRecord record;
  record.task_id = task.id;
  record.technique = "baseline";
  auto out = ctx.generator()->generate(task.prompt, std::nullopt, false);
  auto scored = ctx.scorer->score(task, out.text);
  detail::absorb(record, scored);
  record.individual_outputs.push_back(out);
  record.individual_scores.push_back(scored.score.value);
  record.combined_text = out.text;
  record.final_quality = scored.score.value;
  record.finalize_cost();
  return record;
}

}  // namespace

const std::vector<std::string>& known_techniques() {
  static const std::vector<std::string> ids = {
      "baseline", "sc",       "mrc",     "egc",           "sc_n",
      "mrc_discrete_n",       "soft_mrc", "harq_cc",      "harq_ir",
      "turbo",    "fountain", "soft_fountain",            "fec"};
  return ids;
}

RunRecord execute_technique(const TechniqueContext& ctx, const Task& task,
                            const TechniqueConfig& cfg) {
  const auto& t = cfg.technique;
  if (t == "baseline") return run_baseline(ctx, task);
  if (t == "sc") return run_sc(ctx, task);
  if (t == "mrc") return run_mrc(ctx, task);
  if (t == "egc") return run_egc(ctx, task);
  if (t == "sc_n") return run_sc_n(ctx, task, cfg.n_samples);
  if (t == "mrc_discrete_n") return run_mrc_discrete_n(ctx, task, cfg.n_samples);
  if (t == "soft_mrc") return run_soft_mrc(ctx, task);
  if (t == "harq_cc") return run_harq_cc(ctx, task, cfg.max_rounds, cfg.tau);
  if (t == "harq_ir") return run_harq_ir(ctx, task, cfg.max_rounds, cfg.tau, cfg.early_exit);
  if (t == "turbo") {
    auto floor = parse_severity(cfg.severity_floor);
    if (!floor) throw ValidationError("unknown severity floor: " + cfg.severity_floor);
    return run_turbo(ctx, task, cfg.max_rounds, cfg.tau, cfg.alpha0, *floor,
                     cfg.max_corrections, cfg.early_exit);
  }
  if (t == "fountain") return run_fountain(ctx, task, cfg.n_max, cfg.n_min, cfg.gamma);
  if (t == "soft_fountain")
    return run_soft_fountain(ctx, task, cfg.n_max, cfg.n_min, cfg.gamma);
  if (t == "fec") return run_fec(ctx, task, cfg.code_rate);
  throw ValidationError("unknown technique: " + t);
}

}  // namespace agentcodec
