#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace agentcodec {

/// Per-task technique/baseline value pair; pairing is on (task, repeat).
struct PairedSample {
  std::string task_id;
  double technique_value = 0.0;
  double baseline_value = 0.0;
  int repeat_index = 0;
};

/// Per-task cost ratio rho = technique / baseline.
double cost_overhead(double technique_cost, double baseline_cost);

struct GainSummary {
  double gain = 0.0;        // G: mean paired quality difference
  double efficiency = 0.0;  // eta = G / rho
  double overhead = 1.0;    // rho: mean per-task cost ratio
};

/// G over quality pairs, rho over cost pairs (mean of per-task ratios),
/// eta = G / rho. The two lists pair up task-by-task.
GainSummary coding_gain_and_efficiency(const std::vector<PairedSample>& quality_pairs,
                                       const std::vector<PairedSample>& cost_pairs);

/// d_eff = d / (1 + (d-1) * max(r, 0)).
double effective_diversity(int d, double r);

struct CorrelationResult {
  std::optional<double> r;  // undefined when either margin has zero variance
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Sample Pearson correlation with a task-level bootstrap CI.
CorrelationResult branch_correlation(const std::vector<std::pair<double, double>>& pairs,
                                     int n_boot = 2000, std::uint64_t seed = 0);

struct BootstrapResult {
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Seed-aware two-stage bootstrap: resample tasks with replacement, then one
/// repeat per sampled task; percentile interval. Deterministic given seed.
BootstrapResult bootstrap_ci(const std::vector<std::vector<double>>& values_by_task,
                             int n_boot = 4000, double level = 0.95, std::uint64_t seed = 0);

struct WilcoxonResult {
  std::optional<double> w;  // signed-rank statistic; absent when all diffs are zero
  double p_value = 1.0;
  bool exact = false;  // exact enumeration (n <= 25) vs normal approximation
};

/// Paired two-sided Wilcoxon signed-rank: zero differences dropped, tied
/// absolute ranks averaged; exact distribution for n <= 25, normal
/// approximation with tie correction beyond.
WilcoxonResult wilcoxon_signed_rank(const std::vector<PairedSample>& paired);

/// Non-dominated subset of (cost, quality) points, sorted by cost; exact
/// duplicates keep one representative.
std::vector<std::pair<double, double>> pareto_frontier(
    const std::vector<std::pair<double, double>>& points);

struct OracleGapBreakdown {
  double info_gap = 0.0;           // oracle - feasible
  double generalization_gap = 0.0; // feasible - learned_cv
  double policy_gap = 0.0;         // learned_cv - sim
  double realization_gap = 0.0;    // sim - realized
  double total() const { return info_gap + generalization_gap + policy_gap + realization_gap; }
};

OracleGapBreakdown oracle_gap_decomposition(double oracle_q, double feasible_q,
                                            double learned_cv_q, double sim_q, double realized_q);

}  // namespace agentcodec
