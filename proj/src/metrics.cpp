#include "agentcodec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "agentcodec/errors.hpp"

namespace agentcodec {

double cost_overhead(double technique_cost, double baseline_cost) {
  if (baseline_cost <= 0.0) throw ValidationError("cost_overhead needs baseline_cost > 0");
  return technique_cost / baseline_cost;
}

GainSummary coding_gain_and_efficiency(const std::vector<PairedSample>& quality_pairs,
                                       const std::vector<PairedSample>& cost_pairs) {
  if (quality_pairs.empty() || cost_pairs.empty())
    throw ValidationError("coding_gain_and_efficiency needs non-empty pair lists");
  GainSummary s;
  for (const auto& p : quality_pairs) s.gain += p.technique_value - p.baseline_value;
  s.gain /= static_cast<double>(quality_pairs.size());
  s.overhead = 0.0;
  for (const auto& p : cost_pairs)
    s.overhead += cost_overhead(p.technique_value, p.baseline_value);
  s.overhead /= static_cast<double>(cost_pairs.size());
  s.efficiency = s.gain / s.overhead;
  return s;
}

double effective_diversity(int d, double r) {
  if (d < 1) throw ValidationError("effective_diversity needs d >= 1");
  double rc = std::max(r, 0.0);
  return static_cast<double>(d) / (1.0 + (static_cast<double>(d) - 1.0) * rc);
}

namespace {

std::optional<double> pearson(const std::vector<std::pair<double, double>>& pairs) {
  const auto n = static_cast<double>(pairs.size());
  double ma = 0.0, mb = 0.0;
  for (const auto& [a, b] : pairs) {
    ma += a;
    mb += b;
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (const auto& [a, b] : pairs) {
    sab += (a - ma) * (b - mb);
    saa += (a - ma) * (a - ma);
    sbb += (b - mb) * (b - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

double percentile(std::vector<double> sorted_ascending, double q) {
  // expects sorted input; nearest-rank with linear interpolation
  if (sorted_ascending.empty()) return 0.0;
  double pos = q * (static_cast<double>(sorted_ascending.size()) - 1.0);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - std::floor(pos);
  return sorted_ascending[lo] * (1.0 - frac) + sorted_ascending[hi] * frac;
}

}  // namespace

CorrelationResult branch_correlation(const std::vector<std::pair<double, double>>& pairs,
                                     int n_boot, std::uint64_t seed) {
  if (pairs.size() < 3) throw ValidationError("branch_correlation needs >= 3 pairs");
  CorrelationResult result;
  result.r = pearson(pairs);
  if (!result.r) return result;

  std::mt19937_64 eng(seed);
  std::vector<double> draws;
  draws.reserve(static_cast<std::size_t>(n_boot));
  for (int b = 0; b < n_boot; ++b) {
    std::vector<std::pair<double, double>> resampled(pairs.size());
    for (auto& p : resampled) p = pairs[eng() % pairs.size()];
    if (auto r = pearson(resampled)) draws.push_back(*r);
  }
  if (!draws.empty()) {
    std::sort(draws.begin(), draws.end());
    result.ci_low = percentile(draws, 0.025);
    result.ci_high = percentile(draws, 0.975);
  } else {
    result.ci_low = result.ci_high = *result.r;
  }
  return result;
}

BootstrapResult bootstrap_ci(const std::vector<std::vector<double>>& values_by_task, int n_boot,
                             double level, std::uint64_t seed) {
  if (values_by_task.empty()) throw ValidationError("bootstrap_ci needs >= 1 task group");
  for (const auto& g : values_by_task)
    if (g.empty()) throw ValidationError("bootstrap_ci: empty task group");

  BootstrapResult result;
  double total = 0.0;
  long count = 0;
  for (const auto& g : values_by_task)
    for (double v : g) {
      total += v;
      ++count;
    }
  result.mean = total / static_cast<double>(count);

  std::mt19937_64 eng(seed);
  std::vector<double> draws(static_cast<std::size_t>(n_boot));
  const auto n_tasks = values_by_task.size();
  for (auto& d : draws) {
    double s = 0.0;
    for (std::size_t t = 0; t < n_tasks; ++t) {
      const auto& group = values_by_task[eng() % n_tasks];  // stage 1: task
      s += group[eng() % group.size()];                     // stage 2: one repeat
    }
    d = s / static_cast<double>(n_tasks);
  }
  std::sort(draws.begin(), draws.end());
  double alpha = (1.0 - level) / 2.0;
  result.lo = percentile(draws, alpha);
  result.hi = percentile(draws, 1.0 - alpha);
  return result;
}

namespace {

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

WilcoxonResult wilcoxon_signed_rank(const std::vector<PairedSample>& paired) {
  std::vector<double> diffs;
  for (const auto& p : paired) {
    double d = p.technique_value - p.baseline_value;
    if (d != 0.0) diffs.push_back(d);  // drop zeros (Wilcoxon's original method)
  }
  WilcoxonResult result;
  if (diffs.empty()) return result;  // all zero: W undefined, p = 1

  const auto n = diffs.size();
  // averaged ranks of |d|; doubled so ties produce integers
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  std::vector<long> rank2(n, 0);  // 2 * averaged rank
  std::vector<long> tie_sizes;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && std::abs(diffs[order[j]]) == std::abs(diffs[order[i]])) ++j;
    long sum2 = 0;  // 2 * (sum of raw ranks i+1..j)
    for (std::size_t r = i; r < j; ++r) sum2 += 2 * static_cast<long>(r + 1);
    long avg2 = sum2 / static_cast<long>(j - i);
    for (std::size_t r = i; r < j; ++r) rank2[order[r]] = avg2;
    tie_sizes.push_back(static_cast<long>(j - i));
    i = j;
  }

  long w2 = 0;  // 2 * W+ (sum of positive-difference ranks)
  long total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0.0) w2 += rank2[i];
  }
  result.w = static_cast<double>(w2) / 2.0;

  if (n <= 25) {
    // exact distribution of 2*W+ over all 2^n sign assignments
    result.exact = true;
    std::vector<double> count(static_cast<std::size_t>(total2) + 1, 0.0);
    count[0] = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = static_cast<std::size_t>(rank2[i]);
      for (std::size_t s = count.size(); s-- > r;) count[s] += count[s - r];
    }
    double denom = std::pow(2.0, static_cast<double>(n));
    double p_le = 0.0, p_ge = 0.0;
    for (std::size_t s = 0; s < count.size(); ++s) {
      if (static_cast<long>(s) <= w2) p_le += count[s];
      if (static_cast<long>(s) >= w2) p_ge += count[s];
    }
    result.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge) / denom);
  } else {
    double nn = static_cast<double>(n);
    double mean = nn * (nn + 1.0) / 4.0;
    double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
    for (long t : tie_sizes) {
      double td = static_cast<double>(t);
      var -= (td * td * td - td) / 48.0;
    }
    double z = (*result.w - mean) / std::sqrt(var);
    result.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
  }
  return result;
}

std::vector<std::pair<double, double>> pareto_frontier(
    const std::vector<std::pair<double, double>>& points) {
  std::vector<std::pair<double, double>> result;
  std::set<std::pair<double, double>> seen;
  for (const auto& p : points) {
    bool dominated = false;
    for (const auto& q : points) {
      bool weak = q.first <= p.first && q.second >= p.second;
      bool strict = q.first < p.first || q.second > p.second;
      if (weak && strict) {
        dominated = true;
        break;
      }
    }
    if (!dominated && seen.insert(p).second) result.push_back(p);
  }
  std::sort(result.begin(), result.end());
  return result;
}

OracleGapBreakdown oracle_gap_decomposition(double oracle_q, double feasible_q,
                                            double learned_cv_q, double sim_q,
                                            double realized_q) {
  OracleGapBreakdown b;
  b.info_gap = oracle_q - feasible_q;
  b.generalization_gap = feasible_q - learned_cv_q;
  b.policy_gap = learned_cv_q - sim_q;
  b.realization_gap = sim_q - realized_q;
  return b;
}

}  // namespace agentcodec
