#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agentcodec/quality_map.hpp"

namespace agentcodec {

/// Linear diversity model r_i = a_i * s + n_i with noisy amplitude estimates
/// a_hat_i = a_i + eps_i, eps_i ~ N(0, sigma_w^2).
struct AmplitudeProfile {
  std::vector<double> amplitudes;  // all > 0, length d >= 2 for crossover results
  double sigma = 1.0;              // channel noise sd
  double sigma_w = 0.0;            // amplitude-estimate (CSI) noise sd

  void validate() const;
  double s1() const;  // sum a_i
  double s2() const;  // sum a_i^2
};

/// gamma_MRC = S2 / sigma^2.
double snr_mrc(const AmplitudeProfile& profile);

/// gamma_EGC = S1^2 / (d sigma^2).
double snr_egc(const AmplitudeProfile& profile);

/// First-order mean output SNR with noisy weights:
/// S2 (S2 + sigma_w^2) / ((S2 + d sigma_w^2) sigma^2).
double snr_mrc_noisy_csi(const AmplitudeProfile& profile);

struct CriticalVariance {
  double value = 0.0;
  bool degenerate = false;  // equal amplitudes: crossover collapses to 0
};

/// sigma_w*^2 = S2 (d S2 - S1^2) / (d (S1^2 - S2)); 0 (flagged) for equal
/// amplitudes.
CriticalVariance critical_csi_variance(const AmplitudeProfile& profile);

struct EmpiricalSnrPair {
  double mrc_noisy = 0.0;
  double egc = 0.0;
};

/// Monte Carlo over the linear model: combiner output sum w_i r_i with
/// w_i = a_hat_i (noisy MRC) and w_i = 1 (EGC). Empirical SNR is mean squared
/// signal over mean squared noise across trials.
EmpiricalSnrPair monte_carlo_crossover(const AmplitudeProfile& profile, int n_trials,
                                       std::uint64_t seed);

struct TrajectoryPoint {
  double iterate = 0.0;
  double running_max = 0.0;
};

/// q_{k+1} = clamp(f(q_k) + noise); the running max realizes the
/// best-of-sequence guard. Returns k_max + 1 points, q0 first.
std::vector<TrajectoryPoint> iterate_quality_map(const QualityMap& map, double q0, int k_max,
                                                 double noise_sd, std::uint64_t seed);

/// CSV sweep over sigma_w^2: columns sigma_w_sq, analytic noisy-MRC, analytic
/// EGC, empirical noisy-MRC, empirical EGC.
std::string crossover_sweep_csv(AmplitudeProfile profile,
                                const std::vector<double>& sigma_w_sq_grid, int n_trials,
                                std::uint64_t seed);

}  // namespace agentcodec
