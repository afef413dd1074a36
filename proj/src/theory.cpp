#include "agentcodec/theory.hpp"

#include <cmath>
#include <sstream>

#include "agentcodec/errors.hpp"
#include "rng.hpp"

namespace agentcodec {

void AmplitudeProfile::validate() const {
  if (amplitudes.empty()) throw ValidationError("amplitude profile is empty");
  for (double a : amplitudes)
    if (a <= 0.0) throw ValidationError("amplitudes must be positive");
  if (sigma <= 0.0) throw ValidationError("sigma must be positive");
  if (sigma_w < 0.0) throw ValidationError("sigma_w must be non-negative");
}

double AmplitudeProfile::s1() const {
  double s = 0.0;
  for (double a : amplitudes) s += a;
  return s;
}

double AmplitudeProfile::s2() const {
  double s = 0.0;
  for (double a : amplitudes) s += a * a;
  return s;
}

double snr_mrc(const AmplitudeProfile& profile) {
  profile.validate();
  return profile.s2() / (profile.sigma * profile.sigma);
}

double snr_egc(const AmplitudeProfile& profile) {
  profile.validate();
  double s1 = profile.s1();
  auto d = static_cast<double>(profile.amplitudes.size());
  return s1 * s1 / (d * profile.sigma * profile.sigma);
}

double snr_mrc_noisy_csi(const AmplitudeProfile& profile) {
  profile.validate();
  double s2 = profile.s2();
  auto d = static_cast<double>(profile.amplitudes.size());
  double vw = profile.sigma_w * profile.sigma_w;
  return s2 * (s2 + vw) / ((s2 + d * vw) * profile.sigma * profile.sigma);
}

CriticalVariance critical_csi_variance(const AmplitudeProfile& profile) {
  profile.validate();
  if (profile.amplitudes.size() < 2)
    throw ValidationError("critical_csi_variance needs d >= 2");
  double s1 = profile.s1();
  double s2 = profile.s2();
  auto d = static_cast<double>(profile.amplitudes.size());
  CriticalVariance result;
  // Cauchy-Schwarz: d*S2 >= S1^2 with equality iff all amplitudes equal
  double denom = d * (s1 * s1 - s2);
  double numer = s2 * (d * s2 - s1 * s1);
  if (numer <= 1e-15 * s2 * s2) {
    result.degenerate = true;
    result.value = 0.0;
    return result;
  }
  result.value = numer / denom;
  return result;
}

EmpiricalSnrPair monte_carlo_crossover(const AmplitudeProfile& profile, int n_trials,
                                       std::uint64_t seed) {
  profile.validate();
  if (n_trials < 10000) throw ValidationError("monte_carlo_crossover needs n_trials >= 1e4");
  const auto d = profile.amplitudes.size();

  // Binary signal s = +1 each trial (symmetric model). Per trial, split the
  // combiner output sum w_i (a_i s + n_i) into its signal and noise parts;
  // empirical SNR = mean signal power / mean noise power across trials.
  double mrc_sig = 0.0, mrc_noise = 0.0, egc_sig = 0.0, egc_noise = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    double sig_m = 0.0, noi_m = 0.0, sig_e = 0.0, noi_e = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      auto call = static_cast<std::uint64_t>(t);
      double n_i = profile.sigma * detail::keyed_normal(seed, call, 2 * i);
      double eps_i = profile.sigma_w * detail::keyed_normal(seed, call, 2 * i + 1);
      double a_hat = profile.amplitudes[i] + eps_i;
      sig_m += a_hat * profile.amplitudes[i];
      noi_m += a_hat * n_i;
      sig_e += profile.amplitudes[i];
      noi_e += n_i;
    }
    mrc_sig += sig_m * sig_m;
    mrc_noise += noi_m * noi_m;
    egc_sig += sig_e * sig_e;
    egc_noise += noi_e * noi_e;
  }
  EmpiricalSnrPair result;
  result.mrc_noisy = mrc_sig / mrc_noise;
  result.egc = egc_sig / egc_noise;
  return result;
}

std::vector<TrajectoryPoint> iterate_quality_map(const QualityMap& map, double q0, int k_max,
                                                 double noise_sd, std::uint64_t seed) {
  if (q0 < 0.0 || q0 > 1.0) throw ValidationError("q0 must lie in [0,1]");
  if (k_max < 0) throw ValidationError("k_max must be >= 0");
  std::vector<TrajectoryPoint> trajectory;
  double q = q0;
  double running_max = q0;
  trajectory.push_back({q, running_max});
  for (int k = 0; k < k_max; ++k) {
    double noise =
        noise_sd > 0.0
            ? noise_sd * detail::keyed_normal(seed, static_cast<std::uint64_t>(k), 0x7EAAULL)
            : 0.0;
    q = QualityMap::clamp01(map(q) + noise);
    running_max = std::max(running_max, q);
    trajectory.push_back({q, running_max});
  }
  return trajectory;
}

std::string crossover_sweep_csv(AmplitudeProfile profile,
                                const std::vector<double>& sigma_w_sq_grid, int n_trials,
                                std::uint64_t seed) {
  std::ostringstream csv;
  csv << "sigma_w_sq,analytic_mrc_noisy,analytic_egc,empirical_mrc_noisy,empirical_egc\n";
  for (double vw : sigma_w_sq_grid) {
    profile.sigma_w = std::sqrt(vw);
    auto emp = monte_carlo_crossover(profile, n_trials, seed);
    csv << vw << ',' << snr_mrc_noisy_csi(profile) << ',' << snr_egc(profile) << ','
        << emp.mrc_noisy << ',' << emp.egc << '\n';
  }
  return csv.str();
}

}  // namespace agentcodec
