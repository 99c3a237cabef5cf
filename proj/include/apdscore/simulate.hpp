#pragma once

// Monte Carlo harness: empirical size under the null, empirical power under
// local alternatives theta_n = theta_0 + delta / sqrt(n), and Monte Carlo /
// quadrature cross-checks of the Fisher blocks.
//
// Replicate r of a study draws from RandomStream(seed, r), and per-replicate
// results are stored by index before any summary is formed, so a report is a
// pure function of the configuration regardless of the worker count.

#include <Eigen/Core>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "apdscore/numerics.hpp"
#include "apdscore/score.hpp"

namespace apdscore {

struct StudyConfig {
  double lambda = 2.0;
  std::size_t n = 2000;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::vector<double> alpha_grid = {0.01, 0.05, 0.10};
  std::optional<Eigen::Vector2d> delta;  // absent: null study
  LocationScale kappa;                   // data-generating (mu, sigma)
  unsigned workers = 0;                  // 0: hardware concurrency; never affects results

  // Throws ConfigError.
  void validate() const;
};

struct RejectionRate {
  double alpha = 0.0;
  double rate = 0.0;
  double std_error = 0.0;
  std::optional<double> predicted;  // asymptotic power, alternative studies only
};

struct StudyReport {
  std::vector<RejectionRate> rejection_rates;
  double ks_stat = 0.0;          // {T_n} vs chi2_2(ncp)
  double p_value_ks_stat = 0.0;  // {p} vs Uniform(0, 1)
  double ncp = 0.0;              // 0 for null studies
  double theta1_n = 0.5;         // data-generating shape actually used
  double theta2_n = 0.0;
  std::size_t replicate_failures = 0;
  std::vector<double> t_stats;  // per replicate, NaN for failed replicates
};

StudyReport run_null_study(const StudyConfig& cfg);
StudyReport run_local_alternative_study(const StudyConfig& cfg);

// Kolmogorov-Smirnov distance between the empirical law of `values` and a
// continuous reference CDF.
template <typename Cdf>
double ks_distance(std::vector<double> values, const Cdf& cdf);

struct FisherEstimate {
  Eigen::Matrix4d estimate;
  Eigen::Matrix4d std_error;
};

// Sample covariance of (d_theta(Y), d_kappa(Y)) over Y ~ APD(theta_0, (0, 1)).
// Requires n_draws >= 100000.
FisherEstimate mc_fisher_check(const NullSpec& null, std::size_t n_draws, std::uint64_t seed);

// E[d_a(Y) d_b(Y)] by adaptive quadrature over (-inf, 0) and (0, inf).
Eigen::Matrix4d quadrature_fisher(const NullSpec& null, const QuadratureSpec& spec = {1e-12, 1e-12, 4000});

// E[d_a(Y)] for the four score components, by the same quadrature.
Eigen::Vector4d quadrature_score_means(const NullSpec& null, const QuadratureSpec& spec = {1e-12, 1e-12, 4000});

struct ConsistencyResult {
  double rmse_mu = 0.0;
  double rmse_sigma = 0.0;
};

// Root-mean-square error of the null MLE over `reps` samples of size n from
// APD(theta_0, kappa).
ConsistencyResult consistency_study(const NullSpec& null, std::size_t n, std::size_t reps,
                                    std::uint64_t seed, const LocationScale& kappa = {},
                                    unsigned workers = 0);

// ---------------------------------------------------------------------------

template <typename Cdf>
double ks_distance(std::vector<double> values, const Cdf& cdf) {
  std::erase_if(values, [](double v) { return v != v; });
  if (values.empty()) return 1.0;
  std::sort(values.begin(), values.end());
  const double m = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = cdf(values[i]);
    d = std::max({d, f - static_cast<double>(i) / m, static_cast<double>(i + 1) / m - f});
  }
  return d;
}

}  // namespace apdscore
