#include "apdscore/score.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "apdscore/errors.hpp"
#include "apdscore/numerics.hpp"

namespace apdscore {
namespace {

double sign_of(double y) { return static_cast<double>((y > 0.0) - (y < 0.0)); }

constexpr int kMaxBisection = 200;

void check_sample(std::span<const double> data) {
  if (data.size() < 2) throw DegenerateSampleError("need at least 2 observations");
  for (double x : data) {
    if (!std::isfinite(x)) throw DomainError("data contain a non-finite value");
  }
  const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  if (*lo == *hi) throw DegenerateSampleError("all observations are identical");
}

double median(std::span<const double> data) {
  std::vector<double> v(data.begin(), data.end());
  const std::size_t n = v.size();
  const auto upper = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(v.begin(), upper, v.end());
  if (n % 2 == 1) return *upper;
  // The lower central value is the largest element left of the partition.
  const double below = *std::max_element(v.begin(), upper);
  return 0.5 * (below + *upper);
}

double mean(std::span<const double> data) {
  double sum = 0.0;
  for (double x : data) sum += x;
  return sum / static_cast<double>(data.size());
}

// sum |x_i - mu|^(lambda - 1) sign(x_i - mu); strictly decreasing in mu.
double location_score(std::span<const double> data, double mu, double lambda) {
  double s = 0.0;
  for (double x : data) {
    const double d = x - mu;
    s += std::pow(std::abs(d), lambda - 1.0) * sign_of(d);
  }
  return s;
}

double bisect_location(std::span<const double> data, double lambda) {
  const auto [min_it, max_it] = std::minmax_element(data.begin(), data.end());
  double lo = *min_it;
  double hi = *max_it;
  for (int iter = 0; iter < kMaxBisection; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) return mid;
    const double s = location_score(data, mid, lambda);
    if (s > 0.0) {
      lo = mid;
    } else if (s < 0.0) {
      hi = mid;
    } else {
      return mid;
    }
  }
  const double mid = 0.5 * (lo + hi);
  if (hi - lo > 1e-12 * (1.0 + std::abs(mid))) {
    throw NumericError("fit_null_mle: bisection for mu did not converge");
  }
  return mid;
}

}  // namespace

NullSpec::NullSpec(double lambda) : lambda_(lambda) {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) {
    throw DomainError("null tail exponent lambda must be finite and >= 1, got " + std::to_string(lambda));
  }
  nu_ = std::numbers::ln2 + digamma(1.0 + 1.0 / lambda);
}

Eigen::Matrix4d FisherBlocks::full() const {
  Eigen::Matrix4d j;
  j << j_tt, j_tk, j_tk.transpose(), j_kk;
  return j;
}

ScoreVector2 d_theta(double y, const NullSpec& null) {
  const double lambda = null.lambda();
  const double a = std::abs(y);
  const double a_pow = std::pow(a, lambda);
  const double a_pow_log = (a == 0.0) ? 0.0 : a_pow * std::log(a);
  return {-lambda * a_pow * sign_of(y), -0.5 * (a_pow_log - 2.0 / (lambda * lambda) * null.nu())};
}

ScoreVector2 d_kappa(double y, const NullSpec& null) {
  const double lambda = null.lambda();
  const double a = std::abs(y);
  const double first = (y == 0.0) ? 0.0 : 0.5 * lambda * std::pow(a, lambda - 1.0) * sign_of(y);
  return {first, 0.5 * lambda * std::pow(a, lambda) - 1.0};
}

LocationScale fit_null_mle(std::span<const double> data, const NullSpec& null) {
  check_sample(data);
  const double lambda = null.lambda();
  double mu;
  if (lambda == 1.0) {
    mu = median(data);
  } else if (lambda == 2.0) {
    mu = mean(data);
  } else {
    mu = bisect_location(data, lambda);
  }
  double s = 0.0;
  for (double x : data) s += std::pow(std::abs(x - mu), lambda);
  const double sigma = std::pow(0.5 * lambda * s / static_cast<double>(data.size()), 1.0 / lambda);
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DegenerateSampleError("fitted scale is not positive");
  }
  return {mu, sigma};
}

ScoreVector2 modified_score(std::span<const double> data, const NullSpec& null,
                            const LocationScale& kappa) {
  if (!(kappa.sigma > 0.0)) throw DegenerateSampleError("scale must be positive");
  if (data.empty()) throw DegenerateSampleError("empty sample");
  double s1 = 0.0;
  double s2 = 0.0;
  for (double x : data) {
    const ScoreVector2 d = d_theta((x - kappa.mu) / kappa.sigma, null);
    s1 += d.c1;
    s2 += d.c2;
  }
  const double n = static_cast<double>(data.size());
  return {s1 / n, s2 / n};
}

FisherBlocks fisher_blocks(const NullSpec& null) {
  const double lambda = null.lambda();
  FisherBlocks fb;
  fb.beta = 1.0 + 1.0 / lambda;
  fb.nu = null.nu();
  fb.phi = 1.0 + fb.nu;

  const double gamma_beta = std::exp(log_gamma(fb.beta));
  const double trigamma_beta = trigamma(fb.beta);

  const double j_t1t1 = 4.0 * (1.0 + lambda);
  const double j_t2t2 = (fb.phi * fb.phi + fb.beta * trigamma_beta - 1.0) / (lambda * lambda * lambda);
  const double j_t1mu = -std::exp2(1.0 - 1.0 / lambda) * lambda / gamma_beta;
  const double j_t2sigma = -fb.phi / lambda;
  const double j_mumu = lambda * std::exp(log_gamma(3.0 - fb.beta)) / (std::exp2(2.0 / lambda) * gamma_beta);
  const double j_sigmasigma = lambda;

  fb.j_tt << j_t1t1, 0.0, 0.0, j_t2t2;
  fb.j_tk << j_t1mu, 0.0, 0.0, j_t2sigma;
  fb.j_kk << j_mumu, 0.0, 0.0, j_sigmasigma;
  fb.sigma_mat = sigma_matrix(null);
  return fb;
}

Eigen::Matrix2d sigma_matrix(const NullSpec& null) {
  const double lambda = null.lambda();
  const double beta = 1.0 + 1.0 / lambda;
  const double s11 =
      4.0 * (1.0 + lambda) - 4.0 * lambda / std::exp(log_gamma(3.0 - beta) + log_gamma(beta));
  const double s22 = (beta * trigamma(beta) - 1.0) / (lambda * lambda * lambda);
  Eigen::Matrix2d s;
  s << s11, 0.0, 0.0, s22;
  return s;
}

Eigen::Matrix2d sigma_from_blocks(const FisherBlocks& blocks) {
  // Schur complement of J_kk. With the diagonal blocks here this is the same
  // as J_tt - J_kk^-1 J_tk^2.
  return blocks.j_tt - blocks.j_tk * blocks.j_kk.inverse() * blocks.j_tk.transpose();
}

TestReport test_statistic(const ScoreVector2& r_n, std::size_t n, const NullSpec& null) {
  if (n < 2) throw DomainError("test_statistic: n must be >= 2");
  const Eigen::Matrix2d sigma = sigma_matrix(null);
  TestReport report;
  report.n = n;
  report.r_n = r_n;
  report.lambda = null.lambda();
  report.t_stat = static_cast<double>(n) * (r_n.c1 * r_n.c1 / sigma(0, 0) + r_n.c2 * r_n.c2 / sigma(1, 1));
  report.p_value = chi2_sf(report.t_stat, 2);
  return report;
}

double known_kappa_statistic(std::span<const double> data, const NullSpec& null,
                             const LocationScale& kappa) {
  const ScoreVector2 r = modified_score(data, null, kappa);
  const FisherBlocks fb = fisher_blocks(null);
  const Eigen::Vector2d v = r.as_vector();
  return static_cast<double>(data.size()) * v.dot(fb.j_tt.inverse() * v);
}

double noncentrality(const Eigen::Vector2d& delta, const NullSpec& null) {
  return std::max(0.0, delta.dot(sigma_matrix(null) * delta));
}

double asymptotic_power(const Eigen::Vector2d& delta, const NullSpec& null, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("asymptotic_power: alpha must lie in (0, 1)");
  return noncentral_chi2_sf(chi2_quantile(1.0 - alpha, 2), 2, noncentrality(delta, null));
}

TestReport run_test(std::span<const double> data, const NullSpec& null) {
  const LocationScale kappa = fit_null_mle(data, null);
  TestReport report = test_statistic(modified_score(data, null, kappa), data.size(), null);
  report.kappa_hat = kappa;
  return report;
}

}  // namespace apdscore
