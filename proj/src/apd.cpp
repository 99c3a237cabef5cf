#include "apdscore/apd.hpp"

#include <cmath>
#include <numbers>

#include "apdscore/errors.hpp"
#include "apdscore/numerics.hpp"

namespace apdscore {
namespace {

int sign_of(double y) { return (y > 0.0) - (y < 0.0); }

double log_sum_exp(double a, double b) {
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log delta, computed from logs so large exponents do not underflow.
double log_delta(double theta1, double theta2) {
  const double la = theta2 * std::log(theta1);
  const double lb = theta2 * std::log1p(-theta1);
  return std::numbers::ln2 + la + lb - log_sum_exp(la, lb);
}

// (1/2) delta / A on the given side; the rate in t = rate * |y|^theta2.
double half_rate(int y_sign, double theta1, double theta2) {
  if (y_sign == 0) return 0.5 * delta_coeff(theta1, theta2) / side_coeff(0, theta1, theta2);
  // delta / A_+ = 2 / (1 + ((1 - t1) / t1)^t2), delta / A_- = 2 / (1 + (t1 / (1 - t1))^t2)
  const double log_ratio = theta2 * (std::log1p(-theta1) - std::log(theta1));
  const double ratio = std::exp(y_sign > 0 ? log_ratio : -log_ratio);
  return 1.0 / (1.0 + ratio);
}

double log_normalizer(double theta1, double theta2) {
  const double inv = 1.0 / theta2;
  return inv * (log_delta(theta1, theta2) - std::numbers::ln2) - log_gamma(1.0 + inv);
}

void require_finite(double x, const char* fn) {
  if (!std::isfinite(x)) throw DomainError(std::string(fn) + ": x must be finite");
}

}  // namespace

ApdParams::ApdParams(double theta1, double theta2, double mu, double sigma)
    : theta1_(theta1), theta2_(theta2), mu_(mu), sigma_(sigma) {
  if (!(theta1 > 0.0 && theta1 < 1.0)) throw DomainError("ApdParams: theta1 must lie in (0, 1)");
  if (!(theta2 > 0.0) || !std::isfinite(theta2)) throw DomainError("ApdParams: theta2 must be positive");
  if (!std::isfinite(mu)) throw DomainError("ApdParams: mu must be finite");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("ApdParams: sigma must be positive");
}

void SepdParams::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("SepdParams: gamma must be positive");
  if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("SepdParams: q must be positive");
  if (!std::isfinite(m)) throw DomainError("SepdParams: m must be finite");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("SepdParams: s must be positive");
}

double delta_coeff(double theta1, double theta2) { return std::exp(log_delta(theta1, theta2)); }

double side_coeff(int y_sign, double theta1, double theta2) {
  const double base = 0.5 + sign_of(static_cast<double>(y_sign)) * (0.5 - theta1);
  return std::pow(base, theta2);
}

double log_pdf(double x, const ApdParams& p) {
  require_finite(x, "log_pdf");
  const double y = (x - p.mu()) / p.sigma();
  const double t = half_rate(sign_of(y), p.theta1(), p.theta2()) * std::pow(std::abs(y), p.theta2());
  return log_normalizer(p.theta1(), p.theta2()) - t - std::log(p.sigma());
}

double pdf(double x, const ApdParams& p) { return std::exp(log_pdf(x, p)); }

double cdf(double x, const ApdParams& p) {
  if (std::isnan(x)) throw DomainError("cdf: x is NaN");
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  if (x == std::numeric_limits<double>::infinity()) return 1.0;
  const double y = (x - p.mu()) / p.sigma();
  const int s = sign_of(y);
  if (s == 0) return p.theta1();
  const double shape = 1.0 / p.theta2();
  const double t = half_rate(s, p.theta1(), p.theta2()) * std::pow(std::abs(y), p.theta2());
  if (s < 0) return p.theta1() * reg_upper_inc_gamma(shape, t);
  return p.theta1() + (1.0 - p.theta1()) * reg_lower_inc_gamma(shape, t);
}

double quantile(double u, const ApdParams& p) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
  const double shape = 1.0 / p.theta2();
  const double t1 = p.theta1();
  if (u == t1) return p.mu();
  double t;
  int s;
  if (u < t1) {
    s = -1;
    t = inv_reg_upper_inc_gamma(shape, u / t1);
  } else {
    s = 1;
    t = inv_reg_lower_inc_gamma(shape, (u - t1) / (1.0 - t1));
  }
  const double magnitude = std::pow(t / half_rate(s, t1, p.theta2()), shape);
  return p.mu() + s * p.sigma() * magnitude;
}

double sample_one(const ApdParams& p, RandomStream& rng) {
  const double shape = 1.0 / p.theta2();
  const int s = rng.uniform() < p.theta1() ? -1 : 1;
  const double t = gamma_sample(shape, rng);
  const double magnitude = std::pow(t / half_rate(s, p.theta1(), p.theta2()), shape);
  return p.mu() + s * p.sigma() * magnitude;
}

std::vector<double> sample(const ApdParams& p, std::size_t n, RandomStream& rng) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(p, rng));
  return out;
}

ApdParams from_sepd(const SepdParams& sp) {
  sp.validate();
  const double theta1 = 1.0 / (1.0 + sp.gamma * sp.gamma);
  const double theta2 = sp.q;
  const double sigma = std::exp(log_delta(theta1, theta2) / theta2) * (sp.gamma + 1.0 / sp.gamma) * sp.s;
  return ApdParams(theta1, theta2, sp.m, sigma);
}

double sepd_pdf(double x, const SepdParams& sp) {
  sp.validate();
  require_finite(x, "sepd_pdf");
  const double log_c =
      -(std::numbers::ln2 / sp.q + log_gamma(1.0 + 1.0 / sp.q) + std::log(sp.gamma + 1.0 / sp.gamma));
  const double z = (x <= sp.m) ? sp.gamma * (x - sp.m) / sp.s : (x - sp.m) / (sp.gamma * sp.s);
  return std::exp(log_c - std::log(sp.s) - 0.5 * std::pow(std::abs(z), sp.q));
}

}  // namespace apdscore
