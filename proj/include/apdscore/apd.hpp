#pragma once

// The asymmetric power distribution APD(theta, kappa):
//
//   f(y | theta) = delta^(1/t2) / (2^(1/t2) Gamma(1 + 1/t2))
//                  * exp(-(1/2) (delta / A(y)) |y|^t2)
//   g(x | theta, kappa) = f((x - mu) / sigma | theta) / sigma
//
// with delta = 2 t1^t2 (1 - t1)^t2 / (t1^t2 + (1 - t1)^t2) and
// A(y) = [1/2 + sign(y) (1/2 - t1)]^t2. The asymmetry t1 is exactly the
// probability mass left of the mode mu.

#include <cstddef>
#include <vector>

#include "apdscore/random.hpp"

namespace apdscore {

class ApdParams {
 public:
  // Throws DomainError unless 0 < theta1 < 1, theta2 > 0, sigma > 0 and all
  // four values are finite.
  ApdParams(double theta1, double theta2, double mu = 0.0, double sigma = 1.0);

  double theta1() const noexcept { return theta1_; }
  double theta2() const noexcept { return theta2_; }
  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }

  // Symmetric exponential power member theta = (1/2, lambda).
  static ApdParams symmetric(double lambda, double mu = 0.0, double sigma = 1.0) {
    return ApdParams(0.5, lambda, mu, sigma);
  }

 private:
  double theta1_;
  double theta2_;
  double mu_;
  double sigma_;
};

// Skewed exponential power parametrization (gamma, q, m, s).
struct SepdParams {
  double gamma;
  double q;
  double m;
  double s;

  void validate() const;
};

double delta_coeff(double theta1, double theta2);

// y_sign is the sign of the standardized point: -1, 0 or +1 (sign(0) = 0).
double side_coeff(int y_sign, double theta1, double theta2);

double log_pdf(double x, const ApdParams& p);
double pdf(double x, const ApdParams& p);
double cdf(double x, const ApdParams& p);
double quantile(double u, const ApdParams& p);

// n i.i.d. draws. Each draw picks the left side with probability theta1,
// then sets |Y| = (2 A_side T / delta)^(1/theta2) with T ~ Gamma(1/theta2).
std::vector<double> sample(const ApdParams& p, std::size_t n, RandomStream& rng);
double sample_one(const ApdParams& p, RandomStream& rng);

ApdParams from_sepd(const SepdParams& sp);

// Density of the SEPD evaluated directly in its own parametrization.
double sepd_pdf(double x, const SepdParams& sp);

}  // namespace apdscore
