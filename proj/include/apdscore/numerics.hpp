#pragma once

// Special functions and probability kernels: the gamma family, regularized
// incomplete gamma, central and noncentral chi-square, adaptive quadrature.
// Everything here is restricted to the positive half-line where relevant.

#include <cstddef>
#include <functional>
#include <limits>

namespace apdscore {

double log_gamma(double x);
double digamma(double x);
double trigamma(double x);

// P(a, x) and Q(a, x) = 1 - P(a, x). Q is computed directly in the upper
// tail so that small survival probabilities keep their relative accuracy.
double reg_lower_inc_gamma(double a, double x);
double reg_upper_inc_gamma(double a, double x);

// Smallest x with P(a, x) = p (resp. Q(a, x) = q).
double inv_reg_lower_inc_gamma(double a, double p);
double inv_reg_upper_inc_gamma(double a, double q);

double chi2_sf(double x, int dof);
double chi2_cdf(double x, int dof);
double chi2_quantile(double p, int dof);

// Poisson mixture of central chi-square survival functions; the sum stops
// once the accumulated Poisson weight exceeds 1 - 1e-12.
double noncentral_chi2_sf(double x, int dof, double ncp);
double noncentral_chi2_cdf(double x, int dof, double ncp);

struct QuadratureSpec {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_subdivisions = 2000;
};

struct Interval {
  double lower;
  double upper;  // either bound may be infinite

  static Interval positive_half_line() { return {0.0, std::numeric_limits<double>::infinity()}; }
  static Interval negative_half_line() { return {-std::numeric_limits<double>::infinity(), 0.0}; }
};

struct QuadratureResult {
  double value;
  double error;
  int subdivisions;
};

// Adaptive Gauss-Kronrod (7/15) with bisection of the worst panel. Infinite
// ends are mapped onto (0, 1] by x = a + (1 - s)/s. The integrand must be
// smooth inside the interval; split the domain at known singular points.
// Throws AccuracyError (carrying the best estimate) if the tolerance is not
// met within spec.max_subdivisions panels.
QuadratureResult integrate(const std::function<double(double)>& f, Interval domain,
                           const QuadratureSpec& spec = {});

}  // namespace apdscore
