#include <algorithm>
#include <cmath>

#include "apdscore/errors.hpp"
#include "apdscore/numerics.hpp"

namespace apdscore {
namespace {

void check_dof(int dof) {
  if (dof < 1) throw DomainError("chi-square: degrees of freedom must be >= 1");
}

void check_x(double x) {
  if (!(x >= 0.0)) throw DomainError("chi-square: x must be non-negative");
}

constexpr double kPoissonTailMass = 1e-12;
constexpr int kMaxMixtureTerms = 1000000;

}  // namespace

double chi2_sf(double x, int dof) {
  check_dof(dof);
  check_x(x);
  if (dof == 2) return std::exp(-0.5 * x);
  return reg_upper_inc_gamma(0.5 * dof, 0.5 * x);
}

double chi2_cdf(double x, int dof) {
  check_dof(dof);
  check_x(x);
  if (dof == 2) return -std::expm1(-0.5 * x);
  return reg_lower_inc_gamma(0.5 * dof, 0.5 * x);
}

double chi2_quantile(double p, int dof) {
  check_dof(dof);
  if (!(p > 0.0 && p < 1.0)) throw DomainError("chi2_quantile: p must lie in (0, 1)");
  if (dof == 2) return -2.0 * std::log1p(-p);
  return 2.0 * inv_reg_lower_inc_gamma(0.5 * dof, p);
}

double noncentral_chi2_sf(double x, int dof, double ncp) {
  check_dof(dof);
  check_x(x);
  if (!(ncp >= 0.0) || !std::isfinite(ncp)) {
    throw DomainError("noncentral_chi2_sf: noncentrality must be non-negative and finite");
  }
  if (ncp == 0.0) return chi2_sf(x, dof);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;

  // Q(a + j, y) grows with j by the recurrence
  //   Q(a + 1, y) = Q(a, y) + y^a e^-y / Gamma(a + 1).
  const double half_ncp = 0.5 * ncp;
  const double y = 0.5 * x;
  const double log_y = std::log(y);
  double a = 0.5 * dof;
  double q = chi2_sf(x, dof);

  double total = 0.0;
  double cumulative_weight = 0.0;
  for (int j = 0; j < kMaxMixtureTerms; ++j) {
    const double weight = std::exp(-half_ncp + j * std::log(half_ncp) - log_gamma(j + 1.0));
    total += weight * q;
    cumulative_weight += weight;
    if (cumulative_weight > 1.0 - kPoissonTailMass) break;
    q += std::exp(a * log_y - y - log_gamma(a + 1.0));
    if (q > 1.0) q = 1.0;
    a += 1.0;
  }
  return std::min(1.0, total);
}

double noncentral_chi2_cdf(double x, int dof, double ncp) {
  return 1.0 - noncentral_chi2_sf(x, dof, ncp);
}

}  // namespace apdscore
