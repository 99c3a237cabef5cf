#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "apdscore/errors.hpp"
#include "apdscore/numerics.hpp"

namespace apdscore {
namespace {

// 15-point Kronrod extension of the 7-point Gauss rule (abscissae on [0, 1]
// of the symmetric rule; index 1, 3, 5, 7 are the Gauss points).
constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel gauss_kronrod(const F& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = g(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kNodes[j];
    const double sum = g(center - dx) + g(center + dx);
    kronrod += kKronrodWeights[j] * sum;
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

template <typename F>
QuadratureResult adaptive(const F& g, double a, double b, const QuadratureSpec& spec) {
  std::priority_queue<Panel> panels;
  panels.push(gauss_kronrod(g, a, b));
  double value = panels.top().value;
  double error = panels.top().error;
  int count = 1;

  auto converged = [&] { return error <= std::max(spec.abs_tol, spec.rel_tol * std::abs(value)); };
  while (!converged()) {
    if (count >= spec.max_subdivisions) {
      throw AccuracyError("integrate: tolerance not met within max_subdivisions", value, error);
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw AccuracyError("integrate: panel width reached machine resolution", value, error);
    }
    const Panel left = gauss_kronrod(g, worst.a, mid);
    const Panel right = gauss_kronrod(g, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    ++count;
    // Running sums drift; recompute occasionally from the live panels.
    if (count % 64 == 0) {
      std::vector<Panel> live;
      live.reserve(panels.size());
      value = 0.0;
      error = 0.0;
      while (!panels.empty()) {
        live.push_back(panels.top());
        value += live.back().value;
        error += live.back().error;
        panels.pop();
      }
      for (const auto& p : live) panels.push(p);
    }
  }
  return {value, error, count};
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, Interval domain,
                           const QuadratureSpec& spec) {
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0) || spec.max_subdivisions < 1) {
    throw DomainError("integrate: tolerances must be positive and max_subdivisions >= 1");
  }
  const double lo = domain.lower;
  const double hi = domain.upper;
  if (std::isnan(lo) || std::isnan(hi)) throw DomainError("integrate: NaN bound");
  if (lo == hi) return {0.0, 0.0, 0};
  if (lo > hi) {
    QuadratureResult r = integrate(f, {hi, lo}, spec);
    r.value = -r.value;
    return r;
  }

  const bool lo_inf = std::isinf(lo);
  const bool hi_inf = std::isinf(hi);
  if (lo_inf && hi_inf) {
    QuadratureSpec half = spec;
    half.abs_tol = 0.5 * spec.abs_tol;
    const QuadratureResult left = integrate(f, Interval::negative_half_line(), half);
    const QuadratureResult right = integrate(f, Interval::positive_half_line(), half);
    return {left.value + right.value, left.error + right.error,
            left.subdivisions + right.subdivisions};
  }
  if (hi_inf) {
    // x = lo + (1 - s) / s, dx = ds / s^2
    auto g = [&](double s) {
      const double x = lo + (1.0 - s) / s;
      return f(x) / (s * s);
    };
    return adaptive(g, 0.0, 1.0, spec);
  }
  if (lo_inf) {
    auto g = [&](double s) {
      const double x = hi - (1.0 - s) / s;
      return f(x) / (s * s);
    };
    return adaptive(g, 0.0, 1.0, spec);
  }
  return adaptive(f, lo, hi, spec);
}

}  // namespace apdscore
