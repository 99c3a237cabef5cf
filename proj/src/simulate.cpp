#include "apdscore/simulate.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <thread>

#include "apdscore/apd.hpp"
#include "apdscore/errors.hpp"
#include "apdscore/random.hpp"

namespace apdscore {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

unsigned resolve_workers(unsigned requested, std::size_t tasks) {
  unsigned w = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(tasks, 1)));
}

// Runs body(i) for i in [0, count). Work is handed out by an atomic counter;
// body must write only to slot i of its outputs.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  workers = resolve_workers(workers, count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::array<double, 4> stacked_scores(double y, const NullSpec& null) {
  const ScoreVector2 t = d_theta(y, null);
  const ScoreVector2 k = d_kappa(y, null);
  return {t.c1, t.c2, k.c1, k.c2};
}

StudyReport run_study(const StudyConfig& cfg, const ApdParams& generator, double ncp) {
  const NullSpec null(cfg.lambda);
  StudyReport report;
  report.theta1_n = generator.theta1();
  report.theta2_n = generator.theta2();
  report.ncp = ncp;
  report.t_stats.assign(cfg.reps, kNaN);

  parallel_for(cfg.reps, cfg.workers, [&](std::size_t r) {
    RandomStream rng(cfg.seed, r);
    const std::vector<double> data = sample(generator, cfg.n, rng);
    try {
      report.t_stats[r] = run_test(data, null).t_stat;
    } catch (const DegenerateSampleError&) {
      report.t_stats[r] = kNaN;
    }
  });

  std::vector<double> p_values;
  p_values.reserve(cfg.reps);
  for (double t : report.t_stats) {
    if (std::isnan(t)) {
      ++report.replicate_failures;
    } else {
      p_values.push_back(chi2_sf(t, 2));
    }
  }
  const double valid = static_cast<double>(p_values.size());

  for (double alpha : cfg.alpha_grid) {
    RejectionRate rr;
    rr.alpha = alpha;
    std::size_t rejected = 0;
    for (double p : p_values) rejected += (p < alpha);
    rr.rate = valid > 0 ? static_cast<double>(rejected) / valid : 0.0;
    rr.std_error = valid > 0 ? std::sqrt(rr.rate * (1.0 - rr.rate) / valid) : 0.0;
    if (cfg.delta) rr.predicted = asymptotic_power(*cfg.delta, null, alpha);
    report.rejection_rates.push_back(rr);
  }

  if (ncp == 0.0) {
    report.ks_stat = ks_distance(report.t_stats, [](double t) { return chi2_cdf(t, 2); });
  } else {
    report.ks_stat = ks_distance(report.t_stats, [ncp](double t) { return noncentral_chi2_cdf(t, 2, ncp); });
  }
  report.p_value_ks_stat = ks_distance(p_values, [](double p) { return p; });
  return report;
}

}  // namespace

void StudyConfig::validate() const {
  if (!(lambda >= 1.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be finite and >= 1");
  if (n < 10) throw ConfigError("n must be >= 10");
  if (reps < 100) throw ConfigError("reps must be >= 100");
  if (alpha_grid.empty()) throw ConfigError("alpha grid is empty");
  std::set<double> seen;
  for (double a : alpha_grid) {
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha levels must lie in (0, 1)");
    if (!seen.insert(a).second) throw ConfigError("alpha levels must be distinct");
  }
  if (!std::isfinite(kappa.mu) || !(kappa.sigma > 0.0) || !std::isfinite(kappa.sigma)) {
    throw ConfigError("data-generating kappa needs finite mu and positive sigma");
  }
  if (delta && !delta->allFinite()) throw ConfigError("delta must be finite");
}

StudyReport run_null_study(const StudyConfig& cfg) {
  cfg.validate();
  if (cfg.delta) throw ConfigError("null study takes no delta");
  return run_study(cfg, ApdParams::symmetric(cfg.lambda, cfg.kappa.mu, cfg.kappa.sigma), 0.0);
}

StudyReport run_local_alternative_study(const StudyConfig& cfg) {
  cfg.validate();
  if (!cfg.delta) throw ConfigError("local alternative study needs delta");
  const double root_n = std::sqrt(static_cast<double>(cfg.n));
  const double theta1 = 0.5 + (*cfg.delta)(0) / root_n;
  const double theta2 = cfg.lambda + (*cfg.delta)(1) / root_n;
  if (!(theta1 > 0.0 && theta1 < 1.0) || !(theta2 > 0.0)) {
    throw ConfigError("theta_0 + delta / sqrt(n) leaves the parameter space");
  }
  const NullSpec null(cfg.lambda);
  return run_study(cfg, ApdParams(theta1, theta2, cfg.kappa.mu, cfg.kappa.sigma),
                   noncentrality(*cfg.delta, null));
}

FisherEstimate mc_fisher_check(const NullSpec& null, std::size_t n_draws, std::uint64_t seed) {
  if (n_draws < 100000) throw DomainError("mc_fisher_check: need at least 1e5 draws");
  const ApdParams p = ApdParams::symmetric(null.lambda());
  auto draw_scores = [&](RandomStream& rng) {
    const auto s = stacked_scores(sample_one(p, rng), null);
    return Eigen::Vector4d(s[0], s[1], s[2], s[3]);
  };
  const double m = static_cast<double>(n_draws);

  // Two passes over the same stream: the mean first, then centered products.
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  RandomStream first(seed, 0);
  for (std::size_t i = 0; i < n_draws; ++i) sum += draw_scores(first);
  const Eigen::Vector4d mean = sum / m;

  Eigen::Matrix4d cross = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d cross_sq = Eigen::Matrix4d::Zero();
  RandomStream second(seed, 0);
  for (std::size_t i = 0; i < n_draws; ++i) {
    const Eigen::Vector4d v = draw_scores(second) - mean;
    const Eigen::Matrix4d outer = v * v.transpose();
    cross += outer;
    cross_sq += outer.cwiseProduct(outer);
  }
  FisherEstimate est;
  est.estimate = cross / m;
  const Eigen::Matrix4d var_products = (cross_sq / m - est.estimate.cwiseProduct(est.estimate)).cwiseMax(0.0);
  est.std_error = (var_products / m).cwiseSqrt();
  return est;
}

namespace {

double expect_over_null(const std::function<double(double)>& h, const NullSpec& null,
                        const QuadratureSpec& spec) {
  const ApdParams p = ApdParams::symmetric(null.lambda());
  auto integrand = [&](double y) { return h(y) * pdf(y, p); };
  // Split at the mode: scores with sign(y) or |y|^(lambda-1) are not smooth there.
  return integrate(integrand, Interval::negative_half_line(), spec).value +
         integrate(integrand, Interval::positive_half_line(), spec).value;
}

}  // namespace

Eigen::Matrix4d quadrature_fisher(const NullSpec& null, const QuadratureSpec& spec) {
  Eigen::Matrix4d j;
  for (int a = 0; a < 4; ++a) {
    for (int b = a; b < 4; ++b) {
      const double e = expect_over_null(
          [&](double y) {
            const auto s = stacked_scores(y, null);
            return s[a] * s[b];
          },
          null, spec);
      j(a, b) = e;
      j(b, a) = e;
    }
  }
  return j;
}

Eigen::Vector4d quadrature_score_means(const NullSpec& null, const QuadratureSpec& spec) {
  Eigen::Vector4d m;
  for (int a = 0; a < 4; ++a) {
    m(a) = expect_over_null([&](double y) { return stacked_scores(y, null)[a]; }, null, spec);
  }
  return m;
}

ConsistencyResult consistency_study(const NullSpec& null, std::size_t n, std::size_t reps,
                                    std::uint64_t seed, const LocationScale& kappa, unsigned workers) {
  if (n < 2 || reps < 1) throw ConfigError("consistency_study: need n >= 2 and reps >= 1");
  const ApdParams gen = ApdParams::symmetric(null.lambda(), kappa.mu, kappa.sigma);
  std::vector<double> err_mu(reps), err_sigma(reps);
  parallel_for(reps, workers, [&](std::size_t r) {
    RandomStream rng(seed, r);
    const std::vector<double> data = sample(gen, n, rng);
    const LocationScale fit = fit_null_mle(data, null);
    err_mu[r] = fit.mu - kappa.mu;
    err_sigma[r] = fit.sigma - kappa.sigma;
  });
  double s_mu = 0.0, s_sigma = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    s_mu += err_mu[r] * err_mu[r];
    s_sigma += err_sigma[r] * err_sigma[r];
  }
  return {std::sqrt(s_mu / reps), std::sqrt(s_sigma / reps)};
}

}  // namespace apdscore
