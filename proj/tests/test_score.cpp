// Fisher information constants marked "mpmath" come from
// tests/oracle/reference_values.py, which evaluates each expectation by
// 50-digit quadrature independently of the closed forms.

#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>
#include <numbers>
#include <vector>

#include "apdscore/apd.hpp"
#include "apdscore/errors.hpp"
#include "apdscore/numerics.hpp"
#include "apdscore/score.hpp"
#include "test_util.hpp"

using namespace apdscore;

namespace {

constexpr double kNuLambda1 = 1.1159315156584124488;  // log 2 + digamma(2)

struct JRow {
  double lambda, t1t1, t1mu, t2t2, t2sig, mumu, sigsig;
};

// mpmath
const std::vector<JRow> kJTable = {
    {1.0, 8.0, -1.0, 4.7670343126529594, -2.1159315156584124, 0.25, 1.0},
    {1.5, 10.0, -2.0934826130907662, 1.1471872269949438, -1.2499418431822379, 0.58883578255117551, 1.5},
    {2.0, 12.0, -3.1915382432114614, 0.42423099839714168, -0.86481857726926091, 1.0, 2.0},
    {2.5, 14.0, -4.2707606706422032, 0.19828150572191739, -0.65270505438993167, 1.4459898956262429, 2.5},
    {3.0, 16.0, -5.3329366398741801, 0.10732856357699999, -0.52037113351304633, 1.9105496529539229, 3.0},
};

std::vector<double> draw(const ApdParams& p, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  RandomStream rng(seed, stream);
  return sample(p, n, rng);
}

}  // namespace

TEST(NullSpec, RejectsLambdaBelowOne) {
  EXPECT_THROW(NullSpec(0.99), DomainError);
  EXPECT_THROW(NullSpec(std::nan("")), DomainError);
  EXPECT_NEAR(NullSpec(1.0).nu(), kNuLambda1, 1e-15);
}

TEST(DTheta, Examples) {
  const NullSpec n1(1.0);
  const auto at0 = d_theta(0.0, n1);
  EXPECT_EQ(at0.c1, 0.0);
  EXPECT_NEAR(at0.c2, kNuLambda1, 1e-12);
  const auto at1 = d_theta(1.0, n1);
  EXPECT_NEAR(at1.c1, -1.0, 1e-15);
  EXPECT_NEAR(at1.c2, kNuLambda1, 1e-12);
}

TEST(DTheta, Parity) {
  for (double lambda : {1.0, 1.7, 2.0, 3.5}) {
    const NullSpec null(lambda);
    for (double y : {0.1, 0.9, 1.0, 2.3, 7.0}) {
      const auto pos = d_theta(y, null);
      const auto neg = d_theta(-y, null);
      EXPECT_EQ(pos.c1, -neg.c1);
      EXPECT_EQ(pos.c2, neg.c2);
    }
  }
}

TEST(DKappa, Examples) {
  const auto a = d_kappa(0.0, NullSpec(1.0));
  EXPECT_EQ(a.c1, 0.0);
  EXPECT_EQ(a.c2, -1.0);
  const auto b = d_kappa(2.0, NullSpec(2.0));
  EXPECT_NEAR(b.c1, 2.0, 1e-15);
  EXPECT_NEAR(b.c2, 3.0, 1e-15);
}

TEST(FitNullMle, Examples) {
  const std::vector<double> odd = {1.0, 2.0, 4.0};
  const auto k1 = fit_null_mle(odd, NullSpec(1.0));
  EXPECT_EQ(k1.mu, 2.0);
  EXPECT_NEAR(k1.sigma, 0.5, 1e-15);
  const std::vector<double> pm = {-1.0, 1.0};
  const auto k2 = fit_null_mle(pm, NullSpec(2.0));
  EXPECT_EQ(k2.mu, 0.0);
  EXPECT_NEAR(k2.sigma, 1.0, 1e-15);
  const std::vector<double> even = {5.0, 1.0, 3.0, 2.0};
  EXPECT_EQ(fit_null_mle(even, NullSpec(1.0)).mu, 2.5);
}

TEST(FitNullMle, GridScanOracleLambda3) {
  const std::vector<double> xs = {-1.0, 0.0, 1.0, 4.0};
  auto objective = [&xs](double mu) {
    double s = 0.0;
    for (double x : xs) s += std::pow(std::abs(x - mu), 3.0);
    return s;
  };
  // Convex objective: a coarse scan of 10^6 points on [-1, 4], then a fine
  // scan of 10^6 points around the coarse minimizer.
  auto scan = [&objective](double lo, double hi) {
    const int m = 1'000'000;
    double best = lo, best_val = objective(lo);
    for (int i = 1; i <= m; ++i) {
      const double mu = lo + (hi - lo) * i / m;
      const double v = objective(mu);
      if (v < best_val) {
        best_val = v;
        best = mu;
      }
    }
    return best;
  };
  const double coarse = scan(-1.0, 4.0);
  const double fine = scan(coarse - 1e-5, coarse + 1e-5);
  EXPECT_NEAR(fit_null_mle(xs, NullSpec(3.0)).mu, fine, 1e-6);
}

TEST(FitNullMle, DegenerateSamples) {
  const std::vector<double> one = {1.0};
  const std::vector<double> flat = {3.0, 3.0, 3.0};
  const std::vector<double> bad = {1.0, std::nan("")};
  EXPECT_THROW(fit_null_mle(one, NullSpec(2.0)), DegenerateSampleError);
  EXPECT_THROW(fit_null_mle(flat, NullSpec(1.5)), DegenerateSampleError);
  EXPECT_THROW(fit_null_mle(bad, NullSpec(2.0)), DomainError);
}

TEST(FitNullMle, StationarityInvariants) {
  std::uint64_t stream = 0;
  for (double lambda : {1.0, 1.3, 2.0, 2.7, 4.0}) {
    const NullSpec null(lambda);
    for (std::size_t n : {11u, 50u, 501u}) {
      const auto xs = draw(ApdParams(0.4, lambda, 3.0, 2.0), n, 77, stream++);
      const auto k = fit_null_mle(xs, null);
      double s_mu = 0.0, s_sigma = 0.0, s_sign = 0.0;
      for (double x : xs) {
        const double z = (x - k.mu) / k.sigma;
        const auto dk = d_kappa(z, null);
        s_mu += dk.c1;
        s_sigma += dk.c2;
        s_sign += (z > 0.0) - (z < 0.0);
      }
      const double dn = static_cast<double>(n);
      EXPECT_LE(std::abs(s_sigma), 1e-9 * dn) << "lambda = " << lambda << " n = " << n;
      if (lambda > 1.0) {
        EXPECT_LE(std::abs(s_mu), 1e-6 * dn) << "lambda = " << lambda << " n = " << n;
      } else {
        EXPECT_LE(std::abs(s_sign), 1.0);
      }
    }
  }
}

TEST(ModifiedScore, Examples) {
  const std::vector<double> sym = {-2.0, -1.0, 0.0, 1.0, 2.0};
  for (double lambda : {1.0, 2.0, 3.0}) {
    const NullSpec null(lambda);
    EXPECT_NEAR(modified_score(sym, null, fit_null_mle(sym, null)).c1, 0.0, 1e-15);
  }
  // z = (-2, 0, 4) at kappa-hat = (2, 1/2).
  const std::vector<double> xs = {1.0, 2.0, 4.0};
  const NullSpec null(1.0);
  const auto r = modified_score(xs, null, fit_null_mle(xs, null));
  EXPECT_NEAR(r.c1, -2.0 / 3.0, 1e-12);
  const double expected_c2 = -0.5 * ((2.0 * std::log(2.0) + 4.0 * std::log(4.0)) / 3.0 - 2.0 * kNuLambda1);
  EXPECT_NEAR(r.c2, expected_c2, 1e-12);
}

TEST(FisherBlocks, MatchIndependentQuadratureTable) {
  for (const auto& row : kJTable) {
    const auto fb = fisher_blocks(NullSpec(row.lambda));
    EXPECT_NEAR(fb.j_tt(0, 0), row.t1t1, 1e-12);
    EXPECT_NEAR(fb.j_tt(1, 1), row.t2t2, 1e-12 * row.t2t2 + 1e-14);
    EXPECT_NEAR(fb.j_tk(0, 0), row.t1mu, 1e-12 * std::abs(row.t1mu));
    EXPECT_NEAR(fb.j_tk(1, 1), row.t2sig, 1e-12 * std::abs(row.t2sig));
    EXPECT_NEAR(fb.j_kk(0, 0), row.mumu, 1e-12 * row.mumu);
    EXPECT_NEAR(fb.j_kk(1, 1), row.sigsig, 1e-12 * row.sigsig);
  }
}

TEST(FisherBlocks, Structure) {
  for (double lambda : {1.0, 1.25, 2.0, 4.5}) {
    const auto fb = fisher_blocks(NullSpec(lambda));
    EXPECT_EQ(fb.j_tt(0, 1), 0.0);
    EXPECT_EQ(fb.j_tk(0, 1), 0.0);
    EXPECT_EQ(fb.j_tk(1, 0), 0.0);
    EXPECT_EQ(fb.j_kk(1, 0), 0.0);
    EXPECT_NEAR(fb.j_tk(1, 1), -fb.phi / lambda, 1e-15);
    EXPECT_NEAR(fb.beta, 1.0 + 1.0 / lambda, 1e-15);
    const Eigen::Matrix4d j = fb.full();
    EXPECT_TRUE(j.isApprox(j.transpose(), 0.0));
    EXPECT_GT(j.determinant(), 0.0);
  }
  EXPECT_NEAR(fisher_blocks(NullSpec(1.0)).j_tk(0, 0), -1.0, 1e-15);
  EXPECT_NEAR(fisher_blocks(NullSpec(2.0)).j_tk(0, 0), -2.0 * std::sqrt(8.0 / std::numbers::pi), 1e-14);
}

TEST(SigmaMatrix, Examples) {
  const auto s1 = sigma_matrix(NullSpec(1.0));
  EXPECT_NEAR(s1(0, 0), 4.0, 1e-14);
  EXPECT_NEAR(s1(1, 1), 0.28986813369645287294, 1e-12);
  EXPECT_NEAR(s1(1, 1), std::numbers::pi * std::numbers::pi / 3.0 - 3.0, 1e-12);
  const auto s2 = sigma_matrix(NullSpec(2.0));
  EXPECT_NEAR(s2(0, 0), 12.0 - 32.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(s2(0, 0), 1.8140836421186985108, 1e-12);
  EXPECT_NEAR(s2(1, 1), 0.050275412602127370516, 1e-12);
  EXPECT_EQ(s2(0, 1), 0.0);
  EXPECT_EQ(s2(1, 0), 0.0);
}

TEST(SigmaMatrix, BlockIdentityOnLambdaGrid) {
  for (int i = 0; i < 20; ++i) {
    const double lambda = 1.0 + 4.0 * i / 19.0;
    const auto fb = fisher_blocks(NullSpec(lambda));
    const Eigen::Matrix2d from_blocks = sigma_from_blocks(fb);
    EXPECT_LE((from_blocks - fb.sigma_mat).cwiseAbs().maxCoeff(), 1e-12) << "lambda = " << lambda;
    EXPECT_GT(fb.sigma_mat(0, 0), 0.0);
    EXPECT_GT(fb.sigma_mat(1, 1), 0.0);
  }
}

TEST(TestStatistic, Examples) {
  const auto zero = test_statistic({0.0, 0.0}, 50, NullSpec(2.0));
  EXPECT_EQ(zero.t_stat, 0.0);
  EXPECT_EQ(zero.p_value, 1.0);
  const auto r = test_statistic({0.2, 0.1}, 100, NullSpec(1.0));
  EXPECT_NEAR(r.t_stat, 4.449844545682935954, 1e-9);
  EXPECT_NEAR(r.p_value, 0.10807581873466336555, 1e-9);
  EXPECT_THROW(test_statistic({0.0, 0.0}, 1, NullSpec(1.0)), DomainError);
}

TEST(Noncentrality, Examples) {
  EXPECT_EQ(noncentrality(Eigen::Vector2d(0.0, 0.0), NullSpec(1.5)), 0.0);
  EXPECT_NEAR(noncentrality(Eigen::Vector2d(1.0, 0.0), NullSpec(1.0)), 4.0, 1e-14);
  const NullSpec null(2.0);
  const auto s = sigma_matrix(null);
  EXPECT_NEAR(noncentrality(Eigen::Vector2d(0.5, 0.3), null), 0.25 * s(0, 0) + 0.09 * s(1, 1), 1e-14);
}

TEST(AsymptoticPower, Examples) {
  EXPECT_NEAR(asymptotic_power(Eigen::Vector2d(0.0, 0.0), NullSpec(2.0), 0.05), 0.05, 1e-12);
  EXPECT_NEAR(asymptotic_power(Eigen::Vector2d(1.0, 0.0), NullSpec(1.0), 0.05), 0.41542679253060992743, 1e-10);
  const NullSpec null(1.5);
  double prev = 0.0;
  for (double c = 0.0; c <= 3.0; c += 0.25) {
    const double p = asymptotic_power(Eigen::Vector2d(c, c), null, 0.05);
    EXPECT_GE(p, prev);
    prev = p;
  }
  EXPECT_THROW(asymptotic_power(Eigen::Vector2d(1.0, 0.0), null, 0.0), DomainError);
  EXPECT_THROW(asymptotic_power(Eigen::Vector2d(1.0, 0.0), null, 1.0), DomainError);
}

TEST(RunTest, AffineInvariance) {
  RandomStream coef(31337, 0);
  std::uint64_t stream = 0;
  for (double lambda : {1.0, 1.5, 2.0, 3.0}) {
    const NullSpec null(lambda);
    for (int d = 0; d < 25; ++d) {
      const auto xs = draw(ApdParams(0.3 + 0.4 * coef.uniform(), lambda), 40 + d, 99, stream++);
      const double a = 0.01 + 100.0 * coef.uniform();
      const double b = -50.0 + 100.0 * coef.uniform();
      std::vector<double> ys(xs.size());
      for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = a * xs[i] + b;
      const auto rx = run_test(xs, null);
      const auto ry = run_test(ys, null);
      EXPECT_NEAR(rx.t_stat, ry.t_stat, 1e-10) << "lambda = " << lambda << " dataset " << d;
      EXPECT_NEAR(rx.p_value, ry.p_value, 1e-10);
      EXPECT_NEAR(ry.kappa_hat.mu, a * rx.kappa_hat.mu + b, 1e-9 * (std::abs(b) + a));
      EXPECT_NEAR(ry.kappa_hat.sigma, a * rx.kappa_hat.sigma, 1e-10 * a);
    }
  }
}

TEST(RunTest, OddSampleLambda1IsFinite) {
  const NullSpec null(1.0);
  for (std::uint64_t r = 0; r < 200; ++r) {
    const auto xs = draw(ApdParams(0.5, 1.0), 21 + 2 * (r % 10), 5, r);
    const auto rep = run_test(xs, null);
    EXPECT_TRUE(std::isfinite(rep.t_stat));
    EXPECT_TRUE(std::isfinite(rep.p_value));
  }
}

TEST(RunTest, ScoreShrinksUnderNull) {
  const std::size_t n = 5000;
  for (double lambda : {1.0, 2.0}) {
    const NullSpec null(lambda);
    const auto s = sigma_matrix(null);
    int inside = 0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      const auto rep = run_test(draw(ApdParams(0.5, lambda), n, 8, r), null);
      inside += std::abs(rep.r_n.c1) < 5.0 * std::sqrt(s(0, 0) / n) &&
                std::abs(rep.r_n.c2) < 5.0 * std::sqrt(s(1, 1) / n);
    }
    EXPECT_GE(inside, static_cast<int>(0.99 * reps)) << "lambda = " << lambda;
  }
}

TEST(KnownKappaStatistic, ChiSquareTwoUnderNull) {
  const NullSpec null(1.5);
  const int reps = 2000;
  std::vector<double> stats(reps);
  for (int r = 0; r < reps; ++r) {
    const auto xs = draw(ApdParams(0.5, 1.5, 1.0, 2.0), 500, 21, r);
    stats[r] = known_kappa_statistic(xs, null, {1.0, 2.0});
  }
  const double ks = test_util::ks_statistic(stats, [](double t) { return 1.0 - std::exp(-0.5 * t); });
  EXPECT_LT(ks, test_util::ks_critical_1pct(reps));
}

TEST(RunTest, DegenerateData) {
  const std::vector<double> flat = {2.0, 2.0, 2.0, 2.0};
  EXPECT_THROW(run_test(flat, NullSpec(1.0)), DegenerateSampleError);
  EXPECT_TRUE(rejects(TestReport{10, {}, {}, 9.0, 0.011, 1.0}, 0.05));
  EXPECT_FALSE(rejects(TestReport{10, {}, {}, 1.0, 0.6, 1.0}, 0.05));
}
