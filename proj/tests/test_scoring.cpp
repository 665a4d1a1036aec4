#include "spcube/scoring.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using spcube::coverage;
using spcube::crps_from_samples;
using spcube::m_interval_score;
using spcube::mean_width;
using spcube::mmis;
using spcube::rmse;

TEST(IntervalScore, HandValues) {
  EXPECT_DOUBLE_EQ(m_interval_score(0.0, 1.0, 0.5, 0.05, 1.0), 1.0);
  // below-coverage penalty: 1 + (2/0.05) * 0.2
  EXPECT_NEAR(m_interval_score(0.0, 1.0, 1.2, 0.05, 1.0), 9.0, 1e-12);
  EXPECT_DOUBLE_EQ(m_interval_score(0.0, 1.0, 0.5, 0.05, 2.0), 2.0);
  EXPECT_NEAR(m_interval_score(0.0, 1.0, -0.3, 0.05, 1.0), 1.0 + 40.0 * 0.3,
              1e-12);
}

TEST(IntervalScore, TranslationInvariant) {
  const double base = m_interval_score(-1.0, 2.0, 2.5, 0.1, 1.5);
  for (double c : {-10.0, 0.25, 1e6})
    EXPECT_NEAR(m_interval_score(-1.0 + c, 2.0 + c, 2.5 + c, 0.1, 1.5), base,
                1e-9 * std::abs(base) + 1e-6);
}

TEST(IntervalScore, RejectsBadArguments) {
  EXPECT_THROW(m_interval_score(1.0, 0.0, 0.5, 0.05, 1.0),
               std::invalid_argument);
  EXPECT_THROW(m_interval_score(0.0, 1.0, 0.5, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(m_interval_score(0.0, 1.0, 0.5, 1.0, 1.0),
               std::invalid_argument);
}

TEST(IntervalScore, MeanOverThreeHandCases) {
  Eigen::VectorXd lo(3), hi(3), y(3);
  lo << 0.0, 0.0, 0.0;
  hi << 1.0, 1.0, 1.0;
  y << 0.5, 1.2, -0.3;
  const double expected = (1.0 + 9.0 + 13.0) / 3.0;
  EXPECT_NEAR(mmis(lo, hi, y, 0.05, 1.0), expected, 1e-12);

  Eigen::VectorXd one_lo(1), one_hi(1), one_y(1);
  one_lo << 0.0;
  one_hi << 1.0;
  one_y << 1.2;
  EXPECT_DOUBLE_EQ(mmis(one_lo, one_hi, one_y, 0.05, 1.0),
                   m_interval_score(0.0, 1.0, 1.2, 0.05, 1.0));
}

/* With gamma = 1 the expected score is minimized by the true
 * (alpha/2, 1-alpha/2) quantiles; perturbed quantiles must lose.
 */
TEST(IntervalScore, TrueQuantilesWinInExpectation) {
  const double alpha = 0.2;
  const double q = 1.2815515655446004;  // 0.9 standard normal quantile
  std::mt19937_64 eng(123);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 100000;

  double s_true = 0.0, s_shift = 0.0, s_narrow = 0.0, s_wide = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = gauss(eng);
    s_true += m_interval_score(-q, q, y, alpha, 1.0);
    s_shift += m_interval_score(-q + 0.1 * q, q + 0.1 * q, y, alpha, 1.0);
    s_narrow += m_interval_score(-0.9 * q, 0.9 * q, y, alpha, 1.0);
    s_wide += m_interval_score(-1.1 * q, 1.1 * q, y, alpha, 1.0);
  }
  EXPECT_LT(s_true, s_shift);
  EXPECT_LT(s_true, s_narrow);
  EXPECT_LT(s_true, s_wide);
}

TEST(Crps, PointMassCases) {
  EXPECT_DOUBLE_EQ(crps_from_samples({3.0, 3.0, 3.0}, 3.0), 0.0);
  EXPECT_NEAR(crps_from_samples({3.5, 3.5}, 3.0), 0.5, 1e-12);
  EXPECT_THROW(crps_from_samples({1.0}, 0.0), std::invalid_argument);
}

TEST(Crps, TwoSampleHandValue) {
  // mean |x-y| = 1; pairwise term = (1/(2*4)) * (0+2+2+0) = 0.5
  EXPECT_NEAR(crps_from_samples({0.0, 2.0}, 1.0), 0.5, 1e-12);
}

TEST(Crps, FiveSampleHandValue) {
  // mean |x-3| = 1.2; double pair sum 40 over 2*25 gives 0.8
  EXPECT_NEAR(crps_from_samples({1.0, 2.0, 3.0, 4.0, 5.0}, 3.0), 0.4, 1e-12);
}

TEST(Crps, PermutationAndTranslationInvariance) {
  std::vector<double> s{0.3, -1.2, 2.2, 0.9, -0.4};
  std::vector<double> shuffled{2.2, 0.3, -0.4, -1.2, 0.9};
  const double a = crps_from_samples(s, 0.7);
  EXPECT_DOUBLE_EQ(crps_from_samples(shuffled, 0.7), a);
  std::vector<double> moved(s);
  for (double& v : moved) v += 5.0;
  EXPECT_NEAR(crps_from_samples(moved, 5.7), a, 1e-12);
}

TEST(Crps, GaussianClosedFormOracle) {
  std::mt19937_64 eng(7);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> samples(100000);
  for (double& v : samples) v = gauss(eng);
  const double oracle =
      2.0 / std::sqrt(2.0 * M_PI) - 1.0 / std::sqrt(M_PI);  // 0.23370
  EXPECT_NEAR(crps_from_samples(samples, 0.0), oracle, 0.02 * oracle);
}

TEST(Diagnostics, RmseCoverageWidth) {
  Eigen::VectorXd pred(2), y(2), lo(2), hi(2);
  pred << 1.0, 2.0;
  y << 1.0, 4.0;
  EXPECT_NEAR(rmse(pred, y), std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(rmse(y, y), 0.0);

  lo << 0.0, 3.0;
  hi << 1.0, 3.5;
  // y(0)=1 sits exactly on an endpoint and still counts as covered
  EXPECT_DOUBLE_EQ(coverage(lo, hi, y), 0.5);
  EXPECT_DOUBLE_EQ(mean_width(lo, hi), 0.75);

  Eigen::VectorXd wide_lo = Eigen::VectorXd::Constant(2, -1e12);
  Eigen::VectorXd wide_hi = Eigen::VectorXd::Constant(2, 1e12);
  EXPECT_DOUBLE_EQ(coverage(wide_lo, wide_hi, y), 1.0);
}

TEST(Diagnostics, RejectEmptyOrMismatched) {
  Eigen::VectorXd a(2), b(3);
  a << 1, 2;
  b << 1, 2, 3;
  EXPECT_THROW(rmse(a, b), std::invalid_argument);
  EXPECT_THROW(mmis(a, a, b, 0.05, 1.0), std::invalid_argument);
  Eigen::VectorXd empty(0);
  EXPECT_THROW(mmis(empty, empty, empty, 0.05, 1.0), std::invalid_argument);
}
