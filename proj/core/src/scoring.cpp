#include "spcube/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spcube {

namespace {

void check_aligned(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                   const char* where) {
  if (a.size() != b.size() || a.size() == 0)
    throw std::invalid_argument(std::string(where) +
                                ": vectors must be non-empty and aligned");
}

}  // namespace

double m_interval_score(double lo, double hi, double y, double alpha,
                        double gamma) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("m_interval_score: alpha must lie in (0,1)");
  if (!(gamma >= 0.0))
    throw std::invalid_argument("m_interval_score: gamma must be >= 0");
  if (lo > hi)
    throw std::invalid_argument("m_interval_score: interval bounds out of order");

  double score = gamma * (hi - lo);
  if (y < lo) score += (2.0 / alpha) * (lo - y);
  if (y > hi) score += (2.0 / alpha) * (y - hi);
  return score;
}

double mmis(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
            const Eigen::VectorXd& y, double alpha, double gamma) {
  check_aligned(lo, hi, "mmis");
  check_aligned(lo, y, "mmis");
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    total += m_interval_score(lo(i), hi(i), y(i), alpha, gamma);
  return total / static_cast<double>(y.size());
}

double crps_from_samples(std::vector<double> samples, double y) {
  const std::size_t T = samples.size();
  if (T < 2)
    throw std::invalid_argument("crps_from_samples: need at least two samples");
  std::sort(samples.begin(), samples.end());

  // mean |x - y| minus half the mean pairwise gap; the latter reduces to a
  // weighted sum over the order statistics.
  double abs_term = 0.0;
  double pair_term = 0.0;
  const double Td = static_cast<double>(T);
  for (std::size_t k = 0; k < T; ++k) {
    abs_term += std::abs(samples[k] - y);
    pair_term += samples[k] * (2.0 * static_cast<double>(k) - Td + 1.0);
  }
  return abs_term / Td - pair_term / (Td * Td);
}

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y) {
  check_aligned(pred, y, "rmse");
  return std::sqrt((pred - y).squaredNorm() / static_cast<double>(y.size()));
}

double coverage(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                const Eigen::VectorXd& y) {
  check_aligned(lo, hi, "coverage");
  check_aligned(lo, y, "coverage");
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y(i) >= lo(i) && y(i) <= hi(i)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

double mean_width(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  check_aligned(lo, hi, "mean_width");
  return (hi - lo).mean();
}

}  // namespace spcube
