#ifndef SPCUBE_SCORING_HPP
#define SPCUBE_SCORING_HPP

#include <Eigen/Dense>
#include <vector>

namespace spcube {

/* Modified interval score for one (1-alpha) interval [lo, hi]:
 *   gamma (hi - lo) + (2/alpha) (lo - y) 1{y < lo} + (2/alpha) (y - hi) 1{y > hi}
 * gamma rescales the width penalty relative to the coverage penalty.
 */
double m_interval_score(double lo, double hi, double y, double alpha,
                        double gamma);

// Mean of m_interval_score over aligned vectors.
double mmis(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
            const Eigen::VectorXd& y, double alpha, double gamma);

/* Sample-based CRPS for one observation,
 *   mean_t |x_t - y| - (1/2T^2) sum_{t,s} |x_t - x_s|,
 * computed in O(T log T) through the sorted-sample identity.
 */
double crps_from_samples(std::vector<double> samples, double y);

double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& y);

// Fraction of y inside [lo, hi]; endpoints count as covered.
double coverage(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                const Eigen::VectorXd& y);

double mean_width(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/* One evaluated model's test-set summary.  alpha/gamma record the interval
 * convention the scores were computed under.
 */
struct ScoreRecord {
  double mis = 0.0;  // mean modified interval score
  double crps = 0.0;
  double rmse = 0.0;
  double width = 0.0;
  double coverage = 0.0;
  double alpha = 0.05;
  double gamma = 1.0;
};

}  // namespace spcube

#endif  // SPCUBE_SCORING_HPP
