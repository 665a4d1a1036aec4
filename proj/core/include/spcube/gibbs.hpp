#ifndef SPCUBE_GIBBS_HPP
#define SPCUBE_GIBBS_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "spcube/scoring.hpp"

namespace spcube {

/* Conjugate priors for the linear model z = x_tilde' beta + eps,
 * eps ~ N(0, tau2): beta ~ N(beta_mean, beta_cov), tau2 inverse-gamma with
 * density proportional to x^-(shape+1) exp(-scale/x).
 */
struct BaselinePriors {
  Eigen::VectorXd beta_mean;  // empty means zero vector
  double beta_cov_diag = 100.0;
  Eigen::MatrixXd beta_cov;  // empty means beta_cov_diag * I
  double tau2_shape = 2.0;
  double tau2_scale = 1.0;  // set to var(z_train) by callers following the default
};

struct GibbsConfig {
  BaselinePriors priors;
  int n_iter = 10000;
  int n_burn = 1000;
  double tau2_init = 1.0;
  std::uint64_t seed = 0;
};

struct PosteriorDraws {
  Eigen::MatrixXd beta;   // n_keep x d
  Eigen::VectorXd tau2;   // n_keep, all > 0
  int n_iter = 0;
  int n_burn = 0;

  int n_keep() const { return static_cast<int>(tau2.size()); }
};

/* Two-block Gibbs sampler.  Full conditionals:
 *   beta | tau2 ~ N(Q^-1 (C^-1 mu + tau2^-1 X'z), Q^-1),
 *       Q = C^-1 + tau2^-1 X'X
 *   tau2 | beta ~ InvGamma(shape + n/2, scale + RSS/2)
 * Deterministic given cfg.seed.
 */
PosteriorDraws gibbs_sample(const Eigen::MatrixXd& x_tilde,
                            const Eigen::VectorXd& z, const GibbsConfig& cfg);

/* Predictive samples, one column per kept draw:
 * col t = x_tilde_test * beta_t + N(0, tau2_t) noise per row.
 */
Eigen::MatrixXd posterior_predictive(const PosteriorDraws& draws,
                                     const Eigen::MatrixXd& x_tilde_test,
                                     std::uint64_t seed);

/* Score a predictive sample matrix against held-out responses.  Intervals
 * are empirical (alpha/2, 1-alpha/2) quantiles per row (linear interpolation
 * between order statistics); the point prediction is the row mean.
 */
ScoreRecord baseline_scores(const Eigen::MatrixXd& pred_samples,
                            const Eigen::VectorXd& z_test, double alpha,
                            double gamma);

}  // namespace spcube

#endif  // SPCUBE_GIBBS_HPP
