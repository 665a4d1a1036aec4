#ifndef SPCUBE_SIMULATE_HPP
#define SPCUBE_SIMULATE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "spcube/matern.hpp"

namespace spcube {

struct SimConfig {
  int n_total = 2000;
  int n_train = 1600;
  Eigen::VectorXd beta = Eigen::Vector2d::Ones();  // one entry per covariate
  double covariate_low = -0.5;
  double covariate_high = 0.5;
  double noise_var = 0.05;  // iid Gaussian measurement noise variance
  MaternParams matern;      // matern.rho ignored when effective_range > 0
  double effective_range = 0.0;
  std::uint64_t seed = 0;
};

void validate(const SimConfig& cfg);

/* One simulated spatial regression data set.  train_idx/test_idx partition
 * the rows (a seeded uniform random permutation, stored sorted).
 */
struct SpatialDataset {
  Eigen::MatrixXd locations;  // n x 2, coordinates in [0,1]^2
  Eigen::MatrixXd X;          // n x p covariates
  Eigen::VectorXd z;          // n responses
  Eigen::VectorXd omega;      // n latent field values (kept for diagnostics)
  std::vector<int> train_idx;
  std::vector<int> test_idx;

  int n() const { return static_cast<int>(z.size()); }
  int p() const { return static_cast<int>(X.cols()); }
};

// Dense n x n covariance over the given 2-d locations.
Eigen::MatrixXd build_cov_matrix(const Eigen::MatrixXd& locations,
                                 const MaternParams& params);

/* Lower Cholesky factor of a covariance matrix, retrying with diagonal
 * jitter delta * scale for delta = 1e-10, 1e-9, ..., 1e-4 when the plain
 * factorization fails.  Throws std::runtime_error past the last delta.
 */
Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double scale);

// Draw one zero-mean GP realization over the locations: omega = L * iid N(0,1).
Eigen::VectorXd simulate_gp(const Eigen::MatrixXd& locations,
                            const MaternParams& params, std::uint64_t seed);

/* Full generator: uniform locations on the unit square, uniform covariates,
 * latent Matern GP, z = X beta + omega + eps.  Deterministic in cfg.seed;
 * distinct draws come from distinct derived substreams, so e.g. changing
 * n_train never perturbs the field values.
 */
SpatialDataset simulate_dataset(const SimConfig& cfg);

}  // namespace spcube

#endif  // SPCUBE_SIMULATE_HPP
