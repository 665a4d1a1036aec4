#include "spcube/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "spcube/rng.hpp"

namespace spcube {

void validate(const SimConfig& cfg) {
  if (cfg.n_total < 2)
    throw std::invalid_argument("simulate: n_total must be >= 2");
  if (cfg.n_train < 1 || cfg.n_train >= cfg.n_total)
    throw std::invalid_argument("simulate: need 0 < n_train < n_total, got " +
                                std::to_string(cfg.n_train) + " of " +
                                std::to_string(cfg.n_total));
  if (!(cfg.covariate_low < cfg.covariate_high))
    throw std::invalid_argument("simulate: covariate bounds out of order");
  if (!(cfg.noise_var >= 0.0) || !std::isfinite(cfg.noise_var))
    throw std::invalid_argument("simulate: noise_var must be >= 0");
  if (cfg.effective_range < 0.0)
    throw std::invalid_argument("simulate: effective_range must be >= 0");
  MaternParams mp = cfg.matern;
  if (cfg.effective_range > 0.0) mp.rho = 1.0;  // rho comes from the range inversion
  validate(mp);
}

Eigen::MatrixXd build_cov_matrix(const Eigen::MatrixXd& locations,
                                 const MaternParams& params) {
  validate(params);
  if (locations.cols() != 2)
    throw std::invalid_argument("build_cov_matrix: locations must be n x 2");
  const Eigen::Index n = locations.rows();
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = params.sigma2;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double dx = locations(i, 0) - locations(j, 0);
      const double dy = locations(i, 1) - locations(j, 1);
      const double c = matern_cov(std::sqrt(dx * dx + dy * dy), params);
      cov(i, j) = c;
      cov(j, i) = c;
    }
  }
  return cov;
}

Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& cov, double scale) {
  if (cov.rows() != cov.cols())
    throw std::invalid_argument("jittered_cholesky: matrix must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  const Eigen::MatrixXd eye =
      Eigen::MatrixXd::Identity(cov.rows(), cov.cols());
  for (double delta = 1e-10; delta <= 1e-4 * 1.0000001; delta *= 10.0) {
    llt.compute(cov + (delta * scale) * eye);
    if (llt.info() == Eigen::Success) return llt.matrixL();
  }
  throw std::runtime_error(
      "jittered_cholesky: factorization failed even with jitter 1e-4");
}

Eigen::VectorXd simulate_gp(const Eigen::MatrixXd& locations,
                            const MaternParams& params, std::uint64_t seed) {
  const Eigen::MatrixXd cov = build_cov_matrix(locations, params);
  const Eigen::MatrixXd L = jittered_cholesky(cov, params.sigma2);
  auto eng = rng::make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd iid(locations.rows());
  for (Eigen::Index i = 0; i < iid.size(); ++i) iid(i) = gauss(eng);
  return L * iid;
}

SpatialDataset simulate_dataset(const SimConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_total;
  const int p = static_cast<int>(cfg.beta.size());

  MaternParams mp = cfg.matern;
  if (cfg.effective_range > 0.0)
    mp.rho = effective_range_to_rho(cfg.effective_range, mp.nu);

  SpatialDataset ds;

  {
    auto eng = rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::locations));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ds.locations.resize(n, 2);
    for (int i = 0; i < n; ++i) {
      ds.locations(i, 0) = unit(eng);
      ds.locations(i, 1) = unit(eng);
    }
  }
  {
    auto eng = rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::covariates));
    std::uniform_real_distribution<double> covar(cfg.covariate_low,
                                                 cfg.covariate_high);
    ds.X.resize(n, p);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) ds.X(i, j) = covar(eng);
  }

  ds.omega = simulate_gp(ds.locations, mp,
                         rng::derive_seed(cfg.seed, rng::Stream::field));

  {
    auto eng = rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::noise));
    std::normal_distribution<double> gauss(0.0, std::sqrt(cfg.noise_var));
    ds.z.resize(n);
    for (int i = 0; i < n; ++i)
      ds.z(i) = ds.X.row(i).dot(cfg.beta) + ds.omega(i) +
                (cfg.noise_var > 0.0 ? gauss(eng) : 0.0);
  }

  {
    // Uniform random permutation; first n_train entries are the training rows.
    auto eng = rng::make_engine(rng::derive_seed(cfg.seed, rng::Stream::split));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), eng);
    ds.train_idx.assign(perm.begin(), perm.begin() + cfg.n_train);
    ds.test_idx.assign(perm.begin() + cfg.n_train, perm.end());
    std::sort(ds.train_idx.begin(), ds.train_idx.end());
    std::sort(ds.test_idx.begin(), ds.test_idx.end());
  }
  return ds;
}

}  // namespace spcube
