#include "spcube/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "spcube/rng.hpp"

namespace spcube {

namespace {

// Inverse-gamma draw under the shape/scale convention used in the header.
double draw_inverse_gamma(double shape, double scale, std::mt19937_64& eng) {
  std::gamma_distribution<double> gamma(shape, 1.0 / scale);
  double g = gamma(eng);
  while (g <= 0.0) g = gamma(eng);  // guard against underflow to zero
  return 1.0 / g;
}

// Quantile with linear interpolation between order statistics (R type 7).
double sorted_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return (1.0 - frac) * sorted[lo] + frac * sorted[hi];
}

}  // namespace

PosteriorDraws gibbs_sample(const Eigen::MatrixXd& x_tilde,
                            const Eigen::VectorXd& z, const GibbsConfig& cfg) {
  const Eigen::Index n = x_tilde.rows();
  const Eigen::Index d = x_tilde.cols();
  if (z.size() != n)
    throw std::invalid_argument("gibbs_sample: design and response misaligned");
  if (cfg.n_burn < 0 || cfg.n_burn >= cfg.n_iter)
    throw std::invalid_argument("gibbs_sample: need 0 <= n_burn < n_iter");
  if (!(cfg.tau2_init > 0.0))
    throw std::invalid_argument("gibbs_sample: tau2_init must be positive");
  if (!(cfg.priors.tau2_shape > 0.0) || !(cfg.priors.tau2_scale > 0.0))
    throw std::invalid_argument("gibbs_sample: inverse-gamma hyperparameters must be positive");

  Eigen::VectorXd mu = cfg.priors.beta_mean;
  if (mu.size() == 0) mu = Eigen::VectorXd::Zero(d);
  if (mu.size() != d)
    throw std::invalid_argument("gibbs_sample: beta_mean has wrong length");

  Eigen::MatrixXd prior_prec;  // C^-1
  if (cfg.priors.beta_cov.size() == 0) {
    if (!(cfg.priors.beta_cov_diag > 0.0))
      throw std::invalid_argument("gibbs_sample: beta_cov_diag must be positive");
    prior_prec = Eigen::MatrixXd::Identity(d, d) / cfg.priors.beta_cov_diag;
  } else {
    if (cfg.priors.beta_cov.rows() != d || cfg.priors.beta_cov.cols() != d)
      throw std::invalid_argument("gibbs_sample: beta_cov has wrong shape");
    Eigen::LLT<Eigen::MatrixXd> cov_llt(cfg.priors.beta_cov);
    if (cov_llt.info() != Eigen::Success)
      throw std::invalid_argument("gibbs_sample: beta_cov not positive definite");
    prior_prec = cov_llt.solve(Eigen::MatrixXd::Identity(d, d));
  }

  const Eigen::MatrixXd xtx = x_tilde.transpose() * x_tilde;
  const Eigen::VectorXd xtz = x_tilde.transpose() * z;
  const Eigen::VectorXd prior_term = prior_prec * mu;

  auto eng = rng::make_engine(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const int n_keep = cfg.n_iter - cfg.n_burn;
  PosteriorDraws draws;
  draws.beta.resize(n_keep, d);
  draws.tau2.resize(n_keep);
  draws.n_iter = cfg.n_iter;
  draws.n_burn = cfg.n_burn;

  double tau2 = cfg.tau2_init;
  Eigen::VectorXd beta(d), eta(d), mean(d);
  for (int it = 0; it < cfg.n_iter; ++it) {
    const Eigen::MatrixXd prec = prior_prec + xtx / tau2;
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error(
          "gibbs_sample: precision not positive definite at iteration " +
          std::to_string(it));

    mean = llt.solve(prior_term + xtz / tau2);
    for (Eigen::Index j = 0; j < d; ++j) eta(j) = gauss(eng);
    // beta = mean + L^-T eta has covariance prec^-1
    beta = mean + llt.matrixU().solve(eta);

    const double rss = (z - x_tilde * beta).squaredNorm();
    tau2 = draw_inverse_gamma(cfg.priors.tau2_shape + 0.5 * static_cast<double>(n),
                              cfg.priors.tau2_scale + 0.5 * rss, eng);

    if (it >= cfg.n_burn) {
      draws.beta.row(it - cfg.n_burn) = beta;
      draws.tau2(it - cfg.n_burn) = tau2;
    }
  }
  return draws;
}

Eigen::MatrixXd posterior_predictive(const PosteriorDraws& draws,
                                     const Eigen::MatrixXd& x_tilde_test,
                                     std::uint64_t seed) {
  if (draws.n_keep() == 0)
    throw std::invalid_argument("posterior_predictive: no posterior draws");
  if (x_tilde_test.cols() != draws.beta.cols())
    throw std::invalid_argument(
        "posterior_predictive: test design width does not match draws");

  const Eigen::Index n_test = x_tilde_test.rows();
  const int T = draws.n_keep();
  Eigen::MatrixXd samples(n_test, T);
  if (n_test == 0) return samples;

  auto eng = rng::make_engine(rng::derive_seed(seed, rng::Stream::predictive));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < T; ++t) {
    const double sd = std::sqrt(draws.tau2(t));
    samples.col(t) = x_tilde_test * draws.beta.row(t).transpose();
    for (Eigen::Index i = 0; i < n_test; ++i) samples(i, t) += sd * gauss(eng);
  }
  return samples;
}

ScoreRecord baseline_scores(const Eigen::MatrixXd& pred_samples,
                            const Eigen::VectorXd& z_test, double alpha,
                            double gamma) {
  if (pred_samples.rows() != z_test.size())
    throw std::invalid_argument("baseline_scores: rows do not match z_test");
  if (pred_samples.cols() < 2)
    throw std::invalid_argument("baseline_scores: need >= 2 samples per row");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::invalid_argument("baseline_scores: alpha must lie in (0,1)");

  const Eigen::Index n = z_test.size();
  const auto T = static_cast<std::size_t>(pred_samples.cols());
  Eigen::VectorXd lo(n), hi(n), point(n);
  double crps_total = 0.0;
  std::vector<double> row(T);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t t = 0; t < T; ++t)
      row[t] = pred_samples(i, static_cast<Eigen::Index>(t));
    crps_total += crps_from_samples(row, z_test(i));
    std::sort(row.begin(), row.end());
    lo(i) = sorted_quantile(row, alpha / 2.0);
    hi(i) = sorted_quantile(row, 1.0 - alpha / 2.0);
    point(i) = pred_samples.row(i).mean();
  }

  ScoreRecord rec;
  rec.alpha = alpha;
  rec.gamma = gamma;
  rec.mis = mmis(lo, hi, z_test, alpha, gamma);
  rec.crps = crps_total / static_cast<double>(n);
  rec.rmse = rmse(point, z_test);
  rec.width = mean_width(lo, hi);
  rec.coverage = coverage(lo, hi, z_test);
  return rec;
}

}  // namespace spcube
