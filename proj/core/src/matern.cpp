#include "spcube/matern.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spcube {

namespace {

bool supported_nu(double nu) {
  return nu == 0.5 || nu == 1.5 || nu == 2.5;
}

}  // namespace

void validate(const MaternParams& params) {
  if (!(params.sigma2 > 0.0) || !std::isfinite(params.sigma2))
    throw std::invalid_argument("matern: sigma2 must be positive, got " +
                                std::to_string(params.sigma2));
  if (!(params.rho > 0.0) || !std::isfinite(params.rho))
    throw std::invalid_argument("matern: rho must be positive, got " +
                                std::to_string(params.rho));
  if (!supported_nu(params.nu))
    throw std::invalid_argument("matern: nu must be 0.5, 1.5 or 2.5, got " +
                                std::to_string(params.nu));
}

double matern_cov(double d, const MaternParams& params) {
  validate(params);
  if (!(d >= 0.0))
    throw std::invalid_argument("matern: distance must be >= 0, got " +
                                std::to_string(d));
  if (d == 0.0) return params.sigma2;

  const double u = std::sqrt(2.0 * params.nu) * d / params.rho;
  double corr;
  if (params.nu == 0.5) {
    corr = std::exp(-u);
  } else if (params.nu == 1.5) {
    corr = (1.0 + u) * std::exp(-u);
  } else {
    corr = (1.0 + u + u * u / 3.0) * std::exp(-u);
  }
  return params.sigma2 * corr;
}

double effective_range_to_rho(double effective_range, double nu) {
  if (!(effective_range > 0.0) || !std::isfinite(effective_range))
    throw std::invalid_argument("matern: effective range must be positive");
  if (!supported_nu(nu))
    throw std::invalid_argument("matern: nu must be 0.5, 1.5 or 2.5");

  constexpr double target = 0.05;
  auto corr_at = [&](double rho) {
    return matern_cov(effective_range, MaternParams{1.0, rho, nu});
  };

  // Bracket the root.  Correlation at fixed distance grows with rho.
  double lo = effective_range, hi = effective_range;
  while (corr_at(lo) > target) lo *= 0.5;
  while (corr_at(hi) < target) hi *= 2.0;

  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if ((hi - lo) <= 1e-10 * mid) return mid;
    (corr_at(mid) < target ? lo : hi) = mid;
  }
  throw std::runtime_error("matern: effective range inversion failed to converge");
}

}  // namespace spcube
