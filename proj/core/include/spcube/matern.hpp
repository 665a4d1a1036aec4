#ifndef SPCUBE_MATERN_HPP
#define SPCUBE_MATERN_HPP

namespace spcube {

/* Matern covariance parameters.  Only the half-integer smoothness values
 * 0.5, 1.5 and 2.5 are supported; those admit closed forms and avoid a
 * Bessel-function dependency.
 */
struct MaternParams {
  double sigma2 = 1.0;  // marginal variance, > 0
  double rho = 1.0;     // range parameter, > 0
  double nu = 0.5;      // smoothness, one of {0.5, 1.5, 2.5}
};

// Throws std::invalid_argument on any out-of-domain field.
void validate(const MaternParams& params);

/* Covariance at distance d >= 0.  Closed forms in u = sqrt(2 nu) d / rho:
 *   nu = 0.5 : sigma2 exp(-u)
 *   nu = 1.5 : sigma2 (1 + u) exp(-u)
 *   nu = 2.5 : sigma2 (1 + u + u^2/3) exp(-u)
 */
double matern_cov(double d, const MaternParams& params);

/* Range parameter rho such that the correlation at distance
 * effective_range equals 0.05.  Bisection to relative tolerance 1e-10;
 * correlation is strictly increasing in rho so the root is unique.
 */
double effective_range_to_rho(double effective_range, double nu);

}  // namespace spcube

#endif  // SPCUBE_MATERN_HPP
