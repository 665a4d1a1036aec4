#ifndef SPCUBE_BASIS_HPP
#define SPCUBE_BASIS_HPP

#include <Eigen/Dense>
#include <vector>

#include "spcube/matern.hpp"

namespace spcube {

/* Leading eigenvector basis of a covariance matrix over every location
 * (train and test together).  phi columns are orthonormal and ordered by
 * non-increasing eigenvalue; each column's sign is fixed so its first
 * entry of nonnegligible magnitude is positive.
 */
struct BasisSet {
  Eigen::MatrixXd phi;          // n x m
  Eigen::VectorXd eigenvalues;  // m, non-increasing
  MaternParams source_params;   // covariance model the basis came from
};

// Top-m eigenpairs of a symmetric covariance matrix.  Requires 1 <= m <= n.
BasisSet eigen_basis(const Eigen::MatrixXd& cov, int m,
                     const MaternParams& source_params = MaternParams{});

// Row slice of the full-location basis (e.g. the test rows).
Eigen::MatrixXd basis_rows(const BasisSet& basis, const std::vector<int>& rows);

// [X | phi]: covariates augmented with basis features.
Eigen::MatrixXd augment_design(const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& phi);

}  // namespace spcube

#endif  // SPCUBE_BASIS_HPP
