#include "spcube/basis.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace spcube {

BasisSet eigen_basis(const Eigen::MatrixXd& cov, int m,
                     const MaternParams& source_params) {
  const Eigen::Index n = cov.rows();
  if (cov.cols() != n)
    throw std::invalid_argument("eigen_basis: covariance must be square");
  if (m < 1 || m > n)
    throw std::invalid_argument("eigen_basis: need 1 <= m <= n, got m = " +
                                std::to_string(m));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigen_basis: eigendecomposition failed");

  // Solver returns ascending order; take the trailing m pairs, reversed.
  BasisSet basis;
  basis.phi.resize(n, m);
  basis.eigenvalues.resize(m);
  for (int j = 0; j < m; ++j) {
    const Eigen::Index src = n - 1 - j;
    basis.eigenvalues(j) = solver.eigenvalues()(src);
    basis.phi.col(j) = solver.eigenvectors().col(src);
  }

  // Deterministic sign: first entry with magnitude above tolerance is positive.
  for (int j = 0; j < m; ++j) {
    double lead = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(basis.phi(i, j)) > 1e-12) {
        lead = basis.phi(i, j);
        break;
      }
    }
    if (lead < 0.0) basis.phi.col(j) = -basis.phi.col(j);
  }

  basis.source_params = source_params;
  return basis;
}

Eigen::MatrixXd basis_rows(const BasisSet& basis, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), basis.phi.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= basis.phi.rows())
      throw std::out_of_range("basis_rows: row index " +
                              std::to_string(rows[r]) + " out of range");
    out.row(static_cast<Eigen::Index>(r)) = basis.phi.row(rows[r]);
  }
  return out;
}

Eigen::MatrixXd augment_design(const Eigen::MatrixXd& X,
                               const Eigen::MatrixXd& phi) {
  if (X.rows() != phi.rows())
    throw std::invalid_argument("augment_design: row counts differ");
  Eigen::MatrixXd out(X.rows(), X.cols() + phi.cols());
  out << X, phi;
  return out;
}

}  // namespace spcube
