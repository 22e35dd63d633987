#pragma once

#include <Eigen/Dense>

namespace otsym {

/// Symmetric inverse square root via eigendecomposition. Throws NotSPD when
/// the smallest eigenvalue is not positive relative to the largest.
Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& sigma, double rel_tol = 1e-12);

bool is_spd(const Eigen::MatrixXd& m, double tol = 1e-8);

/// Unbiased (n-1 denominator) sample covariance of the rows of `data`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data);

/// Modified Gram-Schmidt on the columns, in column order.
Eigen::MatrixXd gram_schmidt(Eigen::MatrixXd columns);

/// Householder reflection H with H * e1 = v for a unit vector v; the columns
/// 2..p of H form an orthonormal basis of v's complement.
Eigen::MatrixXd householder_completion(const Eigen::VectorXd& unit_v);

}  // namespace otsym
