#include "otsym/linalg.hpp"

#include <cmath>

#include "otsym/error.hpp"

namespace otsym {

Eigen::MatrixXd inverse_sqrt_spd(const Eigen::MatrixXd& sigma, double rel_tol) {
  if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "inverse_sqrt_spd: matrix must be square and nonempty");
  if (!sigma.allFinite()) throw Error(ErrorCode::NotSPD, "inverse_sqrt_spd: non-finite entries");
  const Eigen::MatrixXd sym = 0.5 * (sigma + sigma.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() > rel_tol * largest))
    throw Error(ErrorCode::NotSPD, "inverse_sqrt_spd: matrix is not positive definite");
  return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

bool is_spd(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols() || m.rows() == 0 || !m.allFinite()) return false;
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() > tol;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw Error(ErrorCode::TooFewObservations, "sample_covariance needs at least 2 rows");
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - mean;
  return (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
}

Eigen::MatrixXd gram_schmidt(Eigen::MatrixXd q) {
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    // two passes keep the result orthogonal to machine precision
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index k = 0; k < j; ++k) q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    const double norm = q.col(j).norm();
    if (!(norm > 0.0)) throw Error(ErrorCode::Domain, "gram_schmidt: linearly dependent columns");
    q.col(j) /= norm;
  }
  return q;
}

Eigen::MatrixXd householder_completion(const Eigen::VectorXd& v) {
  const Eigen::Index p = v.size();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd u = v;
  u(0) -= 1.0;  // H = I - 2 u u^T / u^T u maps e1 to v
  const double uu = u.squaredNorm();
  if (uu > 1e-30) h -= (2.0 / uu) * u * u.transpose();
  return h;
}

}  // namespace otsym
