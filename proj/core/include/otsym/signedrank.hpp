#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "otsym/group.hpp"
#include "otsym/reference.hpp"

namespace otsym {

/// Generalized signs, ranks and signed-ranks of a sample against a reference.
struct Decomposition {
  std::vector<GroupElement> signs;
  /// Row i is R_n(X_i), one of the reference points.
  Eigen::MatrixXd ranks;
  /// Row i is S_n(X_i) R_n(X_i).
  Eigen::MatrixXd signed_ranks;
  /// ref_index[i] is the reference row assigned to observation i.
  std::vector<int> ref_index;
  std::uint64_t seed = 0;
  bool tie_flag = false;

  std::size_t size() const noexcept { return signs.size(); }
};

/// Solves the assignment between the rows of `data` and the reference points
/// and attaches a minimizing group element to every pair. All randomness
/// (tie breaking, spherical signs) is drawn from streams derived from `seed`.
Decomposition decompose(const Eigen::MatrixXd& data, const ReferenceSet& ref, std::uint64_t seed);

/// Sigma^{-1/2} x: the population signed-rank map for N(0, Sigma) data under
/// the Gaussian ERD.
Eigen::VectorXd population_map_gaussian_oracle(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma);

/// Columns x1..xp, r1..rp, sr1..srp, sign_tag.
void write_decomposition_csv(std::ostream& out, const Eigen::MatrixXd& data, const Decomposition& d);

}  // namespace otsym
