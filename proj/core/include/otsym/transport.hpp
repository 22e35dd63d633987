#pragma once

#include <vector>

#include <Eigen/Dense>

#include "otsym/group.hpp"

namespace otsym {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Square matrix of finite, nonnegative transport costs. Row i is data point
/// i, column j is reference point j. Stored row-major for the solver.
class CostMatrix {
 public:
  explicit CostMatrix(RowMatrix values);

  int size() const noexcept { return static_cast<int>(values_.rows()); }
  double operator()(int i, int j) const { return values_(i, j); }
  const RowMatrix& values() const noexcept { return values_; }

 private:
  RowMatrix values_;
};

/// Entry (i, j) = orbit_cost(group, data.row(i), ref.row(j)), using the
/// closed forms for the implicit groups.
CostMatrix build_cost_matrix(const SymmetryGroup& group, const Eigen::MatrixXd& data,
                             const Eigen::MatrixXd& ref_points);

struct Assignment {
  /// ref_of_data[i] = index of the reference point matched to data point i.
  std::vector<int> ref_of_data;
  double total_cost = 0.0;
  /// Set when another permutation attains the same optimal cost.
  bool tie_flag = false;
  /// Dual potentials (row = data, column = reference); empty when the solver
  /// does not produce a certificate.
  Eigen::VectorXd row_dual;
  Eigen::VectorXd col_dual;

  std::vector<int> data_of_ref() const;
};

/// Exact minimum-cost assignment. Small problems go to the dense
/// Jonker-Volgenant solver; larger ones augment on a sparse candidate graph
/// that is widened until the duals are feasible for the full matrix.
Assignment solve_lap(const CostMatrix& costs);

/// Above this size solve_lap uses the candidate-graph solver.
inline constexpr int kDenseLapMax = 64;

/// Jonker-Volgenant on the full matrix, O(n^3).
Assignment solve_lap_dense(const CostMatrix& costs);

/// Shortest augmenting paths over the `candidates` cheapest columns of each
/// row, repaired on the full matrix. Same result contract as solve_lap.
Assignment solve_lap_sparse(const CostMatrix& costs, int candidates = 32);

/// Complementary slackness check: u_i + v_j <= c_ij + tol everywhere, with
/// equality (within tol) on the assigned pairs.
bool verify_dual_certificate(const CostMatrix& costs, const Assignment& assignment, double tol = 1e-7);

/// O(n log n) path for the spherical group: the k-th smallest data norm is
/// matched to the k-th smallest reference norm. Throws DuplicateNorms when
/// two reference norms coincide.
Assignment solve_spherical(const Eigen::MatrixXd& data, const Eigen::MatrixXd& ref_points);

struct BruteForceResult {
  Assignment best;
  /// Every permutation (as ref_of_data) whose cost ties the optimum.
  std::vector<std::vector<int>> minimizers;
};

inline constexpr int kBruteForceMax = 9;

/// Exhaustive search over all n! permutations; n <= 9.
BruteForceResult brute_force_lap(const CostMatrix& costs);

}  // namespace otsym
