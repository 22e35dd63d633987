#pragma once

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otsym/rng.hpp"

namespace otsym {

/// Two candidate costs are considered tied when they differ by at most
/// kTieTolerance * (1 + max magnitude).
inline constexpr double kTieTolerance = 1e-9;

bool costs_tied(double a, double b) noexcept;

enum class GroupKind { Central, SignChange, Spherical, FiniteMatrices };

std::string to_string(GroupKind kind);

/// A compact subgroup of O(p). Central, SignChange and Spherical are stored
/// implicitly; FiniteMatrices keeps the validated list of its elements.
class SymmetryGroup {
 public:
  static SymmetryGroup central(int dim);
  static SymmetryGroup sign_change(int dim);
  static SymmetryGroup spherical(int dim);
  /// Validates orthogonality (1e-10), identity membership, and closure under
  /// products and transposes. Throws Error(InvalidGroup) otherwise.
  static SymmetryGroup finite(std::vector<Eigen::MatrixXd> elements);

  GroupKind kind() const noexcept { return kind_; }
  int dim() const noexcept { return dim_; }
  std::string name() const;

  /// True iff the Haar mean of the group is the zero matrix.
  bool mean_is_zero() const noexcept { return mean_is_zero_; }

  /// Only meaningful for FiniteMatrices.
  const std::vector<Eigen::MatrixXd>& elements() const;

 private:
  SymmetryGroup(GroupKind kind, int dim) : kind_(kind), dim_(dim) {}

  GroupKind kind_;
  int dim_;
  bool mean_is_zero_ = true;
  std::shared_ptr<const std::vector<Eigen::MatrixXd>> elements_;
};

/// One element Q of a SymmetryGroup. Central and SignChange elements use the
/// compact tag; others hold the orthogonal matrix.
class GroupElement {
 public:
  enum class Representation { CentralSign, DiagonalSigns, Matrix };

  static GroupElement central(int sign, int dim);
  static GroupElement diagonal(Eigen::VectorXd signs);
  static GroupElement matrix(Eigen::MatrixXd q, int finite_index = -1);

  Representation representation() const noexcept { return rep_; }
  int dim() const noexcept { return dim_; }

  /// Q * x
  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  /// Q^T * x
  Eigen::VectorXd apply_transpose(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::MatrixXd to_matrix() const;
  /// acc += Q without forming Q for compact representations.
  void accumulate_into(Eigen::MatrixXd& acc) const;

  int central_sign() const noexcept { return sign_; }
  const Eigen::VectorXd& diagonal_signs() const noexcept { return diag_; }
  const Eigen::MatrixXd& matrix_value() const noexcept { return mat_; }
  int finite_index() const noexcept { return finite_index_; }

  /// Short text form used in CSV output: "+"/"-" for central, a +/- string
  /// per coordinate for sign changes, "g<k>" for finite elements and the
  /// row-major entries for general matrices.
  std::string tag() const;

 private:
  GroupElement() = default;

  Representation rep_ = Representation::CentralSign;
  int dim_ = 0;
  int sign_ = 1;
  int finite_index_ = -1;
  Eigen::VectorXd diag_;
  Eigen::MatrixXd mat_;
};

/// Haar-uniform element of the group. Spherical uses Gaussian QR with the
/// sign-of-diagonal correction.
GroupElement haar_sample(const SymmetryGroup& group, Rng& rng);

/// Haar-distributed p x p orthogonal matrix.
Eigen::MatrixXd haar_orthogonal(int dim, Rng& rng);

/// S * h for S drawn from the Haar measure, without materializing S.
Eigen::VectorXd haar_apply(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& h,
                           Rng& rng);

/// min over Q in G of ||Q^T x - h||^2.
double orbit_cost(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& h);

/// A minimizer Q of ||Q^T x - h||^2, drawn uniformly among tied minimizers.
/// For the spherical group this is the conditional Haar draw given Q h || x.
GroupElement argmin_sign(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& h, Rng& rng);

}  // namespace otsym
