#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "otsym/group.hpp"

namespace otsym {

/// Law of S * J(H): the effective reference distribution.
enum class ErdKind { Gaussian, Uniform, SphericalUniform };

enum class ConstructionKind { RandomSample, Halton, Explicit };

std::string to_string(ErdKind kind);
std::string to_string(ConstructionKind kind);
ErdKind parse_erd(const std::string& text);
ConstructionKind parse_construction(const std::string& text);

struct Construction {
  ConstructionKind kind = ConstructionKind::Halton;
  std::uint64_t seed = 0;
};

/// J(h): identity, or the Gaussian plug-in score h -> M h with M = Sigma^{-1/2}.
class ScoreFunction {
 public:
  enum class Kind { Identity, GaussianPlugIn };

  static ScoreFunction identity() { return ScoreFunction(); }
  /// M must be symmetric positive definite (tolerance 1e-8).
  static ScoreFunction gaussian_plugin(Eigen::MatrixXd inv_sqrt_sigma);
  /// M = S^{-1/2} with S the sample covariance of the rows of `data`.
  static ScoreFunction gaussian_plugin_from_data(const Eigen::MatrixXd& data);

  Kind kind() const noexcept { return kind_; }
  const Eigen::MatrixXd& matrix() const noexcept { return matrix_; }
  std::string name() const;

  Eigen::VectorXd apply(const Eigen::Ref<const Eigen::VectorXd>& y) const;

 private:
  Kind kind_ = Kind::Identity;
  Eigen::MatrixXd matrix_;
};

/// The fixed rank vectors h_1..h_n (rows of `points`) together with the group
/// they are paired with. Construction validates that every point lies in the
/// group's fundamental domain and that no two points share an orbit.
class ReferenceSet {
 public:
  ReferenceSet(SymmetryGroup group, ErdKind erd, Eigen::MatrixXd points,
               ScoreFunction score = ScoreFunction::identity(), Construction construction = {});

  const SymmetryGroup& group() const noexcept { return group_; }
  ErdKind erd() const noexcept { return erd_; }
  const Eigen::MatrixXd& points() const noexcept { return points_; }
  const ScoreFunction& score() const noexcept { return score_; }
  const Construction& construction() const noexcept { return construction_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.rows()); }
  int dim() const noexcept { return static_cast<int>(points_.cols()); }

  ReferenceSet with_score(ScoreFunction score) const;

 private:
  SymmetryGroup group_;
  ErdKind erd_;
  Eigen::MatrixXd points_;
  ScoreFunction score_;
  Construction construction_;
};

/// Radical inverse of `index` (>= 1) in a prime `base`.
double halton(std::uint64_t index, unsigned base);

/// The first `count` primes, used as Halton bases per coordinate.
std::vector<unsigned> first_primes(int count);

/// Throws Error(IncompatibleERD) for pairs that cannot be realized.
void check_compatible(const SymmetryGroup& group, ErdKind erd);

/// Builds n reference points for (group, erd). RandomSample draws from the
/// reference law once using `seed`; Halton transforms the first n points of
/// the Halton sequence (index starts at 1).
ReferenceSet build_reference(const SymmetryGroup& group, ErdKind erd, std::size_t n,
                             ConstructionKind construction, std::uint64_t seed = 0);

/// Analytic covariance of the ERD under the identity score.
Eigen::MatrixXd erd_covariance(ErdKind erd, int dim);

/// Analytic covariance of S J(H) for the reference's score: M Sigma M^T for
/// the Gaussian plug-in, Sigma otherwise.
Eigen::MatrixXd erd_covariance(const ReferenceSet& ref);

/// Finite-n version: (1/n) sum_i E_S[S J(h_i) J(h_i)^T S^T].
Eigen::MatrixXd empirical_erd_covariance(const ReferenceSet& ref);

/// Canonical representative of x's orbit; equals x for points in the
/// fundamental domain used by build_reference.
Eigen::VectorXd fold_to_domain(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x);

/// CSV with optional "# key=value" metadata lines and header h1..hp.
void write_reference_csv(std::ostream& out, const ReferenceSet& ref);

/// Reads a reference file. Metadata lines written by write_reference_csv
/// restore the ERD and construction; otherwise `erd` is used and the
/// construction is marked Explicit.
ReferenceSet read_reference_csv(std::istream& in, const SymmetryGroup& group, ErdKind erd);

}  // namespace otsym
