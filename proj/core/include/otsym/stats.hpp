#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "otsym/reference.hpp"
#include "otsym/signedrank.hpp"

namespace otsym {

enum class TestKind { GeneralizedSign, GWSR, HotellingT2 };

std::string to_string(TestKind kind);
TestKind parse_test_kind(const std::string& text);

struct Calibration {
  enum class Kind { Asymptotic, Exact };
  Kind kind = Kind::Exact;
  int replications = 999;

  static Calibration asymptotic() { return {Kind::Asymptotic, 0}; }
  static Calibration exact(int b) { return {Kind::Exact, b}; }
};

std::string to_string(Calibration::Kind kind);

struct SignStatistic {
  Eigen::MatrixXd t;  // n^{-1/2} sum_i S_i
  double scalar = 0.0;
};

struct GwsrStatistic {
  Eigen::VectorXd w;  // n^{-1/2} sum_i S_i J(R_i)
  double scalar = 0.0;
};

struct HotellingResult {
  double statistic = 0.0;
  double p_asymptotic = 1.0;  // chi-square_p reference
  double p_f = 1.0;           // Gaussian-exact F(p, n - p) reference
};

/// Degrees of freedom of the chi-square limit of the calibrated sign scalar:
/// 1 (central), p (sign change), p^2 (spherical). Empty for finite groups.
std::optional<int> sign_test_df(const SymmetryGroup& group);

/// ||T||_F^2 / p, ||T||_F^2, or p ||T||_F^2 by group; ||T||_F^2 for finite groups.
double sign_scalar(const SymmetryGroup& group, const Eigen::MatrixXd& t);

SignStatistic sign_statistic(const Decomposition& d, const SymmetryGroup& group);

/// The scalar is W^T Sigma_ERD^{-1} W with the analytic Sigma_ERD of the
/// reference's ERD and score.
GwsrStatistic gwsr_statistic(const Decomposition& d, const ReferenceSet& ref);

/// T^2 = n xbar^T S^{-1} xbar with the unbiased sample covariance.
HotellingResult hotelling_t2(const Eigen::MatrixXd& data);

/// Sorted Monte-Carlo draws of the calibrated scalar under the null,
/// conditional on the reference. Deterministic in (ref, kind, B, seed) for any
/// thread count. Only the sign test and GWSR have such a null.
std::vector<double> exact_null(const ReferenceSet& ref, TestKind kind, int replications, std::uint64_t seed,
                               unsigned threads = 0);

/// (1 + #{null >= observed}) / (B + 1); `sorted_null` must be ascending.
/// Observed values within a relative 1e-9 of a null value count as ties.
double exact_p_value(const std::vector<double>& sorted_null, double observed);

struct TestReport {
  TestKind kind = TestKind::GWSR;
  double statistic = 0.0;
  /// W_n for GWSR, the flattened T_n for the sign test, xbar for Hotelling.
  Eigen::VectorXd raw;
  std::optional<double> p_asymptotic;
  std::optional<double> p_exact;
  Calibration calibration;
  double alpha = 0.05;
  bool reject = false;
  int df = 0;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  int p = 0;
  std::string group;
  std::string erd;
  std::string score;
  std::string construction;
  std::uint64_t reference_seed = 0;
  bool tie_flag = false;

  double chosen_p_value() const;
};

/// A test whose reference and Monte-Carlo null are fixed up front so that many
/// datasets can be tested against them (power studies, confidence sets).
class PreparedTest {
 public:
  PreparedTest(ReferenceSet ref, TestKind kind, Calibration calibration, double alpha, std::uint64_t seed,
               unsigned threads = 0);

  TestReport run(const Eigen::MatrixXd& data) const;
  /// Same reference and null with a different score (e.g. a plug-in score
  /// estimated from `data`).
  TestReport run(const Eigen::MatrixXd& data, const ScoreFunction& score) const;

  /// Only the statistic and decision; skips report assembly.
  bool rejects(const Eigen::MatrixXd& data) const;

  const ReferenceSet& reference() const noexcept { return ref_; }
  const std::vector<double>& null_distribution() const noexcept { return null_; }
  TestKind kind() const noexcept { return kind_; }

 private:
  ReferenceSet ref_;
  TestKind kind_;
  Calibration calibration_;
  double alpha_;
  std::uint64_t seed_;
  std::vector<double> null_;
};

/// Decomposes, computes the statistic and calibrates it. The GaussianPlugIn
/// score is honoured when set on `ref`. Hotelling ignores `ref` apart from
/// metadata; its exact p-value uses the Gaussian F law.
TestReport run_test(const Eigen::MatrixXd& data, const ReferenceSet& ref, TestKind kind, double alpha,
                    Calibration calibration, std::uint64_t seed, unsigned threads = 0);

/// Hotelling needs no reference.
TestReport run_hotelling(const Eigen::MatrixXd& data, double alpha, Calibration calibration);

/// Rounds to 6 significant digits so serialized output is stable.
double sig6(double value);

nlohmann::json to_json(const TestReport& report);

}  // namespace otsym
