#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "otsym/reference.hpp"
#include "otsym/stats.hpp"

namespace otsym {

/// A named data-generating process. Every scenario adds lambda * 1_p to its
/// draws; for the shift families this is the usual shift size, for the others
/// it defaults to 0. `sigma` is the Epanechnikov marginal standard deviation.
struct ScenarioSpec {
  std::string name;
  std::size_t n = 0;
  int p = 2;
  double lambda = 0.0;
  double sigma = 1.0;
};

/// Defaults n and p from the scenario definition; n_override > 0 replaces n.
/// Accepts C1..C10, S1..S10, Sp1..Sp10, EpanechnikovShift and GaussShift.
ScenarioSpec make_scenario(const std::string& name, double lambda = 0.0, std::size_t n_override = 0);

std::vector<std::string> scenario_names();

/// The symmetry a scenario family is tested for: C -> central, S -> sign,
/// Sp -> spherical. The two ARE laws default to central.
SymmetryGroup scenario_group(const ScenarioSpec& spec);

Eigen::MatrixXd generate(const ScenarioSpec& spec, Rng& rng);

/// Inverse CDF of the Epanechnikov law with variance sigma^2, supported on
/// |x| <= sqrt(5) sigma. Newton iterations to |F(x) - u| <= 1e-10.
double epanechnikov_quantile(double u, double sigma);

struct MethodSpec {
  TestKind kind = TestKind::GWSR;
  ErdKind erd = ErdKind::Gaussian;
  ConstructionKind construction = ConstructionKind::RandomSample;
  ScoreFunction::Kind score = ScoreFunction::Kind::Identity;
  Calibration calibration = Calibration::asymptotic();

  std::string label() const;
};

/// Asymptotic calibration for p <= 2 and exact with B = 1000 otherwise.
Calibration default_power_calibration(int p);

struct PowerResult {
  ScenarioSpec scenario;
  std::string method;
  std::size_t replications = 0;
  std::size_t rejections = 0;
  double power = 0.0;
  double std_error = 0.0;
};

/// Each replication draws fresh data (and, for random sampling, a fresh
/// reference) and runs every method on the same data. Halton references and
/// their nulls are built once and reused. Results are bit-identical for a
/// given (spec, methods, replications, seed) regardless of thread count.
std::vector<PowerResult> power_study(const ScenarioSpec& spec, const SymmetryGroup& group,
                                     const std::vector<MethodSpec>& methods, std::size_t replications,
                                     double alpha, std::uint64_t seed, unsigned threads = 0);

struct AreResult {
  PowerResult gwsr;
  PowerResult hotelling;
  std::size_t n_full = 0;
  std::size_t n_reduced = 0;
  double difference = 0.0;  // power_gwsr - power_hotelling
};

/// GWSR with `erd` on n_full draws of `law` against Hotelling's T^2 on
/// round(ratio * n_full) draws, both asymptotically calibrated, with a fresh
/// random reference in each replication.
AreResult are_check(const ScenarioSpec& law, const SymmetryGroup& group, ErdKind erd, std::size_t n_full,
                    double efficiency_ratio, std::size_t replications, double alpha, std::uint64_t seed,
                    unsigned threads = 0);

/// scenario,method,lambda,power,stderr,reps
void write_power_csv(std::ostream& out, const std::vector<PowerResult>& results, bool header = true);
nlohmann::json to_json(const PowerResult& result);
nlohmann::json to_json(const AreResult& result);

}  // namespace otsym
