#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "otsym/error.hpp"
#include "otsym/linalg.hpp"
#include "otsym/simulate.hpp"

using namespace otsym;

namespace {

Eigen::MatrixXd draw(const std::string& name, std::size_t n, std::uint64_t seed, double lambda = 0.0) {
  Rng rng = make_rng(seed, Stream::Scenario);
  return generate(make_scenario(name, lambda, n), rng);
}

}  // namespace

TEST(Scenario, C1MomentsAtNullShift) {
  const Eigen::MatrixXd x = draw("C1", 100000, 1);
  const Eigen::Vector2d mean = x.colwise().mean();
  Eigen::Matrix2d sigma;
  sigma << 2, 1, 1, 3;
  for (int k = 0; k < 2; ++k) EXPECT_LE(std::abs(mean(k)), 3 * std::sqrt(sigma(k, k) / 1e5));
  EXPECT_LE((sample_covariance(x) - sigma).cwiseAbs().maxCoeff(), 0.05);
}

TEST(Scenario, ShiftAddsLambda) {
  const Eigen::MatrixXd a = draw("C1", 50, 2);
  const Eigen::MatrixXd b = draw("C1", 50, 2, 0.3);
  EXPECT_TRUE((b.array() - a.array() - 0.3).abs().maxCoeff() < 1e-12);
}

TEST(Scenario, EpanechnikovSupportAndVariance) {
  const double sigma = 1.0 / std::sqrt(5.0);
  Rng rng = make_rng(3, Stream::Scenario);
  std::vector<double> v(100000);
  for (double& e : v) e = epanechnikov_quantile(uniform_open01(rng), sigma);
  double m = 0, s = 0;
  for (double e : v) {
    EXPECT_LE(std::abs(e), 1.0);
    m += e;
  }
  m /= v.size();
  for (double e : v) s += (e - m) * (e - m);
  EXPECT_NEAR(s / (v.size() - 1), 0.2, 0.01);
}

TEST(Scenario, EpanechnikovQuantileInvertsCdf) {
  const double sigma = 0.7;
  const double a = std::sqrt(5.0) * sigma;
  auto cdf = [&](double x) { return 0.5 + 3.0 / (20.0 * std::sqrt(5.0) * sigma * sigma * sigma) * (5 * sigma * sigma * x - x * x * x / 3.0); };
  for (double u : {0.001, 0.2, 0.5, 0.9, 0.999}) {
    const double q = epanechnikov_quantile(u, sigma);
    EXPECT_LE(std::abs(q), a);
    EXPECT_NEAR(cdf(q), u, 1e-10);
  }
}

TEST(Scenario, C8Autoregressive) {
  const Eigen::MatrixXd x = draw("C8", 100000, 4);
  const Eigen::MatrixXd s = sample_covariance(x);
  double var = 1.0;
  for (int k = 0; k < x.cols(); ++k) {
    EXPECT_NEAR(s(k, k), var, 0.05) << k;
    if (k + 1 < x.cols()) EXPECT_NEAR(s(k, k + 1), 0.5 * var, 0.05);
    var = 0.25 * var + 1.0;
  }
}

TEST(Scenario, AllNamesGenerate) {
  for (const auto& name : scenario_names()) {
    const ScenarioSpec spec = make_scenario(name, 0.1, 20);
    Rng rng = make_rng(5, Stream::Scenario);
    const Eigen::MatrixXd x = generate(spec, rng);
    EXPECT_EQ(x.rows(), 20);
    EXPECT_EQ(x.cols(), spec.p);
    EXPECT_TRUE(x.allFinite()) << name;
  }
}

TEST(Scenario, GroupsByFamily) {
  EXPECT_EQ(scenario_group(make_scenario("C3")).kind(), GroupKind::Central);
  EXPECT_EQ(scenario_group(make_scenario("S3")).kind(), GroupKind::SignChange);
  EXPECT_EQ(scenario_group(make_scenario("Sp3")).kind(), GroupKind::Spherical);
}

TEST(Scenario, Unknown) {
  try {
    make_scenario("Q9");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownScenario);
  }
}

TEST(Power, ReproducibleAndThreadFree) {
  const ScenarioSpec spec = make_scenario("C1", 0.2, 60);
  const std::vector<MethodSpec> methods{{TestKind::GWSR}, {TestKind::HotellingT2}};
  const auto a = power_study(spec, scenario_group(spec), methods, 100, 0.05, 3, 1);
  const auto b = power_study(spec, scenario_group(spec), methods, 100, 0.05, 3, 4);
  ASSERT_EQ(a.size(), 2u);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_EQ(a[k].rejections, b[k].rejections);
    EXPECT_EQ(a[k].power, b[k].power);
    EXPECT_DOUBLE_EQ(a[k].std_error, std::sqrt(a[k].power * (1 - a[k].power) / 100));
  }
}

TEST(Power, CsvSchema) {
  const ScenarioSpec spec = make_scenario("S1", 0.1, 30);
  const auto r = power_study(spec, scenario_group(spec), {MethodSpec{}}, 100, 0.05, 1);
  std::stringstream ss;
  write_power_csv(ss, r);
  std::string header;
  std::getline(ss, header);
  EXPECT_EQ(header, "scenario,method,lambda,power,stderr,reps");
}

TEST(Power, DefaultCalibration) {
  EXPECT_EQ(default_power_calibration(2).kind, Calibration::Kind::Asymptotic);
  EXPECT_EQ(default_power_calibration(50).kind, Calibration::Kind::Exact);
  EXPECT_EQ(default_power_calibration(50).replications, 1000);
}

TEST(Power, C1Shift) {
  const ScenarioSpec spec = make_scenario("C1", 0.3);
  const auto r = power_study(spec, scenario_group(spec), {MethodSpec{}}, 2000, 0.05, 1);
  EXPECT_NEAR(r[0].power, 0.82, 0.04);
}

TEST(Are, ReducedSampleSize) {
  const auto r = are_check(make_scenario("GaussShift", 0.1), SymmetryGroup::central(2), ErdKind::Uniform, 100,
                           3.0 / M_PI, 100, 0.05, 2);
  EXPECT_EQ(r.n_full, 100u);
  EXPECT_EQ(r.n_reduced, 95u);
  EXPECT_DOUBLE_EQ(r.difference, r.gwsr.power - r.hotelling.power);
  EXPECT_THROW(are_check(make_scenario("GaussShift"), SymmetryGroup::central(2), ErdKind::Uniform, 100, 1.5, 100,
                         0.05, 2),
               Error);
}
