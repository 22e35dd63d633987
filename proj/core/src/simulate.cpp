#include "otsym/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>

#include "otsym/error.hpp"
#include "otsym/io.hpp"
#include "otsym/parallel.hpp"

namespace otsym {

namespace {

struct Defaults {
  std::size_t n;
  int p;
};

const std::map<std::string, Defaults>& scenario_table() {
  static const std::map<std::string, Defaults> table = {
      {"C1", {200, 2}},  {"C2", {200, 2}},  {"C3", {200, 2}},  {"C4", {100, 2}},   {"C5", {200, 2}},
      {"C6", {100, 2}},  {"C7", {200, 2}},  {"C8", {200, 50}}, {"C9", {200, 50}},  {"C10", {200, 50}},
      {"S1", {200, 2}},  {"S2", {200, 2}},  {"S3", {200, 2}},  {"S4", {200, 2}},   {"S5", {100, 2}},
      {"S6", {100, 2}},  {"S7", {200, 2}},  {"S8", {200, 50}}, {"S9", {200, 50}},  {"S10", {200, 50}},
      {"Sp1", {200, 2}}, {"Sp2", {200, 2}}, {"Sp3", {200, 2}}, {"Sp4", {200, 2}},  {"Sp5", {200, 2}},
      {"Sp6", {1000, 2}}, {"Sp7", {100, 2}}, {"Sp8", {200, 50}}, {"Sp9", {200, 50}}, {"Sp10", {200, 50}},
      {"EpanechnikovShift", {1000, 2}}, {"GaussShift", {300, 2}},
  };
  return table;
}

Eigen::Matrix2d cov_c() { return (Eigen::Matrix2d() << 2, 1, 1, 3).finished(); }
Eigen::Matrix2d cov_s() { return (Eigen::Matrix2d() << 2, 0, 0, 3).finished(); }

double exp1(Rng& rng) { return -std::log(uniform_open01(rng)); }

Eigen::VectorXd gaussian_vector(int p, Rng& rng) {
  Eigen::VectorXd z(p);
  for (int k = 0; k < p; ++k) z(k) = standard_normal(rng);
  return z;
}

// Multivariate t with one degree of freedom: L Z / |W|.
Eigen::VectorXd cauchy_vector(const Eigen::MatrixXd& chol, Rng& rng) {
  const Eigen::VectorXd z = gaussian_vector(static_cast<int>(chol.rows()), rng);
  const double w = std::abs(standard_normal(rng));
  return chol * z / w;
}

double cauchy(Rng& rng) { return standard_normal(rng) / std::abs(standard_normal(rng)); }

Eigen::VectorXd ar1(int p, Rng& rng, bool heavy) {
  Eigen::VectorXd x(p);
  for (int k = 0; k < p; ++k) {
    const double z = heavy ? cauchy(rng) : standard_normal(rng);
    x(k) = k == 0 ? z : 0.5 * x(k - 1) + z;
  }
  return x;
}

Eigen::VectorXd draw_one(const ScenarioSpec& s, Rng& rng) {
  const int p = s.p;
  const std::string& nm = s.name;
  Eigen::VectorXd x(p);
  if (nm == "C1" || nm == "S4") {
    x = cov_c().llt().matrixL() * gaussian_vector(2, rng);
  } else if (nm == "S1") {
    x = cov_s().llt().matrixL() * gaussian_vector(2, rng);
  } else if (nm == "C2") {
    x = cauchy_vector(cov_c().llt().matrixL().toDenseMatrix(), rng);
  } else if (nm == "S2") {
    x = cauchy_vector(cov_s().llt().matrixL().toDenseMatrix(), rng);
  } else if (nm == "C3") {
    const double sgn = (rng() >> 63) ? 1.0 : -1.0;
    for (int k = 0; k < p; ++k) x(k) = sgn * uniform_open01(rng);
  } else if (nm == "S3" || nm == "Sp6") {
    for (int k = 0; k < p; ++k) x(k) = 2.0 * uniform_open01(rng) - 1.0;
  } else if (nm == "C4" || nm == "C5" || nm == "S5") {
    for (int k = 0; k < p; ++k) x(k) = exp1(rng) - 1.0;
  } else if (nm == "C6" || nm == "S6" || nm == "Sp7") {
    for (int k = 0; k < p; ++k) {
      const double z = standard_normal(rng);
      x(k) = z * z - 1.0;
    }
  } else if (nm == "C7") {
    for (int k = 0; k < p; ++k) x(k) = 1.0 / uniform_open01(rng) - 2.0;
  } else if (nm == "C8") {
    x = ar1(p, rng, false);
  } else if (nm == "C9") {
    x = ar1(p, rng, false).array() + 0.15;
  } else if (nm == "C10") {
    x = ar1(p, rng, true).array() + 0.9;
  } else if (nm == "S7") {
    for (int k = 0; k < p; ++k) x(k) = 0.2 + ((rng() >> 63) ? 1.0 : -1.0) * exp1(rng);
  } else if (nm == "S8" || nm == "S9" || nm == "S10") {
    const double w = nm == "S10" ? std::abs(standard_normal(rng)) : 1.0;
    for (int k = 0; k < p; ++k) x(k) = std::sin(static_cast<double>(k + 1)) * standard_normal(rng) / w;
    if (nm != "S8") x.array() += 0.003;
  } else if (nm == "Sp1" || nm == "Sp8" || nm == "GaussShift") {
    x = gaussian_vector(p, rng);
  } else if (nm == "Sp9") {
    x = gaussian_vector(p, rng).array() + 0.05;
  } else if (nm == "Sp2") {
    x = cauchy_vector(Eigen::MatrixXd::Identity(p, p), rng);
  } else if (nm == "Sp10") {
    x = cauchy_vector(Eigen::MatrixXd::Identity(p, p), rng).array() + 0.05;
  } else if (nm == "Sp3") {
    // uniform on the unit disk
    const double r = std::sqrt(uniform_open01(rng));
    const double a = 2.0 * std::numbers::pi * uniform_open01(rng);
    x << r * std::cos(a), r * std::sin(a);
  } else if (nm == "Sp4") {
    x << 2.0 * standard_normal(rng), standard_normal(rng);
  } else if (nm == "Sp5") {
    const Eigen::Matrix2d c = (Eigen::Matrix2d() << 1, 0.6, 0.6, 1).finished();
    x = c.llt().matrixL() * gaussian_vector(2, rng);
  } else if (nm == "EpanechnikovShift") {
    for (int k = 0; k < p; ++k) x(k) = epanechnikov_quantile(uniform_open01(rng), s.sigma);
  } else {
    throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + nm + "'");
  }
  return x.array() + s.lambda;
}

void fill_power(PowerResult& r) {
  r.power = r.replications ? static_cast<double>(r.rejections) / static_cast<double>(r.replications) : 0.0;
  r.std_error = r.replications ? std::sqrt(r.power * (1.0 - r.power) / static_cast<double>(r.replications)) : 0.0;
}

void require_replications(std::size_t reps) {
  if (reps < 1) throw Error(ErrorCode::Domain, "replications must be at least 1");
}

}  // namespace

ScenarioSpec make_scenario(const std::string& name, double lambda, std::size_t n_override) {
  const auto& table = scenario_table();
  const auto it = table.find(name);
  if (it == table.end()) throw Error(ErrorCode::UnknownScenario, "unknown scenario '" + name + "'");
  ScenarioSpec s;
  s.name = name;
  s.n = n_override > 0 ? n_override : it->second.n;
  s.p = it->second.p;
  s.lambda = lambda;
  s.sigma = name == "EpanechnikovShift" ? 1.0 / std::sqrt(5.0) : 1.0;
  return s;
}

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const char* family : {"C", "S", "Sp"})
    for (int k = 1; k <= 10; ++k) out.push_back(family + std::to_string(k));
  out.push_back("EpanechnikovShift");
  out.push_back("GaussShift");
  return out;
}

SymmetryGroup scenario_group(const ScenarioSpec& spec) {
  const std::string& nm = spec.name;
  if (nm.rfind("Sp", 0) == 0) return SymmetryGroup::spherical(spec.p);
  if (nm.rfind("S", 0) == 0) return SymmetryGroup::sign_change(spec.p);
  return SymmetryGroup::central(spec.p);
}

double epanechnikov_quantile(double u, double sigma) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorCode::Domain, "epanechnikov_quantile: u must lie in (0, 1)");
  if (!(sigma > 0.0)) throw Error(ErrorCode::Domain, "epanechnikov_quantile: sigma must be positive");
  // On t = x / a the CDF is 1/2 + 3t/4 - t^3/4; the trigonometric root of the
  // cubic is an excellent start and Newton polishes it.
  const double a = std::sqrt(5.0) * sigma;
  double t = 2.0 * std::sin(std::asin(2.0 * u - 1.0) / 3.0);
  for (int it = 0; it < 20; ++it) {
    const double f = 0.5 + 0.75 * t - 0.25 * t * t * t - u;
    if (std::abs(f) <= 1e-12) break;
    const double df = 0.75 * (1.0 - t * t);
    if (df <= 1e-300) break;
    t = std::clamp(t - f / df, -1.0, 1.0);
  }
  return a * t;
}

Eigen::MatrixXd generate(const ScenarioSpec& spec, Rng& rng) {
  if (spec.n < 1) throw Error(ErrorCode::Domain, "scenario sample size must be positive");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(spec.n), spec.p);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = draw_one(spec, rng).transpose();
  return out;
}

std::string MethodSpec::label() const {
  if (kind == TestKind::HotellingT2) return "hotelling";
  std::string s = to_string(kind) + "/" + to_string(erd) + "/" + to_string(construction);
  if (score == ScoreFunction::Kind::GaussianPlugIn) s += "/plugin";
  return s;
}

Calibration default_power_calibration(int p) {
  return p <= 2 ? Calibration::asymptotic() : Calibration::exact(1000);
}

std::vector<PowerResult> power_study(const ScenarioSpec& spec, const SymmetryGroup& group,
                                     const std::vector<MethodSpec>& methods, std::size_t replications,
                                     double alpha, std::uint64_t seed, unsigned threads) {
  require_replications(replications);
  if (group.dim() != spec.p) throw Error(ErrorCode::DimensionMismatch, "group dimension differs from scenario");
  const unsigned workers = threads == 0 ? default_threads() : threads;

  // Halton references are deterministic, so they and their nulls are shared.
  std::vector<std::optional<PreparedTest>> fixed(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const MethodSpec& ms = methods[m];
    if (ms.kind == TestKind::HotellingT2 || ms.construction != ConstructionKind::Halton) continue;
    fixed[m].emplace(build_reference(group, ms.erd, spec.n, ConstructionKind::Halton), ms.kind, ms.calibration, alpha,
                     derive_seed(seed, Stream::Null), workers);
  }

  std::vector<std::vector<char>> rejected(replications, std::vector<char>(methods.size(), 0));
  parallel_for(replications, workers, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, Stream::Replication, r);
    Rng data_rng = make_rng(rep_seed, Stream::Scenario);
    const Eigen::MatrixXd data = generate(spec, data_rng);
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const MethodSpec& ms = methods[m];
      bool reject = false;
      if (ms.kind == TestKind::HotellingT2) {
        reject = run_hotelling(data, alpha, ms.calibration).reject;
      } else {
        std::optional<PreparedTest> local;
        const PreparedTest* test = fixed[m] ? &*fixed[m] : nullptr;
        if (!test) {
          // One reference per replication and ERD, shared by the methods.
          local.emplace(build_reference(group, ms.erd, spec.n, ConstructionKind::RandomSample,
                                        derive_seed(rep_seed, Stream::Reference)),
                        ms.kind, ms.calibration, alpha, rep_seed, 1);
          test = &*local;
        }
        reject = ms.score == ScoreFunction::Kind::GaussianPlugIn
                     ? test->run(data, ScoreFunction::gaussian_plugin_from_data(data)).reject
                     : test->run(data).reject;
      }
      rejected[r][m] = reject ? 1 : 0;
    }
  });

  std::vector<PowerResult> out(methods.size());
  for (std::size_t m = 0; m < methods.size(); ++m) {
    out[m].scenario = spec;
    out[m].method = methods[m].label();
    out[m].replications = replications;
    for (std::size_t r = 0; r < replications; ++r) out[m].rejections += rejected[r][m];
    fill_power(out[m]);
  }
  return out;
}

AreResult are_check(const ScenarioSpec& law, const SymmetryGroup& group, ErdKind erd, std::size_t n_full,
                    double efficiency_ratio, std::size_t replications, double alpha, std::uint64_t seed,
                    unsigned threads) {
  require_replications(replications);
  if (!(efficiency_ratio > 0.0 && efficiency_ratio <= 1.0))
    throw Error(ErrorCode::Domain, "efficiency ratio must lie in (0, 1]");
  AreResult out;
  out.n_full = n_full;
  out.n_reduced = static_cast<std::size_t>(std::llround(efficiency_ratio * static_cast<double>(n_full)));
  ScenarioSpec full = law;
  full.n = out.n_full;
  ScenarioSpec reduced = law;
  reduced.n = out.n_reduced;

  std::vector<char> gwsr(replications, 0), t2(replications, 0);
  parallel_for(replications, threads == 0 ? default_threads() : threads, [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, Stream::Replication, r);
    Rng rng_full = make_rng(rep_seed, Stream::Scenario, 0);
    Rng rng_reduced = make_rng(rep_seed, Stream::Scenario, 1);
    const Eigen::MatrixXd x_full = generate(full, rng_full);
    const Eigen::MatrixXd x_reduced = generate(reduced, rng_reduced);
    const ReferenceSet ref = build_reference(group, erd, out.n_full, ConstructionKind::RandomSample,
                                             derive_seed(rep_seed, Stream::Reference));
    gwsr[r] = PreparedTest(ref, TestKind::GWSR, Calibration::asymptotic(), alpha, rep_seed, 1).run(x_full).reject;
    t2[r] = run_hotelling(x_reduced, alpha, Calibration::asymptotic()).reject;
  });

  out.gwsr.scenario = full;
  out.gwsr.method = "gwsr/" + to_string(erd) + "/random";
  out.hotelling.scenario = reduced;
  out.hotelling.method = "hotelling";
  out.gwsr.replications = out.hotelling.replications = replications;
  for (std::size_t r = 0; r < replications; ++r) {
    out.gwsr.rejections += gwsr[r];
    out.hotelling.rejections += t2[r];
  }
  fill_power(out.gwsr);
  fill_power(out.hotelling);
  out.difference = out.gwsr.power - out.hotelling.power;
  return out;
}

void write_power_csv(std::ostream& out, const std::vector<PowerResult>& results, bool header) {
  if (header) out << "scenario,method,lambda,power,stderr,reps\n";
  for (const auto& r : results)
    out << r.scenario.name << ',' << r.method << ',' << format_sig6(r.scenario.lambda) << ','
        << format_sig6(r.power) << ',' << format_sig6(r.std_error) << ',' << r.replications << '\n';
}

nlohmann::json to_json(const PowerResult& r) {
  return {{"scenario", r.scenario.name}, {"method", r.method},       {"lambda", sig6(r.scenario.lambda)},
          {"n", r.scenario.n},           {"p", r.scenario.p},        {"power", sig6(r.power)},
          {"stderr", sig6(r.std_error)}, {"reps", r.replications},   {"rejections", r.rejections}};
}

nlohmann::json to_json(const AreResult& r) {
  return {{"gwsr", to_json(r.gwsr)},
          {"hotelling", to_json(r.hotelling)},
          {"n_full", r.n_full},
          {"n_reduced", r.n_reduced},
          {"difference", sig6(r.difference)}};
}

}  // namespace otsym
