// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero when any fails. Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "otsym/confset.hpp"
#include "otsym/group.hpp"
#include "otsym/reference.hpp"
#include "otsym/signedrank.hpp"
#include "otsym/simulate.hpp"
#include "otsym/stats.hpp"
#include "otsym/transport.hpp"

using namespace otsym;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

Eigen::MatrixXd gaussian(int n, int p, Rng& rng) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) x(i, k) = standard_normal(rng);
  return x;
}

Eigen::MatrixXd multivariate_t1(int n, int p, Rng& rng) {
  Eigen::MatrixXd x = gaussian(n, p, rng);
  for (int i = 0; i < n; ++i) {
    const double z = standard_normal(rng);
    x.row(i) /= std::abs(z);
  }
  return x;
}

SymmetryGroup quarter_turns() {
  Eigen::Matrix2d r;
  r << 0, -1, 1, 0;
  return SymmetryGroup::finite({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd(r), Eigen::MatrixXd(r * r),
                                Eigen::MatrixXd(r * r * r)});
}

// 1. solve_lap against exhaustive search.
Outcome assignment_oracle() {
  const auto start = Clock::now();
  Rng rng = make_rng(1, Stream::Scenario);
  const std::vector<SymmetryGroup> groups{SymmetryGroup::central(3), SymmetryGroup::sign_change(3),
                                          SymmetryGroup::spherical(3), quarter_turns()};
  int bad = 0, instances = 0;
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const auto& g = groups[t % groups.size()];
    const int n = 2 + (t / 4) % 6;
    const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::RandomSample, 1000 + t);
    const CostMatrix c = build_cost_matrix(g, gaussian(n, g.dim(), rng), ref.points());
    const double lap = solve_lap(c).total_cost;
    const double bf = brute_force_lap(c).best.total_cost;
    const double rel = std::abs(lap - bf) / std::max(bf, 1e-300);
    worst = std::max(worst, rel);
    bad += rel > 1e-9;
    ++instances;
  }
  const double secs = seconds_since(start);
  return {bad == 0 && secs < 10.0,
          fmt("%d/%d instances disagree, worst rel %.2e, %.2f s (limit 10 s)", bad, instances, worst, secs)};
}

// 2. Spherical fast path.
Outcome spherical_fast_path() {
  Rng rng = make_rng(2, Stream::Scenario);
  int bad = 0;
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng() % 200);
    const int p = 1 + static_cast<int>(rng() % 5);
    const auto g = SymmetryGroup::spherical(p);
    const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::RandomSample, t);
    const Eigen::MatrixXd x = gaussian(n, p, rng);
    const double lap = solve_lap(build_cost_matrix(g, x, ref.points())).total_cost;
    const double fast = solve_spherical(x, ref.points()).total_cost;
    bad += std::abs(lap - fast) > 1e-9 * std::max(lap, 1e-300);
  }
  const int big = 100000;
  const auto ref = build_reference(SymmetryGroup::spherical(3), ErdKind::Gaussian, big, ConstructionKind::Halton);
  const Eigen::MatrixXd x = gaussian(big, 3, rng);
  const auto start = Clock::now();
  const Assignment a = solve_spherical(x, ref.points());
  const double secs = seconds_since(start);
  return {bad == 0 && secs < 1.0 && a.ref_of_data.size() == std::size_t(big),
          fmt("%d/200 mismatches; n=1e5 in %.3f s (limit 1 s)", bad, secs)};
}

// 3. p = 1 reduces to the classical Wilcoxon signed-rank test.
Outcome classical_reduction() {
  const int n = 12;
  Eigen::MatrixXd h(n, 1);
  for (int j = 0; j < n; ++j) h(j, 0) = (j + 1.0) / n;
  const ReferenceSet ref(SymmetryGroup::central(1), ErdKind::Uniform, h);
  Rng rng = make_rng(3, Stream::Scenario);
  double worst = 0.0;
  bool ranks_ok = true;
  for (int d = 0; d < 20; ++d) {
    Eigen::MatrixXd x = gaussian(n, 1, rng);
    x.array() += 0.08 * d;
    const Decomposition dec = decompose(x, ref, d);
    for (int i = 0; i < n; ++i) {
      int rank = 1;
      for (int k = 0; k < n; ++k) rank += std::abs(x(k, 0)) < std::abs(x(i, 0));
      ranks_ok = ranks_ok && dec.ranks(i, 0) == rank / double(n) &&
                 dec.signs[i].central_sign() == (x(i, 0) > 0 ? 1 : -1);
    }
    const TestReport r = run_test(x, ref, TestKind::GWSR, 0.05, Calibration::exact(100000), 300 + d);
    std::vector<double> xs(x.data(), x.data() + n);
    worst = std::max(worst, std::abs(*r.p_exact - oracle::wilcoxon_exact_p(xs)));
  }
  return {ranks_ok && worst <= 0.01,
          fmt("classical ranks/signs %s; max |p_gwsr - p_wilcoxon| = %.4f (limit 0.01)", ranks_ok ? "match" : "DIFFER",
              worst)};
}

// 4. Distribution-freeness of W_n and uniform permutations.
Outcome distribution_freeness() {
  const int n = 50, draws = 10000;
  const auto g = SymmetryGroup::central(2);
  const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::Halton);
  Rng rng = make_rng(4, Stream::Scenario);
  std::vector<double> gauss, heavy;
  for (int t = 0; t < draws; ++t) {
    gauss.push_back(gwsr_statistic(decompose(gaussian(n, 2, rng), ref, t), ref).scalar);
    heavy.push_back(gwsr_statistic(decompose(multivariate_t1(n, 2, rng), ref, t), ref).scalar);
  }
  const double p_ks = oracle::ks_two_sample_p(gauss, heavy);

  const auto ref4 = build_reference(g, ErdKind::Gaussian, 4, ConstructionKind::Halton);
  std::map<std::vector<int>, long> freq;
  for (int t = 0; t < 200000; ++t) ++freq[solve_lap(build_cost_matrix(g, gaussian(4, 2, rng), ref4.points())).ref_of_data];
  std::vector<long> counts;
  for (const auto& [perm, c] : freq) counts.push_back(c);
  const double p_chi = freq.size() == 24 ? oracle::chi2_uniform_p(counts) : 0.0;
  return {p_ks > 0.001 && p_chi > 0.001,
          fmt("KS N(0,I) vs t1 p = %.4f; permutation chi-square p = %.4f over %zu cells (level 0.001)", p_ks, p_chi,
              freq.size())};
}

// 5. Asymptotic size at n = 500.
Outcome asymptotic_calibration() {
  std::string detail;
  bool pass = true;
  for (const char* name : {"C1", "S1", "Sp1"}) {
    const ScenarioSpec spec = make_scenario(name, 0.0, 500);
    MethodSpec m;
    m.calibration = Calibration::asymptotic();
    const auto r = power_study(spec, scenario_group(spec), {m}, 10000, 0.05, 5);
    const double rate = r[0].power;
    pass = pass && rate >= 0.04 && rate <= 0.06;
    detail += fmt("%s %s %.4f; ", name, scenario_group(spec).name().c_str(), rate);
  }
  return {pass, detail + "band [0.04, 0.06]"};
}

// 6. Power table cells.
Outcome power_tables() {
  struct Cell {
    const char* scenario;
    double lambda;
    TestKind kind;
    double target;
  };
  const std::vector<Cell> cells{{"C1", 0.2, TestKind::GWSR, 0.46},
                                {"C2", 0.4, TestKind::GeneralizedSign, 0.54},
                                {"C2", 0.4, TestKind::HotellingT2, 0.04},
                                {"S3", 0.1, TestKind::GWSR, 0.97},
                                {"Sp1", 0.1, TestKind::GWSR, 0.42}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cells) {
    const ScenarioSpec spec = make_scenario(c.scenario, c.lambda);
    MethodSpec m;
    m.kind = c.kind;
    m.calibration = default_power_calibration(spec.p);
    const auto r = power_study(spec, scenario_group(spec), {m}, 2000, 0.05, 6);
    const bool ok = std::abs(r[0].power - c.target) <= 0.04;
    pass = pass && ok;
    detail += fmt("%s/%.2f %s %.3f vs %.2f%s; ", c.scenario, c.lambda, to_string(c.kind).c_str(), r[0].power, c.target,
                  ok ? "" : " (off)");
  }
  return {pass, detail + "tolerance 0.04"};
}

// 7. Efficiency comparisons against Hotelling.
Outcome are_checks() {
  struct Case {
    const char* label;
    const char* law;
    double lambda;
    ErdKind erd;
    std::size_t n;
    double ratio;
  };
  const std::vector<Case> cases{{"a", "EpanechnikovShift", 0.05, ErdKind::Uniform, 1000, 0.864},
                                {"b", "GaussShift", 0.1, ErdKind::Gaussian, 300, 1.0},
                                {"c", "GaussShift", 0.1, ErdKind::Uniform, 300, 3.0 / std::numbers::pi}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const auto r = are_check(make_scenario(c.law, c.lambda), SymmetryGroup::central(2), c.erd, c.n, c.ratio, 10000,
                             0.05, 7);
    const bool ok = std::abs(r.difference) <= 0.03;
    pass = pass && ok;
    detail += fmt("(%s) gwsr %.4f @%zu vs T2 %.4f @%zu, diff %.4f; ", c.label, r.gwsr.power, r.n_full,
                  r.hotelling.power, r.n_reduced, r.difference);
  }
  return {pass, detail + "limit 0.03"};
}

// 8. Signed-ranks approach the population map.
Outcome population_map() {
  Eigen::Matrix2d sigma;
  sigma << 2, 1, 1, 3;
  const Eigen::Matrix2d chol = sigma.llt().matrixL();
  const auto g = SymmetryGroup::central(2);
  Rng rng = make_rng(8, Stream::Scenario);
  std::vector<double> gaps;
  for (int n : {100, 400, 1600}) {
    const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::Halton);
    double total = 0.0;
    for (int r = 0; r < 20; ++r) {
      const Eigen::MatrixXd x = gaussian(n, 2, rng) * chol.transpose();
      const Decomposition d = decompose(x, ref, r);
      double gap = 0.0;
      for (int i = 0; i < n; ++i)
        gap += (d.signed_ranks.row(i).transpose() - population_map_gaussian_oracle(x.row(i).transpose(), sigma))
                   .squaredNorm();
      total += gap / n;
    }
    gaps.push_back(total / 20);
  }
  return {gaps[0] > gaps[1] && gaps[1] > gaps[2],
          fmt("mean squared gap %.5f (n=100) > %.5f (n=400) > %.5f (n=1600)", gaps[0], gaps[1], gaps[2])};
}

// Grid around the coordinatewise median, widened until the set is interior.
ConfidenceSet robust_grid_set(const Eigen::MatrixXd& x, const ConfidenceSetOptions& o) {
  Eigen::Vector2d center, scale;
  for (int k = 0; k < 2; ++k) {
    std::vector<double> v(x.col(k).data(), x.col(k).data() + x.rows());
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    center(k) = v[v.size() / 2];
    for (double& e : v) e = std::abs(e - center(k));
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    scale(k) = 1.4826 * v[v.size() / 2];
  }
  double width = 1.5 * scale.maxCoeff();
  for (;;) {
    GridSpec grid;
    grid.lower = center.array() - width;
    grid.upper = center.array() + width;
    grid.points_per_axis = 41;
    ConfidenceSet set = confidence_grid(x, SymmetryGroup::central(2), grid, o);
    if (!set.touches_boundary() || width > 1e6) return set;
    width *= 2.0;
  }
}

// 9. Coverage and size of inverted sets.
Outcome confidence_sets() {
  const auto g = SymmetryGroup::central(2);
  const Eigen::Vector2d truth(0.5, 0.5);
  int covered = 0;
  const int reps = 1000;
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(9, Stream::Replication, r);
    Eigen::MatrixXd x = gaussian(50, 2, rng);
    x.rowwise() += truth.transpose();
    ConfidenceSetOptions o;
    o.seed = derive_seed(9, Stream::Replication, r);
    const ConfidenceSet set = confidence_grid(x, g, default_grid(x), o);
    covered += set.contains(truth);
  }
  int smaller = 0, empty = 0;
  const int heavy_reps = 200;
  for (int r = 0; r < heavy_reps; ++r) {
    Rng rng = make_rng(10, Stream::Replication, r);
    const Eigen::MatrixXd x = multivariate_t1(50, 2, rng);
    ConfidenceSetOptions o;
    o.seed = derive_seed(10, Stream::Replication, r);
    const ConfidenceSet set = robust_grid_set(x, o);
    if (set.empty()) {
      ++empty;
      continue;
    }
    smaller += set.area() < hotelling_ellipse_area(x, 0.05);
  }
  const double coverage = covered / double(reps);
  const double beat = smaller / double(heavy_reps);
  return {coverage >= 0.93 && beat >= 0.90,
          fmt("Gaussian coverage %.3f (>= 0.93); t1 GWSR area < Hotelling in %.3f of reps (>= 0.90), %d empty", coverage,
              beat, empty)};
}

// 10. Empirical ERD covariance. Gated on the default Halton construction; a
// random draw of 5000 points has sampling sd near 0.02 on the diagonal, so it
// is reported but not gated.
Outcome erd_covariance_check() {
  const int p = 2, n = 5000;
  bool pass = true;
  std::string detail;
  for (auto erd : {ErdKind::Gaussian, ErdKind::Uniform, ErdKind::SphericalUniform}) {
    double worst = 0.0, worst_random = 0.0;
    for (const auto& g : {SymmetryGroup::central(p), SymmetryGroup::sign_change(p), SymmetryGroup::spherical(p)}) {
      if (g.kind() == GroupKind::Spherical && erd == ErdKind::Uniform) continue;
      const Eigen::MatrixXd target = erd_covariance(erd, p);
      const auto halton = build_reference(g, erd, n, ConstructionKind::Halton);
      worst = std::max(worst, (empirical_erd_covariance(halton) - target).cwiseAbs().maxCoeff());
      const auto random = build_reference(g, erd, n, ConstructionKind::RandomSample, 10);
      worst_random = std::max(worst_random, (empirical_erd_covariance(random) - target).cwiseAbs().maxCoeff());
    }
    pass = pass && worst <= 0.02;
    detail += fmt("%s %.4f (random %.4f); ", to_string(erd).c_str(), worst, worst_random);
  }
  return {pass, detail + "limit 0.02"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"assignment oracle equivalence", assignment_oracle},
      {"spherical fast path", spherical_fast_path},
      {"classical Wilcoxon reduction", classical_reduction},
      {"distribution-freeness", distribution_freeness},
      {"asymptotic calibration", asymptotic_calibration},
      {"power table reproduction", power_tables},
      {"ARE checks", are_checks},
      {"population-map convergence", population_map},
      {"confidence-set coverage", confidence_sets},
      {"ERD covariance", erd_covariance_check},
  };
  std::set<int> selected;
  for (int a = 1; a < argc; ++a) selected.insert(std::atoi(argv[a]));
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[k].first,
                o.detail.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
