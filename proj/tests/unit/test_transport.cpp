#include <map>
#include <numeric>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "otsym/error.hpp"
#include "otsym/reference.hpp"
#include "otsym/rng.hpp"
#include "otsym/signedrank.hpp"
#include "otsym/transport.hpp"

using namespace otsym;

namespace {

CostMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  RowMatrix m(n, n);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return CostMatrix(m);
}

Eigen::MatrixXd gaussian(int n, int p, Rng& rng, double scale = 1.0) {
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < p; ++k) x(i, k) = scale * standard_normal(rng);
  return x;
}

SymmetryGroup quarter_turns() {
  Eigen::Matrix2d r;
  r << 0, -1, 1, 0;
  return SymmetryGroup::finite({Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd(r), Eigen::MatrixXd(r * r),
                                Eigen::MatrixXd(r * r * r)});
}

}  // namespace

TEST(SolveLap, ZeroDiagonal) {
  const Assignment a = solve_lap(matrix({{0, 5}, {5, 0}}));
  EXPECT_EQ(a.ref_of_data, (std::vector<int>{0, 1}));
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(SolveLap, ThreeByThree) {
  const CostMatrix c = matrix({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  const Assignment a = solve_lap(c);
  EXPECT_EQ(a.ref_of_data, (std::vector<int>{1, 0, 2}));
  EXPECT_DOUBLE_EQ(a.total_cost, 5.0);
  EXPECT_DOUBLE_EQ(oracle::brute_lap(c.values()).cost, 5.0);
  EXPECT_TRUE(verify_dual_certificate(c, a));
}

TEST(SolveLap, OneByOne) {
  const Assignment a = solve_lap(matrix({{2.5}}));
  EXPECT_EQ(a.total_cost, 2.5);
  EXPECT_EQ(brute_force_lap(matrix({{2.5}})).best.total_cost, 2.5);
}

TEST(SolveLap, RejectsBadCosts) {
  RowMatrix m = RowMatrix::Ones(2, 2);
  m(0, 1) = std::numeric_limits<double>::infinity();
  try {
    CostMatrix c(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteCost);
  }
  EXPECT_THROW(CostMatrix(RowMatrix::Ones(2, 3)), Error);
}

TEST(SolveLap, PermutedInstanceKeepsCost) {
  Rng rng = make_rng(1, Stream::Scenario);
  RowMatrix m(8, 8);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform_open01(rng);
  const Assignment a = solve_lap(CostMatrix(m));
  std::vector<int> perm(8);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  RowMatrix shuffled(8, 8);
  for (int i = 0; i < 8; ++i) shuffled.row(i) = m.row(perm[i]);
  EXPECT_NEAR(solve_lap(CostMatrix(shuffled)).total_cost, a.total_cost, 1e-12);
}

TEST(BruteForce, TiesReportAllMinimizers) {
  const BruteForceResult r = brute_force_lap(matrix({{1, 1}, {1, 1}}));
  EXPECT_TRUE(r.best.tie_flag);
  EXPECT_EQ(r.minimizers.size(), 2u);
  EXPECT_TRUE(solve_lap(matrix({{1, 1}, {1, 1}})).tie_flag);
}

TEST(BruteForce, TooLarge) {
  try {
    brute_force_lap(CostMatrix(RowMatrix::Ones(10, 10)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooLarge);
  }
}

TEST(BruteForce, MatchesSolverOnSevenBySeven) {
  Rng rng = make_rng(2, Stream::Scenario);
  for (int t = 0; t < 200; ++t) {
    RowMatrix m(7, 7);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform_open01(rng) * 10;
    const CostMatrix c(m);
    const auto bf = brute_force_lap(c);
    EXPECT_EQ(bf.best.total_cost, oracle::brute_lap(c.values()).cost);
    EXPECT_NEAR(solve_lap(c).total_cost, bf.best.total_cost, 1e-9 * bf.best.total_cost);
  }
}

TEST(SolveLap, OracleEquivalenceOnOrbitCosts) {
  Rng rng = make_rng(3, Stream::Scenario);
  const std::vector<SymmetryGroup> groups{SymmetryGroup::central(2), SymmetryGroup::sign_change(2),
                                          SymmetryGroup::spherical(2), quarter_turns()};
  for (const auto& g : groups) {
    for (int n = 2; n <= 7; ++n) {
      for (int t = 0; t < 20; ++t) {
        const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::RandomSample, 100 * n + t);
        const Eigen::MatrixXd x = gaussian(n, 2, rng);
        const CostMatrix c = build_cost_matrix(g, x, ref.points());
        const Assignment a = solve_lap(c);
        const auto bf = oracle::brute_lap(c.values());
        EXPECT_NEAR(a.total_cost, bf.cost, 1e-9 * std::max(1.0, bf.cost));
        EXPECT_TRUE(verify_dual_certificate(c, a));
        if (!a.tie_flag) EXPECT_EQ(a.ref_of_data, bf.perm);
      }
    }
  }
}

TEST(SolveLap, CostMatrixMatchesOrbitCost) {
  Rng rng = make_rng(4, Stream::Scenario);
  for (const auto& g : {SymmetryGroup::central(3), SymmetryGroup::sign_change(3), SymmetryGroup::spherical(3)}) {
    const Eigen::MatrixXd x = gaussian(5, 3, rng);
    const Eigen::MatrixXd h = gaussian(5, 3, rng);
    const CostMatrix c = build_cost_matrix(g, x, h);
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        EXPECT_NEAR(c(i, j), orbit_cost(g, x.row(i).transpose(), h.row(j).transpose()), 1e-10);
  }
  const auto g = quarter_turns();
  const Eigen::MatrixXd x = gaussian(4, 2, rng);
  const Eigen::MatrixXd h = gaussian(4, 2, rng);
  const CostMatrix c = build_cost_matrix(g, x, h);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(c(i, j), orbit_cost(g, x.row(i).transpose(), h.row(j).transpose()), 1e-10);
}

// The candidate-graph path against an independent Hungarian implementation.
TEST(SolveLap, SparseMatchesHungarian) {
  Rng rng = make_rng(5, Stream::Scenario);
  for (const auto& g : {SymmetryGroup::central(2), SymmetryGroup::sign_change(2), SymmetryGroup::central(5)}) {
    for (int n : {70, 150, 300}) {
      const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::RandomSample, n);
      Eigen::MatrixXd x = gaussian(n, g.dim(), rng);
      x.array() += 0.2;
      const CostMatrix c = build_cost_matrix(g, x, ref.points());
      const double h = oracle::hungarian(c.values());
      for (int k : {4, 32}) {
        const Assignment a = solve_lap_sparse(c, k);
        EXPECT_NEAR(a.total_cost, h, 1e-9 * h) << g.name() << " n=" << n << " k=" << k;
        EXPECT_TRUE(verify_dual_certificate(c, a));
      }
      EXPECT_NEAR(solve_lap_dense(c).total_cost, h, 1e-9 * h);
    }
  }
}

TEST(SolveLap, SparseOnUniformCosts) {
  Rng rng = make_rng(6, Stream::Scenario);
  RowMatrix m(120, 120);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = uniform_open01(rng);
  const CostMatrix c(m);
  EXPECT_NEAR(solve_lap_sparse(c, 3).total_cost, oracle::hungarian(c.values()), 1e-9);
}

TEST(Spherical, MatchesNormRanks) {
  Eigen::MatrixXd x(3, 2), h(3, 2);
  x << 3, 4, 1, 0, 0, 3;  // norms 5, 1, 3
  h << 0.5, 0, 1.0, 0, 1.5, 0;
  const Assignment a = solve_spherical(x, h);
  EXPECT_EQ(a.ref_of_data, (std::vector<int>{2, 0, 1}));
}

TEST(Spherical, SinglePair) {
  Eigen::MatrixXd x(1, 2), h(1, 2);
  x << 1, 1;
  h << 2, 0;
  const Assignment a = solve_spherical(x, h);
  EXPECT_EQ(a.ref_of_data, std::vector<int>{0});
  EXPECT_NEAR(a.total_cost, std::pow(std::sqrt(2.0) - 2.0, 2), 1e-12);
}

TEST(Spherical, DuplicateNorms) {
  Eigen::MatrixXd x(2, 2), h(2, 2);
  x << 1, 0, 2, 0;
  h << 1, 0, 1, 0;
  try {
    solve_spherical(x, h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateNorms);
  }
}

TEST(Spherical, AgreesWithGeneralSolver) {
  Rng rng = make_rng(7, Stream::Scenario);
  for (int t = 0; t < 40; ++t) {
    const int n = 6 + 5 * t;
    const int p = 1 + t % 5;
    const auto g = SymmetryGroup::spherical(p);
    const auto ref = build_reference(g, ErdKind::Gaussian, n, ConstructionKind::RandomSample, t);
    const Eigen::MatrixXd x = gaussian(n, p, rng);
    const double lap = solve_lap(build_cost_matrix(g, x, ref.points())).total_cost;
    EXPECT_NEAR(solve_spherical(x, ref.points()).total_cost, lap, 1e-9 * lap);
  }
}

// Under H0 the assignment permutation is uniform over S_4.
TEST(SolveLap, PermutationUniformUnderNull) {
  const auto g = SymmetryGroup::central(2);
  const auto ref = build_reference(g, ErdKind::Gaussian, 4, ConstructionKind::Halton);
  Rng rng = make_rng(8, Stream::Scenario);
  std::map<std::vector<int>, long> freq;
  for (int t = 0; t < 200000; ++t) {
    const Eigen::MatrixXd x = gaussian(4, 2, rng);
    ++freq[solve_lap(build_cost_matrix(g, x, ref.points())).ref_of_data];
  }
  ASSERT_EQ(freq.size(), 24u);
  std::vector<long> counts;
  for (const auto& [perm, c] : freq) counts.push_back(c);
  EXPECT_GT(oracle::chi2_uniform_p(counts), 0.001);
}
