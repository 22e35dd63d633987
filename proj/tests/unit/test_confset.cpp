#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "otsym/confset.hpp"
#include "otsym/error.hpp"
#include "otsym/rng.hpp"

using namespace otsym;

namespace {

Eigen::MatrixXd gaussian(int n, Rng& rng, double shift) {
  Eigen::MatrixXd x(n, 2);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 2; ++k) x(i, k) = standard_normal(rng) + shift;
  return x;
}

GridSpec square_grid(double lo, double hi, int m) {
  GridSpec g;
  g.lower = Eigen::Vector2d::Constant(lo);
  g.upper = Eigen::Vector2d::Constant(hi);
  g.points_per_axis = m;
  return g;
}

}  // namespace

TEST(Grid, NodesAndSteps) {
  const GridSpec g = square_grid(-1, 1, 5);
  EXPECT_DOUBLE_EQ(g.step(0), 0.5);
  EXPECT_EQ(g.node_count(), 25u);
  EXPECT_TRUE(g.node(0).isApprox(Eigen::Vector2d(-1, -1)));
  EXPECT_TRUE(g.node(1).isApprox(Eigen::Vector2d(-0.5, -1)));
  EXPECT_TRUE(g.node(24).isApprox(Eigen::Vector2d(1, 1)));
}

TEST(Grid, DefaultSpansThreeSd) {
  Eigen::MatrixXd x(4, 2);
  x << 0, 0, 2, 0, 0, 4, 2, 4;
  const GridSpec g = default_grid(x);
  const double sd = std::sqrt(16.0 / 3.0);
  EXPECT_NEAR(g.lower(0), 1 - 3 * sd, 1e-12);
  EXPECT_NEAR(g.upper(1), 2 + 3 * sd, 1e-12);
  EXPECT_EQ(g.points_per_axis, 41);
}

TEST(ConfSet, SymmetricDataAcceptsCenter) {
  Rng rng = make_rng(1, Stream::Scenario);
  Eigen::MatrixXd half = gaussian(20, rng, 0.0);
  Eigen::MatrixXd x(40, 2);
  x << half, -half;
  x.rowwise() += Eigen::RowVector2d(0.5, 0.5);
  const ConfidenceSet set = confidence_grid(x, SymmetryGroup::central(2), square_grid(-0.5, 1.5, 21), {});
  EXPECT_TRUE(set.contains(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_EQ(set.tested, 441u);
  EXPECT_FALSE(set.touches_boundary());
  EXPECT_GT(set.area(), 0.0);
}

TEST(ConfSet, FarGridIsEmpty) {
  Rng rng = make_rng(2, Stream::Scenario);
  const Eigen::MatrixXd x = gaussian(40, rng, 0.0);
  const ConfidenceSet set = confidence_grid(x, SymmetryGroup::central(2), square_grid(8, 9, 3), {});
  EXPECT_TRUE(set.empty());
  EXPECT_EQ(set.area(), 0.0);
  EXPECT_FALSE(set.contains(Eigen::Vector2d(0, 0)));
}

TEST(ConfSet, DegenerateGrid) {
  Rng rng = make_rng(3, Stream::Scenario);
  const Eigen::MatrixXd x = gaussian(20, rng, 0.0);
  GridSpec g = square_grid(0, 1, 1);
  try {
    confidence_grid(x, SymmetryGroup::central(2), g, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
  g = square_grid(1, 0, 5);
  EXPECT_THROW(confidence_grid(x, SymmetryGroup::central(2), g, {}), Error);
}

TEST(ConfSet, AcceptedNodesDoNotReject) {
  Rng rng = make_rng(4, Stream::Scenario);
  const Eigen::MatrixXd x = gaussian(30, rng, 0.3);
  ConfidenceSetOptions o;
  o.calibration = Calibration::asymptotic();
  const ConfidenceSet set = confidence_grid(x, SymmetryGroup::central(2), square_grid(-1, 1.5, 11), o);
  ASSERT_FALSE(set.empty());
  // Same outcome when the whole grid is one node at an accepted center.
  const Eigen::VectorXd theta = set.accepted.front();
  GridSpec single;
  single.lower = theta;
  single.upper = theta + Eigen::Vector2d::Constant(1e-3);
  single.points_per_axis = 2;
  const ConfidenceSet again = confidence_grid(x, SymmetryGroup::central(2), single, o);
  EXPECT_TRUE(again.accepted_flags.front());
}

TEST(ConfSet, HullOfAcceptedPoints) {
  Rng rng = make_rng(5, Stream::Scenario);
  const Eigen::MatrixXd x = gaussian(40, rng, 0.0);
  ConfidenceSetOptions o;
  o.calibration = Calibration::asymptotic();
  const ConfidenceSet set = confidence_hull(x, SymmetryGroup::central(2), o);
  EXPECT_EQ(set.tested, 40u);
  for (const auto& a : set.accepted) EXPECT_TRUE(set.contains(a));
  if (set.hull.size() >= 3) EXPECT_GT(set.area(), 0.0);
}

TEST(ConfSet, HullAllRejected) {
  // Points on a circle: centred at any one of them, the rest lie in a half-plane.
  Eigen::MatrixXd x(40, 2);
  for (int i = 0; i < 40; ++i) x.row(i) << std::cos(0.157 * i), std::sin(0.157 * i);
  ConfidenceSetOptions o;
  o.calibration = Calibration::asymptotic();
  const ConfidenceSet set = confidence_hull(x, SymmetryGroup::central(2), o);
  EXPECT_TRUE(set.empty());
  EXPECT_TRUE(set.hull.empty());
}

TEST(ConfSet, HotellingCannotBeInverted) {
  Rng rng = make_rng(7, Stream::Scenario);
  ConfidenceSetOptions o;
  o.kind = TestKind::HotellingT2;
  EXPECT_THROW(confidence_grid(gaussian(20, rng, 0), SymmetryGroup::central(2), square_grid(-1, 1, 3), o), Error);
}

TEST(Hull, SquareHasFourVertices) {
  std::vector<Eigen::Vector2d> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}, {0.5, 0}};
  const auto hull = convex_hull_2d(pts);
  EXPECT_EQ(hull.size(), 4u);
  EXPECT_DOUBLE_EQ(polygon_area(hull), 1.0);
}

TEST(Hull, EllipseArea) {
  Eigen::MatrixXd x(4, 2);
  x << 1, 0, -1, 0, 0, 1, 0, -1;
  // S = (2/3) I, n = 4: area = pi * chi2 * sqrt(det S) / n
  const double chi2 = -2.0 * std::log(0.05);
  EXPECT_NEAR(hotelling_ellipse_area(x, 0.05), M_PI * chi2 * (2.0 / 3.0) / 4.0, 1e-12);
}

TEST(ConfSet, CsvAndJson) {
  Rng rng = make_rng(8, Stream::Scenario);
  ConfidenceSetOptions o;
  o.calibration = Calibration::asymptotic();
  const ConfidenceSet set = confidence_grid(gaussian(20, rng, 0), SymmetryGroup::central(2), square_grid(-1, 1, 3), o);
  std::stringstream ss;
  write_confset_csv(ss, set);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "theta1,theta2,accepted");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 9);
  const auto j = to_json(set);
  EXPECT_EQ(j.at("mode"), "grid");
  EXPECT_EQ(j.at("tested"), 9);
}
