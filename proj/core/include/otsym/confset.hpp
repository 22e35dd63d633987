#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "otsym/reference.hpp"
#include "otsym/stats.hpp"

namespace otsym {

/// Axis-aligned grid: `points_per_axis` equally spaced nodes per coordinate
/// from lower to upper, inclusive.
struct GridSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  int points_per_axis = 41;

  double step(int axis) const;
  std::size_t node_count() const;
  Eigen::VectorXd node(std::size_t index) const;
};

/// data mean +/- 3 * (largest marginal standard deviation), 41 per axis.
GridSpec default_grid(const Eigen::MatrixXd& data, int points_per_axis = 41);

struct ConfidenceSetOptions {
  TestKind kind = TestKind::GWSR;
  ErdKind erd = ErdKind::Gaussian;
  ConstructionKind construction = ConstructionKind::Halton;
  Calibration calibration = Calibration::exact(999);
  double alpha = 0.05;
  std::uint64_t seed = 0;
  unsigned threads = 0;
};

class ConfidenceSet {
 public:
  enum class Mode { Grid, DataPointHull };

  Mode mode = Mode::Grid;
  double level = 0.95;
  std::vector<Eigen::VectorXd> accepted;
  std::size_t tested = 0;
  std::optional<GridSpec> grid;
  /// Accepted-flag per grid node (grid mode) or per observation (hull mode).
  std::vector<bool> accepted_flags;
  std::vector<Eigen::VectorXd> candidates;
  /// Counter-clockwise hull vertices in 2-D; the accepted points otherwise.
  std::vector<Eigen::VectorXd> hull;

  bool empty() const noexcept { return accepted.empty(); }

  /// Grid mode: the grid node nearest to theta was accepted (false outside
  /// the grid). Hull mode (2-D): theta lies in the hull.
  bool contains(const Eigen::VectorXd& theta) const;

  /// Grid mode: accepted node count times the cell volume. Hull mode (2-D):
  /// polygon area.
  double area() const;

  /// Grid mode: some accepted node lies on the outer boundary of the grid.
  bool touches_boundary() const;
};

/// Tests H0: X - theta is G-symmetric at every grid node with one shared
/// reference and Monte-Carlo null. Throws EmptyGrid for a degenerate grid.
ConfidenceSet confidence_grid(const Eigen::MatrixXd& data, const SymmetryGroup& group, const GridSpec& grid,
                              const ConfidenceSetOptions& options);

/// Tests at theta = X_i and returns the convex hull of the accepted points.
ConfidenceSet confidence_hull(const Eigen::MatrixXd& data, const SymmetryGroup& group,
                              const ConfidenceSetOptions& options);

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> points);

double polygon_area(const std::vector<Eigen::Vector2d>& polygon);

/// Area of the 2-D Hotelling confidence ellipse
/// {theta : n (xbar - theta)^T S^{-1} (xbar - theta) <= chi2_2(1 - alpha)}.
double hotelling_ellipse_area(const Eigen::MatrixXd& data, double alpha);

/// theta1..thetap,accepted
void write_confset_csv(std::ostream& out, const ConfidenceSet& set);
nlohmann::json to_json(const ConfidenceSet& set);

}  // namespace otsym
