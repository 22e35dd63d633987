#include "otsym/confset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "otsym/error.hpp"
#include "otsym/io.hpp"
#include "otsym/linalg.hpp"
#include "otsym/parallel.hpp"
#include "otsym/special.hpp"

namespace otsym {

namespace {

constexpr std::size_t kMaxNodes = 10'000'000;

double cross(const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

void check_grid(const GridSpec& g, int p) {
  if (g.lower.size() != p || g.upper.size() != p)
    throw Error(ErrorCode::EmptyGrid, "grid bounds must have one entry per dimension");
  if (g.points_per_axis < 2) throw Error(ErrorCode::EmptyGrid, "grid needs at least two points per axis");
  if (!g.lower.allFinite() || !g.upper.allFinite() || (g.upper.array() <= g.lower.array()).any())
    throw Error(ErrorCode::EmptyGrid, "grid bounds must be finite with lower < upper");
  double count = std::pow(static_cast<double>(g.points_per_axis), p);
  if (count > static_cast<double>(kMaxNodes)) throw Error(ErrorCode::TooLarge, "grid has too many nodes");
}

PreparedTest prepare(const Eigen::MatrixXd& data, const SymmetryGroup& group, const ConfidenceSetOptions& o) {
  if (o.kind == TestKind::HotellingT2)
    throw Error(ErrorCode::Domain, "confidence sets invert the GWSR or sign test");
  if (data.cols() != group.dim()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from group");
  // One reference and one null for every theta keep the set a deterministic
  // function of the data.
  ReferenceSet ref = build_reference(group, o.erd, static_cast<std::size_t>(data.rows()), o.construction,
                                     derive_seed(o.seed, Stream::Reference));
  return PreparedTest(std::move(ref), o.kind, o.calibration, o.alpha, o.seed, o.threads);
}

bool accepts(const PreparedTest& test, const Eigen::MatrixXd& data, const Eigen::VectorXd& theta) {
  const Eigen::MatrixXd shifted = data.rowwise() - theta.transpose();
  return !test.run(shifted).reject;
}

nlohmann::json point_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(sig6(v(k)));
  return a;
}

}  // namespace

double GridSpec::step(int axis) const {
  return points_per_axis > 1 ? (upper(axis) - lower(axis)) / (points_per_axis - 1) : 0.0;
}

std::size_t GridSpec::node_count() const {
  std::size_t c = 1;
  for (Eigen::Index k = 0; k < lower.size(); ++k) c *= static_cast<std::size_t>(points_per_axis);
  return c;
}

Eigen::VectorXd GridSpec::node(std::size_t index) const {
  Eigen::VectorXd theta(lower.size());
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    const std::size_t i = index % static_cast<std::size_t>(points_per_axis);
    index /= static_cast<std::size_t>(points_per_axis);
    theta(k) = lower(k) + static_cast<double>(i) * step(static_cast<int>(k));
  }
  return theta;
}

GridSpec default_grid(const Eigen::MatrixXd& data, int points_per_axis) {
  if (data.rows() < 2) throw Error(ErrorCode::TooFewObservations, "default grid needs at least 2 observations");
  const Eigen::VectorXd mean = data.colwise().mean().transpose();
  const double sd = sample_covariance(data).diagonal().cwiseSqrt().maxCoeff();
  const double half = sd > 0.0 ? 3.0 * sd : 1.0;
  GridSpec g;
  g.lower = mean.array() - half;
  g.upper = mean.array() + half;
  g.points_per_axis = points_per_axis;
  return g;
}

bool ConfidenceSet::contains(const Eigen::VectorXd& theta) const {
  if (mode == Mode::Grid) {
    if (!grid || theta.size() != grid->lower.size()) return false;
    std::size_t index = 0;
    std::size_t stride = 1;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      const double h = grid->step(static_cast<int>(k));
      long pos = 0;
      if (h > 0.0) {
        const double rel = (theta(k) - grid->lower(k)) / h;
        if (rel < -0.5 || rel > grid->points_per_axis - 0.5) return false;
        pos = std::clamp(std::lround(rel), 0L, static_cast<long>(grid->points_per_axis - 1));
      } else if (theta(k) != grid->lower(k)) {
        return false;
      }
      index += static_cast<std::size_t>(pos) * stride;
      stride *= static_cast<std::size_t>(grid->points_per_axis);
    }
    return accepted_flags[index];
  }
  if (theta.size() != 2 || hull.empty()) {
    for (const auto& a : accepted)
      if ((a - theta).cwiseAbs().maxCoeff() <= 1e-12) return true;
    return false;
  }
  const Eigen::Vector2d t(theta(0), theta(1));
  if (hull.size() < 3) {
    if (hull.size() == 1) return (hull[0] - theta).norm() <= 1e-12;
    const Eigen::Vector2d a(hull[0](0), hull[0](1)), b(hull[1](0), hull[1](1));
    const double len = (b - a).norm();
    return std::abs(cross(a, b, t)) <= 1e-12 * (1.0 + len) && (t - a).dot(b - a) >= 0.0 &&
           (t - b).dot(a - b) >= 0.0;
  }
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross(Eigen::Vector2d(a(0), a(1)), Eigen::Vector2d(b(0), b(1)), t) < -1e-12) return false;
  }
  return true;
}

double ConfidenceSet::area() const {
  if (mode == Mode::Grid) {
    if (!grid) return 0.0;
    double cell = 1.0;
    for (Eigen::Index k = 0; k < grid->lower.size(); ++k) cell *= grid->step(static_cast<int>(k));
    return cell * static_cast<double>(accepted.size());
  }
  if (hull.size() < 3 || hull.front().size() != 2) return 0.0;
  std::vector<Eigen::Vector2d> poly;
  for (const auto& v : hull) poly.emplace_back(v(0), v(1));
  return polygon_area(poly);
}

bool ConfidenceSet::touches_boundary() const {
  if (mode != Mode::Grid || !grid) return false;
  const auto m = static_cast<std::size_t>(grid->points_per_axis);
  for (std::size_t idx = 0; idx < accepted_flags.size(); ++idx) {
    if (!accepted_flags[idx]) continue;
    std::size_t rest = idx;
    for (Eigen::Index k = 0; k < grid->lower.size(); ++k) {
      const std::size_t i = rest % m;
      rest /= m;
      if (i == 0 || i + 1 == m) return true;
    }
  }
  return false;
}

ConfidenceSet confidence_grid(const Eigen::MatrixXd& data, const SymmetryGroup& group, const GridSpec& grid,
                              const ConfidenceSetOptions& options) {
  check_grid(grid, group.dim());
  const PreparedTest test = prepare(data, group, options);
  const std::size_t nodes = grid.node_count();

  ConfidenceSet set;
  set.mode = ConfidenceSet::Mode::Grid;
  set.level = 1.0 - options.alpha;
  set.grid = grid;
  set.tested = nodes;
  set.candidates.resize(nodes);
  std::vector<char> flags(nodes, 0);
  parallel_for(nodes, options.threads == 0 ? default_threads() : options.threads, [&](std::size_t k) {
    set.candidates[k] = grid.node(k);
    flags[k] = accepts(test, data, set.candidates[k]) ? 1 : 0;
  });
  set.accepted_flags.assign(flags.begin(), flags.end());
  for (std::size_t k = 0; k < nodes; ++k)
    if (flags[k]) set.accepted.push_back(set.candidates[k]);
  return set;
}

ConfidenceSet confidence_hull(const Eigen::MatrixXd& data, const SymmetryGroup& group,
                              const ConfidenceSetOptions& options) {
  const int p = group.dim();
  if (data.rows() < p + 1)
    throw Error(ErrorCode::TooFewObservations, "the data-point hull needs at least p + 1 observations");
  const PreparedTest test = prepare(data, group, options);
  const auto n = static_cast<std::size_t>(data.rows());

  ConfidenceSet set;
  set.mode = ConfidenceSet::Mode::DataPointHull;
  set.level = 1.0 - options.alpha;
  set.tested = n;
  set.candidates.resize(n);
  std::vector<char> flags(n, 0);
  parallel_for(n, options.threads == 0 ? default_threads() : options.threads, [&](std::size_t i) {
    set.candidates[i] = data.row(static_cast<Eigen::Index>(i)).transpose();
    flags[i] = accepts(test, data, set.candidates[i]) ? 1 : 0;
  });
  set.accepted_flags.assign(flags.begin(), flags.end());
  for (std::size_t i = 0; i < n; ++i)
    if (flags[i]) set.accepted.push_back(set.candidates[i]);

  if (p == 2) {
    std::vector<Eigen::Vector2d> pts;
    for (const auto& a : set.accepted) pts.emplace_back(a(0), a(1));
    for (const auto& v : convex_hull_2d(std::move(pts))) set.hull.push_back(Eigen::VectorXd(v));
  } else {
    set.hull = set.accepted;  // vertex enumeration in higher dimension is out of scope
  }
  return set;
}

std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

double polygon_area(const std::vector<Eigen::Vector2d>& polygon) {
  double twice = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % polygon.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return std::abs(twice) / 2.0;
}

double hotelling_ellipse_area(const Eigen::MatrixXd& data, double alpha) {
  if (data.cols() != 2) throw Error(ErrorCode::DimensionMismatch, "ellipse area is defined for p = 2");
  if (data.rows() < 3) throw Error(ErrorCode::TooFewObservations, "ellipse area needs n > p");
  const double det = sample_covariance(data).determinant();
  if (!(det > 0.0)) throw Error(ErrorCode::SingularCovariance, "sample covariance is singular");
  const double c = special::chi_square_quantile(1.0 - alpha, 2.0);
  return std::numbers::pi * c * std::sqrt(det) / static_cast<double>(data.rows());
}

void write_confset_csv(std::ostream& out, const ConfidenceSet& set) {
  const Eigen::Index p = set.candidates.empty() ? 0 : set.candidates.front().size();
  for (Eigen::Index k = 0; k < p; ++k) out << "theta" << (k + 1) << ',';
  out << "accepted\n";
  for (std::size_t i = 0; i < set.candidates.size(); ++i) {
    for (Eigen::Index k = 0; k < p; ++k) out << format_sig6(set.candidates[i](k)) << ',';
    out << (set.accepted_flags[i] ? 1 : 0) << '\n';
  }
}

nlohmann::json to_json(const ConfidenceSet& set) {
  nlohmann::json j;
  j["mode"] = set.mode == ConfidenceSet::Mode::Grid ? "grid" : "hull";
  j["level"] = sig6(set.level);
  j["tested"] = set.tested;
  j["accepted_count"] = set.accepted.size();
  j["empty"] = set.empty();
  if (set.grid) {
    j["grid"] = {{"lower", point_json(set.grid->lower)},
                 {"upper", point_json(set.grid->upper)},
                 {"points_per_axis", set.grid->points_per_axis}};
    j["touches_boundary"] = set.touches_boundary();
  }
  const bool planar = !set.candidates.empty() && set.candidates.front().size() == 2;
  j["area"] = planar ? nlohmann::json(sig6(set.area())) : nlohmann::json(nullptr);
  if (set.mode == ConfidenceSet::Mode::DataPointHull) {
    nlohmann::json h = nlohmann::json::array();
    for (const auto& v : set.hull) h.push_back(point_json(v));
    j["hull"] = h;
  }
  return j;
}

}  // namespace otsym
