#include "otsym/reference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "otsym/error.hpp"
#include "otsym/io.hpp"
#include "otsym/linalg.hpp"
#include "otsym/special.hpp"

namespace otsym {

namespace {

constexpr double kOrbitTol = 1e-9;

// Rescales a nonzero Gaussian-law point so that its radius becomes
// F_chi(||g||), which is Uniform(0, 1) when g is standard Gaussian.
void to_spherical_uniform(Eigen::VectorXd& g, int p) {
  const double r = g.norm();
  if (r > 0.0) g *= special::chi_cdf(r, p) / r;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

Eigen::VectorXd canonical(const SymmetryGroup& group, const Eigen::VectorXd& x) {
  return fold_to_domain(group, x);
}

bool in_domain(const SymmetryGroup& group, const Eigen::VectorXd& h) {
  switch (group.kind()) {
    case GroupKind::Central: return h(0) > 0.0;
    case GroupKind::SignChange: return (h.array() > 0.0).all();
    case GroupKind::Spherical:
      return h(0) > 0.0 && (h.size() == 1 || h.tail(h.size() - 1).cwiseAbs().maxCoeff() <= 1e-12);
    case GroupKind::FiniteMatrices: return true;  // any orbit representative is acceptable
  }
  return false;
}

void check_orbit_distinct(const SymmetryGroup& group, const Eigen::MatrixXd& points) {
  const std::size_t n = static_cast<std::size_t>(points.rows());
  std::vector<Eigen::VectorXd> keys(n);
  for (std::size_t i = 0; i < n; ++i) keys[i] = canonical(group, points.row(i).transpose());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a](0) < keys[b](0); });
  // Only neighbours whose leading coordinates are within tolerance can collide.
  for (std::size_t a = 0; a < n; ++a) {
    const Eigen::VectorXd& ka = keys[order[a]];
    for (std::size_t b = a + 1; b < n; ++b) {
      const Eigen::VectorXd& kb = keys[order[b]];
      const double scale = 1.0 + std::max(ka.cwiseAbs().maxCoeff(), kb.cwiseAbs().maxCoeff());
      if (kb(0) - ka(0) > kOrbitTol * scale) break;
      if ((ka - kb).cwiseAbs().maxCoeff() <= kOrbitTol * scale) {
        if (group.kind() == GroupKind::Spherical)
          throw Error(ErrorCode::DuplicateNorms, "reference points " + std::to_string(order[a] + 1) + " and " +
                                                     std::to_string(order[b] + 1) + " have equal norms");
        throw Error(ErrorCode::InvalidReference, "reference points " + std::to_string(order[a] + 1) + " and " +
                                                     std::to_string(order[b] + 1) + " lie on the same orbit");
      }
    }
  }
}

// Maps one point of the unit cube to a reference point in the fundamental
// domain. Spherical needs one coordinate, the others p.
Eigen::VectorXd map_unit_point(const SymmetryGroup& group, ErdKind erd, const Eigen::VectorXd& u) {
  const int p = group.dim();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(p);
  switch (group.kind()) {
    case GroupKind::Spherical:
      h(0) = erd == ErdKind::Gaussian ? special::chi_quantile(u(0), p) : u(0);
      return h;
    case GroupKind::Central:
      if (erd == ErdKind::Uniform) {
        h(0) = u(0);
        for (int k = 1; k < p; ++k) h(k) = 2.0 * u(k) - 1.0;
      } else {
        h(0) = special::half_normal_quantile(u(0));
        for (int k = 1; k < p; ++k) h(k) = special::normal_quantile(u(k));
      }
      break;
    case GroupKind::SignChange:
      for (int k = 0; k < p; ++k) h(k) = erd == ErdKind::Uniform ? u(k) : special::half_normal_quantile(u(k));
      break;
    case GroupKind::FiniteMatrices: {
      Eigen::VectorXd g(p);
      for (int k = 0; k < p; ++k) g(k) = special::normal_quantile(u(k));
      h = fold_to_domain(group, g);
      break;
    }
  }
  if (erd == ErdKind::SphericalUniform) to_spherical_uniform(h, p);
  return h;
}

// Points are generated in sequence order (Halton index 1, 2, ... or the
// uniform stream). A candidate whose orbit is already taken within the
// orbit tolerance is skipped and the sequence continues. This happens for
// finite groups under Halton, where u and 1 - u both occur and can map to one
// orbit, and, rarely, for random draws that land 1e-9 apart.
Eigen::MatrixXd distinct_points(const SymmetryGroup& group, ErdKind erd, std::size_t n,
                                ConstructionKind construction, std::uint64_t seed) {
  const int p = group.dim();
  const int dim = group.kind() == GroupKind::Spherical ? 1 : p;
  const auto bases = first_primes(dim);
  Rng rng = make_rng(seed, Stream::Reference);
  Eigen::MatrixXd h(static_cast<Eigen::Index>(n), p);
  std::multimap<double, Eigen::Index> by_lead;
  std::uint64_t index = 0;
  const std::uint64_t limit = 100 * static_cast<std::uint64_t>(n) + 1000;
  Eigen::VectorXd u(dim);
  Eigen::Index kept = 0;
  while (static_cast<std::size_t>(kept) < n) {
    if (++index > limit) throw Error(ErrorCode::InvalidReference, "could not find enough distinct orbits");
    for (int k = 0; k < dim; ++k)
      u(k) = construction == ConstructionKind::Halton ? halton(index, bases[k]) : uniform_open01(rng);
    const Eigen::VectorXd f = map_unit_point(group, erd, u);
    const Eigen::VectorXd key = canonical(group, f);
    const double tol = 2.0 * kOrbitTol * (1.0 + key.cwiseAbs().maxCoeff());
    bool taken = false;
    const auto hi = by_lead.upper_bound(key(0) + tol);
    for (auto it = by_lead.lower_bound(key(0) - tol); it != hi && !taken; ++it)
      taken = (canonical(group, h.row(it->second).transpose()) - key).cwiseAbs().maxCoeff() <= tol;
    if (taken) continue;
    h.row(kept) = f.transpose();
    by_lead.emplace(key(0), kept);
    ++kept;
  }
  return h;
}

}  // namespace

std::string to_string(ErdKind kind) {
  switch (kind) {
    case ErdKind::Gaussian: return "gaussian";
    case ErdKind::Uniform: return "uniform";
    case ErdKind::SphericalUniform: return "spherical-uniform";
  }
  return "unknown";
}

std::string to_string(ConstructionKind kind) {
  switch (kind) {
    case ConstructionKind::RandomSample: return "random";
    case ConstructionKind::Halton: return "halton";
    case ConstructionKind::Explicit: return "explicit";
  }
  return "unknown";
}

ErdKind parse_erd(const std::string& text) {
  if (text == "gaussian") return ErdKind::Gaussian;
  if (text == "uniform") return ErdKind::Uniform;
  if (text == "spherical-uniform") return ErdKind::SphericalUniform;
  throw Error(ErrorCode::Parse, "unknown ERD '" + text + "' (expected gaussian, uniform or spherical-uniform)");
}

ConstructionKind parse_construction(const std::string& text) {
  if (text == "random") return ConstructionKind::RandomSample;
  if (text == "halton") return ConstructionKind::Halton;
  if (text == "explicit") return ConstructionKind::Explicit;
  throw Error(ErrorCode::Parse, "unknown construction '" + text + "' (expected random or halton)");
}

ScoreFunction ScoreFunction::gaussian_plugin(Eigen::MatrixXd inv_sqrt_sigma) {
  if (!is_spd(inv_sqrt_sigma, 1e-8))
    throw Error(ErrorCode::NotSPD, "Gaussian plug-in score matrix must be symmetric positive definite");
  ScoreFunction s;
  s.kind_ = Kind::GaussianPlugIn;
  s.matrix_ = std::move(inv_sqrt_sigma);
  return s;
}

ScoreFunction ScoreFunction::gaussian_plugin_from_data(const Eigen::MatrixXd& data) {
  return gaussian_plugin(inverse_sqrt_spd(sample_covariance(data)));
}

std::string ScoreFunction::name() const { return kind_ == Kind::Identity ? "identity" : "gaussian-plugin"; }

Eigen::VectorXd ScoreFunction::apply(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  if (kind_ == Kind::Identity) return y;
  return matrix_ * y;
}

ReferenceSet::ReferenceSet(SymmetryGroup group, ErdKind erd, Eigen::MatrixXd points, ScoreFunction score,
                           Construction construction)
    : group_(std::move(group)),
      erd_(erd),
      points_(std::move(points)),
      score_(std::move(score)),
      construction_(construction) {
  check_compatible(group_, erd_);
  if (points_.rows() < 1) throw Error(ErrorCode::InvalidReference, "reference set is empty");
  if (points_.cols() != group_.dim())
    throw Error(ErrorCode::DimensionMismatch, "reference dimension " + std::to_string(points_.cols()) +
                                                  " does not match group dimension " +
                                                  std::to_string(group_.dim()));
  if (!points_.allFinite()) throw Error(ErrorCode::InvalidReference, "reference points must be finite");
  if (score_.kind() == ScoreFunction::Kind::GaussianPlugIn && score_.matrix().rows() != points_.cols())
    throw Error(ErrorCode::DimensionMismatch, "score matrix dimension does not match the reference");
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    if (!in_domain(group_, points_.row(i).transpose()))
      throw Error(ErrorCode::InvalidReference,
                  "reference point " + std::to_string(i + 1) + " is outside the fundamental domain of the " +
                      group_.name() + " group");
  check_orbit_distinct(group_, points_);
}

ReferenceSet ReferenceSet::with_score(ScoreFunction score) const {
  ReferenceSet copy = *this;
  if (score.kind() == ScoreFunction::Kind::GaussianPlugIn && score.matrix().rows() != points_.cols())
    throw Error(ErrorCode::DimensionMismatch, "score matrix dimension does not match the reference");
  copy.score_ = std::move(score);
  return copy;
}

double halton(std::uint64_t index, unsigned base) {
  if (index < 1) throw Error(ErrorCode::Domain, "halton index must be >= 1");
  if (base < 2) throw Error(ErrorCode::Domain, "halton base must be >= 2");
  double f = 1.0;
  double r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

std::vector<unsigned> first_primes(int count) {
  std::vector<unsigned> primes;
  for (unsigned c = 2; static_cast<int>(primes.size()) < count; ++c) {
    bool prime = true;
    for (unsigned q : primes) {
      if (q * q > c) break;
      if (c % q == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

void check_compatible(const SymmetryGroup& group, ErdKind erd) {
  if (erd != ErdKind::Uniform) return;
  if (group.kind() == GroupKind::Spherical)
    throw Error(ErrorCode::IncompatibleERD, "the uniform ERD is not spherically symmetric; use gaussian or "
                                            "spherical-uniform with the spherical group");
  if (group.kind() == GroupKind::FiniteMatrices)
    throw Error(ErrorCode::IncompatibleERD, "the uniform ERD is only available for the central and sign groups");
}

Eigen::VectorXd fold_to_domain(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x) {
  switch (group.kind()) {
    case GroupKind::Central: {
      for (Eigen::Index k = 0; k < x.size(); ++k)
        if (x(k) != 0.0) return x(k) < 0.0 ? Eigen::VectorXd(-x) : Eigen::VectorXd(x);
      return x;
    }
    case GroupKind::SignChange: return x.cwiseAbs();
    case GroupKind::Spherical: {
      Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
      out(0) = x.norm();
      return out;
    }
    case GroupKind::FiniteMatrices: {
      Eigen::VectorXd best = x;
      for (const auto& q : group.elements()) {
        Eigen::VectorXd y = q * x;
        if (lex_less(best, y)) best = std::move(y);
      }
      return best;
    }
  }
  return x;
}

ReferenceSet build_reference(const SymmetryGroup& group, ErdKind erd, std::size_t n, ConstructionKind construction,
                             std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::InvalidReference, "reference size must be at least 1");
  if (construction == ConstructionKind::Explicit)
    throw Error(ErrorCode::InvalidReference, "explicit references are read from a file, not built");
  check_compatible(group, erd);
  Eigen::MatrixXd h = distinct_points(group, erd, n, construction, seed);
  return ReferenceSet(group, erd, std::move(h), ScoreFunction::identity(), Construction{construction, seed});
}

Eigen::MatrixXd erd_covariance(ErdKind erd, int dim) {
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  switch (erd) {
    case ErdKind::Gaussian: return id;
    case ErdKind::Uniform: return id / 3.0;
    case ErdKind::SphericalUniform: return id / (3.0 * dim);
  }
  return id;
}

Eigen::MatrixXd erd_covariance(const ReferenceSet& ref) {
  const Eigen::MatrixXd sigma = erd_covariance(ref.erd(), ref.dim());
  if (ref.score().kind() == ScoreFunction::Kind::Identity) return sigma;
  const Eigen::MatrixXd& m = ref.score().matrix();
  return m * sigma * m.transpose();
}

Eigen::MatrixXd empirical_erd_covariance(const ReferenceSet& ref) {
  const int p = ref.dim();
  const SymmetryGroup& g = ref.group();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index i = 0; i < ref.points().rows(); ++i) {
    const Eigen::VectorXd y = ref.score().apply(ref.points().row(i).transpose());
    switch (g.kind()) {
      case GroupKind::Central: acc.noalias() += y * y.transpose(); break;
      case GroupKind::SignChange: acc.diagonal() += y.cwiseAbs2(); break;
      case GroupKind::Spherical: acc.diagonal().array() += y.squaredNorm() / p; break;
      case GroupKind::FiniteMatrices: {
        Eigen::MatrixXd local = Eigen::MatrixXd::Zero(p, p);
        for (const auto& q : g.elements()) {
          const Eigen::VectorXd qy = q * y;
          local.noalias() += qy * qy.transpose();
        }
        acc += local / static_cast<double>(g.elements().size());
        break;
      }
    }
  }
  return acc / static_cast<double>(ref.size());
}

void write_reference_csv(std::ostream& out, const ReferenceSet& ref) {
  out << "# group=" << ref.group().name() << '\n'
      << "# erd=" << to_string(ref.erd()) << '\n'
      << "# construction=" << to_string(ref.construction().kind) << '\n'
      << "# seed=" << ref.construction().seed << '\n';
  for (int k = 0; k < ref.dim(); ++k) out << (k ? "," : "") << 'h' << (k + 1);
  out << '\n';
  for (Eigen::Index i = 0; i < ref.points().rows(); ++i) {
    for (int k = 0; k < ref.dim(); ++k) out << (k ? "," : "") << format_exact(ref.points()(i, k));
    out << '\n';
  }
}

ReferenceSet read_reference_csv(std::istream& in, const SymmetryGroup& group, ErdKind erd) {
  std::stringstream body;
  std::map<std::string, std::string> meta;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        auto key = line.substr(1, eq - 1);
        key.erase(0, key.find_first_not_of(" \t"));
        auto value = line.substr(eq + 1);
        while (!value.empty() && (value.back() == '\r' || value.back() == ' ')) value.pop_back();
        meta[key] = value;
      }
    }
    body << line << '\n';  // comment lines stay so that line numbers in errors match the file
  }
  Eigen::MatrixXd points = read_csv_matrix(body);

  if (auto it = meta.find("group"); it != meta.end() && it->second != group.name())
    throw Error(ErrorCode::InvalidReference,
                "reference file was built for the " + it->second + " group, not " + group.name());
  Construction construction{ConstructionKind::Explicit, 0};
  if (auto it = meta.find("erd"); it != meta.end()) erd = parse_erd(it->second);
  if (auto it = meta.find("construction"); it != meta.end()) construction.kind = parse_construction(it->second);
  if (auto it = meta.find("seed"); it != meta.end()) {
    try {
      construction.seed = std::stoull(it->second);
    } catch (const std::exception&) {
      throw Error(ErrorCode::Parse, "reference file has an invalid seed '" + it->second + "'");
    }
  }
  return ReferenceSet(group, erd, std::move(points), ScoreFunction::identity(), construction);
}

}  // namespace otsym
