#include "otsym/group.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "otsym/error.hpp"
#include "otsym/linalg.hpp"

namespace otsym {

namespace {

constexpr double kOrthoTol = 1e-10;

void check_dim(int dim) {
  if (dim < 1) throw Error(ErrorCode::InvalidGroup, "group dimension must be positive");
}

void check_pair(const SymmetryGroup& g, Eigen::Index xs, Eigen::Index hs) {
  if (xs != g.dim() || hs != g.dim())
    throw Error(ErrorCode::DimensionMismatch, "vector dimension does not match the group dimension " +
                                                  std::to_string(g.dim()));
}

int find_element(const std::vector<Eigen::MatrixXd>& elements, const Eigen::MatrixXd& m) {
  for (std::size_t k = 0; k < elements.size(); ++k)
    if ((elements[k] - m).cwiseAbs().maxCoeff() <= 1e-8) return static_cast<int>(k);
  return -1;
}

double random_sign(Rng& rng) { return (rng() >> 63) ? 1.0 : -1.0; }

}  // namespace

bool costs_tied(double a, double b) noexcept {
  return std::abs(a - b) <= kTieTolerance * (1.0 + std::max(std::abs(a), std::abs(b)));
}

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::Central: return "central";
    case GroupKind::SignChange: return "sign";
    case GroupKind::Spherical: return "spherical";
    case GroupKind::FiniteMatrices: return "finite";
  }
  return "unknown";
}

SymmetryGroup SymmetryGroup::central(int dim) {
  check_dim(dim);
  return SymmetryGroup(GroupKind::Central, dim);
}

SymmetryGroup SymmetryGroup::sign_change(int dim) {
  check_dim(dim);
  return SymmetryGroup(GroupKind::SignChange, dim);
}

SymmetryGroup SymmetryGroup::spherical(int dim) {
  check_dim(dim);
  return SymmetryGroup(GroupKind::Spherical, dim);
}

SymmetryGroup SymmetryGroup::finite(std::vector<Eigen::MatrixXd> elements) {
  if (elements.empty()) throw Error(ErrorCode::InvalidGroup, "finite group needs at least one element");
  const Eigen::Index p = elements.front().rows();
  check_dim(static_cast<int>(p));
  for (const auto& m : elements) {
    if (m.rows() != p || m.cols() != p)
      throw Error(ErrorCode::InvalidGroup, "all group elements must be square of the same size");
    if (!m.allFinite()) throw Error(ErrorCode::InvalidGroup, "group element has non-finite entries");
    const double err = (m.transpose() * m - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff();
    if (err > kOrthoTol) throw Error(ErrorCode::InvalidGroup, "group element is not orthogonal");
  }
  if (find_element(elements, Eigen::MatrixXd::Identity(p, p)) < 0)
    throw Error(ErrorCode::InvalidGroup, "finite group must contain the identity");
  for (const auto& a : elements) {
    if (find_element(elements, a.transpose()) < 0)
      throw Error(ErrorCode::InvalidGroup, "finite group is not closed under inversion");
    for (const auto& b : elements)
      if (find_element(elements, a * b) < 0)
        throw Error(ErrorCode::InvalidGroup, "finite group is not closed under multiplication");
  }
  Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(p, p);
  for (const auto& m : elements) mean += m;
  mean /= static_cast<double>(elements.size());

  SymmetryGroup g(GroupKind::FiniteMatrices, static_cast<int>(p));
  g.mean_is_zero_ = mean.cwiseAbs().maxCoeff() <= 1e-9;
  g.elements_ = std::make_shared<const std::vector<Eigen::MatrixXd>>(std::move(elements));
  return g;
}

std::string SymmetryGroup::name() const { return to_string(kind_); }

const std::vector<Eigen::MatrixXd>& SymmetryGroup::elements() const {
  static const std::vector<Eigen::MatrixXd> kEmpty;
  return elements_ ? *elements_ : kEmpty;
}

GroupElement GroupElement::central(int sign, int dim) {
  GroupElement e;
  e.rep_ = Representation::CentralSign;
  e.dim_ = dim;
  e.sign_ = sign >= 0 ? 1 : -1;
  return e;
}

GroupElement GroupElement::diagonal(Eigen::VectorXd signs) {
  GroupElement e;
  e.rep_ = Representation::DiagonalSigns;
  e.dim_ = static_cast<int>(signs.size());
  e.diag_ = std::move(signs);
  return e;
}

GroupElement GroupElement::matrix(Eigen::MatrixXd q, int finite_index) {
  GroupElement e;
  e.rep_ = Representation::Matrix;
  e.dim_ = static_cast<int>(q.rows());
  e.mat_ = std::move(q);
  e.finite_index_ = finite_index;
  return e;
}

Eigen::VectorXd GroupElement::apply(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  switch (rep_) {
    case Representation::CentralSign: return static_cast<double>(sign_) * x;
    case Representation::DiagonalSigns: return diag_.cwiseProduct(x);
    case Representation::Matrix: return mat_ * x;
  }
  return x;
}

Eigen::VectorXd GroupElement::apply_transpose(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (rep_ == Representation::Matrix) return mat_.transpose() * x;
  return apply(x);  // compact elements are symmetric
}

Eigen::MatrixXd GroupElement::to_matrix() const {
  switch (rep_) {
    case Representation::CentralSign:
      return static_cast<double>(sign_) * Eigen::MatrixXd::Identity(dim_, dim_);
    case Representation::DiagonalSigns: return diag_.asDiagonal();
    case Representation::Matrix: return mat_;
  }
  return {};
}

void GroupElement::accumulate_into(Eigen::MatrixXd& acc) const {
  switch (rep_) {
    case Representation::CentralSign: acc.diagonal().array() += static_cast<double>(sign_); break;
    case Representation::DiagonalSigns: acc.diagonal() += diag_; break;
    case Representation::Matrix: acc += mat_; break;
  }
}

std::string GroupElement::tag() const {
  switch (rep_) {
    case Representation::CentralSign: return sign_ > 0 ? "+" : "-";
    case Representation::DiagonalSigns: {
      std::string s;
      for (Eigen::Index k = 0; k < diag_.size(); ++k) s += diag_(k) > 0 ? '+' : '-';
      return s;
    }
    case Representation::Matrix: {
      if (finite_index_ >= 0) return "g" + std::to_string(finite_index_);
      std::string s;
      char buf[32];
      for (Eigen::Index i = 0; i < mat_.rows(); ++i)
        for (Eigen::Index j = 0; j < mat_.cols(); ++j) {
          std::snprintf(buf, sizeof buf, "%.6g", mat_(i, j));
          if (!s.empty()) s += ';';
          s += buf;
        }
      return s;
    }
  }
  return {};
}

Eigen::MatrixXd haar_orthogonal(int dim, Rng& rng) {
  Eigen::MatrixXd z(dim, dim);
  for (Eigen::Index j = 0; j < z.cols(); ++j)
    for (Eigen::Index i = 0; i < z.rows(); ++i) z(i, j) = standard_normal(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  // Householder QR leaves the signs of diag(R) arbitrary; normalizing them makes Q Haar.
  for (Eigen::Index j = 0; j < dim; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

GroupElement haar_sample(const SymmetryGroup& group, Rng& rng) {
  const int p = group.dim();
  switch (group.kind()) {
    case GroupKind::Central: return GroupElement::central(random_sign(rng) > 0 ? 1 : -1, p);
    case GroupKind::SignChange: {
      Eigen::VectorXd s(p);
      for (int k = 0; k < p; ++k) s(k) = random_sign(rng);
      return GroupElement::diagonal(std::move(s));
    }
    case GroupKind::Spherical: return GroupElement::matrix(haar_orthogonal(p, rng));
    case GroupKind::FiniteMatrices: {
      const auto& el = group.elements();
      std::uniform_int_distribution<std::size_t> pick(0, el.size() - 1);
      const std::size_t k = pick(rng);
      return GroupElement::matrix(el[k], static_cast<int>(k));
    }
  }
  throw Error(ErrorCode::InvalidGroup, "unknown group kind");
}

Eigen::VectorXd haar_apply(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& h, Rng& rng) {
  const int p = group.dim();
  switch (group.kind()) {
    case GroupKind::Central: return random_sign(rng) * h;
    case GroupKind::SignChange: {
      Eigen::VectorXd out(p);
      for (int k = 0; k < p; ++k) out(k) = random_sign(rng) * h(k);
      return out;
    }
    case GroupKind::Spherical: {
      // S h is uniform on the sphere of radius ||h||
      Eigen::VectorXd z(p);
      double norm = 0.0;
      do {
        for (int k = 0; k < p; ++k) z(k) = standard_normal(rng);
        norm = z.norm();
      } while (norm == 0.0);
      return (h.norm() / norm) * z;
    }
    case GroupKind::FiniteMatrices: return haar_sample(group, rng).apply(h);
  }
  throw Error(ErrorCode::InvalidGroup, "unknown group kind");
}

double orbit_cost(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& h) {
  check_pair(group, x.size(), h.size());
  switch (group.kind()) {
    case GroupKind::Central:
      return std::max(0.0, x.squaredNorm() + h.squaredNorm() - 2.0 * std::abs(x.dot(h)));
    case GroupKind::SignChange: return (x.cwiseAbs() - h.cwiseAbs()).squaredNorm();
    case GroupKind::Spherical: {
      const double d = x.norm() - h.norm();
      return d * d;
    }
    case GroupKind::FiniteMatrices: {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : group.elements()) best = std::min(best, (q.transpose() * x - h).squaredNorm());
      return best;
    }
  }
  throw Error(ErrorCode::InvalidGroup, "unknown group kind");
}

GroupElement argmin_sign(const SymmetryGroup& group, const Eigen::Ref<const Eigen::VectorXd>& x,
                         const Eigen::Ref<const Eigen::VectorXd>& h, Rng& rng) {
  check_pair(group, x.size(), h.size());
  const int p = group.dim();
  switch (group.kind()) {
    case GroupKind::Central: {
      const double base = x.squaredNorm() + h.squaredNorm();
      const double d = x.dot(h);
      if (costs_tied(base - 2.0 * d, base + 2.0 * d)) return GroupElement::central(random_sign(rng) > 0 ? 1 : -1, p);
      return GroupElement::central(d > 0 ? 1 : -1, p);
    }
    case GroupKind::SignChange: {
      Eigen::VectorXd s(p);
      for (int k = 0; k < p; ++k) {
        const double plus = (x(k) - h(k)) * (x(k) - h(k));
        const double minus = (x(k) + h(k)) * (x(k) + h(k));
        s(k) = costs_tied(plus, minus) ? random_sign(rng) : (x(k) * h(k) > 0 ? 1.0 : -1.0);
      }
      return GroupElement::diagonal(std::move(s));
    }
    case GroupKind::Spherical: {
      const double nx = x.norm();
      const double nh = h.norm();
      if (nx == 0.0 || nh == 0.0) throw Error(ErrorCode::SphericalZeroVector, "argmin_sign needs x != 0 and h != 0");
      const Eigen::VectorXd v = h / nh;
      const Eigen::MatrixXd basis = householder_completion(v);  // [v V]
      Eigen::MatrixXd m(p, p);
      m.col(0) = x / nx;
      for (int j = 1; j < p; ++j)
        for (int i = 0; i < p; ++i) m(i, j) = standard_normal(rng);
      return GroupElement::matrix(gram_schmidt(std::move(m)) * basis.transpose());
    }
    case GroupKind::FiniteMatrices: {
      const auto& el = group.elements();
      std::vector<double> cost(el.size());
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < el.size(); ++k) {
        cost[k] = (el[k].transpose() * x - h).squaredNorm();
        best = std::min(best, cost[k]);
      }
      std::vector<std::size_t> tied;
      for (std::size_t k = 0; k < el.size(); ++k)
        if (costs_tied(cost[k], best)) tied.push_back(k);
      std::uniform_int_distribution<std::size_t> pick(0, tied.size() - 1);
      const std::size_t k = tied[pick(rng)];
      return GroupElement::matrix(el[k], static_cast<int>(k));
    }
  }
  throw Error(ErrorCode::InvalidGroup, "unknown group kind");
}

}  // namespace otsym
