#include "otsym/signedrank.hpp"

#include <ostream>

#include "otsym/error.hpp"
#include "otsym/io.hpp"
#include "otsym/linalg.hpp"
#include "otsym/transport.hpp"

namespace otsym {

Decomposition decompose(const Eigen::MatrixXd& data, const ReferenceSet& ref, std::uint64_t seed) {
  const SymmetryGroup& group = ref.group();
  if (data.cols() != ref.dim())
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.cols()) +
                                                  " columns but the reference has dimension " +
                                                  std::to_string(ref.dim()));
  if (static_cast<std::size_t>(data.rows()) != ref.size())
    throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(data.rows()) +
                                                  " rows but the reference has " + std::to_string(ref.size()) +
                                                  " points");
  if (!data.allFinite()) throw Error(ErrorCode::Domain, "data must be finite");

  Rng rng = make_rng(seed, Stream::SignTie);
  const Eigen::MatrixXd& h = ref.points();

  Assignment assignment;
  if (group.kind() == GroupKind::Spherical) {
    assignment = solve_spherical(data, h);
  } else {
    assignment = solve_lap(build_cost_matrix(group, data, h));
  }
  // Equal-cost permutations are chosen uniformly when they can be enumerated.
  if (assignment.tie_flag && data.rows() <= kBruteForceMax) {
    const BruteForceResult all = brute_force_lap(build_cost_matrix(group, data, h));
    std::uniform_int_distribution<std::size_t> pick(0, all.minimizers.size() - 1);
    assignment.ref_of_data = all.minimizers[pick(rng)];
  }

  Decomposition d;
  d.seed = seed;
  d.tie_flag = assignment.tie_flag;
  d.ref_index = assignment.ref_of_data;
  const Eigen::Index n = data.rows();
  d.ranks.resize(n, ref.dim());
  d.signed_ranks.resize(n, ref.dim());
  d.signs.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d.ranks.row(i) = h.row(d.ref_index[i]);
    const Eigen::VectorXd x = data.row(i).transpose();
    const Eigen::VectorXd r = d.ranks.row(i).transpose();
    // Every element minimizes the cost at x = 0, so the sign is a Haar draw.
    GroupElement s = (group.kind() == GroupKind::Spherical && x.squaredNorm() == 0.0) ? haar_sample(group, rng)
                                                                                       : argmin_sign(group, x, r, rng);
    d.signed_ranks.row(i) = s.apply(r).transpose();
    d.signs.push_back(std::move(s));
  }
  return d;
}

Eigen::VectorXd population_map_gaussian_oracle(const Eigen::VectorXd& x, const Eigen::MatrixXd& sigma) {
  if (x.size() != sigma.rows()) throw Error(ErrorCode::DimensionMismatch, "x and sigma dimensions differ");
  return inverse_sqrt_spd(sigma) * x;
}

void write_decomposition_csv(std::ostream& out, const Eigen::MatrixXd& data, const Decomposition& d) {
  const Eigen::Index p = data.cols();
  for (const char* prefix : {"x", "r", "sr"})
    for (Eigen::Index k = 0; k < p; ++k) out << prefix << (k + 1) << ',';
  out << "sign_tag\n";
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index k = 0; k < p; ++k) out << format_sig6(data(i, k)) << ',';
    for (Eigen::Index k = 0; k < p; ++k) out << format_sig6(d.ranks(i, k)) << ',';
    for (Eigen::Index k = 0; k < p; ++k) out << format_sig6(d.signed_ranks(i, k)) << ',';
    out << d.signs[i].tag() << '\n';
  }
}

}  // namespace otsym
