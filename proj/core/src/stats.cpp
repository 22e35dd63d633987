#include "otsym/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "otsym/error.hpp"
#include "otsym/linalg.hpp"
#include "otsym/parallel.hpp"
#include "otsym/special.hpp"

namespace otsym {

namespace {

constexpr int kNullChunk = 64;
constexpr int kMinReplications = 100;

// Precomputed inverse of the analytic Sigma_ERD.
Eigen::MatrixXd erd_precision(const Eigen::MatrixXd& sigma) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw Error(ErrorCode::SingularERD, "ERD covariance is singular");
  return ldlt.solve(Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols()));
}

// Random +/-1 values, 64 per engine call.
class SignBits {
 public:
  double next(Rng& rng) {
    if (left_ == 0) {
      word_ = rng();
      left_ = 64;
    }
    const double s = (word_ & 1U) ? 1.0 : -1.0;
    word_ >>= 1;
    --left_;
    return s;
  }

 private:
  std::uint64_t word_ = 0;
  int left_ = 0;
};

// One Monte-Carlo draw of the calibrated scalar under the null.
class NullSampler {
 public:
  NullSampler(const ReferenceSet& ref, TestKind kind)
      : ref_(ref),
        kind_(kind),
        precision_(erd_precision(erd_covariance(ref.erd(), ref.dim()))),
        inv_sqrt_n_(1.0 / std::sqrt(static_cast<double>(ref.size()))) {}

  double draw(Rng& rng) const {
    const SymmetryGroup& g = ref_.group();
    const Eigen::MatrixXd& h = ref_.points();
    const Eigen::Index n = h.rows();
    const int p = ref_.dim();
    if (kind_ == TestKind::GWSR) {
      // The plug-in score multiplies W by a fixed matrix and Sigma_ERD by the
      // same matrix on both sides, so the quadratic form is score-free.
      Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
      switch (g.kind()) {
        case GroupKind::Central:
          for (Eigen::Index i = 0; i < n; ++i) {
            if (rng() >> 63)
              w += h.row(i).transpose();
            else
              w -= h.row(i).transpose();
          }
          break;
        case GroupKind::SignChange: {
          SignBits bits;
          for (Eigen::Index i = 0; i < n; ++i)
            for (int k = 0; k < p; ++k) w(k) += bits.next(rng) * h(i, k);
          break;
        }
        default:
          for (Eigen::Index i = 0; i < n; ++i) w += haar_apply(g, h.row(i).transpose(), rng);
      }
      w *= inv_sqrt_n_;
      return w.dot(precision_ * w);
    }
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
    switch (g.kind()) {
      case GroupKind::Central: {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) sum += (rng() >> 63) ? 1.0 : -1.0;
        t.diagonal().setConstant(sum);
        break;
      }
      case GroupKind::SignChange: {
        SignBits bits;
        for (Eigen::Index i = 0; i < n; ++i)
          for (int k = 0; k < p; ++k) t(k, k) += bits.next(rng);
        break;
      }
      default:
        for (Eigen::Index i = 0; i < n; ++i) haar_sample(g, rng).accumulate_into(t);
    }
    return sign_scalar(g, t * inv_sqrt_n_);
  }

 private:
  const ReferenceSet& ref_;
  TestKind kind_;
  Eigen::MatrixXd precision_;
  double inv_sqrt_n_;
};

void require_reference_dims(const Decomposition& d, const ReferenceSet& ref) {
  if (d.size() != ref.size() || d.signed_ranks.cols() != ref.dim())
    throw Error(ErrorCode::DimensionMismatch, "decomposition does not match the reference");
}

Eigen::VectorXd flatten_rowwise(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i * m.cols() + j) = m(i, j);
  return out;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(sig6(v(i)));
  return arr;
}

}  // namespace

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::GeneralizedSign: return "sign";
    case TestKind::GWSR: return "gwsr";
    case TestKind::HotellingT2: return "hotelling";
  }
  return "unknown";
}

TestKind parse_test_kind(const std::string& text) {
  if (text == "sign" || text == "generalized-sign") return TestKind::GeneralizedSign;
  if (text == "gwsr" || text == "wilcoxon") return TestKind::GWSR;
  if (text == "hotelling" || text == "hotelling-t2" || text == "t2") return TestKind::HotellingT2;
  throw Error(ErrorCode::Parse, "unknown test '" + text + "' (expected gwsr, sign or hotelling)");
}

std::string to_string(Calibration::Kind kind) {
  return kind == Calibration::Kind::Asymptotic ? "asymptotic" : "exact";
}

std::optional<int> sign_test_df(const SymmetryGroup& group) {
  const int p = group.dim();
  switch (group.kind()) {
    case GroupKind::Central: return 1;
    case GroupKind::SignChange: return p;
    case GroupKind::Spherical: return p * p;
    case GroupKind::FiniteMatrices: return std::nullopt;
  }
  return std::nullopt;
}

double sign_scalar(const SymmetryGroup& group, const Eigen::MatrixXd& t) {
  const double f2 = t.squaredNorm();
  switch (group.kind()) {
    case GroupKind::Central: return f2 / group.dim();
    case GroupKind::SignChange: return f2;
    case GroupKind::Spherical: return f2 * group.dim();
    case GroupKind::FiniteMatrices: return f2;
  }
  return f2;
}

SignStatistic sign_statistic(const Decomposition& d, const SymmetryGroup& group) {
  const int p = group.dim();
  SignStatistic out;
  out.t = Eigen::MatrixXd::Zero(p, p);
  for (const auto& s : d.signs) s.accumulate_into(out.t);
  if (!d.signs.empty()) out.t /= std::sqrt(static_cast<double>(d.signs.size()));
  out.scalar = sign_scalar(group, out.t);
  return out;
}

GwsrStatistic gwsr_statistic(const Decomposition& d, const ReferenceSet& ref) {
  require_reference_dims(d, ref);
  GwsrStatistic out;
  const Eigen::VectorXd sum = d.signed_ranks.colwise().sum().transpose();
  out.w = ref.score().apply(sum) / std::sqrt(static_cast<double>(d.size()));
  out.scalar = out.w.dot(erd_precision(erd_covariance(ref)) * out.w);
  return out;
}

HotellingResult hotelling_t2(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows();
  const Eigen::Index p = data.cols();
  if (n <= p)
    throw Error(ErrorCode::TooFewObservations, "Hotelling's T^2 needs more observations (" + std::to_string(n) +
                                                   ") than dimensions (" + std::to_string(p) + ")");
  const Eigen::MatrixXd s = sample_covariance(data);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo >= 1e12) throw Error(ErrorCode::SingularCovariance, "sample covariance is singular");
  const Eigen::VectorXd mean = data.colwise().mean().transpose();
  HotellingResult out;
  out.statistic = static_cast<double>(n) * mean.dot(s.ldlt().solve(mean));
  const double dp = static_cast<double>(p);
  const double dn = static_cast<double>(n);
  out.p_asymptotic = special::chi_square_sf(std::max(out.statistic, 0.0), dp);
  out.p_f = special::f_sf(out.statistic * (dn - dp) / (dp * (dn - 1.0)), dp, dn - dp);
  return out;
}

std::vector<double> exact_null(const ReferenceSet& ref, TestKind kind, int replications, std::uint64_t seed,
                               unsigned threads) {
  if (kind == TestKind::HotellingT2)
    throw Error(ErrorCode::Domain, "Hotelling's T^2 has no distribution-free null");
  if (replications < kMinReplications)
    throw Error(ErrorCode::Domain, "exact calibration needs at least " + std::to_string(kMinReplications) +
                                       " Monte-Carlo replications");
  const NullSampler sampler(ref, kind);
  std::vector<double> out(static_cast<std::size_t>(replications));
  const std::size_t chunks = (out.size() + kNullChunk - 1) / kNullChunk;
  // Chunk c always uses the same stream, so the result is thread-count free.
  parallel_for(chunks, threads == 0 ? default_threads() : threads, [&](std::size_t c) {
    Rng rng = make_rng(seed, Stream::Null, c);
    const std::size_t end = std::min(out.size(), (c + 1) * kNullChunk);
    for (std::size_t b = c * kNullChunk; b < end; ++b) out[b] = sampler.draw(rng);
  });
  std::sort(out.begin(), out.end());
  return out;
}

double exact_p_value(const std::vector<double>& sorted_null, double observed) {
  const double threshold = observed - 1e-9 * std::abs(observed) - 1e-12;
  const auto first = std::lower_bound(sorted_null.begin(), sorted_null.end(), threshold);
  const auto count = static_cast<double>(sorted_null.end() - first);
  return (1.0 + count) / (static_cast<double>(sorted_null.size()) + 1.0);
}

double TestReport::chosen_p_value() const {
  if (calibration.kind == Calibration::Kind::Exact && p_exact) return *p_exact;
  if (p_asymptotic) return *p_asymptotic;
  return p_exact.value_or(1.0);
}

PreparedTest::PreparedTest(ReferenceSet ref, TestKind kind, Calibration calibration, double alpha,
                           std::uint64_t seed, unsigned threads)
    : ref_(std::move(ref)), kind_(kind), calibration_(calibration), alpha_(alpha), seed_(seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Domain, "alpha must lie in (0, 1)");
  if (kind_ == TestKind::HotellingT2)
    throw Error(ErrorCode::Domain, "Hotelling's T^2 is run through run_hotelling");
  if (kind_ == TestKind::GeneralizedSign && calibration_.kind == Calibration::Kind::Asymptotic &&
      !sign_test_df(ref_.group()))
    throw Error(ErrorCode::Domain, "the sign test for finite groups only supports exact calibration");
  if (calibration_.kind == Calibration::Kind::Exact)
    null_ = exact_null(ref_, kind_, calibration_.replications, seed_, threads);
}

TestReport PreparedTest::run(const Eigen::MatrixXd& data, const ScoreFunction& score) const {
  PreparedTest copy = *this;
  copy.ref_ = ref_.with_score(score);
  return copy.run(data);
}

TestReport PreparedTest::run(const Eigen::MatrixXd& data) const {
  const Decomposition d = decompose(data, ref_, seed_);
  TestReport r;
  r.kind = kind_;
  r.calibration = calibration_;
  r.alpha = alpha_;
  r.seed = seed_;
  r.n = static_cast<std::size_t>(data.rows());
  r.p = static_cast<int>(data.cols());
  r.group = ref_.group().name();
  r.erd = to_string(ref_.erd());
  r.score = ref_.score().name();
  r.construction = to_string(ref_.construction().kind);
  r.reference_seed = ref_.construction().seed;
  r.tie_flag = d.tie_flag;

  std::optional<int> df;
  if (kind_ == TestKind::GWSR) {
    const GwsrStatistic g = gwsr_statistic(d, ref_);
    r.statistic = g.scalar;
    r.raw = g.w;
    df = ref_.dim();
  } else {
    const SignStatistic s = sign_statistic(d, ref_.group());
    r.statistic = s.scalar;
    r.raw = flatten_rowwise(s.t);
    df = sign_test_df(ref_.group());
  }
  r.df = df.value_or(0);
  if (df) r.p_asymptotic = special::chi_square_sf(std::max(r.statistic, 0.0), *df);
  if (calibration_.kind == Calibration::Kind::Exact) r.p_exact = exact_p_value(null_, r.statistic);
  r.reject = r.chosen_p_value() <= alpha_;
  return r;
}

bool PreparedTest::rejects(const Eigen::MatrixXd& data) const { return run(data).reject; }

TestReport run_hotelling(const Eigen::MatrixXd& data, double alpha, Calibration calibration) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::Domain, "alpha must lie in (0, 1)");
  const HotellingResult h = hotelling_t2(data);
  TestReport r;
  r.kind = TestKind::HotellingT2;
  r.statistic = h.statistic;
  r.raw = data.colwise().mean().transpose();
  r.p_asymptotic = h.p_asymptotic;
  if (calibration.kind == Calibration::Kind::Exact) r.p_exact = h.p_f;
  r.calibration = calibration;
  r.alpha = alpha;
  r.df = static_cast<int>(data.cols());
  r.n = static_cast<std::size_t>(data.rows());
  r.p = static_cast<int>(data.cols());
  r.reject = r.chosen_p_value() <= alpha;
  return r;
}

TestReport run_test(const Eigen::MatrixXd& data, const ReferenceSet& ref, TestKind kind, double alpha,
                    Calibration calibration, std::uint64_t seed, unsigned threads) {
  if (kind == TestKind::HotellingT2) {
    TestReport r = run_hotelling(data, alpha, calibration);
    r.seed = seed;
    r.group = ref.group().name();
    return r;
  }
  return PreparedTest(ref, kind, calibration, alpha, seed, threads).run(data);
}

double sig6(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return std::strtod(buf, nullptr);
}

nlohmann::json to_json(const TestReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(sig6(*v)) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["test"] = to_string(r.kind);
  j["statistic"] = sig6(r.statistic);
  j["raw"] = vector_json(r.raw);
  j["p_asymptotic"] = opt(r.p_asymptotic);
  j["p_exact"] = opt(r.p_exact);
  j["p_value"] = sig6(r.chosen_p_value());
  j["calibration"] = to_string(r.calibration.kind);
  j["B"] = r.calibration.kind == Calibration::Kind::Exact && r.kind != TestKind::HotellingT2
               ? nlohmann::json(r.calibration.replications)
               : nlohmann::json(nullptr);
  j["alpha"] = sig6(r.alpha);
  j["reject"] = r.reject;
  j["df"] = r.df;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["p"] = r.p;
  j["group"] = r.group;
  j["erd"] = r.erd.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.erd);
  j["score"] = r.score.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.score);
  j["reference"] = r.construction.empty()
                       ? nlohmann::json(nullptr)
                       : nlohmann::json{{"construction", r.construction}, {"seed", r.reference_seed}};
  j["tie_flag"] = r.tie_flag;
  return j;
}

}  // namespace otsym
