#include "otsym/special.hpp"

#include <cmath>
#include <string>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>

#include "otsym/error.hpp"

namespace otsym::special {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::Domain, what);
}

const boost::math::normal_distribution<double> kStdNormal(0.0, 1.0);

}  // namespace

double normal_cdf(double x) {
  require(!std::isnan(x), "normal_cdf: NaN argument");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(kStdNormal, x);
}

double normal_quantile(double u) {
  require(u > 0.0 && u < 1.0, "normal_quantile: u must lie in (0, 1)");
  return boost::math::quantile(kStdNormal, u);
}

double half_normal_quantile(double u) {
  require(u > 0.0 && u < 1.0, "half_normal_quantile: u must lie in (0, 1)");
  // Phi^{-1}((1 + u) / 2), computed from the upper tail to keep precision near 1.
  return boost::math::quantile(boost::math::complement(kStdNormal, (1.0 - u) / 2.0));
}

double chi_square_cdf(double x, double dof) {
  require(dof > 0.0, "chi_square_cdf: dof must be positive");
  require(x >= 0.0, "chi_square_cdf: x must be nonnegative");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::cdf(boost::math::chi_squared_distribution<double>(dof), x);
}

double chi_square_sf(double x, double dof) {
  require(dof > 0.0, "chi_square_sf: dof must be positive");
  require(x >= 0.0, "chi_square_sf: x must be nonnegative");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), x));
}

double chi_square_quantile(double prob, double dof) {
  require(dof > 0.0, "chi_square_quantile: dof must be positive");
  require(prob > 0.0 && prob < 1.0, "chi_square_quantile: prob must lie in (0, 1)");
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), prob);
}

double chi_quantile(double prob, double dof) { return std::sqrt(chi_square_quantile(prob, dof)); }

double chi_cdf(double r, double dof) {
  require(!std::isnan(r), "chi_cdf: NaN argument");
  if (r <= 0.0) return 0.0;
  return chi_square_cdf(r * r, dof);
}

double f_sf(double x, double dof1, double dof2) {
  require(dof1 > 0.0 && dof2 > 0.0, "f_sf: dof must be positive");
  require(!std::isnan(x), "f_sf: NaN argument");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(dof1, dof2), x));
}

}  // namespace otsym::special
