#pragma once

// Distribution functions used for calibration and reference construction.
// All functions validate their arguments and throw Error(Domain) otherwise.

namespace otsym::special {

double normal_cdf(double x);
double normal_quantile(double u);

/// CDF of |Z| for Z standard normal: 2*Phi(x) - 1.
double half_normal_quantile(double u);

double chi_square_cdf(double x, double dof);
double chi_square_sf(double x, double dof);
/// Lower quantile: returns q with P(chi2_dof <= q) = prob.
double chi_square_quantile(double prob, double dof);

/// Quantile and CDF of the chi distribution, i.e. of the norm of a
/// dof-dimensional standard Gaussian vector.
double chi_quantile(double prob, double dof);
double chi_cdf(double r, double dof);

/// Upper tail of the F distribution.
double f_sf(double x, double dof1, double dof2);

}  // namespace otsym::special
