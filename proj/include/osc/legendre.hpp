#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace osc {

using cplx = std::complex<double>;

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Cached per point count; thread-safe after first construction.
const GaussRule &gauss_legendre(int points);

/// Orthonormal Legendre basis on (0, L):
///   phi_r(t) = sqrt((2r+1)/L) P_r(2t/L - 1).
/// Returns the (derivs+1) x (degree+1) matrix of phi_r^{(d)}(t).
Eigen::MatrixXd legendre_table(double t, double length, int degree, int derivs);

/// Column s holds the orthonormal Legendre coefficients of phi_s'.
/// Strictly upper triangular.
Eigen::MatrixXd legendre_diff_matrix(int degree, double length);

/// Spherical Bessel functions j_0..j_n at x.
/// Series for |x| <= 0.25, upward recurrence when every order is below |x|,
/// Miller's downward recurrence otherwise.
std::vector<double> sph_bessel_array(double x, int n);

/// E_r = int_0^L phi_r(t) e^{i w t} dt for r = 0..degree, evaluated in closed
/// form through  int_{-1}^{1} P_r(s) e^{i z s} ds = 2 i^r j_r(z).
std::vector<cplx> legendre_exp_moments(double omega, double length, int degree);

/// Smallest expansion degree >= min_degree for which the Legendre modes of
/// e^{i w t} on (0,L), |w| L / 2 <= half_phase, below the degree capture the
/// function to about 1e-17 relative.
int expansion_degree(double half_phase, int min_degree);

} // namespace osc
