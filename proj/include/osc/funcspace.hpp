#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osc/mesh.hpp"

namespace osc {

using cplx = std::complex<double>;

struct Mode {
  int n;
  cplx c;
};

/// u(x) = sum_{|n| <= N} c_n e^{inx}.
class TrigPoly {
public:
  TrigPoly() : TrigPoly(0) {}
  explicit TrigPoly(int max_freq, bool real_flag = false);
  TrigPoly(int max_freq, std::vector<cplx> coeffs, bool real_flag);

  /// c e^{inx}.
  static TrigPoly mode(int n, cplx c = 1.0);
  static TrigPoly sine();
  static TrigPoly cosine();

  int max_freq() const { return N_; }
  bool real_flag() const { return real_; }
  const std::vector<cplx> &coeffs() const { return c_; }

  /// Zero outside -N..N.
  cplx coef(int n) const { return std::abs(n) <= N_ ? c_[n + N_] : cplx{}; }
  void set(int n, cplx c);

  /// Nonzero coefficients in increasing n.
  std::vector<Mode> modes() const;

  cplx evaluate(double x, int deriv = 0) const;
  /// 2 pi sum |c_n|^2, then the root.
  double l2_norm() const;
  /// max |c_{-n} - conj(c_n)| / max |c_n|; 0 for the zero polynomial.
  double real_defect() const;

  TrigPoly operator+(const TrigPoly &o) const;
  TrigPoly operator-(const TrigPoly &o) const;
  TrigPoly operator*(cplx s) const;

private:
  int N_;
  std::vector<cplx> c_;
  bool real_;
};

enum class NormFlavor { derivative_sum, spectral };

std::string to_string(NormFlavor f);
NormFlavor parse_flavor(const std::string &s);

struct SobolevParams {
  double k = 1.0;
  double order = 0.0;
  NormFlavor flavor = NormFlavor::derivative_sum;
  int bracket_N = 2048;

  double kbracket() const;
  bool integer_order() const;
  /// Weights w_d with ||f||^2 = sum_d w_d ||d^d f||^2; integer order >= 0 only.
  /// derivative_sum: w_0 = 1, w_d = <k>^{-2 order} for 1 <= d <= order.
  /// spectral: w_d = binom(order, d) k^{-2d}.
  std::vector<double> derivative_weights() const;
  /// The weights of either flavor for integer order >= 0.
  std::vector<double> energy_weights() const;
  /// Spectral weight of e^{inx}; the squared norm is 2 pi sum weight |c_n|^2.
  double spectral_weight(int n) const;
};

struct NormBracket {
  double lower = 0.0;
  double upper = 0.0;

  static NormBracket exact(double v) { return {v, v}; }
  double mid() const { return 0.5 * (lower + upper); }
  bool is_exact() const { return lower == upper; }
  /// (upper - lower) / upper; 0 when upper is 0.
  double relative_width() const;
};

/// Per element, degree p coefficients in the orthonormal Legendre basis of
/// (0, L_T); `smoothness` certifies x-derivatives of orders <= it in L^2.
class PiecewisePoly {
public:
  PiecewisePoly(MeshHandle mesh, int degree, int smoothness);
  PiecewisePoly(MeshHandle mesh, int degree, int smoothness, std::vector<Eigen::VectorXcd> coeffs);

  const MeshHandle &mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int smoothness() const { return smoothness_; }
  std::size_t size() const { return coeffs_.size(); }

  const Eigen::VectorXcd &element(std::size_t i) const { return coeffs_[i]; }
  Eigen::VectorXcd &element(std::size_t i) { return coeffs_[i]; }
  const std::vector<Eigen::VectorXcd> &coeffs() const { return coeffs_; }

  /// d^j/dt^j of v o gamma_T at reference point t.
  cplx evaluate_local(std::size_t elem, double t, int tderiv = 0) const;
  /// Value at circle point x.
  cplx evaluate(double x) const;

  PiecewisePoly operator+(const PiecewisePoly &o) const;
  PiecewisePoly operator-(const PiecewisePoly &o) const;
  PiecewisePoly operator*(cplx s) const;

private:
  MeshHandle mesh_;
  int degree_;
  int smoothness_;
  std::vector<Eigen::VectorXcd> coeffs_;
};

struct SplineSpectrum {
  TrigPoly coeffs;
  /// ||v||^2 - 2 pi sum_{|n| <= N} |c_n|^2.
  double tail_mass = 0.0;
};

NormBracket norm_hk(const TrigPoly &f, const SobolevParams &params);
NormBracket norm_hk(const PiecewisePoly &f, const SobolevParams &params);
/// ||u - v|| without forming the difference coefficient by coefficient.
NormBracket norm_hk_difference(const TrigPoly &u, const PiecewisePoly &v, const SobolevParams &params);

cplx inner_hk(const TrigPoly &f, const TrigPoly &g, const SobolevParams &params);
cplx inner_hk(const TrigPoly &f, const PiecewisePoly &g, const SobolevParams &params);
cplx inner_hk(const PiecewisePoly &f, const TrigPoly &g, const SobolevParams &params);
cplx inner_hk(const PiecewisePoly &f, const PiecewisePoly &g, const SobolevParams &params);

SplineSpectrum fourier_of_spline(const PiecewisePoly &v, int N);

/// c_n = (1/2pi) int v e^{-inx} for the listed n.
std::vector<cplx> spline_fourier_coeffs(const PiecewisePoly &v, const std::vector<int> &freqs);

/// Squared L^2 norms of d^d v for d = 0..derivs.
std::vector<double> spline_derivative_energies(const PiecewisePoly &v, int derivs);

} // namespace osc
