#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "osc/funcspace.hpp"
#include "osc/mesh.hpp"

namespace osc {

/// Linear sampling of functions on one element such that, for every
/// d <= derivs(),  int_T d^d f conj(d^d g) dx = V_d(f)^T conj(V_d(g)).
/// Affine elements: truncated Legendre expansion in t (dx = dt),
/// exact for splines and accurate to ~1e-17 for the trig modes.
/// Analytic elements: composite Gauss nodes scaled by sqrt(w |gamma'|).
class ElementProbe {
public:
  int derivs() const { return derivs_; }
  int degree() const { return degree_; }
  int size() const { return size_; }

  /// V_d of sum_m c_m e^{i n_m x} over the modes supplied at build time.
  Eigen::VectorXcd trig(int d) const;
  /// V_d of the same modes with replaced coefficients (same order).
  Eigen::VectorXcd trig(int d, const std::vector<cplx> &coeffs) const;
  /// size() x modes: column m is V_d of e^{i n_m x}.
  Eigen::MatrixXcd trig_matrix(int d) const;
  /// size() x (degree+1): V_d of spline coefficients w is poly_matrix(d) * w.
  Eigen::MatrixXd poly_matrix(int d) const;
  Eigen::VectorXcd poly(int d, const Eigen::VectorXcd &w) const;

private:
  friend std::vector<ElementProbe> build_probes(const Mesh &, int, int, const std::vector<Mode> &);
  int derivs_ = 0;
  int degree_ = 0;
  int size_ = 0;
  bool affine_ = true;
  double sigma_ = 1.0;
  double length_ = 1.0;
  std::vector<Mode> modes_;
  /// affine: (size x modes) Legendre moments of e^{i n x}; analytic: weighted node values.
  std::shared_ptr<const Eigen::MatrixXcd> base_;
  Eigen::VectorXcd phase_;
  /// analytic: X_d (size x (degree+1)) weighted x-derivative tables.
  std::vector<Eigen::MatrixXd> xtables_;
};

/// One probe per element; affine elements of equal length and orientation
/// share their moment table.
std::vector<ElementProbe> build_probes(const Mesh &mesh, int degree, int derivs,
                                       const std::vector<Mode> &modes);

/// Composite Gauss nodes on (0, L) for an analytic element: panel count grows
/// with the largest frequency over the arc.
struct NodeSet {
  std::vector<double> t;
  std::vector<double> w;
};
NodeSet analytic_nodes(const Element &e, int max_abs_freq);

/// x-derivative tables at t: row d holds d^d/dx^d phi_r for r = 0..degree.
Eigen::MatrixXd x_derivative_table(const CoordinateMap &map, double t, int degree, int derivs);

} // namespace osc
