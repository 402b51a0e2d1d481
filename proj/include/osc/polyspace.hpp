#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "osc/funcspace.hpp"
#include "osc/mesh.hpp"

namespace osc {

enum class SpaceRoute {
  /// Global constraint matrix over all elements; any coordinates.
  dense,
  /// Uniform affine meshes: the space splits into n translation sectors
  /// theta_q = 2 pi q / n, each spanned by w_j = e^{i theta_q j} Z_q y / sqrt(n).
  bloch,
};

struct SpaceDiagnostics {
  int constraint_rows = 0;
  int rank = 0;
  double sigma_max = 0.0;
  /// Smallest singular value kept as nonzero, and largest treated as zero.
  double sigma_min_kept = 0.0;
  double sigma_max_dropped = 0.0;
  double gram_condition = 1.0;
};

/// S^{p,m}: pullbacks of degree <= p, x-derivatives of orders < m continuous.
class SplineSpace {
public:
  struct Sector {
    int q;
    double theta;
    /// (p+1) x d_q orthonormal null space of the cell constraints.
    Eigen::MatrixXcd Z;
  };

  const MeshHandle &mesh() const { return mesh_; }
  int degree() const { return degree_; }
  int smoothness() const { return smoothness_; }
  int dimension() const { return dimension_; }
  SpaceRoute route() const { return route_; }
  const SpaceDiagnostics &diagnostics() const { return diag_; }

  /// dense: n(p+1) x dim, orthonormal columns; element i occupies rows i(p+1)..
  const Eigen::MatrixXd &basis() const { return basis_; }
  /// bloch: all n sectors in order q = 0..n-1.
  const std::vector<Sector> &sectors() const { return sectors_; }

  /// i-th basis function; bloch numbering runs through sectors in order.
  PiecewisePoly basis_function(int i) const;
  /// dense: n(p+1) stacked coefficients to a spline of this space.
  PiecewisePoly from_coefficients(const Eigen::VectorXcd &c) const;

  nlohmann::json summary() const;

private:
  friend SplineSpace build_space(MeshHandle, int, int, std::optional<SpaceRoute>);
  MeshHandle mesh_;
  int degree_ = 0;
  int smoothness_ = 0;
  int dimension_ = 0;
  SpaceRoute route_ = SpaceRoute::dense;
  SpaceDiagnostics diag_;
  Eigen::MatrixXd basis_;
  std::vector<Sector> sectors_;
};

/// Uniform affine meshes use the bloch route unless a route is forced.
SplineSpace build_space(MeshHandle mesh, int p, int m, std::optional<SpaceRoute> route = std::nullopt);

/// ||f - Q f||_{L^2}, Q the L^2-orthogonal projection onto the space.
double membership_residual(const SplineSpace &space, const TrigPoly &f);

/// Largest jump of x-derivatives of orders < smoothness across all nodes.
double interface_jump(const PiecewisePoly &v, int orders);

/// Element block of the real L^2 Gram matrix in the local Legendre basis
/// (identity on affine elements).
Eigen::MatrixXd element_mass(const Element &e, int degree);

std::string to_string(SpaceRoute r);

} // namespace osc
