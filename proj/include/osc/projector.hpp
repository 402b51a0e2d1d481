#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "osc/funcspace.hpp"
#include "osc/polyspace.hpp"

namespace osc {

struct ProjectionResult {
  PiecewisePoly coefficients;
  double gram_condition = 1.0;
  /// max_b |<u - Pu, b>| / (max(||u - Pu||, 1e-6 ||u||) ||b||), H_k^l inner product.
  double orthogonality_defect = 0.0;
  double residual_norm = 0.0;
  double u_norm = 0.0;
};

struct OperatorNormEstimate {
  double from_order = 0.0;
  double to_order = 0.0;
  int N = 0;
  double k = 0.0;
  double h = 0.0;
  /// Bracket on the largest singular value at N; value is its upper end.
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;
  double value_half = 0.0;
  bool stabilized = true;
  std::string warning;
};

/// H_k^l-orthogonal projection onto a space (derivative_sum Gram), with the
/// factorizations of the Gram matrix computed once.
class Projector {
public:
  Projector(const SplineSpace &space, double k, int ell);
  ~Projector();
  Projector(Projector &&) noexcept;

  const SplineSpace &space() const { return space_; }
  double k() const { return k_; }
  int ell() const { return ell_; }
  double gram_condition() const;

  ProjectionResult project(const TrigPoly &u) const;
  /// Projection of a spline on the same mesh and degree.
  PiecewisePoly project(const PiecewisePoly &v) const;

  /// ||(I - P)u|| in the given norm; eval.order >= 0 needs eval.order <= m,
  /// negative orders are bracketed.
  NormBracket residual_error(const TrigPoly &u, const SobolevParams &eval) const;

  /// Largest singular value of D_to (I - P) D_from^{-1} on span{e^{inx}, |n| <= N}
  /// with D_s = (1 + (n/k)^2)^{s/2}; output frequencies for negative `to` run
  /// to max(N, out_N) with the remaining mass bracketed.
  OperatorNormEstimate operator_norm(double from, double to, int N, int out_N = 2048) const;

private:
  struct Impl;
  const SplineSpace &space_;
  double k_;
  int ell_;
  std::unique_ptr<Impl> impl_;

  std::pair<double, double> section_norm(double from, double to, int N, int out_N) const;
};

ProjectionResult project(const SplineSpace &space, const TrigPoly &u, double k, int ell);
NormBracket residual_error(const TrigPoly &u, const SplineSpace &space, double k, int ell,
                           const SobolevParams &eval);
OperatorNormEstimate operator_norm(const SplineSpace &space, double k, int ell, double from, double to,
                                   int N, int out_N = 2048);

/// Same estimate for P the orthogonal projection onto span{e^{inx}, |n| <= span_N}.
OperatorNormEstimate operator_norm_trig_span(int span_N, double k, double from, double to, int N);

/// Shared read access to projectors keyed by (space, k, l).
class ProjectorCache {
public:
  std::shared_ptr<const Projector> get(const SplineSpace &space, double k, int ell);

private:
  std::shared_mutex mutex_;
  std::map<std::tuple<const SplineSpace *, double, int>, std::shared_ptr<const Projector>> cache_;
};

} // namespace osc
