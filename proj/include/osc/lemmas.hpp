#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "osc/funcspace.hpp"
#include "osc/polyspace.hpp"
#include "osc/projector.hpp"

namespace osc {

/// Returns u(t), u'(t), ..., u^{(order)}(t).
using JetEvaluator = std::function<std::vector<cplx>(double t, int order)>;

struct Integral {
  std::vector<cplx> value;
  /// max |I_{2P} - I_P| over components at the accepted refinement.
  double disagreement = 0.0;
  int panels = 0;
};

/// Composite 20-point Gauss-Legendre on (a, b), doubling the panel count until
/// successive estimates agree to 1e-13 of the integrand scale. A final
/// disagreement above 1e-8 of the scale raises ErrorKind::accuracy.
Integral adaptive_integrate(const std::function<void(double, std::vector<cplx> &)> &f, int count, double a,
                            double b);

enum class MomentOrder {
  /// Fix the order-j averages from j = m down to 0 with t^j / j!.
  descending,
  /// Solve the full (m+1) x (m+1) average system in the Legendre basis.
  system,
};

/// q of degree m with (1/L) int_0^L d^j (u - q) = 0 for j = 0..m.
struct MomentMatch {
  int m = 0;
  double L = 1.0;
  /// q(t) = sum_j coeffs[j] t^j.
  std::vector<cplx> coeffs;
  /// |avg d^j u - avg d^j q| / max(1, |avg d^j u|), with avg d^j u taken from
  /// endpoint values for j >= 1 (independent of the construction quadrature).
  std::vector<double> defects;
  double max_defect = 0.0;
  /// ||q||_{H^m(0,L)} / ||u||_{H^m(0,L)}.
  double norm_ratio = 0.0;
  double quadrature_disagreement = 0.0;

  cplx evaluate(double t, int deriv = 0) const;
};

MomentMatch moment_match_poly(const JetEvaluator &u, double L, int m, MomentOrder order = MomentOrder::descending);

/// Max coefficient difference of the two constructions over max(1, |coeffs|).
double moment_order_agreement(const JetEvaluator &u, double L, int m);

struct TraceReport {
  double h = 0.0;
  double eps = 0.0;
  /// (|u(0)|^2 + |u(h)|^2)^{1/2}.
  double lhs = 0.0;
  /// h^{-1/2} (eps^{-1} ||u|| + eps ||h u'||) on (0, h).
  double rhs_core = 0.0;
  double C = 0.0;
};

/// 0 < eps <= 1.
TraceReport trace_check(const JetEvaluator &u, double h, double eps);

struct LowOutReport {
  int p = 0;
  double k = 0.0;
  /// sum_T ||d_t^{p+1} (u o gamma_T)||^2 in reference coordinates.
  double sum = 0.0;
  /// sum / (k^{2(p+1)} ||u||^2).
  double ratio = 0.0;
  /// 2 pi sum_n n^{2(p+1)} |c_n|^2.
  double parseval = 0.0;
  bool affine = true;
  /// |sum - parseval| / parseval on affine meshes, else 0.
  double decomposition_defect = 0.0;
  /// max_T |<d^{p+1} u_T, d^{p+1} (u_T - q_T)> - ||d^{p+1} u_T||^2| / scale, when q is given.
  double insertion_defect = 0.0;
};

/// q, when given, is any spline of degree p on the mesh (only its elementwise
/// polynomials are used).
LowOutReport lowout_sum(const TrigPoly &u, const Mesh &mesh, int p, double k,
                        const PiecewisePoly *q = nullptr);

struct UpOutReport {
  double h = 0.0;
  double k = 0.0;
  int p = 0;
  int ell = 0;
  int mprime = 0;
  double eps = 0.0;
  double unorm2 = 0.0;
  double lhs = 0.0;
  /// eps <k>^{2(p+1)} ||u||^2.
  double term_A = 0.0;
  /// h^{-2(p+1-m')} ||(I-P)u||^2_{H^{m'}}, unweighted spectral H^{m'} norm.
  double term_B = 0.0;
  /// (lhs - term_A) / term_B.
  double C = 0.0;
  /// (I-P)u vanishes: C is undefined and lhs must vanish too.
  bool degenerate = false;
};

/// hk >= 1 raises ErrorKind::hypothesis_violation.
UpOutReport upout_check(const TrigPoly &u, const Projector &P, int mprime, double eps);

/// Lower bound on ||(I-P)u||_{H^{m'}} forced by the lowout bound with c0 = xi_lo^{2(p+1)}
/// and the upout bound with constant C.
struct FinalChain {
  double c0 = 0.0;
  double C = 0.0;
  double lower_bound = 0.0;
  double error = 0.0;
  bool holds = false;
};

FinalChain final_chain(const UpOutReport &up, const LowOutReport &low, double xi_lo, double C);

struct DualityReport {
  int ell = 0;
  double s = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double C = 0.0;
  bool verified = true;
  std::string warning;
};

/// lhs = ||I-P||_{l -> -s}, rhs = ||I-P||_{2l+s -> l}; needs s >= -l.
DualityReport duality_check(const Projector &P, double s, int N, int out_N = 2048);

/// lhs = ||I-P||_{p+1 -> -s}, rhs = ||I-P||_{p+1 -> l}^2; needs s >= p+1-2l.
DualityReport optimality_chain(const Projector &P, double s, int N, int out_N = 2048);

nlohmann::json to_json(const MomentMatch &r);
nlohmann::json to_json(const TraceReport &r);
nlohmann::json to_json(const LowOutReport &r);
nlohmann::json to_json(const UpOutReport &r);
nlohmann::json to_json(const FinalChain &r);
nlohmann::json to_json(const DualityReport &r);

} // namespace osc
