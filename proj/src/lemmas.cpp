#include "osc/lemmas.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "osc/error.hpp"
#include "osc/legendre.hpp"
#include "osc/probe.hpp"

namespace osc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr int rule_points = 20;
constexpr int max_panels = 4096;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

std::vector<cplx> composite(const std::function<void(double, std::vector<cplx> &)> &f, int count, double a,
                            double b, int panels, std::vector<double> &absolute) {
  const auto &g = gauss_legendre(rule_points);
  std::vector<cplx> sum(count, 0.0), val(count);
  absolute.assign(count, 0.0);
  const double hp = (b - a) / panels;
  for (int p = 0; p < panels; ++p)
    for (int i = 0; i < rule_points; ++i) {
      const double w = 0.5 * hp * g.weights[i];
      f(a + p * hp + 0.5 * hp * (g.nodes[i] + 1.0), val);
      for (int c = 0; c < count; ++c) {
        sum[c] += w * val[c];
        absolute[c] += w * std::abs(val[c]);
      }
    }
  return sum;
}

/// Gauss rule for |f|^2 on an affine element where f carries frequencies up to
/// beta / L: panels of half-phase <= 4 and enough points for 1e-18.
std::pair<int, int> affine_rule(double beta) {
  const int panels = std::max(1, static_cast<int>(std::ceil(beta / 8.0)));
  const double bp = beta / panels;
  for (int q = 6; q < 24; q += 2)
    if (2 * q * std::log(std::max(bp, 1e-300)) - std::lgamma(2.0 * q + 1) < std::log(1e-18)) return {panels, q};
  return {panels, 24};
}

/// Coefficients beta_l of d^r/dt^r e^{i n gamma(t)} = r! e^{i n gamma} sum_l beta_l (i n)^l.
std::vector<double> composition_weights(const std::vector<double> &gd, int r) {
  // Series of exp(lambda (gamma(t + tau) - gamma(t))) with polynomial-in-lambda coefficients.
  std::vector<std::vector<double>> b(r + 1, std::vector<double>(r + 1, 0.0));
  b[0][0] = 1.0;
  for (int j = 1; j <= r; ++j)
    for (int i = 1; i <= j; ++i) {
      const double gi = gd[i] / factorial(i);
      for (int l = 0; l < j; ++l) b[j][l + 1] += i * gi * b[j - i][l] / j;
    }
  return b[r];
}

/// sum_n a_n e^{i n x} by stepping powers of e^{ix} through increasing n.
cplx power_sum(const std::vector<Mode> &modes, const std::vector<cplx> &a, double x) {
  if (modes.empty()) return 0.0;
  const cplx z = std::polar(1.0, x);
  cplx w = std::polar(1.0, modes.front().n * x), acc = 0.0;
  int at = modes.front().n;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    for (; at < modes[i].n; ++at) w *= z;
    acc += a[i] * w;
  }
  return acc;
}

double hm_energy(const std::vector<cplx> &vals, int m) {
  double s = 0.0;
  for (int d = 0; d <= m; ++d) s += std::norm(vals[d]);
  return s;
}

} // namespace

Integral adaptive_integrate(const std::function<void(double, std::vector<cplx> &)> &f, int count, double a,
                            double b) {
  std::vector<double> absolute;
  std::vector<cplx> coarse = composite(f, count, a, b, 1, absolute);
  double diff = 0.0;
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    std::vector<cplx> fine = composite(f, count, a, b, panels, absolute);
    diff = 0.0;
    bool converged = true;
    for (int c = 0; c < count; ++c) {
      const double d = std::abs(fine[c] - coarse[c]);
      diff = std::max(diff, d);
      if (d > 1e-13 * absolute[c]) converged = false;
    }
    if (converged) return {fine, diff, panels};
    if (panels == max_panels) {
      for (int c = 0; c < count; ++c)
        if (std::abs(fine[c] - coarse[c]) > 1e-8 * absolute[c])
          throw Error(ErrorKind::accuracy, "quadrature refinements disagree beyond 1e-8");
      return {fine, diff, panels};
    }
    coarse = std::move(fine);
  }
  return {coarse, diff, max_panels};
}

cplx MomentMatch::evaluate(double t, int deriv) const {
  cplx s = 0.0;
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= deriv; --i)
    s = s * t + coeffs[i] * (factorial(i) / factorial(i - deriv));
  return s;
}

MomentMatch moment_match_poly(const JetEvaluator &u, double L, int m, MomentOrder order) {
  if (m < 0) throw Error(ErrorKind::invalid_argument, "moment order must be >= 0");
  if (!(L > 0.0)) throw Error(ErrorKind::invalid_argument, "interval length must be positive");
  MomentMatch r;
  r.m = m;
  r.L = L;
  const Integral I = adaptive_integrate([&](double t, std::vector<cplx> &v) { v = u(t, m); }, m + 1, 0.0, L);
  std::vector<cplx> mu(m + 1);
  for (int j = 0; j <= m; ++j) mu[j] = I.value[j] / L;
  r.quadrature_disagreement = I.disagreement;
  r.coeffs.assign(m + 1, 0.0);
  if (order == MomentOrder::descending) {
    // q = sum a_j t^j / j!; avg of t^r / r! over (0, L) is L^r / (r+1)!.
    std::vector<cplx> a(m + 1);
    for (int j = m; j >= 0; --j) {
      cplx s = mu[j];
      for (int i = j + 1; i <= m; ++i) s -= a[i] * std::pow(L, i - j) / factorial(i - j + 1);
      a[j] = s;
    }
    for (int j = 0; j <= m; ++j) r.coeffs[j] = a[j] / factorial(j);
  } else {
    const auto &g = gauss_legendre(m + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m + 1);
    for (int q = 0; q <= m; ++q) {
      const double t = 0.5 * L * (g.nodes[q] + 1.0);
      A += 0.5 * g.weights[q] * legendre_table(t, L, m, m);
    }
    Eigen::VectorXcd rhs(m + 1);
    for (int j = 0; j <= m; ++j) rhs[j] = mu[j];
    const Eigen::VectorXcd bcoef = A.cast<cplx>().fullPivLu().solve(rhs);
    const Eigen::MatrixXd at0 = legendre_table(0.0, L, m, m);
    for (int j = 0; j <= m; ++j) r.coeffs[j] = (at0.row(j).cast<cplx>() * bcoef)(0) / factorial(j);
  }
  // Independent averages: endpoint differences for j >= 1.
  const auto u0 = u(0.0, m), uL = u(L, m);
  for (int j = 0; j <= m; ++j) {
    const cplx avg_u = j == 0 ? mu[0] : (uL[j - 1] - u0[j - 1]) / L;
    const cplx avg_q = j == 0 ? [&] {
      cplx s = 0.0;
      for (int i = 0; i <= m; ++i) s += r.coeffs[i] * std::pow(L, i) / (i + 1.0);
      return s;
    }()
                              : (r.evaluate(L, j - 1) - r.evaluate(0.0, j - 1)) / L;
    r.defects.push_back(std::abs(avg_u - avg_q) / std::max(1.0, std::abs(avg_u)));
  }
  r.max_defect = *std::max_element(r.defects.begin(), r.defects.end());
  const Integral E = adaptive_integrate(
      [&](double t, std::vector<cplx> &v) {
        const auto d = u(t, m);
        std::vector<cplx> qd(m + 1);
        for (int j = 0; j <= m; ++j) qd[j] = r.evaluate(t, j);
        v = {hm_energy(d, m), hm_energy(qd, m)};
      },
      2, 0.0, L);
  r.norm_ratio = E.value[0].real() > 0 ? std::sqrt(E.value[1].real() / E.value[0].real()) : 0.0;
  return r;
}

double moment_order_agreement(const JetEvaluator &u, double L, int m) {
  const auto a = moment_match_poly(u, L, m, MomentOrder::descending);
  const auto b = moment_match_poly(u, L, m, MomentOrder::system);
  double diff = 0.0, scale = 1.0;
  for (int j = 0; j <= m; ++j) {
    diff = std::max(diff, std::abs(a.coeffs[j] - b.coeffs[j]));
    scale = std::max(scale, std::abs(a.coeffs[j]));
  }
  return diff / scale;
}

TraceReport trace_check(const JetEvaluator &u, double h, double eps) {
  if (!(h > 0.0)) throw Error(ErrorKind::invalid_argument, "element length must be positive");
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorKind::invalid_argument, "need 0 < eps <= 1");
  TraceReport r;
  r.h = h;
  r.eps = eps;
  r.lhs = std::sqrt(std::norm(u(0.0, 0)[0]) + std::norm(u(h, 0)[0]));
  const Integral I = adaptive_integrate(
      [&](double t, std::vector<cplx> &v) {
        const auto d = u(t, 1);
        v = {std::norm(d[0]), std::norm(d[1])};
      },
      2, 0.0, h);
  const double l2 = std::sqrt(I.value[0].real()), grad = h * std::sqrt(I.value[1].real());
  r.rhs_core = (l2 / eps + eps * grad) / std::sqrt(h);
  r.C = r.rhs_core > 0 ? r.lhs / r.rhs_core : 0.0;
  return r;
}

LowOutReport lowout_sum(const TrigPoly &u, const Mesh &mesh, int p, double k, const PiecewisePoly *q) {
  if (p < 0) throw Error(ErrorKind::invalid_argument, "degree must be >= 0");
  if (q && (q->degree() != p || q->size() != mesh.size()))
    throw Error(ErrorKind::invalid_argument, "inserted polynomials must match mesh and degree");
  const int r = p + 1;
  LowOutReport rep;
  rep.p = p;
  rep.k = k;
  const auto modes = u.modes();
  int nmax = 0;
  for (const auto &md : modes) {
    nmax = std::max(nmax, std::abs(md.n));
    rep.parseval += two_pi * std::pow(double(md.n), 2 * r) * std::norm(md.c);
  }
  // Coefficient sets (i n)^l c_n for l = 0..r.
  std::vector<std::vector<cplx>> scaled(r + 1, std::vector<cplx>(modes.size()));
  for (std::size_t i = 0; i < modes.size(); ++i) {
    cplx f = 1.0;
    for (int l = 0; l <= r; ++l) {
      scaled[l][i] = f * modes[i].c;
      f *= cplx(0.0, modes[i].n);
    }
  }
  double worst_insert = 0.0;
  std::vector<double> energies, inserts;
  for (std::size_t e = 0; e < mesh.size(); ++e) {
    const auto &el = mesh[e];
    const auto &map = el.map;
    const double L = map.length();
    NodeSet nodes;
    if (map.kind() == MapKind::affine) {
      const auto [panels, pts] = affine_rule(nmax * L);
      const auto &g = gauss_legendre(pts);
      const double hp = L / panels;
      for (int pn = 0; pn < panels; ++pn)
        for (int i = 0; i < pts; ++i) {
          nodes.t.push_back(pn * hp + 0.5 * hp * (g.nodes[i] + 1.0));
          nodes.w.push_back(0.5 * hp * g.weights[i]);
        }
    } else {
      rep.affine = false;
      nodes = analytic_nodes(el, std::max(nmax, 1));
    }
    double energy = 0.0;
    cplx insert = 0.0;
    for (std::size_t i = 0; i < nodes.t.size(); ++i) {
      const double t = nodes.t[i];
      cplx val;
      if (map.kind() == MapKind::affine) {
        val = std::pow(double(map.orientation()), r) * power_sum(modes, scaled[r], map(t));
      } else {
        const auto gd = map.derivatives(t, r);
        const auto beta = composition_weights(gd, r);
        val = 0.0;
        for (int l = 1; l <= r; ++l)
          if (beta[l] != 0.0) val += beta[l] * power_sum(modes, scaled[l], gd[0]);
        val *= factorial(r);
      }
      energy += nodes.w[i] * std::norm(val);
      if (q) {
        const cplx qv = (legendre_table(t, L, p, r).row(r).cast<cplx>() * q->element(e))(0);
        insert += nodes.w[i] * val * std::conj(val - qv);
      }
    }
    rep.sum += energy;
    energies.push_back(energy);
    inserts.push_back(std::abs(insert - energy));
  }
  const double floor = 1e-12 * rep.sum / std::max<std::size_t>(mesh.size(), 1);
  if (q)
    for (std::size_t e = 0; e < energies.size(); ++e)
      worst_insert = std::max(worst_insert, inserts[e] / std::max({energies[e], floor, 1e-300}));
  rep.insertion_defect = worst_insert;
  const double unorm2 = std::pow(u.l2_norm(), 2);
  rep.ratio = unorm2 > 0 ? rep.sum / (std::pow(k, 2 * r) * unorm2) : 0.0;
  if (rep.affine && rep.parseval > 0) rep.decomposition_defect = std::abs(rep.sum - rep.parseval) / rep.parseval;
  return rep;
}

UpOutReport upout_check(const TrigPoly &u, const Projector &P, int mprime, double eps) {
  const SplineSpace &space = P.space();
  const double h = space.mesh()->scale(), k = P.k();
  if (!(h * k < 1.0)) throw Error(ErrorKind::hypothesis_violation, "upout requires hk < 1");
  if (mprime < 0 || mprime > space.smoothness())
    throw Error(ErrorKind::invalid_argument, "need 0 <= m' <= m");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::invalid_argument, "need 0 < eps < 1");
  UpOutReport rep;
  rep.h = h;
  rep.k = k;
  rep.p = space.degree();
  rep.ell = P.ell();
  rep.mprime = mprime;
  rep.eps = eps;
  const int r = rep.p + 1;
  rep.unorm2 = std::pow(u.l2_norm(), 2);
  rep.lhs = lowout_sum(u, *space.mesh(), rep.p, k).sum;
  rep.term_A = eps * std::pow(1.0 + k * k, r) * rep.unorm2;
  const double err = P.residual_error(u, {1.0, double(mprime), NormFlavor::spectral, 0}).lower;
  rep.term_B = std::pow(h, -2.0 * (r - mprime)) * err * err;
  if (err <= 1e-14 * std::sqrt(rep.unorm2)) {
    rep.degenerate = true;
    rep.C = 0.0;
  } else {
    rep.C = (rep.lhs - rep.term_A) / rep.term_B;
  }
  return rep;
}

FinalChain final_chain(const UpOutReport &up, const LowOutReport &low, double xi_lo, double C) {
  FinalChain f;
  const int r = up.p + 1;
  f.c0 = std::pow(xi_lo, 2 * r);
  f.C = C;
  const double lowbound = f.c0 * std::pow(up.k, 2 * r) * up.unorm2;
  const double hpow = std::pow(up.h, r - up.mprime);
  f.lower_bound = C > 0 ? std::sqrt(std::max(0.0, lowbound - up.term_A) / C) * hpow : 0.0;
  f.error = std::sqrt(up.term_B) * hpow;
  const double tol = 1e-12;
  f.holds = low.sum >= lowbound * (1 - tol) && f.error >= f.lower_bound * (1 - tol);
  return f;
}

namespace {

DualityReport ratio_report(const Projector &P, double s, const OperatorNormEstimate &a,
                           const OperatorNormEstimate &b, bool square) {
  DualityReport rep;
  rep.ell = P.ell();
  rep.s = s;
  rep.lhs = a.value;
  rep.rhs = square ? b.value * b.value : b.value;
  rep.C = rep.rhs > 0 ? rep.lhs / rep.rhs : (rep.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0);
  rep.verified = a.stabilized && b.stabilized;
  for (const auto *w : {&a.warning, &b.warning})
    if (!w->empty()) rep.warning += (rep.warning.empty() ? "" : "; ") + *w;
  return rep;
}

} // namespace

DualityReport duality_check(const Projector &P, double s, int N, int out_N) {
  const int l = P.ell();
  if (s < -l) throw Error(ErrorKind::invalid_argument, "duality needs s >= -l");
  const auto lhs = P.operator_norm(l, -s, N, out_N);
  const auto rhs = P.operator_norm(2.0 * l + s, l, N, out_N);
  return ratio_report(P, s, lhs, rhs, false);
}

DualityReport optimality_chain(const Projector &P, double s, int N, int out_N) {
  const int l = P.ell(), r = P.space().degree() + 1;
  if (s < r - 2 * l) throw Error(ErrorKind::invalid_argument, "optimality chain needs s >= p+1-2l");
  const auto lhs = P.operator_norm(r, -s, N, out_N);
  const auto rhs = P.operator_norm(r, l, N, out_N);
  return ratio_report(P, s, lhs, rhs, true);
}

nlohmann::json to_json(const MomentMatch &r) {
  std::vector<std::array<double, 2>> c;
  for (const auto &v : r.coeffs) c.push_back({v.real(), v.imag()});
  return {{"m", r.m},
          {"L", r.L},
          {"coeffs", c},
          {"defects", r.defects},
          {"max_defect", r.max_defect},
          {"norm_ratio", r.norm_ratio},
          {"quadrature_disagreement", r.quadrature_disagreement}};
}

nlohmann::json to_json(const TraceReport &r) {
  return {{"h", r.h}, {"eps", r.eps}, {"lhs", r.lhs}, {"rhs_core", r.rhs_core}, {"C", r.C}};
}

nlohmann::json to_json(const LowOutReport &r) {
  return {{"p", r.p},
          {"k", r.k},
          {"sum", r.sum},
          {"ratio", r.ratio},
          {"parseval", r.parseval},
          {"affine", r.affine},
          {"decomposition_defect", r.decomposition_defect},
          {"insertion_defect", r.insertion_defect}};
}

nlohmann::json to_json(const UpOutReport &r) {
  return {{"h", r.h},           {"k", r.k},           {"p", r.p},           {"ell", r.ell},
          {"mprime", r.mprime}, {"eps", r.eps},       {"lhs", r.lhs},       {"term_A", r.term_A},
          {"term_B", r.term_B}, {"C", r.C},           {"degenerate", r.degenerate}};
}

nlohmann::json to_json(const FinalChain &r) {
  return {{"c0", r.c0}, {"C", r.C}, {"lower_bound", r.lower_bound}, {"error", r.error}, {"holds", r.holds}};
}

nlohmann::json to_json(const DualityReport &r) {
  return {{"ell", r.ell}, {"s", r.s},           {"lhs", r.lhs},          {"rhs", r.rhs},
          {"C", r.C},     {"verified", r.verified}, {"warning", r.warning}};
}

} // namespace osc
