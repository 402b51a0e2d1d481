#include "osc/probe.hpp"

#include <cmath>
#include <map>
#include <utility>

#include "osc/error.hpp"
#include "osc/jet.hpp"
#include "osc/legendre.hpp"

namespace osc {

namespace {

constexpr int panel_points = 24;

cplx ipow(cplx z, int d) {
  cplx r = 1.0;
  for (int i = 0; i < d; ++i) r *= z;
  return r;
}

int max_abs_freq(const std::vector<Mode> &modes) {
  int m = 0;
  for (const auto &md : modes) m = std::max(m, std::abs(md.n));
  return m;
}

} // namespace

NodeSet analytic_nodes(const Element &e, int max_abs_freq) {
  const double L = e.map.length();
  const int panels = 2 + static_cast<int>(std::ceil(max_abs_freq * e.arc_length() / 8.0));
  const auto &g = gauss_legendre(panel_points);
  NodeSet ns;
  ns.t.reserve(panels * panel_points);
  ns.w.reserve(panels * panel_points);
  const double hp = L / panels;
  for (int p = 0; p < panels; ++p) {
    const double a = p * hp;
    for (int i = 0; i < panel_points; ++i) {
      ns.t.push_back(a + 0.5 * hp * (g.nodes[i] + 1.0));
      ns.w.push_back(0.5 * hp * g.weights[i]);
    }
  }
  return ns;
}

Eigen::MatrixXd x_derivative_table(const CoordinateMap &map, double t, int degree, int derivs) {
  const Eigen::MatrixXd tt = legendre_table(t, map.length(), degree, derivs);
  Eigen::MatrixXd out(derivs + 1, degree + 1);
  out.row(0) = tt.row(0);
  if (derivs == 0) return out;
  const auto gd = map.derivatives(t, derivs);
  // Jet of 1/gamma' to order derivs-1.
  Jet gp(derivs - 1);
  {
    double fact = 1.0;
    for (int i = 0; i < derivs; ++i) {
      if (i > 0) fact *= i;
      gp[i] = gd[i + 1] / fact;
    }
  }
  const double s = gp[0] > 0 ? 1.0 : -1.0;
  const Jet inv = (gp * s).reciprocal() * s;
  for (int r = 0; r <= degree; ++r) {
    std::vector<double> dv(derivs + 1);
    for (int d = 0; d <= derivs; ++d) dv[d] = tt(d, r);
    Jet g = Jet::from_derivatives(dv, derivs);
    for (int d = 1; d <= derivs; ++d) {
      Jet next(derivs);
      const Jet dg = g.derivative();
      for (int i = 0; i <= derivs; ++i) next[i] = 0.0;
      // Orders above derivs - d are not needed once d derivatives are taken.
      for (int i = 0; i <= derivs - d; ++i)
        for (int j = 0; i + j <= derivs - d && j < derivs; ++j) next[i + j] += dg[i] * inv[j];
      g = next;
      out(d, r) = g[0];
    }
  }
  return out;
}

Eigen::VectorXcd ElementProbe::trig(int d) const {
  std::vector<cplx> c(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) c[m] = modes_[m].c;
  return trig(d, c);
}

Eigen::VectorXcd ElementProbe::trig(int d, const std::vector<cplx> &coeffs) const {
  if (d > derivs_) throw Error(ErrorKind::smoothness, "probe built for fewer derivatives");
  Eigen::VectorXcd a(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m)
    a[m] = coeffs[m] * ipow(cplx(0.0, modes_[m].n), d) * phase_[m];
  if (modes_.empty()) return Eigen::VectorXcd::Zero(size_);
  return (*base_) * a;
}

Eigen::MatrixXcd ElementProbe::trig_matrix(int d) const {
  if (d > derivs_) throw Error(ErrorKind::smoothness, "probe built for fewer derivatives");
  if (modes_.empty()) return Eigen::MatrixXcd::Zero(size_, 0);
  Eigen::VectorXcd a(modes_.size());
  for (std::size_t m = 0; m < modes_.size(); ++m) a[m] = ipow(cplx(0.0, modes_[m].n), d) * phase_[m];
  return (*base_) * a.asDiagonal();
}

Eigen::MatrixXd ElementProbe::poly_matrix(int d) const {
  if (d > derivs_) throw Error(ErrorKind::smoothness, "probe built for fewer derivatives");
  if (!affine_) return xtables_[d];
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size_, degree_ + 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Identity(degree_ + 1, degree_ + 1);
  const Eigen::MatrixXd D1 = legendre_diff_matrix(degree_, length_) * sigma_;
  for (int i = 0; i < d; ++i) D = D1 * D;
  out.topRows(degree_ + 1) = D;
  return out;
}

Eigen::VectorXcd ElementProbe::poly(int d, const Eigen::VectorXcd &w) const {
  return poly_matrix(d).cast<cplx>() * w;
}

std::vector<ElementProbe> build_probes(const Mesh &mesh, int degree, int derivs,
                                       const std::vector<Mode> &modes) {
  const int nmax = max_abs_freq(modes);
  std::map<std::pair<double, int>, std::shared_ptr<const Eigen::MatrixXcd>> shared;
  std::vector<ElementProbe> probes;
  probes.reserve(mesh.size());
  for (const auto &e : mesh.elements()) {
    ElementProbe pr;
    pr.derivs_ = derivs;
    pr.degree_ = degree;
    pr.modes_ = modes;
    pr.length_ = e.map.length();
    pr.phase_.resize(modes.size());
    if (e.map.kind() == MapKind::affine) {
      pr.affine_ = true;
      pr.sigma_ = e.map.orientation();
      const double L = pr.length_;
      const int D = std::max(degree, expansion_degree(0.5 * nmax * L, degree));
      pr.size_ = D + 1;
      const auto key = std::make_pair(L, e.map.orientation());
      auto it = shared.find(key);
      if (it == shared.end() || it->second->rows() != pr.size_) {
        auto E = std::make_shared<Eigen::MatrixXcd>(pr.size_, modes.size());
        for (std::size_t m = 0; m < modes.size(); ++m) {
          const auto mom = legendre_exp_moments(pr.sigma_ * modes[m].n, L, D);
          for (int r = 0; r <= D; ++r) (*E)(r, m) = mom[r];
        }
        it = shared.insert_or_assign(key, std::move(E)).first;
      }
      pr.base_ = it->second;
      for (std::size_t m = 0; m < modes.size(); ++m)
        pr.phase_[m] = std::polar(1.0, modes[m].n * e.map.offset());
    } else {
      pr.affine_ = false;
      const NodeSet ns = analytic_nodes(e, nmax);
      const int Q = static_cast<int>(ns.t.size());
      pr.size_ = Q;
      auto B = std::make_shared<Eigen::MatrixXcd>(Q, modes.size());
      pr.xtables_.assign(derivs + 1, Eigen::MatrixXd(Q, degree + 1));
      for (int i = 0; i < Q; ++i) {
        const auto gd = e.map.derivatives(ns.t[i], std::max(derivs, 1));
        const double sw = std::sqrt(ns.w[i] * std::abs(gd[1]));
        for (std::size_t m = 0; m < modes.size(); ++m) (*B)(i, m) = sw * std::polar(1.0, modes[m].n * gd[0]);
        const Eigen::MatrixXd xt = x_derivative_table(e.map, ns.t[i], degree, derivs);
        for (int d = 0; d <= derivs; ++d) pr.xtables_[d].row(i) = sw * xt.row(d);
      }
      pr.base_ = std::move(B);
      pr.phase_.setOnes();
    }
    probes.push_back(std::move(pr));
  }
  return probes;
}

} // namespace osc
