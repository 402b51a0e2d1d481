#include "osc/polyspace.hpp"

#include <cmath>
#include <numbers>

#include "osc/error.hpp"
#include "osc/legendre.hpp"
#include "osc/probe.hpp"

namespace osc {

namespace {

constexpr double rank_tol = 1e-10;
constexpr double ambiguous_tol = 1e-8;

double t_at_left(const Element &e) { return e.reversed ? e.map.length() : 0.0; }
double t_at_right(const Element &e) { return e.reversed ? 0.0 : e.map.length(); }

struct NullSpace {
  int rank = 0;
  double smax = 0.0, kept = 0.0, dropped = 0.0;
};

NullSpace classify(const Eigen::VectorXd &s, const char *where) {
  NullSpace ns;
  ns.smax = s.size() ? s.maxCoeff() : 0.0;
  ns.kept = ns.smax;
  for (int i = 0; i < s.size(); ++i) {
    const double rel = ns.smax > 0 ? s[i] / ns.smax : 0.0;
    if (rel > rank_tol && rel < ambiguous_tol)
      throw Error(ErrorKind::degenerate_space,
                  std::string(where) + ": singular value ratio " + std::to_string(rel) +
                      " inside the ambiguous band (1e-10, 1e-8)");
    if (rel > rank_tol) {
      ++ns.rank;
      ns.kept = std::min(ns.kept, s[i]);
    } else {
      ns.dropped = std::max(ns.dropped, s[i]);
    }
  }
  return ns;
}

void build_dense(Eigen::MatrixXd &basis, SpaceDiagnostics &diag, const Mesh &mesh,
                 int p, int m) {
  const int n = static_cast<int>(mesh.size());
  const int P = p + 1;
  const int cols = n * P;
  if (m == 0) {
    basis = Eigen::MatrixXd::Identity(cols, cols);
    return;
  }
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(n * m, cols);
  for (int i = 0; i < n; ++i) {
    const int i1 = (i + 1) % n;
    const auto &a = mesh[i], &b = mesh[i1];
    const Eigen::MatrixXd ta = x_derivative_table(a.map, t_at_right(a), p, m - 1);
    const Eigen::MatrixXd tb = x_derivative_table(b.map, t_at_left(b), p, m - 1);
    for (int d = 0; d < m; ++d) {
      const int row = i * m + d;
      C.block(row, i * P, 1, P) += ta.row(d);
      C.block(row, i1 * P, 1, P) -= tb.row(d);
      const double nr = C.row(row).norm();
      if (nr > 0) C.row(row) /= nr;
    }
  }
  diag.constraint_rows = n * m;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullV);
  const auto ns = classify(svd.singularValues(), "interface constraints");
  diag.rank = ns.rank;
  diag.sigma_max = ns.smax;
  diag.sigma_min_kept = ns.kept;
  diag.sigma_max_dropped = ns.dropped;
  basis = svd.matrixV().rightCols(cols - ns.rank);
}

} // namespace

std::string to_string(SpaceRoute r) { return r == SpaceRoute::dense ? "dense" : "bloch"; }

Eigen::MatrixXd element_mass(const Element &e, int degree) {
  if (e.map.kind() == MapKind::affine) return Eigen::MatrixXd::Identity(degree + 1, degree + 1);
  const NodeSet ns = analytic_nodes(e, 0);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  for (std::size_t i = 0; i < ns.t.size(); ++i) {
    const Eigen::RowVectorXd phi = legendre_table(ns.t[i], e.map.length(), degree, 0).row(0);
    const double jac = std::abs(e.map.derivatives(ns.t[i], 1)[1]);
    M += ns.w[i] * jac * phi.transpose() * phi;
  }
  return M;
}

SplineSpace build_space(MeshHandle mesh, int p, int m, std::optional<SpaceRoute> route) {
  if (!mesh) throw Error(ErrorKind::invalid_argument, "null mesh");
  if (p < 0) throw Error(ErrorKind::invalid_argument, "negative degree");
  if (m < 0 || m > p + 1)
    throw Error(ErrorKind::invalid_smoothness, "smoothness m=" + std::to_string(m) + " outside 0..p+1");
  for (const auto &e : mesh->elements())
    if (e.map.max_order() < std::max(p, m))
      throw Error(ErrorKind::capability, "map '" + e.map.name() + "' lacks derivatives of order " +
                                             std::to_string(std::max(p, m)));
  SplineSpace s;
  s.mesh_ = mesh;
  s.degree_ = p;
  s.smoothness_ = m;
  s.route_ = route.value_or(mesh->is_uniform_affine() ? SpaceRoute::bloch : SpaceRoute::dense);
  const int n = static_cast<int>(mesh->size());
  const int P = p + 1;
  if (s.route_ == SpaceRoute::dense) {
    build_dense(s.basis_, s.diag_, *mesh, p, m);
    s.dimension_ = static_cast<int>(s.basis_.cols());
    if (s.dimension_ == 0) throw Error(ErrorKind::degenerate_space, "constraint system has a trivial null space");
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(s.dimension_, s.dimension_);
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXd Bi = s.basis_.middleRows(i * P, P);
      G += Bi.transpose() * element_mass((*mesh)[i], p) * Bi;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    s.diag_.gram_condition = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    return s;
  }
  if (!mesh->is_uniform_affine())
    throw Error(ErrorKind::invalid_argument, "the bloch route needs a uniform affine mesh");
  const double h = (*mesh)[0].map.length();
  const Eigen::MatrixXd t0 = legendre_table(0.0, h, p, std::max(m - 1, 0));
  const Eigen::MatrixXd th = legendre_table(h, h, p, std::max(m - 1, 0));
  s.diag_.constraint_rows = n * m;
  s.diag_.sigma_min_kept = INFINITY;
  s.sectors_.reserve(n);
  for (int q = 0; q < n; ++q) {
    const double theta = 2.0 * std::numbers::pi * q / n;
    SplineSpace::Sector sec{q, theta, {}};
    if (m == 0) {
      sec.Z = Eigen::MatrixXcd::Identity(P, P);
    } else {
      Eigen::MatrixXcd C(m, P);
      const cplx ph = std::polar(1.0, theta);
      for (int d = 0; d < m; ++d) C.row(d) = (th.row(d).cast<cplx>() - ph * t0.row(d).cast<cplx>()) * std::pow(h, d);
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C, Eigen::ComputeFullV);
      const auto ns = classify(svd.singularValues(), "sector constraints");
      s.diag_.rank += ns.rank;
      s.diag_.sigma_max = std::max(s.diag_.sigma_max, ns.smax);
      s.diag_.sigma_min_kept = std::min(s.diag_.sigma_min_kept, ns.kept);
      s.diag_.sigma_max_dropped = std::max(s.diag_.sigma_max_dropped, ns.dropped);
      sec.Z = svd.matrixV().rightCols(P - ns.rank);
    }
    s.dimension_ += static_cast<int>(sec.Z.cols());
    s.sectors_.push_back(std::move(sec));
  }
  if (m == 0) s.diag_.sigma_min_kept = 0.0;
  if (s.dimension_ == 0) throw Error(ErrorKind::degenerate_space, "constraint system has a trivial null space");
  return s;
}

PiecewisePoly SplineSpace::basis_function(int i) const {
  if (i < 0 || i >= dimension_) throw Error(ErrorKind::invalid_argument, "basis index out of range");
  const int n = static_cast<int>(mesh_->size());
  if (route_ == SpaceRoute::dense) return from_coefficients(basis_.col(i).cast<cplx>());
  PiecewisePoly v(mesh_, degree_, smoothness_);
  for (const auto &sec : sectors_) {
    if (i >= sec.Z.cols()) {
      i -= static_cast<int>(sec.Z.cols());
      continue;
    }
    const double scale = 1.0 / std::sqrt(double(n));
    for (int j = 0; j < n; ++j) v.element(j) = std::polar(scale, sec.theta * j) * sec.Z.col(i);
    break;
  }
  return v;
}

PiecewisePoly SplineSpace::from_coefficients(const Eigen::VectorXcd &c) const {
  const int P = degree_ + 1;
  if (c.size() != static_cast<Eigen::Index>(mesh_->size()) * P)
    throw Error(ErrorKind::invalid_argument, "coefficient vector must have n(p+1) entries");
  std::vector<Eigen::VectorXcd> w(mesh_->size());
  for (std::size_t i = 0; i < mesh_->size(); ++i) w[i] = c.segment(i * P, P);
  return PiecewisePoly(mesh_, degree_, smoothness_, std::move(w));
}

nlohmann::json SplineSpace::summary() const {
  return {{"p", degree_},
          {"m", smoothness_},
          {"n", mesh_->size()},
          {"dimension", dimension_},
          {"route", to_string(route_)},
          {"basis", "orthonormalized null space of the interface constraints"},
          {"constraint_rows", diag_.constraint_rows},
          {"rank", diag_.rank},
          {"sigma_max", diag_.sigma_max},
          {"sigma_min_kept", diag_.sigma_min_kept},
          {"sigma_max_dropped", diag_.sigma_max_dropped},
          {"gram_condition", diag_.gram_condition}};
}

double interface_jump(const PiecewisePoly &v, int orders) {
  if (orders <= 0) return 0.0;
  const Mesh &mesh = *v.mesh();
  const int n = static_cast<int>(mesh.size());
  const int p = v.degree();
  std::vector<double> jump(orders, 0.0), scale(orders, 0.0);
  for (int i = 0; i < n; ++i) {
    const int i1 = (i + 1) % n;
    const auto &a = mesh[i], &b = mesh[i1];
    const Eigen::MatrixXd ta = x_derivative_table(a.map, t_at_right(a), p, orders - 1);
    const Eigen::MatrixXd tb = x_derivative_table(b.map, t_at_left(b), p, orders - 1);
    for (int d = 0; d < orders; ++d) {
      const cplx va = (ta.row(d).cast<cplx>() * v.element(i))(0);
      const cplx vb = (tb.row(d).cast<cplx>() * v.element(i1))(0);
      jump[d] = std::max(jump[d], std::abs(va - vb));
      scale[d] = std::max({scale[d], std::abs(va), std::abs(vb)});
    }
    // Interior samples keep the scale away from zero when nodal values vanish.
    for (double t : {0.25, 0.5, 0.75}) {
      const Eigen::MatrixXd tt = x_derivative_table(a.map, t * a.map.length(), p, orders - 1);
      for (int d = 0; d < orders; ++d)
        scale[d] = std::max(scale[d], std::abs((tt.row(d).cast<cplx>() * v.element(i))(0)));
    }
  }
  double worst = 0.0;
  for (int d = 0; d < orders; ++d) worst = std::max(worst, scale[d] > 0 ? jump[d] / scale[d] : 0.0);
  return worst;
}

} // namespace osc
