#include "osc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "osc/error.hpp"
#include "osc/jet.hpp"

namespace osc {

CoordinateMap CoordinateMap::affine(double offset, int orientation, double length) {
  if (orientation != 1 && orientation != -1)
    throw Error(ErrorKind::invalid_mesh, "affine orientation must be +1 or -1");
  if (!(length > 0.0)) throw Error(ErrorKind::invalid_mesh, "non-positive element length");
  CoordinateMap m;
  m.kind_ = MapKind::affine;
  m.offset_ = offset;
  m.orientation_ = orientation;
  m.length_ = length;
  return m;
}

CoordinateMap CoordinateMap::analytic(std::string name, double length, int max_order,
                                      DerivativeFn derivs, double inverse_bound) {
  if (!(length > 0.0)) throw Error(ErrorKind::invalid_mesh, "non-positive reference length");
  CoordinateMap m;
  m.kind_ = MapKind::analytic;
  m.name_ = std::move(name);
  m.length_ = length;
  m.max_order_ = max_order;
  m.derivs_ = std::move(derivs);
  m.inverse_bound_ = inverse_bound;
  const auto d0 = m.derivs_(0.0, 1);
  m.offset_ = d0[0];
  m.orientation_ = d0[1] > 0.0 ? 1 : -1;
  return m;
}

double CoordinateMap::operator()(double t) const { return derivatives(t, 0)[0]; }

std::vector<double> CoordinateMap::derivatives(double t, int order) const {
  if (order < 0) throw Error(ErrorKind::invalid_argument, "negative derivative order");
  if (kind_ == MapKind::affine) {
    std::vector<double> d(order + 1, 0.0);
    d[0] = offset_ + orientation_ * t;
    if (order >= 1) d[1] = orientation_;
    return d;
  }
  if (order > max_order_)
    throw Error(ErrorKind::capability, "map '" + name_ + "' has derivatives only to order " +
                                           std::to_string(max_order_));
  return derivs_(t, order);
}

Mesh::Mesh(std::vector<Element> elements, double scale, bool uniform_affine)
    : elements_(std::move(elements)), scale_(scale), uniform_affine_(uniform_affine) {
  if (elements_.empty()) throw Error(ErrorKind::invalid_mesh, "mesh without elements");
  constexpr double tol = 1e-14 * 8;
  double total = 0.0;
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto &e = elements_[i];
    if (!(e.right > e.left)) throw Error(ErrorKind::invalid_mesh, "element with empty arc");
    const auto &next = elements_[(i + 1) % elements_.size()];
    double gap = next.left - e.right;
    if (i + 1 == elements_.size()) gap += 2.0 * std::numbers::pi;
    if (std::abs(gap) > tol) throw Error(ErrorKind::invalid_mesh, "elements do not tile the circle");
    total += e.arc_length();
  }
  if (std::abs(total - 2.0 * std::numbers::pi) > 1e-12)
    throw Error(ErrorKind::invalid_mesh, "element lengths do not sum to 2pi");
}

std::vector<double> Mesh::breakpoints() const {
  std::vector<double> b;
  b.reserve(elements_.size());
  for (const auto &e : elements_) b.push_back(e.left);
  return b;
}

nlohmann::json Mesh::to_json() const {
  nlohmann::json j;
  j["scale"] = scale_;
  j["uniform_affine"] = uniform_affine_;
  j["breakpoints"] = breakpoints();
  auto &els = j["elements"] = nlohmann::json::array();
  for (const auto &e : elements_) {
    nlohmann::json je{{"left", e.left},
                      {"right", e.right},
                      {"reversed", e.reversed},
                      {"reference_length", e.map.length()}};
    if (e.map.kind() == MapKind::affine) {
      je["map"] = {{"kind", "affine"}, {"offset", e.map.offset()}, {"orientation", e.map.orientation()}};
    } else {
      je["map"] = {{"kind", "analytic"}, {"name", e.map.name()}, {"max_order", e.map.max_order()}};
    }
    els.push_back(std::move(je));
  }
  return j;
}

MeshHandle build_uniform_mesh(int n) {
  if (n < 2) throw Error(ErrorKind::invalid_mesh, "uniform mesh needs at least 2 elements");
  const double h = 2.0 * std::numbers::pi / n;
  std::vector<Element> els;
  els.reserve(n);
  for (int j = 0; j < n; ++j) {
    const double left = circle_origin + j * h;
    const double right = j + 1 == n ? circle_origin + 2.0 * std::numbers::pi : circle_origin + (j + 1) * h;
    els.push_back(Element{left, right, CoordinateMap::affine(left, 1, h), false});
  }
  return std::make_shared<const Mesh>(std::move(els), h, true);
}

MeshScale build_uniform_circle_scale(const std::vector<int> &n_list) {
  std::set<int> seen;
  MeshScale scale;
  for (int n : n_list) {
    if (n < 2) throw Error(ErrorKind::invalid_mesh, "element count " + std::to_string(n) + " < 2");
    if (!seen.insert(n).second)
      throw Error(ErrorKind::invalid_mesh, "duplicate element count " + std::to_string(n));
    auto mesh = build_uniform_mesh(n);
    scale.h_grid.push_back(mesh->scale());
    scale.meshes.push_back(std::move(mesh));
  }
  return scale;
}

namespace {

// A(t) = arcsin(1 - t^2) = pi/2 - 2 arcsin(t / sqrt 2), A'(t) = -2 (2 - t^2)^{-1/2}.
std::vector<double> arcsine_branch(double t, int order, double offset, double sign) {
  const int n = std::max(order, 1);
  const Jet tv = Jet::variable(n, t);
  const Jet w = Jet(n, 2.0) - tv * tv;
  const Jet ap = w.pow(-0.5) * -2.0;
  const double a0 = std::numbers::pi / 2 - 2.0 * std::asin(t / std::numbers::sqrt2);
  const Jet a = ap.integral(a0);
  std::vector<double> d(order + 1);
  for (int i = 0; i <= order; ++i) d[i] = sign * a.derivative(i);
  d[0] += offset;
  return d;
}

CoordinateMap branch_map(std::string name, double offset, double sign) {
  return CoordinateMap::analytic(
      std::move(name), 1.0, 6,
      [offset, sign](double t, int order) { return arcsine_branch(t, order, offset, sign); },
      std::numbers::sqrt2 / 2);
}

} // namespace

MeshScale build_counterexample_mesh() {
  const double pi = std::numbers::pi;
  std::vector<Element> els;
  els.push_back(Element{-pi / 2, 0.0, branch_map("gamma1", 0.0, -1.0), false});
  els.push_back(Element{0.0, pi / 2, branch_map("gamma2", 0.0, 1.0), true});
  els.push_back(Element{pi / 2, pi, branch_map("gamma3", pi, -1.0), false});
  els.push_back(Element{pi, 3 * pi / 2, branch_map("gamma4", pi, 1.0), true});
  MeshScale scale;
  scale.h_grid = {1.0};
  scale.meshes.push_back(std::make_shared<const Mesh>(std::move(els), 1.0, false));
  scale.reference_length = 1.0;
  return scale;
}

RegularityReport check_regularity(const Mesh &mesh, int order, double R) {
  constexpr int samples = 1025;
  RegularityReport rep;
  rep.order = order;
  rep.R = R;
  rep.derivative_sups.assign(std::max(order, 0), 0.0);
  for (const auto &e : mesh.elements()) {
    const auto &map = e.map;
    const int need = std::max(order, 1);
    if (need > map.max_order())
      throw Error(ErrorKind::capability, "map '" + map.name() + "' lacks derivatives of order " +
                                             std::to_string(need));
    int sign = 0;
    for (int i = 0; i < samples; ++i) {
      const double t = map.length() * i / (samples - 1);
      const auto d = map.derivatives(t, need);
      for (int j = 1; j <= order; ++j)
        rep.derivative_sups[j - 1] = std::max(rep.derivative_sups[j - 1], std::abs(d[j]));
      const int s = d[1] > 0.0 ? 1 : (d[1] < 0.0 ? -1 : 0);
      if (s == 0 || (sign != 0 && s != sign)) rep.monotone = false;
      if (sign == 0) sign = s;
      rep.inverse_sup = std::max(rep.inverse_sup, d[1] != 0.0 ? 1.0 / std::abs(d[1]) : INFINITY);
    }
  }
  rep.pass = rep.monotone && rep.inverse_sup <= R &&
             std::all_of(rep.derivative_sups.begin(), rep.derivative_sups.end(),
                         [R](double v) { return v <= R; });
  return rep;
}

nlohmann::json to_json(const RegularityReport &r) {
  return {{"order", r.order},         {"derivative_sups", r.derivative_sups},
          {"inverse_sup", r.inverse_sup}, {"R", r.R},
          {"monotone", r.monotone},   {"pass", r.pass}};
}

} // namespace osc
