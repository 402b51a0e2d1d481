#pragma once

#include <functional>
#include <random>

#include "osc/funcspace.hpp"
#include "osc/legendre.hpp"

namespace osc::test {

/// Elementwise L^2(0,L) Legendre projection of f(x) pulled back through each map.
inline PiecewisePoly project_pullback(MeshHandle mesh, int p, int smoothness,
                                      const std::function<cplx(double)> &f, int points = 60) {
  PiecewisePoly v(mesh, p, smoothness);
  const auto &g = gauss_legendre(points);
  for (std::size_t i = 0; i < mesh->size(); ++i) {
    const auto &map = (*mesh)[i].map;
    const double L = map.length();
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(p + 1);
    for (int q = 0; q < points; ++q) {
      const double t = 0.5 * L * (g.nodes[q] + 1.0);
      const Eigen::MatrixXd tab = legendre_table(t, L, p, 0);
      const cplx val = f(map(t));
      for (int r = 0; r <= p; ++r) w[r] += 0.5 * L * g.weights[q] * tab(0, r) * val;
    }
    v.element(i) = w;
  }
  return v;
}

/// Hat function of node j on a uniform mesh.
inline PiecewisePoly hat(MeshHandle mesh, int j) {
  const int n = static_cast<int>(mesh->size());
  const double h = (*mesh)[0].map.length();
  PiecewisePoly v(mesh, 1, 1);
  const double a = 0.5 * std::sqrt(h), b = 0.5 * std::sqrt(h / 3.0);
  v.element(((j - 1) % n + n) % n) << a, b;
  v.element(j % n) << a, -b;
  return v;
}

} // namespace osc::test

namespace osc::test {

/// Re-expresses a spline on a finer mesh by elementwise projection of its values.
inline PiecewisePoly transfer(const PiecewisePoly &v, MeshHandle fine, int smoothness) {
  return project_pullback(fine, v.degree(), smoothness, [&](double x) { return v.evaluate(x); }, 40);
}

inline TrigPoly random_band(std::mt19937_64 &rng, int lo, int hi) {
  std::normal_distribution<double> g;
  TrigPoly u(hi);
  for (int n = lo; n <= hi; ++n) {
    u.set(n, {g(rng), g(rng)});
    if (n != 0) u.set(-n, {g(rng), g(rng)});
  }
  return u * (1.0 / u.l2_norm());
}

} // namespace osc::test
