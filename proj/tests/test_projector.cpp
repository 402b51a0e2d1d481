#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "osc/error.hpp"
#include "osc/legendre.hpp"
#include "osc/polyspace.hpp"
#include "osc/projector.hpp"
#include "support.hpp"

using namespace osc;
constexpr double pi = std::numbers::pi;
const cplx I1{0.0, 1.0};

namespace {

SobolevParams ds(double k, int ell) { return {k, double(ell), NormFlavor::derivative_sum, 0}; }

double l2_error(int n, int p, int m, int ell, const TrigPoly &u, double k, int eval) {
  const auto s = build_space(build_uniform_mesh(n), p, m);
  return residual_error(u, s, k, ell, ds(k, eval)).lower;
}

} // namespace

TEST_CASE("piecewise constants reproduce element means") {
  const int n = 8;
  const auto mesh = build_uniform_mesh(n);
  const auto s = build_space(mesh, 0, 0);
  const auto u = TrigPoly::mode(4);
  const auto r = project(s, u, 1.0, 0);
  const double h = 2 * pi / n;
  for (int j = 0; j < n; ++j) {
    const double a = -pi / 2 + j * h, b = a + h;
    const cplx mean = (std::exp(I1 * 4.0 * b) - std::exp(I1 * 4.0 * a)) / (4.0 * I1 * h);
    CHECK(std::abs(r.coefficients.evaluate(a + 0.3 * h) - mean) < 1e-10);
  }
  // Residual^2 = ||u||^2 - sum of |mean|^2 h.
  double kept = 0.0;
  for (int j = 0; j < n; ++j) kept += std::norm(r.coefficients.evaluate(-pi / 2 + (j + 0.5) * h)) * h;
  CHECK(r.residual_norm == doctest::Approx(std::sqrt(2 * pi - kept)).epsilon(1e-10));
}

TEST_CASE("hat basis projection matches an assembled Galerkin system") {
  const int n = 6;
  const double k = 2.5;
  const auto mesh = build_uniform_mesh(n);
  const double h = 2 * pi / n, x0 = -pi / 2;
  TrigPoly u(5);
  u.set(3, {0.7, -0.2});
  u.set(-2, {0.1, 0.4});
  u.set(5, {-0.3, 0.0});
  auto node = [&](int j) { return x0 + j * h; };
  for (int ell : {0, 1}) {
    const double kap = ell ? ds(k, 1).derivative_weights()[1] : 0.0;
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
      const int j1 = (j + 1) % n;
      G(j, j) += 2 * h / 3 + 2 * kap / h;
      G(j, j1) += h / 6 - kap / h;
      G(j1, j) += h / 6 - kap / h;
    }
    Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
    const auto &g = gauss_legendre(40);
    for (int e = 0; e < n; ++e)
      for (int q = 0; q < 40; ++q) {
        const double t = 0.5 * h * (g.nodes[q] + 1), w = 0.5 * h * g.weights[q];
        const double x = node(e) + t;
        const cplx v = u.evaluate(x), dv = u.evaluate(x, 1);
        b[e] += w * (v * (1 - t / h) + kap * dv * (-1 / h));
        b[(e + 1) % n] += w * (v * (t / h) + kap * dv * (1 / h));
      }
    const Eigen::VectorXcd c = G.cast<cplx>().ldlt().solve(b);
    for (auto route : {SpaceRoute::bloch, SpaceRoute::dense}) {
      const auto s = build_space(mesh, 1, 1, route);
      const auto Pu = project(s, u, k, ell).coefficients;
      double worst = 0.0;
      for (int e = 0; e < n; ++e)
        for (double f : {0.1, 0.5, 0.9}) {
          const cplx ref = c[e] * (1 - f) + c[(e + 1) % n] * f;
          worst = std::max(worst, std::abs(Pu.evaluate(node(e) + f * h) - ref));
        }
      CHECK(worst < 1e-11);
    }
  }
}

TEST_CASE("sin is reproduced on the counterexample mesh") {
  const auto ce = build_counterexample_mesh().meshes[0];
  const auto s = build_space(ce, 2, 2);
  for (int ell = 0; ell <= 2; ++ell) {
    const auto r = project(s, TrigPoly::sine(), 1.0, ell);
    CHECK(r.residual_norm <= 1e-8);
    CHECK(project(s, TrigPoly::cosine(), 1.0, ell).residual_norm > 0.01);
  }
}

TEST_CASE("projection order cannot exceed smoothness") {
  const auto s = build_space(build_uniform_mesh(8), 2, 1);
  try {
    Projector(s, 1.0, 2);
    FAIL("expected smoothness error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::smoothness);
  }
  const Projector P(s, 1.0, 1);
  CHECK_THROWS_AS(P.residual_error(TrigPoly::sine(), ds(1.0, 2)), Error);
}

TEST_CASE("errors quarter when the mesh halves") {
  const double k = 40;
  const auto u = TrigPoly::mode(40);
  const double r1 = l2_error(640, 1, 1, 0, u, k, 0) / l2_error(1280, 1, 1, 0, u, k, 0);
  CHECK(r1 >= 3.3);
  CHECK(r1 <= 4.7);
  const double r2 = l2_error(640, 2, 1, 1, u, k, 1) / l2_error(1280, 2, 1, 1, u, k, 1);
  CHECK(r2 >= 3.3);
  CHECK(r2 <= 4.7);
  MESSAGE("halving ratios " << r1 << " " << r2);
}

TEST_CASE("projector properties on random bands") {
  std::mt19937_64 rng(11);
  const auto mesh = build_uniform_mesh(10);
  for (int trial = 0; trial < 12; ++trial) {
    const int p = 1 + trial % 3, m = 1 + trial % p, ell = trial % (m + 1);
    const double k = 1.0 + trial;
    const auto s = build_space(mesh, p, m);
    const Projector P(s, k, ell);
    const auto u = test::random_band(rng, 0, 25), v = test::random_band(rng, 3, 30);
    const auto ru = P.project(u), rv = P.project(v);
    const auto lp = ds(k, ell);
    // idempotence
    const auto again = P.project(ru.coefficients);
    double d = 0.0;
    for (std::size_t j = 0; j < mesh->size(); ++j)
      d = std::max(d, (again.element(j) - ru.coefficients.element(j)).cwiseAbs().maxCoeff());
    CHECK(d < 1e-11);
    // self-adjointness
    const cplx a = inner_hk(ru.coefficients, v, lp), b = inner_hk(u, rv.coefficients, lp);
    CHECK(std::abs(a - b) < 1e-10 * (1 + std::abs(a)));
    // Pythagoras
    const double nu = norm_hk(u, lp).lower, npu = norm_hk(ru.coefficients, lp).lower;
    CHECK(nu * nu == doctest::Approx(npu * npu + ru.residual_norm * ru.residual_norm).epsilon(1e-10));
    CHECK(ru.orthogonality_defect < 1e-8);
    // nested spaces never do worse
    const auto fine = build_space(build_uniform_mesh(20), p, m);
    CHECK(Projector(fine, k, ell).project(u).residual_norm <= ru.residual_norm * (1 + 1e-10));
  }
}

TEST_CASE("operator norms") {
  SUBCASE("trig span") {
    CHECK(operator_norm_trig_span(16, 4.0, 0, 0, 16).value == 0.0);
    CHECK(operator_norm_trig_span(8, 4.0, 0, 0, 16).value == doctest::Approx(1.0));
    const auto e = operator_norm_trig_span(8, 4.0, 2, 0, 16);
    CHECK(e.value == doctest::Approx(1.0 / (1.0 + 81.0 / 16.0)));
  }
  SUBCASE("orthogonal projection in L2 has complement norm one") {
    const auto s = build_space(build_uniform_mesh(16), 1, 1);
    const auto e = operator_norm(s, 4.0, 0, 0, 0, 64);
    CHECK(e.value == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(e.lower <= e.upper);
    CHECK(e.stabilized);
  }
  SUBCASE("smoothing norm is small and stable") {
    const auto s = build_space(build_uniform_mesh(64), 1, 1);
    const auto e = operator_norm(s, 10.0, 0, 2, 0, 256);
    CHECK(e.value < 0.2);
    CHECK(e.stabilized);
    CHECK(e.warning.empty());
    const auto neg = operator_norm(s, 10.0, 0, 2, -1, 256);
    CHECK(neg.lower <= neg.upper);
    CHECK(neg.upper <= e.value * (1 + 1e-9));
  }
  SUBCASE("dense and bloch agree") {
    const auto mesh = build_uniform_mesh(6);
    const auto d = build_space(mesh, 2, 1, SpaceRoute::dense), b = build_space(mesh, 2, 1, SpaceRoute::bloch);
    for (double to : {1.0, 0.0, -1.0}) {
      const auto ed = operator_norm(d, 3.0, 1, 2, to, 24, 512), eb = operator_norm(b, 3.0, 1, 2, to, 24, 512);
      CHECK(ed.value == doctest::Approx(eb.value).epsilon(1e-8));
      CHECK(ed.lower == doctest::Approx(eb.lower).epsilon(1e-8));
    }
  }
}

TEST_CASE("projector cache reuses factorizations") {
  const auto s = build_space(build_uniform_mesh(8), 1, 1);
  ProjectorCache cache;
  const auto a = cache.get(s, 2.0, 1), b = cache.get(s, 2.0, 1), c = cache.get(s, 2.0, 0);
  CHECK(a == b);
  CHECK(a != c);
}
