#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "osc/error.hpp"
#include "osc/funcspace.hpp"
#include "support.hpp"

using namespace osc;
constexpr double pi = std::numbers::pi;

namespace {

TrigPoly random_trig(std::mt19937_64 &rng, int N) {
  std::normal_distribution<double> g;
  TrigPoly u(N);
  for (int n = -N; n <= N; ++n) u.set(n, {g(rng), g(rng)});
  return u;
}

SobolevParams spectral(double k, double s, int bracket = 2048) {
  return {k, s, NormFlavor::spectral, bracket};
}

SobolevParams dsum(double k, int l) { return {k, double(l), NormFlavor::derivative_sum, 2048}; }

// (1/2pi) * (1/M) sum_j f(x_j) e^{-in x_j} on M equispaced points, |n| <= N.
std::vector<cplx> trapezoid_coeffs(const PiecewisePoly &v, int M, int N) {
  std::vector<cplx> samples(M);
  for (int j = 0; j < M; ++j) samples[j] = v.evaluate(circle_origin + 2 * pi * j / M);
  std::vector<cplx> c(2 * N + 1);
  for (int n = 0; n <= N; ++n) {
    cplx sp = 0.0, sm = 0.0;
    const cplx step = std::polar(1.0, -2 * pi * n / M);
    cplx rot = 1.0;
    for (int j = 0; j < M; ++j) {
      sp += samples[j] * rot;
      sm += samples[j] * std::conj(rot);
      rot *= step;
      if (j % 1024 == 1023) rot = std::polar(1.0, -2 * pi * double(n) * (j + 1) / M);
    }
    const cplx ph = std::polar(1.0, -n * circle_origin);
    c[N + n] = sp * ph / double(M);
    c[N - n] = sm * std::conj(ph) / double(M);
  }
  return c;
}

} // namespace

TEST_CASE("single mode norms") {
  const double k = 7.0;
  const auto u = TrigPoly::mode(7);
  for (double s : {-2.0, -0.5, 0.0, 1.0, 3.0})
    CHECK(std::pow(norm_hk(u, spectral(k, s)).lower, 2) == doctest::Approx(2 * pi * std::pow(2.0, s)).epsilon(1e-14));
  const double kb2 = 1 + k * k;
  CHECK(std::pow(norm_hk(u, dsum(k, 1)).lower, 2) == doctest::Approx(2 * pi * (1 + k * k / kb2)).epsilon(1e-14));
  CHECK(norm_hk(u, dsum(k, 1)).is_exact());
}

TEST_CASE("flavor and truncation errors") {
  const auto u = TrigPoly::mode(3);
  SobolevParams p{2.0, 1.5, NormFlavor::derivative_sum, 2048};
  try {
    norm_hk(u, p);
    FAIL("expected invalid flavor");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::invalid_flavor);
  }
  const auto mesh = build_uniform_mesh(8);
  const auto v = test::hat(mesh, 1);
  try {
    norm_hk(v, spectral(2.0, -1.0, 0));
    FAIL("expected missing truncation");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::missing_truncation);
  }
  try {
    norm_hk(v, dsum(2.0, 2));
    FAIL("expected smoothness");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::smoothness);
  }
  CHECK_THROWS_AS(parse_flavor("sobolev"), Error);
  CHECK(parse_flavor("spectral_multiplier") == NormFlavor::spectral);
}

TEST_CASE("hat spline negative norm bracket matches the trapezoid oracle") {
  const auto mesh = build_uniform_mesh(8);
  const auto v = test::hat(mesh, 3);
  const auto b = norm_hk(v, spectral(4.0, -1.0));
  CHECK(b.lower <= b.upper);
  CHECK(b.relative_width() < 1e-3);
  const int N = 2048;
  const auto oracle = trapezoid_coeffs(v, 1 << 16, N);
  double partial = 0.0, weighted = 0.0;
  for (int n = -N; n <= N; ++n) {
    const double a = std::norm(oracle[n + N]);
    partial += a;
    weighted += std::pow(1 + std::pow(n / 4.0, 2), -1.0) * a;
  }
  CHECK(std::sqrt(2 * pi * weighted) == doctest::Approx(b.lower).epsilon(1e-9));
  // The oracle's full mass (tail included) sits inside the bracket.
  const double mass = 2 * pi * partial;
  const double tail = std::pow(norm_hk(v, spectral(4.0, 0.0)).lower, 2) - mass;
  // Trapezoid aliasing limits the oracle mass to about 1e-8 relative.
  CHECK(tail >= -1e-8 * mass);
  const auto exact = fourier_of_spline(v, 64);
  for (int n = -64; n <= 64; ++n) CHECK(std::abs(exact.coeffs.coef(n) - oracle[n + N]) < 1e-9);
  const double upper_oracle = std::sqrt(2 * pi * weighted + std::max(tail, 0.0) * std::pow(1 + std::pow(N / 4.0, 2), -1.0));
  CHECK(upper_oracle <= b.upper * (1 + 1e-8));
  CHECK(upper_oracle >= b.lower);
}

TEST_CASE("inner products") {
  const auto u = TrigPoly::mode(1);
  CHECK(std::abs(inner_hk(u, u, dsum(1.0, 0)) - 2 * pi) < 1e-14);
  for (int l = 0; l <= 3; ++l)
    CHECK(std::abs(inner_hk(TrigPoly::mode(3), TrigPoly::mode(-2), dsum(5.0, l))) == 0.0);
  const auto mesh = build_uniform_mesh(8);
  PiecewisePoly ind(mesh, 0, 0);
  ind.element(2)[0] = std::sqrt(pi / 4);
  const auto f = TrigPoly::mode(4);
  const cplx got = inner_hk(f, ind, dsum(4.0, 0));
  // int_0^{pi/4} e^{4ix} dx by 10^4-point midpoint rule refined to Gauss.
  cplx oracle = 0.0;
  const auto &g = gauss_legendre(40);
  for (int i = 0; i < 40; ++i) {
    const double x = pi / 8 * (g.nodes[i] + 1.0);
    oracle += pi / 8 * g.weights[i] * std::polar(1.0, 4 * x);
  }
  CHECK(std::abs(got - oracle) < 1e-12);
  CHECK(std::abs(got - (std::polar(1.0, pi) - 1.0) / cplx(0, 4)) < 1e-12);
  CHECK(std::abs(inner_hk(ind, f, dsum(4.0, 0)) - std::conj(got)) < 1e-15);
}

TEST_CASE("fourier of splines") {
  const auto mesh = build_uniform_mesh(8);
  PiecewisePoly one(mesh, 2, 2);
  for (std::size_t i = 0; i < 8; ++i) one.element(i)[0] = std::sqrt(pi / 4);
  const auto s = fourier_of_spline(one, 16);
  CHECK(std::abs(s.coeffs.coef(0) - 1.0) < 1e-15);
  for (int n = 1; n <= 16; ++n) {
    CHECK(std::abs(s.coeffs.coef(n)) < 1e-15);
    CHECK(std::abs(s.coeffs.coef(-n)) < 1e-15);
  }
  CHECK(std::abs(s.tail_mass) < 1e-12);

  const auto v = test::hat(mesh, 2);
  std::vector<double> tails;
  for (int N : {64, 128, 256, 512}) tails.push_back(fourier_of_spline(v, N).tail_mass);
  for (std::size_t i = 0; i < tails.size(); ++i) {
    CHECK(tails[i] >= 0.0);
    if (i) CHECK(tails[i] <= tails[i - 1]);
  }
  const double slope = std::log(tails[2] / tails[0]) / std::log(4.0);
  CHECK(slope == doctest::Approx(-3.0).epsilon(0.1));

  // x on element 3 only, against the antiderivative e^{-inx}(ix/n + 1/n^2).
  const double h = pi / 4, x0 = (*mesh)[3].left, x1 = (*mesh)[3].right;
  PiecewisePoly lin(mesh, 1, 0);
  lin.element(3) << (x0 + h / 2) * std::sqrt(h), h / 2 * std::sqrt(h / 3);
  std::vector<Element> els = mesh->elements();
  const auto generic = std::make_shared<const Mesh>(els, h, false);
  const PiecewisePoly lin_generic(generic, 1, 0, lin.coeffs());
  const auto a = fourier_of_spline(lin, 40), b = fourier_of_spline(lin_generic, 40);
  for (int n = -40; n <= 40; ++n) {
    cplx exact;
    if (n == 0) {
      exact = (x1 * x1 - x0 * x0) / 2;
    } else {
      auto F = [n](double x) { return std::polar(1.0, -n * x) * (cplx(0, x / n) + 1.0 / (double(n) * n)); };
      exact = F(x1) - F(x0);
    }
    exact /= 2 * pi;
    CHECK(std::abs(a.coeffs.coef(n) - exact) < 1e-15);
    CHECK(std::abs(b.coeffs.coef(n) - exact) < 1e-15);
  }
}

TEST_CASE("fourier of a spline on analytic coordinates") {
  const auto mesh = build_counterexample_mesh().meshes[0];
  const auto v = test::project_pullback(mesh, 2, 2, [](double x) { return cplx(std::sin(x)); });
  const auto s = fourier_of_spline(v, 6);
  CHECK(std::abs(s.coeffs.coef(1) - cplx(0, -0.5)) < 1e-13);
  CHECK(std::abs(s.coeffs.coef(-1) - cplx(0, 0.5)) < 1e-13);
  CHECK(std::abs(s.coeffs.coef(0)) < 1e-13);
  CHECK(std::abs(s.tail_mass) < 1e-12);
  CHECK(std::abs(v.evaluate(0.3) - std::sin(0.3)) < 1e-13);
  CHECK(std::abs(norm_hk_difference(TrigPoly::sine(), v, dsum(1.0, 2)).lower) < 1e-12);
}

TEST_CASE("property: parseval and flavor equivalence for random trig polys") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const double k = 1.0 + 30.0 * std::uniform_real_distribution<double>()(rng);
    const int N = std::max(1, int(2 * k * std::uniform_real_distribution<double>()(rng)));
    const auto u = random_trig(rng, N);
    CHECK(norm_hk(u, spectral(k, 0.0)).lower == doctest::Approx(u.l2_norm()).epsilon(1e-13));
    for (int l = 0; l <= 4; ++l) {
      const double ratio = norm_hk(u, dsum(k, l)).lower / norm_hk(u, spectral(k, l)).lower;
      CHECK(ratio >= 1.0 / 8);
      CHECK(ratio <= 8.0);
      const double n2 = std::pow(norm_hk(u, dsum(k, l)).lower, 2);
      CHECK(std::abs(inner_hk(u, u, dsum(k, l)) - n2) <= 1e-12 * n2);
    }
  }
}

TEST_CASE("property: inner products and differences on splines") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial % 9;
    const auto mesh = build_uniform_mesh(n);
    const int p = trial % 4;
    const double k = 1.0 + trial;
    PiecewisePoly v(mesh, p, p);
    for (std::size_t i = 0; i < mesh->size(); ++i)
      for (int r = 0; r <= p; ++r) v.element(i)[r] = {g(rng), g(rng)};
    const auto u = random_trig(rng, 2 + trial);
    for (int l = 0; l <= p; ++l) {
      for (auto fl : {NormFlavor::derivative_sum, NormFlavor::spectral}) {
        const SobolevParams prm{k, double(l), fl, 2048};
        const double nv = norm_hk(v, prm).lower;
        CHECK(std::abs(inner_hk(v, v, prm) - nv * nv) <= 1e-12 * nv * nv);
        // ||u - v||^2 = ||u||^2 - 2 Re<u,v> + ||v||^2
        const double nu = norm_hk(u, prm).lower;
        const double expect = nu * nu - 2 * inner_hk(u, v, prm).real() + nv * nv;
        const double got = std::pow(norm_hk_difference(u, v, prm).lower, 2);
        CHECK(got == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("property: spline tail mass is non-negative and non-increasing") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 10; ++trial) {
    const auto mesh = build_uniform_mesh(4 + trial);
    PiecewisePoly v(mesh, 2, 0);
    for (std::size_t i = 0; i < mesh->size(); ++i)
      for (int r = 0; r <= 2; ++r) v.element(i)[r] = {g(rng), g(rng)};
    double prev = INFINITY;
    for (int N : {8, 16, 32, 64, 128}) {
      const double t = fourier_of_spline(v, N).tail_mass;
      CHECK(t >= -1e-12);
      CHECK(t <= prev + 1e-12);
      prev = t;
    }
  }
}

TEST_CASE("trig poly basics") {
  const auto s = TrigPoly::sine();
  CHECK(s.real_flag());
  CHECK(s.real_defect() < 1e-14);
  CHECK(std::abs(s.evaluate(0.7) - std::sin(0.7)) < 1e-15);
  CHECK(std::abs(s.evaluate(0.7, 1) - std::cos(0.7)) < 1e-15);
  CHECK(s.l2_norm() == doctest::Approx(std::sqrt(pi)));
  CHECK(TrigPoly::mode(3, cplx(0, 1)).real_defect() > 0.5);
  CHECK_THROWS_AS(TrigPoly(2, std::vector<cplx>(3), false), Error);
}
