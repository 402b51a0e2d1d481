#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "osc/error.hpp"
#include "osc/lemmas.hpp"
#include "osc/oscillator.hpp"

using namespace osc;
constexpr double pi = std::numbers::pi;
const cplx I1{0.0, 1.0};

namespace {

/// sum_j a_j e^{i w_j t}: smooth with closed-form derivatives.
JetEvaluator exp_sum(std::vector<cplx> a, std::vector<double> w) {
  return [a, w](double t, int order) {
    std::vector<cplx> d(order + 1, 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) {
      cplx f = a[j] * std::exp(I1 * w[j] * t);
      for (int i = 0; i <= order; ++i) {
        d[i] += f;
        f *= I1 * w[j];
      }
    }
    return d;
  };
}

JetEvaluator poly(std::vector<cplx> c) {
  return [c](double t, int order) {
    std::vector<cplx> d(order + 1, 0.0);
    for (int i = 0; i <= order; ++i)
      for (std::size_t j = i; j < c.size(); ++j) {
        double f = 1.0;
        for (std::size_t q = j; q > j - i; --q) f *= double(q);
        d[i] += c[j] * f * std::pow(t, double(j - i));
      }
    return d;
  };
}

} // namespace

TEST_CASE("adaptive quadrature") {
  const auto I = adaptive_integrate([](double t, std::vector<cplx> &v) { v = {std::sin(t), std::exp(I1 * 30.0 * t)}; },
                                    2, 0.0, pi);
  CHECK(std::abs(I.value[0] - 2.0) < 1e-14);
  CHECK(std::abs(I.value[1] - (std::exp(I1 * 30.0 * pi) - 1.0) / (30.0 * I1)) < 1e-14);
  try {
    adaptive_integrate([](double t, std::vector<cplx> &v) { v = {1.0 / std::sqrt(std::abs(t - 1.0 / 3))}; }, 1, 0.0,
                       1.0);
    FAIL("expected accuracy error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::accuracy);
  }
}

TEST_CASE("moment matching examples") {
  const auto x = moment_match_poly(poly({0.0, 1.0}), 1.0, 1);
  CHECK(std::abs(x.coeffs[0]) < 1e-14);
  CHECK(std::abs(x.coeffs[1] - 1.0) < 1e-14);
  for (int m = 0; m <= 4; ++m) {
    const auto c = moment_match_poly(poly({2.5}), 0.7, m);
    CHECK(std::abs(c.coeffs[0] - 2.5) < 1e-14);
    for (int j = 1; j <= m; ++j) CHECK(std::abs(c.coeffs[j]) < 1e-13);
  }
  const auto s = moment_match_poly([](double t, int o) {
    std::vector<cplx> d(o + 1);
    for (int i = 0; i <= o; ++i) d[i] = std::sin(t + i * pi / 2);
    return d;
  }, pi, 0);
  CHECK(std::abs(s.coeffs[0] - 2.0 / pi) < 1e-14);
  CHECK_THROWS_AS(moment_match_poly(poly({1.0}), 0.0, 1), Error);
}

TEST_CASE("moment matching on random smooth inputs") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-1, 1);
  double worst = 0.0, agree = 0.0, ratio = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = trial % 5;
    const double L = 0.1 + 2.9 * (U(rng) + 1) / 2;
    std::vector<cplx> a;
    std::vector<double> w;
    for (int j = 0; j < 4; ++j) {
      a.push_back({U(rng), U(rng)});
      w.push_back(8 * U(rng));
    }
    const auto u = exp_sum(a, w);
    const auto q = moment_match_poly(u, L, m);
    worst = std::max(worst, q.max_defect);
    agree = std::max(agree, moment_order_agreement(u, L, m));
    ratio = std::max(ratio, q.norm_ratio);
  }
  MESSAGE("defect " << worst << " agreement " << agree << " norm ratio " << ratio);
  CHECK(worst <= 1e-10);
  CHECK(agree <= 1e-10);
  CHECK(std::isfinite(ratio));
}

TEST_CASE("polynomials are their own match") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int m = 0; m <= 4; ++m)
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<cplx> c(m + 1);
      for (auto &v : c) v = {U(rng), U(rng)};
      const double L = 0.5 + trial * 0.3;
      for (auto order : {MomentOrder::descending, MomentOrder::system}) {
        const auto q = moment_match_poly(poly(c), L, m, order);
        for (int j = 0; j <= m; ++j) CHECK(std::abs(q.coeffs[j] - c[j]) <= 1e-12);
      }
    }
}

TEST_CASE("scaled trace inequality") {
  const auto one = poly({1.0});
  const auto t1 = trace_check(one, 0.3, 1.0);
  CHECK(t1.lhs == doctest::Approx(std::sqrt(2.0)));
  CHECK(t1.C == doctest::Approx(std::sqrt(2.0)).epsilon(1e-13));
  CHECK(trace_check(one, 0.3, 0.5).C == doctest::Approx(std::sqrt(2.0) * 0.5).epsilon(1e-13));
  CHECK_THROWS_AS(trace_check(one, 0.3, 0.0), Error);
  CHECK_THROWS_AS(trace_check(one, 0.3, 1.5), Error);
  const double k = 40, h = pi / 16;
  const auto s = exp_sum({-0.5 * I1, 0.5 * I1}, {k, -k});
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) worst = std::max(worst, trace_check(s, h, 0.1 * i).C);
  MESSAGE("trace constant over eps " << worst);
  CHECK(worst <= 3.0);
  // u(2x) on (0, h/2) carries the same constant.
  const auto s2 = exp_sum({-0.5 * I1, 0.5 * I1}, {2 * k, -2 * k});
  for (double eps : {0.2, 0.7})
    CHECK(trace_check(s2, h / 2, eps).C == doctest::Approx(trace_check(s, h, eps).C).epsilon(1e-3));
}

TEST_CASE("lowout sum and identities on affine meshes") {
  const double k = 40;
  const auto mesh = build_uniform_mesh(97);
  const auto single = lowout_sum(TrigPoly::mode(40), *mesh, 1, k);
  CHECK(single.ratio == doctest::Approx(1.0).epsilon(1e-12));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto u = random_oscillating(k, 0.5, 1.0, seed).first;
    for (int p = 0; p <= 2; ++p) {
      const auto space = build_space(mesh, p, std::min(p, 1));
      const auto q = project(space, u, k, 0).coefficients;
      const auto r = lowout_sum(u, *mesh, p, k, &q);
      CHECK(r.affine);
      CHECK(r.ratio >= std::pow(0.5, 2 * (p + 1)));
      CHECK(r.decomposition_defect <= 1e-10);
      CHECK(r.insertion_defect <= 1e-10);
    }
  }
}

TEST_CASE("lowout sum through analytic coordinates") {
  const auto ce = build_counterexample_mesh().meshes[0];
  // sin o gamma_T = +-(1 - t^2) on every element.
  const auto r2 = lowout_sum(TrigPoly::sine(), *ce, 1, 1.0);
  CHECK_FALSE(r2.affine);
  CHECK(r2.sum == doctest::Approx(16.0).epsilon(1e-12));
  CHECK(lowout_sum(TrigPoly::sine(), *ce, 2, 1.0).sum < 1e-20);
  try {
    lowout_sum(TrigPoly::sine(), *ce, 6, 1.0);
    FAIL("expected capability error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::capability);
  }
}

TEST_CASE("upout pairing bound") {
  const double k = 80;
  const auto u = random_oscillating(k, 0.5, 1.0, 4).first;
  std::vector<double> C;
  for (double hk : {0.5, 0.25, 0.125}) {
    const int n = int(std::lround(2 * pi * k / hk));
    const auto space = build_space(build_uniform_mesh(n), 1, 0);
    const Projector P(space, k, 0);
    const auto up = upout_check(u, P, 0, 0.1);
    CHECK_FALSE(up.degenerate);
    CHECK(up.C > 0);
    C.push_back(up.C);
    const auto low = lowout_sum(u, *space.mesh(), 1, k);
    CHECK(final_chain(up, low, 0.5, up.C).holds);
  }
  const double spread = *std::max_element(C.begin(), C.end()) / *std::min_element(C.begin(), C.end());
  MESSAGE("upout constants " << C[0] << " " << C[1] << " " << C[2]);
  CHECK(spread <= 3.0);
  const auto coarse = build_space(build_uniform_mesh(200), 1, 0);
  try {
    upout_check(u, Projector(coarse, k, 0), 0, 0.1);
    FAIL("expected hypothesis violation");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::hypothesis_violation);
  }
  const auto fine = build_space(build_uniform_mesh(1200), 1, 1);
  const auto deg = upout_check(TrigPoly::mode(0, 2.0), Projector(fine, k, 0), 1, 0.1);
  CHECK(deg.degenerate);
  CHECK(deg.lhs == 0.0);
}

TEST_CASE("duality and the optimality chain") {
  const double k = 40;
  const int n = int(std::lround(2 * pi * k / 0.5));
  const auto s00 = build_space(build_uniform_mesh(n), 1, 0);
  const auto d00 = duality_check(Projector(s00, k, 0), 0, 256);
  CHECK(std::abs(d00.C - 1.0) <= 1e-10);
  const auto s11 = build_space(build_uniform_mesh(n), 1, 1);
  const Projector P(s11, k, 1);
  // Aliased inputs feed the H^1 projection through nodal values, so the
  // section tail decays only like 1/N.
  const auto d11 = duality_check(P, 1, 8192);
  MESSAGE("duality (1,1) " << d11.C);
  CHECK(d11.verified);
  CHECK(d11.C <= 4.0);
  CHECK(d11.C > 0.0);
  for (double s : {1.0, 2.0}) {
    const auto ch = optimality_chain(P, s, 2048);
    MESSAGE("chain s=" << s << " " << ch.C);
    CHECK(ch.verified);
    CHECK(ch.C <= 4.0);
  }
  CHECK_THROWS_AS(duality_check(P, -2, 64), Error);
  CHECK_THROWS_AS(optimality_chain(Projector(s00, k, 0), 1, 64), Error);
}
