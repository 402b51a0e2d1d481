#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <thread>

#include "osc/error.hpp"
#include "osc/oscillator.hpp"
#include "osc/projector.hpp"

using namespace osc;
constexpr double two_pi = 2 * std::numbers::pi;

TEST_CASE("band support and certificate") {
  auto [u, cert] = random_oscillating(100, 0.5, 1.0, 7);
  CHECK(cert.pass);
  CHECK(cert.orders == default_orders());
  CHECK(u.l2_norm() == doctest::Approx(1.0).epsilon(1e-14));
  for (const auto &m : u.modes()) {
    CHECK(std::abs(m.n) >= 50);
    CHECK(std::abs(m.n) <= 100);
  }
  const auto six = validate_oscillation(u, 50, 100, {0, 1, 2, 3, 4, 5, 6});
  CHECK(six.pass);
  CHECK(six.projection_defect == 0.0);
}

TEST_CASE("narrow band is a single normalized mode pair") {
  auto [u, cert] = random_oscillating(10, 0.99, 1.0, 3);
  const auto ms = u.modes();
  REQUIRE(ms.size() == 2);
  CHECK(ms[0].n == -10);
  CHECK(ms[1].n == 10);
  auto [r, rc] = random_oscillating(10, 0.99, 1.0, 3, true);
  CHECK(r.real_defect() < 1e-15);
  CHECK(rc.pass);
}

TEST_CASE("empty band and invalid edges") {
  try {
    random_oscillating(10, 0.51, 0.59, 1);
    FAIL("expected band error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::band);
  }
  CHECK_THROWS_AS(random_oscillating(10, 1.0, 0.5, 1), Error);
}

TEST_CASE("validation of single modes") {
  const double k = 100;
  const auto in = TrigPoly::mode(int(std::ceil(0.7 * k)));
  CHECK(validate_oscillation(in, 50, 100, default_orders()).pass);
  const auto above = validate_oscillation(TrigPoly::mode(120), 50, 100, {2});
  CHECK_FALSE(above.pass);
  CHECK(above.worst_ratio == doctest::Approx((1 + 120.0 * 120) / (1 + 100.0 * 100)));
  const auto below = validate_oscillation(TrigPoly::mode(30), 50, 100, {0});
  CHECK_FALSE(below.pass);
  CHECK(below.projection_defect == doctest::Approx(std::sqrt(two_pi)));
}

TEST_CASE("seeded draws are reproducible across threads") {
  const auto ref = random_oscillating(80, 0.5, 1.0, 42).first;
  // Regression pinned at first build.
  CHECK(std::abs(ref.coef(40) - cplx(0.0013285051607762179, -0.071397433403584287)) < 1e-16);
  CHECK(std::abs(ref.coef(-57) - cplx(0.0012302805955214239, -0.021188249357299366)) < 1e-16);
  std::vector<TrigPoly> got(4);
  std::vector<std::thread> ts;
  for (int t = 0; t < 4; ++t) ts.emplace_back([&, t] { got[t] = random_oscillating(80, 0.5, 1.0, 42).first; });
  for (auto &t : ts) t.join();
  for (const auto &g : got) CHECK(g.coeffs() == ref.coeffs());
  CHECK(random_oscillating(80, 0.5, 1.0, 43).first.coeffs() != ref.coeffs());
}

TEST_CASE("every generated function passes for orders up to 10") {
  for (std::uint64_t seed = 0; seed < 30; ++seed)
    for (double k : {2.0, 17.0, 40.0, 160.0}) {
      const auto [u, cert] = random_oscillating(k, 0.5, 1.0, seed, seed % 2 == 0);
      CHECK(cert.pass);
      CHECK(validate_oscillation(u, 0.5 * k, k, default_orders()).pass);
    }
}

TEST_CASE("approximate oscillation") {
  SUBCASE("J = 8") {
    auto [u, cert] = approx_oscillating(100, 0.25, {8}, 5);
    CHECK(cert.pass);
    CHECK(cert.C.size() == 9);
    CHECK(cert.C[0] == 1.0);
    CHECK(cert.leakage == doctest::Approx(1e-16).epsilon(1e-10));
    CHECK(u.l2_norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("leakage equals k^-J") {
    auto [u, cert] = approx_oscillating(50, 0.25, {4}, 9);
    CHECK(cert.leakage == doctest::Approx(std::pow(50.0, -4)).epsilon(1e-12));
    for (const auto &m : u.modes())
      if (std::abs(m.n) < 25) CHECK(std::abs(m.n) < 12.5);
    CHECK(cert.pass);
  }
  SUBCASE("bulk is the band-limited draw") {
    const auto a = approx_oscillating(60, 0.25, {8}, 11).first;
    const auto b = random_oscillating(60, 0.5, 1.0, 11).first;
    for (int n = 30; n <= 60; ++n) CHECK(a.coef(n) == b.coef(n));
  }
  SUBCASE("profile errors") {
    try {
      approx_oscillating(50, 0.25, {0}, 1);
      FAIL("expected profile error");
    } catch (const Error &e) {
      CHECK(e.kind() == ErrorKind::profile);
    }
    CHECK_THROWS_AS(approx_oscillating(50, 0.75, {8}, 1), Error);
    CHECK_THROWS_AS(approx_oscillating(50, 1.0, {8}, 1), Error);
  }
  SUBCASE("leaky input barely moves the projection error") {
    const double k = 40;
    const auto a = approx_oscillating(k, 0.25, {8}, 3).first;
    const auto b = random_oscillating(k, 0.5, 1.0, 3).first;
    const int n = int(std::lround(two_pi * k / 0.5));
    const auto s = build_space(build_uniform_mesh(n), 1, 1);
    const SobolevParams l2{k, 0.0, NormFlavor::derivative_sum, 0};
    const double ea = residual_error(a, s, k, 0, l2).lower, eb = residual_error(b, s, k, 0, l2).lower;
    CHECK(std::abs(ea / a.l2_norm() - eb / b.l2_norm()) <= 1e-3 * eb);
  }
  SUBCASE("certificate rejects large leakage") {
    TrigPoly u = random_oscillating(50, 0.5, 1.0, 2).first + TrigPoly::mode(3, 1e-3);
    CHECK_FALSE(validate_approx_oscillation(u, 50, 0.25, approx_constants(1.0, 4)).pass);
  }
}

TEST_CASE("certificates serialize") {
  const auto c = random_oscillating(40, 0.5, 1.0, 1).second;
  const auto j = to_json(c);
  CHECK(j["pass"] == true);
  CHECK(j["a"] == 20.0);
}
