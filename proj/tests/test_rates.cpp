#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "osc/config.hpp"
#include "osc/error.hpp"
#include "osc/rates.hpp"

using namespace osc;

namespace {

std::vector<RatePoint> law(double c, double rho, std::vector<double> hks) {
  std::vector<RatePoint> pts;
  for (double hk : hks) pts.push_back({hk, c * std::pow(hk, rho)});
  return pts;
}

SweepConfig small() {
  SweepConfig c;
  c.p = {1};
  c.k = {80};
  c.hk = {0.5, 0.25, 0.125};
  c.seeds = 3;
  return c;
}

} // namespace

TEST_CASE("fit_rate on exact power laws") {
  const auto f = fit_rate(law(1.0, 2.0, {0.5, 0.25, 0.125}), 2.0);
  CHECK(std::abs(f.slope - 2.0) < 1e-12);
  const auto g = fit_rate(law(3.0, 4.0, {0.5, 0.35, 0.25, 0.125}), 4.0);
  CHECK(std::abs(g.slope - 4.0) < 1e-12);
  CHECK(g.c_min == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(g.C_max == doctest::Approx(3.0).epsilon(1e-13));
  CHECK(g.c_min <= g.C_max);
  try {
    fit_rate(law(1.0, 2.0, {0.5, 0.4, 0.3}), 2.0);
    FAIL("expected span error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::span);
  }
  CHECK_THROWS_AS(fit_rate(law(1.0, 2.0, {0.5, 0.125}), 2.0), Error);
}

TEST_CASE("judge") {
  RateFit f;
  f.c_min = 1;
  f.C_max = 2;
  f.slope = 2.1;
  CHECK(judge(f, 2, 0.25, 10).pass);
  f.slope = 2.6;
  const auto v = judge(f, 2, 0.25, 10);
  CHECK_FALSE(v.pass);
  REQUIRE(v.reasons.size() == 1);
  CHECK(v.reasons[0] == "slope");
  f.slope = 2.0;
  f.C_max = 30;
  const auto w = judge(f, 2, 0.25, 10);
  CHECK_FALSE(w.pass);
  CHECK(w.reasons == std::vector<std::string>{"constant drift"});
}

TEST_CASE("expected exponents") {
  CHECK(expected_rate(1, 0, 0) == 2);
  CHECK(expected_rate(2, 1, 1) == 2);
  CHECK(expected_rate(1, 1, -1) == 2);
  CHECK(expected_rate(1, 1, -2) == 2);
  CHECK(expected_rate(1, 0, -2) == 4);
  CHECK(expected_rate(1, 0, -1) == 3);
}

TEST_CASE("small sweep") {
  const auto t = run_sweep(small(), 1);
  REQUIRE(t.rows.size() == 9);
  for (const auto &r : t.rows) {
    CHECK(r.ok());
    CHECK(r.bracket_lo == r.bracket_hi);
    CHECK(r.unorm == doctest::Approx(1.0).epsilon(1e-14));
  }
  // Errors decrease with hk for every seed.
  for (std::uint64_t s = 0; s < 3; ++s) {
    std::vector<double> e;
    for (const auto &r : t.rows)
      if (r.seed == s) e.push_back(r.error);
    REQUIRE(e.size() == 3);
    CHECK(e[0] > e[1]);
    CHECK(e[1] > e[2]);
  }
  // Regression values pinned at first build.
  CHECK(t.rows[0].n == 1005);
  CHECK(t.rows[0].error == doctest::Approx(0.0058814237906211573).epsilon(1e-12));
  CHECK(t.rows[8].error == doctest::Approx(0.00034831770976393448).epsilon(1e-12));
  const auto fits = fit_table(t.rows, small());
  REQUIRE(fits.size() == 1);
  CHECK(fits[0].fit.verdict.pass);
  CHECK(fits[0].fit.slope == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("determinism across thread counts and csv round trip") {
  auto cfg = small();
  cfg.eval = {0, -1};
  cfg.m = 1;
  cfg.ell = 1;
  cfg.bracket_N = 8192;
  const auto a = to_csv(run_sweep(cfg, 1).rows), b = to_csv(run_sweep(cfg, 3).rows);
  CHECK(a == b);
  const auto rows = parse_csv(a);
  CHECK(to_csv(rows) == a);
  const auto f1 = fit_table(run_sweep(cfg, 2).rows, cfg), f2 = fit_table(rows, cfg);
  REQUIRE(f1.size() == f2.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    CHECK(f1[i].fit.verdict.pass == f2[i].fit.verdict.pass);
    CHECK(f1[i].fit.slope == f2[i].fit.slope);
  }
  CHECK_THROWS_AS(parse_csv("p,m\n1,2\n"), Error);
}

TEST_CASE("guarded and empty sweeps") {
  auto cfg = small();
  cfg.hk = {1.5, 0.5};
  cfg.upout = true;
  cfg.seeds = 1;
  const auto t = run_sweep(cfg, 1);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].status == "hypothesis-violation");
  CHECK(std::isnan(t.rows[0].error));
  CHECK(t.rows[1].ok());
  CHECK(t.rows[1].lemmas.contains("upout"));
  auto empty = small();
  empty.k.clear();
  CHECK(run_sweep(empty).rows.empty());
  CHECK(fit_table({}, empty).empty());
  CHECK(all_pass({}));
}

TEST_CASE("row failures do not abort the sweep") {
  auto cfg = small();
  cfg.k = {1.0, 80};
  cfg.xi_lo = 0.6;
  cfg.xi_hi = 0.9;
  cfg.seeds = 1;
  const auto t = run_sweep(cfg, 1);
  REQUIRE(t.rows.size() == 6);
  CHECK(t.rows[0].status == "band");
  CHECK(t.rows[3].ok());
}

TEST_CASE("config parsing") {
  const auto c = parse_config_text("space:\n  p: [1]\n");
  CHECK(c.p == std::vector<int>{1});
  CHECK(c.m == 0);
  CHECK(c.ell == 0);
  CHECK(c.eval == std::vector<double>{0.0});
  CHECK(c.xi_lo == 0.5);
  CHECK(c.xi_hi == 1.0);
  CHECK(c.seeds == 5);
  CHECK(c.bracket_N == 2048);
  try {
    parse_config_text("input:\n  xi_lo: 1.0\n  xi_hi: 0.5\n");
    FAIL("expected config error");
  } catch (const Error &e) {
    CHECK(e.kind() == ErrorKind::config);
  }
  try {
    parse_config_text("lemmas:\n  upout: true\nsweep:\n  hk: [0.5, 1.0]\n");
    FAIL("expected config error");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("upout lemma hypothesis") != std::string::npos);
  }
  try {
    parse_config_text("space:\n  p: [1]\n  smoothnes: 1\n");
    FAIL("expected unknown key");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("smoothnes") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("spaces:\n  p: 1\n"), Error);
  CHECK_THROWS_AS(parse_config_text("space:\n  m: one\n"), Error);
  CHECK_THROWS_AS(parse_config_text("space: [\n"), Error);
  CHECK_THROWS_AS(parse_config("/nonexistent/missing.toml"), Error);
}

TEST_CASE("config round trip and hash") {
  SweepConfig c;
  c.p = {0, 2};
  c.m = 1;
  c.ell = 1;
  c.eval = {0, 1, -2};
  c.k = {40.5, 1.0 / 3.0};
  c.hk = {0.5, 0.1 + 0.2};
  c.flavors = {NormFlavor::derivative_sum, NormFlavor::spectral};
  c.input = InputKind::approx;
  c.seed_base = 12345678901234ull;
  c.identities = true;
  c.p = {1, 2};
  validate_config(c);
  const auto text = serialize_config(c);
  CHECK(parse_config_text(text) == c);
  CHECK(config_hash(c) == config_hash(parse_config_text(text)));
  auto d = c;
  d.seeds = 6;
  CHECK(config_hash(c) != config_hash(d));
  CHECK(config_hash(c).size() == 16);
}
