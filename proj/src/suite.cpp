#include "osc/suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "osc/error.hpp"
#include "osc/lemmas.hpp"
#include "osc/mesh.hpp"
#include "osc/oscillator.hpp"
#include "osc/polyspace.hpp"
#include "osc/projector.hpp"

namespace osc {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
const cplx I1{0.0, 1.0};

SobolevParams ds(double k, int order) { return {k, double(order), NormFlavor::derivative_sum, 0}; }

int resolve_n(double k, double hk) { return static_cast<int>(std::lround(two_pi * k / hk)); }

/// sum_j a_j e^{i w_j t} with closed-form derivatives.
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

JetEvaluator monomials(std::vector<cplx> c) {
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

JetEvaluator random_smooth(std::mt19937_64 &rng, double scale) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<cplx> a;
  std::vector<double> w;
  for (int j = 0; j < 4; ++j) {
    a.push_back({U(rng), U(rng)});
    w.push_back(scale * U(rng));
  }
  return exp_sum(a, w);
}

double spread(const std::vector<double> &v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi / *lo;
}

double max_abs_diff(const PiecewisePoly &a, const PiecewisePoly &b) {
  double d = 0.0, scale = 1.0;
  for (std::size_t j = 0; j < a.mesh()->size(); ++j) {
    d = std::max(d, (a.element(j) - b.element(j)).cwiseAbs().maxCoeff());
    scale = std::max(scale, a.element(j).cwiseAbs().maxCoeff());
  }
  return d / scale;
}

} // namespace

nlohmann::json to_json(const SuiteResult &r) { return {{"name", r.name}, {"pass", r.pass}, {"detail", r.detail}}; }

bool all_pass(const std::vector<SuiteResult> &results) {
  return std::all_of(results.begin(), results.end(), [](const SuiteResult &r) { return r.pass; });
}

SuiteResult counterexample_suite() {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r{"counterexample"};
  const auto space = build_space(build_counterexample_mesh().meshes[0], 2, 2);
  const double sin_res = membership_residual(space, TrigPoly::sine());
  const double cos_res = membership_residual(space, TrigPoly::cosine());
  bool pass = sin_res <= 1e-8 && cos_res >= 0.01;
  nlohmann::json proj = nlohmann::json::array();
  for (int ell = 0; ell <= 2; ++ell) {
    const double e = residual_error(TrigPoly::sine(), space, 1.0, ell, ds(1.0, 0)).upper;
    pass = pass && e <= 1e-8;
    proj.push_back({{"ell", ell}, {"l2_residual", e}});
  }
  r.pass = pass;
  r.detail = {{"dimension", space.dimension()},
              {"sin_membership", sin_res},
              {"cos_membership", cos_res},
              {"projection", proj},
              {"seconds", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  return r;
}

SuiteResult moment_suite(int trials, std::uint64_t seed) {
  SuiteResult r{"moment_matching"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  double defect = 0.0, agree = 0.0, ratio = 0.0, reproduce = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int m = trial % 5;
    const double L = 0.1 + 1.45 * (U(rng) + 1);
    const auto u = random_smooth(rng, 8.0);
    const auto q = moment_match_poly(u, L, m);
    defect = std::max(defect, q.max_defect);
    agree = std::max(agree, moment_order_agreement(u, L, m));
    ratio = std::max(ratio, q.norm_ratio);
  }
  for (int m = 0; m <= 4; ++m) {
    std::vector<cplx> c;
    for (int j = 0; j <= m; ++j) c.push_back({U(rng), U(rng)});
    const double L = 0.1 + 1.45 * (U(rng) + 1);
    for (auto order : {MomentOrder::descending, MomentOrder::system}) {
      const auto q = moment_match_poly(monomials(c), L, m, order);
      for (int j = 0; j <= m; ++j) reproduce = std::max(reproduce, std::abs(q.coeffs[j] - c[j]));
    }
  }
  r.pass = defect <= 1e-10 && agree <= 1e-10 && reproduce <= 1e-12 && std::isfinite(ratio);
  r.detail = {{"trials", trials},
              {"max_defect", defect},
              {"order_agreement", agree},
              {"max_norm_ratio", ratio},
              {"polynomial_reproduction", reproduce}};
  return r;
}

SuiteResult trace_suite(int trials, std::uint64_t seed, double spread_tol) {
  SuiteResult r{"trace"};
  std::mt19937_64 rng(seed);
  const std::vector<double> hs{0.5, 0.25, 0.125}, epss{0.1, 0.5, 1.0};
  std::vector<double> worst(hs.size(), 0.0);
  for (int trial = 0; trial < trials; ++trial) {
    const auto u = random_smooth(rng, 8.0);
    for (std::size_t i = 0; i < hs.size(); ++i)
      for (double eps : epss) worst[i] = std::max(worst[i], trace_check(u, hs[i], eps).C);
  }
  const double sp = spread(worst);
  r.pass = std::all_of(worst.begin(), worst.end(), [](double c) { return std::isfinite(c) && c > 0; }) &&
           sp <= spread_tol;
  r.detail = {{"trials", trials}, {"h", hs}, {"eps", epss}, {"max_C", worst}, {"spread", sp}};
  return r;
}

SuiteResult identity_suite(const std::vector<SweepRow> &rows) {
  SuiteResult r{"identities"};
  double decomposition = 0.0, insertion = 0.0, min_margin = std::numeric_limits<double>::infinity();
  int checked = 0, missing = 0, ratio_fail = 0;
  for (const auto &row : rows) {
    if (!row.ok() || !row.lemmas.contains("identities")) {
      ++missing;
      continue;
    }
    const auto &id = row.lemmas["identities"];
    ++checked;
    decomposition = std::max(decomposition, id["decomposition_defect"].get<double>());
    insertion = std::max(insertion, id["insertion_defect"].get<double>());
    const double ratio = id["ratio"].get<double>(), bound = id["ratio_bound"].get<double>();
    min_margin = std::min(min_margin, ratio / bound);
    if (!(id["affine"].get<bool>() && ratio >= bound)) ++ratio_fail;
  }
  r.pass = missing == 0 && checked > 0 && ratio_fail == 0 && decomposition <= 1e-10 && insertion <= 1e-10;
  r.detail = {{"rows", checked},
              {"missing", missing},
              {"max_decomposition_defect", decomposition},
              {"max_insertion_defect", insertion},
              {"ratio_failures", ratio_fail},
              {"min_ratio_over_bound", min_margin}};
  return r;
}

SuiteResult upout_suite(const std::vector<SweepRow> &rows, double spread_tol) {
  SuiteResult r{"upout"};
  std::map<std::pair<int, int>, std::vector<double>> groups;
  int missing = 0, degenerate = 0;
  bool finite = true;
  for (const auto &row : rows) {
    if (!row.ok() || !row.lemmas.contains("upout")) {
      ++missing;
      continue;
    }
    for (const auto &up : row.lemmas["upout"]) {
      if (up["degenerate"].get<bool>()) {
        ++degenerate;
        continue;
      }
      const double C = up["C"].get<double>();
      finite = finite && std::isfinite(C);
      groups[{row.p, up["mprime"].get<int>()}].push_back(C);
    }
  }
  bool pass = missing == 0 && finite && !groups.empty();
  nlohmann::json g = nlohmann::json::array();
  for (const auto &[key, cs] : groups) {
    const double sp = spread(cs);
    pass = pass && sp <= spread_tol;
    g.push_back({{"p", key.first},
                 {"mprime", key.second},
                 {"C_min", *std::min_element(cs.begin(), cs.end())},
                 {"C_max", *std::max_element(cs.begin(), cs.end())},
                 {"spread", sp}});
  }
  r.pass = pass;
  r.detail = {{"groups", g}, {"missing", missing}, {"degenerate", degenerate}};
  return r;
}

SuiteResult conforming_suite(int p, int ell, double k, const std::vector<double> &hk, int N, double spread_tol) {
  SuiteResult r{"conforming"};
  std::vector<double> C;
  nlohmann::json pts = nlohmann::json::array();
  bool stabilized = true;
  for (double target : hk) {
    const int n = resolve_n(k, target);
    const double h2k = two_pi / n * k;
    const auto space = build_space(build_uniform_mesh(n), p, ell);
    const auto e = Projector(space, k, ell).operator_norm(p + 1, ell, N);
    stabilized = stabilized && e.stabilized;
    C.push_back(e.value / std::pow(h2k, p + 1 - ell));
    pts.push_back({{"hk", h2k}, {"n", n}, {"norm", e.value}, {"C", C.back()}, {"stabilized", e.stabilized}});
  }
  const double sp = spread(C);
  r.pass = stabilized && sp <= spread_tol;
  r.detail = {{"p", p}, {"ell", ell}, {"k", k}, {"N", N}, {"points", pts}, {"spread", sp}};
  return r;
}

SuiteResult duality_suite(int p, const std::vector<DualityCase> &cases, double k, const std::vector<double> &hk,
                          int N, double c_max) {
  SuiteResult r{"duality"};
  bool pass = true;
  nlohmann::json pts = nlohmann::json::array();
  for (double target : hk) {
    const int n = resolve_n(k, target);
    const auto mesh = build_uniform_mesh(n);
    for (const auto &c : cases) {
      const auto space = build_space(mesh, p, c.ell);
      const auto d = duality_check(Projector(space, k, c.ell), c.s, N);
      bool ok = d.verified && d.C <= c_max;
      if (c.ell == 0 && c.s == 0) ok = ok && std::abs(d.C - 1.0) <= 1e-10;
      pass = pass && ok;
      auto j = to_json(d);
      j["hk"] = two_pi / n * k;
      j["pass"] = ok;
      pts.push_back(j);
    }
  }
  r.pass = pass;
  r.detail = {{"p", p}, {"k", k}, {"N", N}, {"cases", pts}};
  return r;
}

SuiteResult optimality_suite(int p, int ell, const std::vector<double> &s_list, double k,
                             const std::vector<double> &hk, int N, double c_max) {
  SuiteResult r{"optimality_chain"};
  bool pass = true;
  nlohmann::json pts = nlohmann::json::array();
  for (double target : hk) {
    const int n = resolve_n(k, target);
    const auto space = build_space(build_uniform_mesh(n), p, ell);
    const Projector P(space, k, ell);
    for (double s : s_list) {
      const auto d = optimality_chain(P, s, N);
      const bool ok = d.verified && d.C <= c_max;
      pass = pass && ok;
      auto j = to_json(d);
      j["hk"] = two_pi / n * k;
      j["pass"] = ok;
      pts.push_back(j);
    }
  }
  r.pass = pass;
  r.detail = {{"p", p}, {"ell", ell}, {"k", k}, {"N", N}, {"cases", pts}};
  return r;
}

SuiteResult algebra_suite(int trials, std::uint64_t seed, double tol) {
  SuiteResult r{"projection_algebra"};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick_n(4, 24);
  std::uniform_real_distribution<double> pick_k(1.0, 12.0);
  double idem = 0.0, adjoint = 0.0, pyth = 0.0, nested = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    const int p = trial % 4;
    const int m = p == 0 ? 0 : int(rng() % (p + 1));
    const int ell = int(rng() % (m + 1));
    const int n = pick_n(rng);
    const double k = pick_k(rng);
    const auto route = trial % 5 == 4 ? SpaceRoute::dense : SpaceRoute::bloch;
    const auto space = build_space(build_uniform_mesh(n), p, m, route);
    const Projector P(space, k, ell);
    const auto u = random_oscillating(k, 0.5, 1.0, rng()).first;
    const auto v = random_oscillating(k, 0.3, 1.5, rng()).first;
    const auto ru = P.project(u), rv = P.project(v);
    const auto lp = ds(k, ell);
    const double nu = norm_hk(u, lp).lower, nv = norm_hk(v, lp).lower;
    idem = std::max(idem, max_abs_diff(P.project(ru.coefficients), ru.coefficients));
    const cplx a = inner_hk(ru.coefficients, v, lp), b = inner_hk(u, rv.coefficients, lp);
    adjoint = std::max(adjoint, std::abs(a - b) / (nu * nv));
    const double npu = norm_hk(ru.coefficients, lp).lower;
    pyth = std::max(pyth, std::abs(nu * nu - npu * npu - ru.residual_norm * ru.residual_norm) / (nu * nu));
    const auto fine = build_space(build_uniform_mesh(2 * n), p, m, route);
    const double fine_res = Projector(fine, k, ell).project(u).residual_norm;
    nested = std::max(nested, std::max(0.0, fine_res - ru.residual_norm) / nu);
  }
  r.pass = idem <= tol && adjoint <= tol && pyth <= tol && nested <= tol;
  r.detail = {{"trials", trials},
              {"idempotence", idem},
              {"self_adjointness", adjoint},
              {"pythagoras", pyth},
              {"nested_monotonicity", nested},
              {"tol", tol}};
  return r;
}

} // namespace osc
