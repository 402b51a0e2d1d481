#include "osc/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "osc/error.hpp"

namespace osc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

/// Streams for the bulk and the leakage never share state.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

/// Gaussian coefficients on lo <= |n| <= hi (lo may be 0), unit L^2 norm.
TrigPoly gaussian_band(int lo, int hi, std::mt19937_64 &rng, bool real_valued) {
  std::normal_distribution<double> g;
  TrigPoly u(hi, real_valued);
  for (int n = lo; n <= hi; ++n) {
    const cplx c{g(rng), g(rng)};
    if (n == 0) {
      u.set(0, real_valued ? cplx{c.real(), 0.0} : c);
      continue;
    }
    u.set(n, c);
    u.set(-n, real_valued ? std::conj(c) : cplx{g(rng), g(rng)});
  }
  return u * (1.0 / u.l2_norm());
}

double mass(const TrigPoly &u) { return u.l2_norm() * u.l2_norm(); }

} // namespace

std::vector<int> default_orders() {
  std::vector<int> s;
  for (int i = 0; i <= 10; ++i) s.push_back(i);
  return s;
}

std::pair<TrigPoly, OscillationCert> random_oscillating(double k, double xi_lo, double xi_hi, std::uint64_t seed,
                                                        bool real_valued, const std::vector<int> &orders) {
  if (!(xi_lo > 0.0 && xi_lo < xi_hi)) throw Error(ErrorKind::band, "need 0 < xi_lo < xi_hi");
  const int lo = static_cast<int>(std::ceil(xi_lo * k)), hi = static_cast<int>(std::floor(xi_hi * k));
  if (lo > hi) throw Error(ErrorKind::band, "no integer frequency in [xi_lo k, xi_hi k]");
  auto rng = stream(seed, 0);
  TrigPoly u = gaussian_band(lo, hi, rng, real_valued);
  auto cert = validate_oscillation(u, xi_lo * k, xi_hi * k, orders);
  return {std::move(u), std::move(cert)};
}

OscillationCert validate_oscillation(const TrigPoly &u, double a, double b, const std::vector<int> &orders) {
  OscillationCert cert;
  cert.a = a;
  cert.b = b;
  cert.orders = orders;
  double below = 0.0, total = 0.0;
  for (const auto &m : u.modes()) {
    const double w = std::norm(m.c);
    total += w;
    if (std::abs(m.n) < a) below += w;
  }
  cert.projection_defect = std::sqrt(two_pi * below);
  for (int s : orders) {
    // Ratio of weights per mode keeps large orders finite.
    double acc = 0.0;
    for (const auto &m : u.modes()) acc += std::pow((1.0 + double(m.n) * m.n) / (1.0 + b * b), s) * std::norm(m.c);
    if (total > 0) cert.worst_ratio = std::max(cert.worst_ratio, std::sqrt(acc / total));
  }
  const double norm = std::sqrt(two_pi * total);
  cert.pass = cert.projection_defect <= 1e-12 * norm && cert.worst_ratio <= 1.0;
  return cert;
}

std::vector<double> approx_constants(double xi_hi, int J) {
  std::vector<double> C;
  for (int j = 0; j <= J; ++j) C.push_back(std::pow(1.0 + xi_hi * xi_hi, 0.5 * j));
  return C;
}

std::pair<TrigPoly, ApproxOscillationCert> approx_oscillating(double k, double eps, const LeakProfile &profile,
                                                              std::uint64_t seed) {
  if (!(eps > 0.0 && eps < 1.0)) throw Error(ErrorKind::profile, "need 0 < eps < 1");
  if (eps > profile.xi_lo) throw Error(ErrorKind::profile, "leakage window eps k overlaps the band");
  const double leak = std::pow(k, -profile.J);
  if (!(leak < 1.0)) throw Error(ErrorKind::profile, "leakage mass k^{-J} is not below the bulk mass");
  auto [bulk, bulk_cert] = random_oscillating(k, profile.xi_lo, profile.xi_hi, seed, profile.real_valued, {0});
  // Largest integer strictly below eps k.
  int top = static_cast<int>(std::ceil(eps * k)) - 1;
  top = std::max(top, 0);
  auto rng = stream(seed, 1);
  const TrigPoly low = gaussian_band(0, top, rng, profile.real_valued) * leak;
  TrigPoly u = bulk + low;
  auto cert = validate_approx_oscillation(u, k, eps, approx_constants(profile.xi_hi, profile.J));
  return {std::move(u), std::move(cert)};
}

ApproxOscillationCert validate_approx_oscillation(const TrigPoly &u, double k, double eps,
                                                  const std::vector<double> &C) {
  ApproxOscillationCert cert;
  cert.eps = eps;
  cert.k = k;
  cert.C = C;
  double below = 0.0;
  for (const auto &m : u.modes())
    if (std::abs(m.n) < eps * k) below += std::norm(m.c);
  cert.leakage = std::sqrt(two_pi * below);
  const double total = mass(u);
  cert.pass = true;
  for (std::size_t j = 0; j < C.size(); ++j) {
    const double bound = C[j] * std::pow(k, -double(j));
    double acc = 0.0;
    for (const auto &m : u.modes()) acc += std::pow(1.0 + std::pow(m.n / k, 2), double(j)) * std::norm(m.c);
    const double ratio = total > 0 ? std::sqrt(two_pi * acc / total) : 0.0;
    cert.leakage_bounds.push_back(bound);
    cert.hk_ratios.push_back(ratio);
    cert.pass = cert.pass && cert.leakage <= bound && ratio <= C[j];
  }
  return cert;
}

nlohmann::json to_json(const OscillationCert &c) {
  return {{"a", c.a},
          {"b", c.b},
          {"orders", c.orders},
          {"projection_defect", c.projection_defect},
          {"worst_ratio", c.worst_ratio},
          {"pass", c.pass}};
}

nlohmann::json to_json(const ApproxOscillationCert &c) {
  return {{"eps", c.eps},
          {"k", c.k},
          {"C", c.C},
          {"leakage", c.leakage},
          {"leakage_bounds", c.leakage_bounds},
          {"hk_ratios", c.hk_ratios},
          {"checked_j", c.C.empty() ? 0 : int(c.C.size()) - 1},
          {"pass", c.pass}};
}

} // namespace osc
