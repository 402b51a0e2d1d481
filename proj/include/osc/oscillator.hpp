#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "osc/funcspace.hpp"

namespace osc {

/// Exact spectral check of: no modes with |n| < a, and ||u||_{H^s} <= <b>^s ||u|| for each s.
struct OscillationCert {
  double a = 0.0;
  double b = 0.0;
  std::vector<int> orders;
  /// ||Pi_{[a,inf)} u - u||_{L^2}.
  double projection_defect = 0.0;
  /// max_s ||u||_{H^s} / (<b>^s ||u||_{L^2}).
  double worst_ratio = 0.0;
  /// defect <= 1e-12 ||u|| and worst ratio <= 1.
  bool pass = false;
};

/// Leakage of L^2 norm k^{-J} spread over |n| < eps k, on top of a band [xi_lo k, xi_hi k].
struct LeakProfile {
  int J = 8;
  double xi_lo = 0.5;
  double xi_hi = 1.0;
  bool real_valued = false;
};

/// Checks j = 0..J of: ||Pi_{[eps k,inf)} u - u|| <= C_j k^{-j} and ||u||_{H_k^j} <= C_j ||u||,
/// with the spectral H_k^j norm (1 + (n/k)^2)^{j/2}.
struct ApproxOscillationCert {
  double eps = 0.0;
  double k = 0.0;
  std::vector<double> C;
  double leakage = 0.0;
  std::vector<double> leakage_bounds;
  std::vector<double> hk_ratios;
  bool pass = false;
};

/// Orders 0..2(p_max + 1) with p_max = 4.
std::vector<int> default_orders();

/// Independent complex Gaussian coefficients on ceil(xi_lo k) <= |n| <= floor(xi_hi k),
/// conjugate-symmetric when real_valued, unit L^2 norm.
std::pair<TrigPoly, OscillationCert> random_oscillating(double k, double xi_lo, double xi_hi, std::uint64_t seed,
                                                        bool real_valued = false,
                                                        const std::vector<int> &orders = default_orders());

OscillationCert validate_oscillation(const TrigPoly &u, double a, double b, const std::vector<int> &orders);

/// C_j = (1 + xi_hi^2)^{j/2}, which dominates both the in-band H_k^j ratio and 1.
std::vector<double> approx_constants(double xi_hi, int J);

/// Bulk identical to random_oscillating(k, xi_lo, xi_hi, seed) plus the leakage profile.
std::pair<TrigPoly, ApproxOscillationCert> approx_oscillating(double k, double eps, const LeakProfile &profile,
                                                              std::uint64_t seed);

ApproxOscillationCert validate_approx_oscillation(const TrigPoly &u, double k, double eps,
                                                  const std::vector<double> &C);

nlohmann::json to_json(const OscillationCert &c);
nlohmann::json to_json(const ApproxOscillationCert &c);

} // namespace osc
