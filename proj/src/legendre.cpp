#include "osc/legendre.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "osc/error.hpp"

namespace osc {

namespace {

GaussRule build_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p1 = x, p0 = 1.0;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0, p1 = x;
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

} // namespace

const GaussRule &gauss_legendre(int points) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, build_rule(points)).first;
  return it->second;
}

Eigen::MatrixXd legendre_table(double t, double length, int degree, int derivs) {
  // Standard Legendre values and derivatives at s in [-1,1] via the
  // recurrence P_{r+1}^{(d)} = ((2r+1)(s P_r^{(d)} + d P_r^{(d-1)}) - r P_{r-1}^{(d)})/(r+1).
  const double s = 2.0 * t / length - 1.0;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(derivs + 1, degree + 1);
  for (int d = 0; d <= derivs; ++d) {
    for (int r = 0; r <= degree; ++r) {
      double value;
      if (r == 0) {
        value = d == 0 ? 1.0 : 0.0;
      } else {
        double prev = P(d, r - 1);
        double prev_lower = d > 0 ? P(d - 1, r - 1) : 0.0;
        double prev2 = r >= 2 ? P(d, r - 2) : 0.0;
        value = ((2.0 * r - 1.0) * (s * prev + d * prev_lower) - (r - 1.0) * prev2) / r;
      }
      P(d, r) = value;
    }
  }
  for (int r = 0; r <= degree; ++r) {
    const double norm = std::sqrt((2.0 * r + 1.0) / length);
    double scale = norm;
    for (int d = 0; d <= derivs; ++d) {
      P(d, r) *= scale;
      scale *= 2.0 / length;
    }
  }
  return P;
}

Eigen::MatrixXd legendre_diff_matrix(int degree, double length) {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  for (int s = 1; s <= degree; ++s)
    for (int r = s - 1; r >= 0; r -= 2)
      D(r, s) = (2.0 / length) * std::sqrt((2.0 * s + 1.0) * (2.0 * r + 1.0));
  return D;
}

std::vector<double> sph_bessel_array(double x, int n) {
  std::vector<double> j(n + 1, 0.0);
  if (x == 0.0) {
    j[0] = 1.0;
    return j;
  }
  const double sign = x < 0 ? -1.0 : 1.0;
  const double ax = std::abs(x);
  if (ax <= 0.25) {
    double lead = 1.0; // x^r / (2r+1)!!
    for (int r = 0; r <= n; ++r) {
      if (r > 0) lead *= ax / (2.0 * r + 1.0);
      double term = 1.0, sum = 1.0;
      const double q = -0.5 * ax * ax;
      for (int k = 1; k < 40; ++k) {
        term *= q / (k * (2.0 * r + 2.0 * k + 1.0));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      j[r] = lead * sum;
      if (lead == 0.0) break;
    }
  } else if (n + 1 < ax) {
    j[0] = std::sin(ax) / ax;
    if (n >= 1) j[1] = std::sin(ax) / (ax * ax) - std::cos(ax) / ax;
    for (int r = 1; r < n; ++r) j[r + 1] = (2.0 * r + 1.0) / ax * j[r] - j[r - 1];
  } else {
    const int start = std::max(n, static_cast<int>(ax)) + 40 +
                      static_cast<int>(std::sqrt(40.0 * std::max(n, 1)));
    std::vector<double> f(start + 2, 0.0);
    f[start + 1] = 0.0;
    f[start] = 1.0;
    for (int r = start; r >= 1; --r) {
      f[r - 1] = (2.0 * r + 1.0) / ax * f[r] - f[r + 1];
      if (std::abs(f[r - 1]) > 1e100) {
        for (int i = r - 1; i <= start + 1; ++i) f[i] *= 1e-100;
      }
    }
    double sum = 0.0;
    for (int r = 0; r <= start; ++r) sum += (2.0 * r + 1.0) * f[r] * f[r];
    double scale = 1.0 / std::sqrt(sum);
    const double j0 = std::sin(ax) / ax;
    const double j1 = std::sin(ax) / (ax * ax) - std::cos(ax) / ax;
    if (std::abs(j0) >= std::abs(j1)) {
      if ((j0 < 0) != (f[0] < 0)) scale = -scale;
    } else {
      if ((j1 < 0) != (f[1] < 0)) scale = -scale;
    }
    for (int r = 0; r <= n; ++r) j[r] = f[r] * scale;
  }
  if (sign < 0)
    for (int r = 1; r <= n; r += 2) j[r] = -j[r];
  return j;
}

std::vector<cplx> legendre_exp_moments(double omega, double length, int degree) {
  const double z = 0.5 * omega * length;
  const auto jb = sph_bessel_array(z, degree);
  std::vector<cplx> out(degree + 1);
  const cplx phase = std::polar(1.0, z);
  cplx ipow(1.0, 0.0);
  for (int r = 0; r <= degree; ++r) {
    out[r] = std::sqrt((2.0 * r + 1.0) * length) * phase * ipow * jb[r];
    ipow *= cplx(0.0, 1.0);
  }
  return out;
}

int expansion_degree(double half_phase, int min_degree) {
  const double z = std::abs(half_phase);
  const int degree = std::max(min_degree, 0);
  if (z < 1e-300) return degree + 1;
  // Mode r of e^{izs} has relative size sqrt(2r+1) |j_r(z)|; these square-sum to 1.
  const int rmax = static_cast<int>(z + 12.0 * std::cbrt(z) + 40.0);
  if (rmax > 4000) throw Error(ErrorKind::capability, "local expansion would require degree above 4000");
  const auto j = sph_bessel_array(z, rmax);
  int last = 0;
  for (int r = 0; r <= rmax; ++r)
    if (std::sqrt(2.0 * r + 1.0) * std::abs(j[r]) > 1e-17) last = r;
  return std::max(degree + 1, last + 1);
}

} // namespace osc
