#include "osc/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "osc/error.hpp"
#include "osc/legendre.hpp"
#include "osc/probe.hpp"

namespace osc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

cplx ipow(cplx z, int d) {
  cplx r = 1.0;
  for (int i = 0; i < d; ++i) r *= z;
  return r;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void require_certificate(const PiecewisePoly &v, int order) {
  if (order > v.smoothness())
    throw Error(ErrorKind::smoothness, "order " + std::to_string(order) +
                                           " exceeds the smoothness certificate " +
                                           std::to_string(v.smoothness()));
}

/// Squared norm from per-derivative weights and the sampled vectors.
template <class F> double weighted_energy(const std::vector<double> &w, F &&energy) {
  double s = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d)
    if (w[d] != 0.0) s += w[d] * energy(static_cast<int>(d));
  return s;
}

/// Weights for integer order >= 0 in either flavor.
std::vector<double> integer_weights(const SobolevParams &p) { return p.energy_weights(); }

bool nonnegative_integer(const SobolevParams &p) { return p.integer_order() && p.order >= 0; }

void check_params(const SobolevParams &p) {
  if (!(p.k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be positive");
  if (p.flavor == NormFlavor::derivative_sum && !nonnegative_integer(p))
    throw Error(ErrorKind::invalid_flavor, "derivative_sum flavor needs an integer order >= 0");
}

/// Spectral bracket on the squared norm of a function with the given low
/// coefficients and the given L^2 mass outside them.
NormBracket spectral_bracket(const SobolevParams &p, const TrigPoly &low, double total_mass) {
  double partial = 0.0, weighted = 0.0;
  for (int n = -low.max_freq(); n <= low.max_freq(); ++n) {
    const double a = std::norm(low.coef(n));
    partial += a;
    weighted += p.spectral_weight(n) * a;
  }
  partial *= two_pi;
  weighted *= two_pi;
  const double tail = std::max(0.0, total_mass - partial);
  const double cap = std::pow(1.0 + std::pow(low.max_freq() / p.k, 2), p.order);
  return {std::sqrt(weighted), std::sqrt(weighted + tail * cap)};
}

std::vector<cplx> uniform_fourier(const PiecewisePoly &v, const std::vector<int> &freqs) {
  const Mesh &mesh = *v.mesh();
  const int n = static_cast<int>(mesh.size());
  const int p = v.degree();
  const double h = mesh[0].map.length();
  std::vector<cplx> tw(n);
  for (int j = 0; j < n; ++j) tw[j] = std::polar(1.0, -two_pi * j / n);
  // A(q) = sum_j w_j e^{-2 pi i q j / n}, computed once per residue.
  std::vector<int> residue_slot(n, -1);
  std::vector<Eigen::VectorXcd> A;
  std::vector<cplx> out(freqs.size());
  for (std::size_t f = 0; f < freqs.size(); ++f) {
    const int nu = freqs[f];
    const int q = ((nu % n) + n) % n;
    if (residue_slot[q] < 0) {
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(p + 1);
      for (int j = 0; j < n; ++j) acc += tw[(static_cast<long long>(q) * j) % n] * v.element(j);
      residue_slot[q] = static_cast<int>(A.size());
      A.push_back(std::move(acc));
    }
    const auto &a = A[residue_slot[q]];
    const auto E = legendre_exp_moments(nu, h, p);
    cplx s = 0.0;
    for (int r = 0; r <= p; ++r) s += a[r] * std::conj(E[r]);
    out[f] = s * std::polar(1.0, -nu * circle_origin) / two_pi;
  }
  return out;
}

} // namespace

TrigPoly::TrigPoly(int max_freq, bool real_flag) : N_(max_freq), c_(2 * max_freq + 1), real_(real_flag) {
  if (max_freq < 0) throw Error(ErrorKind::invalid_argument, "negative max_freq");
}

TrigPoly::TrigPoly(int max_freq, std::vector<cplx> coeffs, bool real_flag)
    : N_(max_freq), c_(std::move(coeffs)), real_(real_flag) {
  if (max_freq < 0 || c_.size() != static_cast<std::size_t>(2 * max_freq + 1))
    throw Error(ErrorKind::invalid_argument, "coefficient count must be 2N+1");
}

TrigPoly TrigPoly::mode(int n, cplx c) {
  TrigPoly t(std::abs(n));
  t.set(n, c);
  return t;
}

TrigPoly TrigPoly::sine() {
  TrigPoly t(1, true);
  t.set(1, cplx(0.0, -0.5));
  t.set(-1, cplx(0.0, 0.5));
  return t;
}

TrigPoly TrigPoly::cosine() {
  TrigPoly t(1, true);
  t.set(1, 0.5);
  t.set(-1, 0.5);
  return t;
}

void TrigPoly::set(int n, cplx c) {
  if (std::abs(n) > N_) throw Error(ErrorKind::invalid_argument, "frequency outside -N..N");
  c_[n + N_] = c;
}

std::vector<Mode> TrigPoly::modes() const {
  std::vector<Mode> m;
  for (int n = -N_; n <= N_; ++n)
    if (c_[n + N_] != cplx{}) m.push_back({n, c_[n + N_]});
  return m;
}

cplx TrigPoly::evaluate(double x, int deriv) const {
  cplx s = 0.0;
  for (int n = -N_; n <= N_; ++n) {
    const cplx c = c_[n + N_];
    if (c != cplx{}) s += c * ipow(cplx(0.0, n), deriv) * std::polar(1.0, n * x);
  }
  return s;
}

double TrigPoly::l2_norm() const {
  double s = 0.0;
  for (const auto &c : c_) s += std::norm(c);
  return std::sqrt(two_pi * s);
}

double TrigPoly::real_defect() const {
  double big = 0.0, bad = 0.0;
  for (int n = -N_; n <= N_; ++n) {
    big = std::max(big, std::abs(coef(n)));
    bad = std::max(bad, std::abs(coef(-n) - std::conj(coef(n))));
  }
  return big > 0.0 ? bad / big : 0.0;
}

TrigPoly TrigPoly::operator+(const TrigPoly &o) const {
  TrigPoly r(std::max(N_, o.N_), real_ && o.real_);
  for (int n = -r.N_; n <= r.N_; ++n) r.set(n, coef(n) + o.coef(n));
  return r;
}

TrigPoly TrigPoly::operator-(const TrigPoly &o) const { return *this + o * cplx(-1.0); }

TrigPoly TrigPoly::operator*(cplx s) const {
  TrigPoly r(*this);
  for (auto &c : r.c_) c *= s;
  r.real_ = real_ && s.imag() == 0.0;
  return r;
}

std::string to_string(NormFlavor f) {
  return f == NormFlavor::derivative_sum ? "derivative_sum" : "spectral";
}

NormFlavor parse_flavor(const std::string &s) {
  if (s == "derivative_sum") return NormFlavor::derivative_sum;
  if (s == "spectral" || s == "spectral_multiplier") return NormFlavor::spectral;
  throw Error(ErrorKind::invalid_flavor, "unknown norm flavor '" + s + "'");
}

double SobolevParams::kbracket() const { return std::sqrt(1.0 + k * k); }

bool SobolevParams::integer_order() const { return order == std::round(order); }

std::vector<double> SobolevParams::derivative_weights() const {
  if (!nonnegative_integer(*this))
    throw Error(ErrorKind::invalid_flavor, "derivative_sum flavor needs an integer order >= 0");
  const int l = static_cast<int>(std::lround(order));
  const double kappa = std::pow(kbracket(), -2.0 * l);
  std::vector<double> w(l + 1, kappa);
  w[0] = 1.0;
  return w;
}

std::vector<double> SobolevParams::energy_weights() const {
  if (flavor == NormFlavor::derivative_sum) return derivative_weights();
  if (!nonnegative_integer(*this))
    throw Error(ErrorKind::invalid_argument, "derivative weights need an integer order >= 0");
  const int s = static_cast<int>(std::lround(order));
  std::vector<double> w(s + 1);
  for (int d = 0; d <= s; ++d) w[d] = binomial(s, d) * std::pow(k, -2.0 * d);
  return w;
}

double SobolevParams::spectral_weight(int n) const {
  if (flavor == NormFlavor::spectral) return std::pow(1.0 + std::pow(n / k, 2), order);
  const auto w = derivative_weights();
  double s = 0.0, n2 = 1.0;
  for (double wd : w) {
    s += wd * n2;
    n2 *= static_cast<double>(n) * n;
  }
  return s;
}

double NormBracket::relative_width() const { return upper > 0.0 ? (upper - lower) / upper : 0.0; }

PiecewisePoly::PiecewisePoly(MeshHandle mesh, int degree, int smoothness)
    : mesh_(std::move(mesh)), degree_(degree), smoothness_(smoothness) {
  if (!mesh_) throw Error(ErrorKind::invalid_argument, "null mesh");
  if (degree < 0) throw Error(ErrorKind::invalid_argument, "negative degree");
  coeffs_.assign(mesh_->size(), Eigen::VectorXcd::Zero(degree + 1));
}

PiecewisePoly::PiecewisePoly(MeshHandle mesh, int degree, int smoothness, std::vector<Eigen::VectorXcd> coeffs)
    : mesh_(std::move(mesh)), degree_(degree), smoothness_(smoothness), coeffs_(std::move(coeffs)) {
  if (!mesh_) throw Error(ErrorKind::invalid_argument, "null mesh");
  if (coeffs_.size() != mesh_->size())
    throw Error(ErrorKind::invalid_argument, "coefficient vector count differs from element count");
  for (const auto &c : coeffs_)
    if (c.size() != degree + 1) throw Error(ErrorKind::invalid_argument, "coefficient vector length must be p+1");
}

cplx PiecewisePoly::evaluate_local(std::size_t elem, double t, int tderiv) const {
  const Eigen::MatrixXd tab = legendre_table(t, (*mesh_)[elem].map.length(), degree_, tderiv);
  return (tab.row(tderiv).cast<cplx>() * coeffs_[elem])(0);
}

cplx PiecewisePoly::evaluate(double x) const {
  double y = std::fmod(x - circle_origin, two_pi);
  if (y < 0) y += two_pi;
  y += circle_origin;
  const auto &els = mesh_->elements();
  auto it = std::upper_bound(els.begin(), els.end(), y,
                             [](double v, const Element &e) { return v < e.left; });
  const std::size_t idx = it == els.begin() ? 0 : static_cast<std::size_t>(it - els.begin() - 1);
  const auto &map = els[idx].map;
  double t;
  if (map.kind() == MapKind::affine) {
    t = (y - map.offset()) * map.orientation();
  } else {
    // gamma is monotone on [0, L].
    double a = 0.0, b = map.length();
    const bool inc = map(b) > map(a);
    for (int i = 0; i < 200 && b - a > 1e-16; ++i) {
      const double m = 0.5 * (a + b);
      if ((map(m) < y) == inc) a = m; else b = m;
    }
    t = 0.5 * (a + b);
  }
  t = std::clamp(t, 0.0, map.length());
  return evaluate_local(idx, t, 0);
}

PiecewisePoly PiecewisePoly::operator+(const PiecewisePoly &o) const {
  if (o.mesh_ != mesh_ || o.degree_ != degree_)
    throw Error(ErrorKind::invalid_argument, "splines on different meshes or degrees");
  PiecewisePoly r(*this);
  r.smoothness_ = std::min(smoothness_, o.smoothness_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) r.coeffs_[i] += o.coeffs_[i];
  return r;
}

PiecewisePoly PiecewisePoly::operator-(const PiecewisePoly &o) const { return *this + o * cplx(-1.0); }

PiecewisePoly PiecewisePoly::operator*(cplx s) const {
  PiecewisePoly r(*this);
  for (auto &c : r.coeffs_) c *= s;
  return r;
}

NormBracket norm_hk(const TrigPoly &f, const SobolevParams &params) {
  check_params(params);
  double s = 0.0;
  for (int n = -f.max_freq(); n <= f.max_freq(); ++n) {
    const double a = std::norm(f.coef(n));
    if (a != 0.0) s += params.spectral_weight(n) * a;
  }
  return NormBracket::exact(std::sqrt(two_pi * s));
}

std::vector<double> spline_derivative_energies(const PiecewisePoly &v, int derivs) {
  const auto probes = build_probes(*v.mesh(), v.degree(), derivs, {});
  std::vector<double> e(derivs + 1, 0.0);
  for (int d = 0; d <= derivs; ++d) {
    for (std::size_t i = 0; i < probes.size(); ++i) e[d] += probes[i].poly(d, v.element(i)).squaredNorm();
  }
  return e;
}

NormBracket norm_hk(const PiecewisePoly &f, const SobolevParams &params) {
  check_params(params);
  if (nonnegative_integer(params)) {
    const auto w = integer_weights(params);
    require_certificate(f, static_cast<int>(w.size()) - 1);
    const auto e = spline_derivative_energies(f, static_cast<int>(w.size()) - 1);
    return NormBracket::exact(std::sqrt(weighted_energy(w, [&](int d) { return e[d]; })));
  }
  if (params.order > 0)
    throw Error(ErrorKind::capability, "fractional positive spectral orders of splines are not supported");
  if (params.bracket_N <= 0) throw Error(ErrorKind::missing_truncation, "negative order needs bracket_N > 0");
  const auto spec = fourier_of_spline(f, params.bracket_N);
  const double mass = spline_derivative_energies(f, 0)[0];
  return spectral_bracket(params, spec.coeffs, mass);
}

NormBracket norm_hk_difference(const TrigPoly &u, const PiecewisePoly &v, const SobolevParams &params) {
  check_params(params);
  const auto modes = u.modes();
  if (nonnegative_integer(params)) {
    const auto w = integer_weights(params);
    const int top = static_cast<int>(w.size()) - 1;
    require_certificate(v, top);
    const auto probes = build_probes(*v.mesh(), v.degree(), top, modes);
    const double s = weighted_energy(w, [&](int d) {
      double e = 0.0;
      for (std::size_t i = 0; i < probes.size(); ++i)
        e += (probes[i].trig(d) - probes[i].poly(d, v.element(i))).squaredNorm();
      return e;
    });
    return NormBracket::exact(std::sqrt(s));
  }
  if (params.order > 0)
    throw Error(ErrorKind::capability, "fractional positive spectral orders of splines are not supported");
  if (params.bracket_N <= 0) throw Error(ErrorKind::missing_truncation, "negative order needs bracket_N > 0");
  const auto probes = build_probes(*v.mesh(), v.degree(), 0, modes);
  double mass = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i)
    mass += (probes[i].trig(0) - probes[i].poly(0, v.element(i))).squaredNorm();
  auto spec = fourier_of_spline(v, params.bracket_N);
  const int N = params.bracket_N;
  TrigPoly r(N);
  for (int n = -N; n <= N; ++n) r.set(n, u.coef(n) - spec.coeffs.coef(n));
  return spectral_bracket(params, r, mass);
}

cplx inner_hk(const TrigPoly &f, const TrigPoly &g, const SobolevParams &params) {
  check_params(params);
  const int N = std::min(f.max_freq(), g.max_freq());
  cplx s = 0.0;
  for (int n = -N; n <= N; ++n) s += params.spectral_weight(n) * f.coef(n) * std::conj(g.coef(n));
  return two_pi * s;
}

cplx inner_hk(const TrigPoly &f, const PiecewisePoly &g, const SobolevParams &params) {
  check_params(params);
  if (!nonnegative_integer(params))
    throw Error(ErrorKind::invalid_argument, "inner products with splines need an integer order >= 0");
  const auto w = integer_weights(params);
  const int top = static_cast<int>(w.size()) - 1;
  require_certificate(g, top);
  const auto probes = build_probes(*g.mesh(), g.degree(), top, f.modes());
  cplx s = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d) {
    if (w[d] == 0.0) continue;
    cplx e = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i)
      e += probes[i].trig(static_cast<int>(d)).dot(probes[i].poly(static_cast<int>(d), g.element(i)));
    s += w[d] * std::conj(e);
  }
  return s;
}

cplx inner_hk(const PiecewisePoly &f, const TrigPoly &g, const SobolevParams &params) {
  return std::conj(inner_hk(g, f, params));
}

cplx inner_hk(const PiecewisePoly &f, const PiecewisePoly &g, const SobolevParams &params) {
  check_params(params);
  if (!nonnegative_integer(params))
    throw Error(ErrorKind::invalid_argument, "inner products with splines need an integer order >= 0");
  if (f.mesh() != g.mesh() || f.degree() != g.degree())
    throw Error(ErrorKind::invalid_argument, "splines on different meshes or degrees");
  const auto w = integer_weights(params);
  const int top = static_cast<int>(w.size()) - 1;
  require_certificate(f, top);
  require_certificate(g, top);
  const auto probes = build_probes(*f.mesh(), f.degree(), top, {});
  cplx s = 0.0;
  for (std::size_t d = 0; d < w.size(); ++d) {
    if (w[d] == 0.0) continue;
    cplx e = 0.0;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      const int dd = static_cast<int>(d);
      // Eigen's dot conjugates the left operand.
      e += probes[i].poly(dd, g.element(i)).dot(probes[i].poly(dd, f.element(i)));
    }
    s += w[d] * e;
  }
  return s;
}

std::vector<cplx> spline_fourier_coeffs(const PiecewisePoly &v, const std::vector<int> &freqs) {
  const Mesh &mesh = *v.mesh();
  if (mesh.is_uniform_affine()) return uniform_fourier(v, freqs);
  const int p = v.degree();
  int fmax = 0;
  for (int f : freqs) fmax = std::max(fmax, std::abs(f));
  std::vector<cplx> out(freqs.size(), 0.0);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto &e = mesh[i];
    const auto &w = v.element(i);
    if (e.map.kind() == MapKind::affine) {
      const double sigma = e.map.orientation();
      for (std::size_t f = 0; f < freqs.size(); ++f) {
        const auto E = legendre_exp_moments(sigma * freqs[f], e.map.length(), p);
        cplx s = 0.0;
        for (int r = 0; r <= p; ++r) s += w[r] * std::conj(E[r]);
        out[f] += s * std::polar(1.0, -freqs[f] * e.map.offset());
      }
    } else {
      const NodeSet ns = analytic_nodes(e, fmax);
      for (std::size_t q = 0; q < ns.t.size(); ++q) {
        const auto gd = e.map.derivatives(ns.t[q], 1);
        const cplx val = v.evaluate_local(i, ns.t[q], 0) * (ns.w[q] * std::abs(gd[1]));
        for (std::size_t f = 0; f < freqs.size(); ++f) out[f] += val * std::polar(1.0, -freqs[f] * gd[0]);
      }
    }
  }
  for (auto &c : out) c /= two_pi;
  return out;
}

SplineSpectrum fourier_of_spline(const PiecewisePoly &v, int N) {
  if (N < 1) throw Error(ErrorKind::invalid_argument, "fourier_of_spline needs N >= 1");
  std::vector<int> freqs(2 * N + 1);
  for (int n = -N; n <= N; ++n) freqs[n + N] = n;
  SplineSpectrum s{TrigPoly(N, spline_fourier_coeffs(v, freqs), false), 0.0};
  double partial = 0.0;
  for (const auto &c : s.coeffs.coeffs()) partial += std::norm(c);
  s.tail_mass = spline_derivative_energies(v, 0)[0] - two_pi * partial;
  return s;
}

} // namespace osc
