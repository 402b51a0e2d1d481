#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace osc {

/// Truncated Taylor series f(t0 + tau) = sum_i c[i] tau^i, i <= order.
class Jet {
public:
  explicit Jet(int order = 0) : c_(order + 1, 0.0) {}
  Jet(int order, double constant) : c_(order + 1, 0.0) { c_[0] = constant; }

  static Jet variable(int order, double t0) {
    Jet j(order, t0);
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  /// From values f(t0), f'(t0), ..., f^{(n)}(t0).
  static Jet from_derivatives(const std::vector<double> &d, int order) {
    Jet j(order);
    double fact = 1.0;
    for (int i = 0; i <= order && i < static_cast<int>(d.size()); ++i) {
      if (i > 0) fact *= i;
      j.c_[i] = d[i] / fact;
    }
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int i) const { return c_[i]; }
  double &operator[](int i) { return c_[i]; }

  /// i-th derivative at t0.
  double derivative(int i) const {
    double fact = 1.0;
    for (int k = 2; k <= i; ++k) fact *= k;
    return c_[i] * fact;
  }

  Jet operator+(const Jet &o) const {
    Jet r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = c_[i] + o.c_[i];
    return r;
  }
  Jet operator-(const Jet &o) const {
    Jet r(order());
    for (int i = 0; i <= order(); ++i) r.c_[i] = c_[i] - o.c_[i];
    return r;
  }
  Jet operator*(double s) const {
    Jet r(*this);
    for (auto &v : r.c_) v *= s;
    return r;
  }
  Jet operator*(const Jet &o) const {
    Jet r(order());
    for (int i = 0; i <= order(); ++i)
      for (int j = 0; i + j <= order(); ++j) r.c_[i + j] += c_[i] * o.c_[j];
    return r;
  }

  /// d/dtau; the top coefficient is lost, order is kept (last entry zero).
  Jet derivative() const {
    Jet r(order());
    for (int i = 1; i <= order(); ++i) r.c_[i - 1] = i * c_[i];
    return r;
  }

  /// Antiderivative with the given value at tau = 0.
  Jet integral(double constant) const {
    Jet r(order());
    r.c_[0] = constant;
    for (int i = 1; i <= order(); ++i) r.c_[i] = c_[i - 1] / i;
    return r;
  }

  /// this^alpha for c[0] > 0 (J.C.P. Miller recurrence).
  Jet pow(double alpha) const {
    Jet r(order());
    r.c_[0] = std::pow(c_[0], alpha);
    for (int n = 1; n <= order(); ++n) {
      double acc = 0.0;
      for (int k = 1; k <= n; ++k) acc += (alpha * k - (n - k)) * c_[k] * r.c_[n - k];
      r.c_[n] = acc / (n * c_[0]);
    }
    return r;
  }

  Jet reciprocal() const { return pow(-1.0); }

  /// f(this) where fd holds f, f', ..., f^{(order)} at this[0].
  Jet compose(const std::vector<double> &fd) const {
    Jet delta(*this);
    delta.c_[0] = 0.0;
    Jet result(order());
    Jet power(order(), 1.0);
    double fact = 1.0;
    for (int i = 0; i <= order(); ++i) {
      if (i > 0) {
        fact *= i;
        power = power * delta;
      }
      const double coef = fd[i] / fact;
      for (int k = 0; k <= order(); ++k) result.c_[k] += coef * power.c_[k];
    }
    return result;
  }

private:
  std::vector<double> c_;
};

} // namespace osc
