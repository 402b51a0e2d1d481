#include "osc/projector.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "osc/error.hpp"
#include "osc/legendre.hpp"
#include "osc/probe.hpp"

namespace osc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double max_condition = 1e12;

cplx ipow(cplx z, int d) {
  cplx r = 1.0;
  for (int i = 0; i < d; ++i) r *= z;
  return r;
}

int positive_mod(long long a, int n) { return static_cast<int>(((a % n) + n) % n); }

template <class LLT, class Mat, class Rhs> Rhs refined_solve(const LLT &llt, const Mat &G, const Rhs &f) {
  Rhs y = llt.solve(f);
  for (int it = 0; it < 2; ++it) {
    const Rhs r = f - G * y;
    y += llt.solve(r);
  }
  return y;
}

double condition_of(const Eigen::MatrixXcd &G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

double top_eigenvalue(const Eigen::MatrixXcd &A) {
  if (A.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A, Eigen::EigenvaluesOnly);
  return std::max(0.0, es.eigenvalues().maxCoeff());
}

std::map<int, std::vector<Mode>> split_sectors(const std::vector<Mode> &modes, int n) {
  std::map<int, std::vector<Mode>> out;
  for (const auto &m : modes) out[positive_mod(m.n, n)].push_back(m);
  return out;
}

int max_abs(const std::vector<Mode> &modes) {
  int r = 0;
  for (const auto &m : modes) r = std::max(r, std::abs(m.n));
  return r;
}

/// Column m: truncated Legendre coefficients (0..D) on (0,h) of e^{i n_m (x0 + t)}.
Eigen::MatrixXcd cell_moments(const std::vector<int> &freqs, double h, int D) {
  Eigen::MatrixXcd E(D + 1, freqs.size());
  for (std::size_t m = 0; m < freqs.size(); ++m) {
    const auto mom = legendre_exp_moments(freqs[m], h, D);
    const cplx ph = std::polar(1.0, freqs[m] * circle_origin);
    for (int r = 0; r <= D; ++r) E(r, m) = ph * mom[r];
  }
  return E;
}

Eigen::VectorXcd derivative_scale(const std::vector<int> &freqs, int d) {
  Eigen::VectorXcd s(freqs.size());
  for (std::size_t m = 0; m < freqs.size(); ++m) s[m] = ipow(cplx(0.0, freqs[m]), d);
  return s;
}

void require_integer_eval(const SobolevParams &eval, int m) {
  const int top = static_cast<int>(eval.energy_weights().size()) - 1;
  if (top > m)
    throw Error(ErrorKind::smoothness, "evaluation order " + std::to_string(top) + " exceeds smoothness m=" +
                                           std::to_string(m));
}

} // namespace

struct Projector::Impl {
  int P = 1;
  int n = 1;
  std::vector<double> w;
  double cond = 1.0;
  // bloch
  double h = 1.0;
  std::vector<Eigen::MatrixXd> Dpow;
  Eigen::MatrixXd Mcell;
  std::vector<Eigen::MatrixXcd> G;
  std::vector<Eigen::LLT<Eigen::MatrixXcd>> llt;
  // dense
  Eigen::MatrixXd Gd;
  Eigen::LLT<Eigen::MatrixXd> lltd;
  std::vector<Eigen::MatrixXd> Mel;

  /// Sector solve: cell polynomial Z y for the rhs built from Legendre data.
  Eigen::MatrixXcd sector_rhs(const SplineSpace::Sector &sec, const Eigen::MatrixXcd &E,
                              const std::vector<int> &freqs, const Eigen::MatrixXcd &coef) const {
    // coef: modes x columns amplitudes.
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(P, coef.cols());
    for (std::size_t d = 0; d < w.size(); ++d) {
      const Eigen::MatrixXcd a = E.topRows(P) * (derivative_scale(freqs, static_cast<int>(d)).asDiagonal() * coef);
      acc += w[d] * Dpow[d].transpose().cast<cplx>() * a;
    }
    return sec.Z.adjoint() * acc;
  }
};

Projector::Projector(const SplineSpace &space, double k, int ell)
    : space_(space), k_(k), ell_(ell), impl_(std::make_unique<Impl>()) {
  if (!(k > 0.0)) throw Error(ErrorKind::invalid_argument, "k must be positive");
  if (ell < 0 || ell > space.smoothness())
    throw Error(ErrorKind::smoothness, "projection order l=" + std::to_string(ell) + " exceeds m=" +
                                           std::to_string(space.smoothness()));
  auto &I = *impl_;
  const int p = space.degree();
  I.P = p + 1;
  I.n = static_cast<int>(space.mesh()->size());
  I.w = SobolevParams{k, double(ell), NormFlavor::derivative_sum, 0}.derivative_weights();
  const Mesh &mesh = *space.mesh();
  if (space.route() == SpaceRoute::bloch) {
    I.h = mesh[0].map.length();
    const Eigen::MatrixXd D = legendre_diff_matrix(p, I.h);
    I.Dpow.push_back(Eigen::MatrixXd::Identity(I.P, I.P));
    for (int d = 1; d <= std::max(p + 1, 8); ++d) I.Dpow.push_back(D * I.Dpow.back());
    I.Mcell = Eigen::MatrixXd::Zero(I.P, I.P);
    for (std::size_t d = 0; d < I.w.size(); ++d) I.Mcell += I.w[d] * I.Dpow[d].transpose() * I.Dpow[d];
    I.cond = 1.0;
    for (const auto &sec : space.sectors()) {
      Eigen::MatrixXcd G = sec.Z.adjoint() * I.Mcell.cast<cplx>() * sec.Z;
      if (G.size()) I.cond = std::max(I.cond, condition_of(G));
      I.llt.emplace_back(G);
      I.G.push_back(std::move(G));
    }
  } else {
    const auto probes = build_probes(mesh, p, ell, {});
    const Eigen::MatrixXd &B = space.basis();
    I.Gd = Eigen::MatrixXd::Zero(B.cols(), B.cols());
    for (int i = 0; i < I.n; ++i) {
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(I.P, I.P);
      for (std::size_t d = 0; d < I.w.size(); ++d) {
        const Eigen::MatrixXd Pd = probes[i].poly_matrix(static_cast<int>(d));
        M += I.w[d] * Pd.transpose() * Pd;
      }
      const Eigen::MatrixXd Bi = B.middleRows(i * I.P, I.P);
      I.Gd += Bi.transpose() * M * Bi;
      I.Mel.push_back(std::move(M));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(I.Gd, Eigen::EigenvaluesOnly);
    I.cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
    I.lltd.compute(I.Gd);
  }
  if (!(I.cond <= max_condition))
    throw Error(ErrorKind::conditioning, "Gram condition number " + std::to_string(I.cond) + " exceeds 1e12");
}

Projector::~Projector() = default;
Projector::Projector(Projector &&) noexcept = default;

double Projector::gram_condition() const { return impl_->cond; }

ProjectionResult Projector::project(const TrigPoly &u) const {
  const auto &I = *impl_;
  const MeshHandle &mesh = space_.mesh();
  const int p = space_.degree();
  const SobolevParams lp{k_, double(ell_), NormFlavor::derivative_sum, 0};
  ProjectionResult res{PiecewisePoly(mesh, p, space_.smoothness()), I.cond, 0.0, 0.0, 0.0};
  res.u_norm = norm_hk(u, lp).lower;
  const auto modes = u.modes();
  std::vector<double> defects;
  std::vector<double> bnorms;
  if (space_.route() == SpaceRoute::bloch) {
    const auto groups = split_sectors(modes, I.n);
    std::vector<std::pair<int, Eigen::VectorXcd>> cells;
    for (const auto &[q, ms] : groups) {
      const auto &sec = space_.sectors()[q];
      if (sec.Z.cols() == 0) continue;
      std::vector<int> freqs;
      Eigen::VectorXcd c(ms.size());
      for (std::size_t i = 0; i < ms.size(); ++i) {
        freqs.push_back(ms[i].n);
        c[i] = ms[i].c;
      }
      const Eigen::MatrixXcd E = cell_moments(freqs, I.h, p);
      const Eigen::VectorXcd f = I.sector_rhs(sec, E, freqs, c);
      const Eigen::VectorXcd y = refined_solve(I.llt[q], I.G[q], f);
      const Eigen::VectorXcd g = f - I.G[q] * y;
      for (int i = 0; i < g.size(); ++i) {
        defects.push_back(std::sqrt(double(I.n)) * std::abs(g[i]));
        bnorms.push_back(std::sqrt(I.G[q](i, i).real()));
      }
      cells.emplace_back(q, sec.Z * y);
    }
    for (int j = 0; j < I.n; ++j) {
      Eigen::VectorXcd wj = Eigen::VectorXcd::Zero(I.P);
      for (const auto &[q, cell] : cells) wj += std::polar(1.0, space_.sectors()[q].theta * j) * cell;
      res.coefficients.element(j) = wj;
    }
  } else {
    const auto probes = build_probes(*mesh, p, ell_, modes);
    const Eigen::MatrixXd &B = space_.basis();
    Eigen::VectorXcd F = Eigen::VectorXcd::Zero(B.cols());
    for (int i = 0; i < I.n; ++i) {
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(I.P);
      for (std::size_t d = 0; d < I.w.size(); ++d) {
        const int dd = static_cast<int>(d);
        acc += I.w[d] * probes[i].poly_matrix(dd).transpose().cast<cplx>() * probes[i].trig(dd);
      }
      F += B.middleRows(i * I.P, I.P).transpose().cast<cplx>() * acc;
    }
    Eigen::VectorXcd y(F.size());
    {
      const Eigen::VectorXd yr = refined_solve(I.lltd, I.Gd, Eigen::VectorXd(F.real()));
      const Eigen::VectorXd yi = refined_solve(I.lltd, I.Gd, Eigen::VectorXd(F.imag()));
      y.real() = yr;
      y.imag() = yi;
    }
    const Eigen::VectorXcd g = F - I.Gd.cast<cplx>() * y;
    for (int i = 0; i < g.size(); ++i) {
      defects.push_back(std::abs(g[i]));
      bnorms.push_back(std::sqrt(I.Gd(i, i)));
    }
    res.coefficients = space_.from_coefficients(B.cast<cplx>() * y);
  }
  res.residual_norm = space_.route() == SpaceRoute::bloch ? residual_error(u, lp).lower
                                                          : norm_hk_difference(u, res.coefficients, lp).lower;
  const double denom = std::max(res.residual_norm, 1e-6 * res.u_norm);
  for (std::size_t i = 0; i < defects.size(); ++i)
    if (denom > 0 && bnorms[i] > 0)
      res.orthogonality_defect = std::max(res.orthogonality_defect, defects[i] / (denom * bnorms[i]));
  return res;
}

PiecewisePoly Projector::project(const PiecewisePoly &v) const {
  const auto &I = *impl_;
  if (v.mesh() != space_.mesh() || v.degree() != space_.degree())
    throw Error(ErrorKind::invalid_argument, "spline lives on another mesh or degree");
  if (v.smoothness() < ell_) throw Error(ErrorKind::smoothness, "spline lacks the smoothness for this projection");
  PiecewisePoly out(space_.mesh(), space_.degree(), space_.smoothness());
  if (space_.route() == SpaceRoute::bloch) {
    std::vector<Eigen::VectorXcd> cells(I.n);
    for (int q = 0; q < I.n; ++q) {
      const auto &sec = space_.sectors()[q];
      if (sec.Z.cols() == 0) continue;
      Eigen::VectorXcd vq = Eigen::VectorXcd::Zero(I.P);
      for (int j = 0; j < I.n; ++j) vq += std::polar(1.0, -sec.theta * j) * v.element(j);
      vq /= double(I.n);
      const Eigen::VectorXcd f = sec.Z.adjoint() * (I.Mcell.cast<cplx>() * vq);
      cells[q] = sec.Z * refined_solve(I.llt[q], I.G[q], f);
    }
    for (int j = 0; j < I.n; ++j) {
      Eigen::VectorXcd wj = Eigen::VectorXcd::Zero(I.P);
      for (int q = 0; q < I.n; ++q)
        if (cells[q].size()) wj += std::polar(1.0, space_.sectors()[q].theta * j) * cells[q];
      out.element(j) = wj;
    }
    return out;
  }
  const Eigen::MatrixXd &B = space_.basis();
  Eigen::VectorXcd F = Eigen::VectorXcd::Zero(B.cols());
  for (int i = 0; i < I.n; ++i)
    F += B.middleRows(i * I.P, I.P).transpose().cast<cplx>() * (I.Mel[i].cast<cplx>() * v.element(i));
  Eigen::VectorXcd y(F.size());
  y.real() = refined_solve(I.lltd, I.Gd, Eigen::VectorXd(F.real()));
  y.imag() = refined_solve(I.lltd, I.Gd, Eigen::VectorXd(F.imag()));
  return space_.from_coefficients(B.cast<cplx>() * y);
}

NormBracket Projector::residual_error(const TrigPoly &u, const SobolevParams &eval) const {
  const auto &I = *impl_;
  const int p = space_.degree();
  const bool integer = eval.integer_order() && eval.order >= 0;
  const bool bloch = space_.route() == SpaceRoute::bloch;
  if (integer) require_integer_eval(eval, space_.smoothness());
  if (!integer && eval.order > 0)
    throw Error(ErrorKind::capability, "fractional positive evaluation orders are not supported");
  if (!integer && eval.bracket_N <= 0) throw Error(ErrorKind::missing_truncation, "negative order needs bracket_N > 0");
  if (!bloch) {
    const auto Pu = project(u).coefficients;
    return norm_hk_difference(u, Pu, eval);
  }
  const SobolevParams l2{eval.k, 0.0, NormFlavor::spectral, 0};
  const auto we = integer ? eval.energy_weights() : l2.energy_weights();
  const auto groups = split_sectors(u.modes(), I.n);
  double energy = 0.0, partial = 0.0, weighted = 0.0;
  const int Nout = eval.bracket_N;
  for (const auto &[q, ms] : groups) {
    const auto &sec = space_.sectors()[q];
    std::vector<int> freqs;
    Eigen::VectorXcd c(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
      freqs.push_back(ms[i].n);
      c[i] = ms[i].c;
    }
    const int D = std::max(p, expansion_degree(0.5 * max_abs(ms) * I.h, p));
    const Eigen::MatrixXcd E = cell_moments(freqs, I.h, D);
    Eigen::VectorXcd cell = Eigen::VectorXcd::Zero(I.P);
    if (sec.Z.cols() > 0) {
      const Eigen::VectorXcd f = I.sector_rhs(sec, E, freqs, c);
      cell = sec.Z * refined_solve(I.llt[q], I.G[q], f);
    }
    for (std::size_t d = 0; d < we.size(); ++d) {
      Eigen::VectorXcd r = E * (derivative_scale(freqs, static_cast<int>(d)).asDiagonal() * c);
      r.head(I.P) -= I.Dpow[d] * cell;
      energy += we[d] * I.n * r.squaredNorm();
    }
    if (integer) continue;
    // Fourier coefficients of the residual at nu = q (mod n), |nu| <= Nout.
    long long first = q - static_cast<long long>(I.n) * ((q + Nout) / I.n);
    for (long long nu = first; nu <= Nout; nu += I.n) {
      if (nu < -Nout) continue;
      const auto mom = legendre_exp_moments(double(nu), I.h, p);
      cplx s = 0.0;
      for (int r = 0; r < I.P; ++r) s += cell[r] * std::conj(mom[r]);
      s *= double(I.n) / two_pi * std::polar(1.0, -double(nu) * circle_origin);
      const double a = std::norm(u.coef(static_cast<int>(nu)) - s);
      partial += a;
      weighted += eval.spectral_weight(static_cast<int>(nu)) * a;
    }
  }
  if (integer) return NormBracket::exact(std::sqrt(energy));
  const double tail = std::max(0.0, energy - two_pi * partial);
  const double cap = std::pow(1.0 + std::pow(Nout / eval.k, 2), eval.order);
  return {std::sqrt(two_pi * weighted), std::sqrt(two_pi * weighted + tail * cap)};
}

std::pair<double, double> Projector::section_norm(double from, double to, int N, int out_N) const {
  const auto &I = *impl_;
  const int p = space_.degree();
  const bool to_integer = to == std::round(to) && to >= 0;
  const SobolevParams tp{k_, to, NormFlavor::spectral, out_N};
  if (to_integer) require_integer_eval(tp, space_.smoothness());
  else if (to > 0) throw Error(ErrorKind::capability, "fractional positive target orders are not supported");
  const int Nout = std::max(N, out_N);
  const auto wt = to_integer ? tp.energy_weights() : std::vector<double>{1.0};
  const double cap = to_integer ? 0.0 : std::pow(1.0 + std::pow(Nout / k_, 2), to);
  double lo = 0.0, hi = 0.0;
  auto input_scale = [&](const std::vector<int> &freqs) {
    Eigen::VectorXd s(freqs.size());
    for (std::size_t i = 0; i < freqs.size(); ++i)
      s[i] = 1.0 / std::sqrt(two_pi * std::pow(1.0 + std::pow(freqs[i] / k_, 2), from));
    return s;
  };
  if (space_.route() == SpaceRoute::bloch) {
    for (int q = 0; q < I.n; ++q) {
      std::vector<int> freqs;
      for (long long nu = q - static_cast<long long>(I.n) * ((q + N) / I.n); nu <= N; nu += I.n)
        if (nu >= -N) freqs.push_back(static_cast<int>(nu));
      if (freqs.empty()) continue;
      const auto &sec = space_.sectors()[q];
      const int M = static_cast<int>(freqs.size());
      int amax = 0;
      for (int f : freqs) amax = std::max(amax, std::abs(f));
      const int D = std::max(p, expansion_degree(0.5 * amax * I.h, p));
      const Eigen::MatrixXcd E = cell_moments(freqs, I.h, D);
      Eigen::MatrixXcd cells = Eigen::MatrixXcd::Zero(I.P, M);
      if (sec.Z.cols() > 0) {
        const Eigen::MatrixXcd F = I.sector_rhs(sec, E, freqs, Eigen::MatrixXcd::Identity(M, M));
        cells = sec.Z * refined_solve(I.llt[q], I.G[q], F);
      }
      auto residual = [&](int d) {
        Eigen::MatrixXcd R = E * derivative_scale(freqs, d).asDiagonal();
        R.topRows(I.P) -= I.Dpow[d] * cells;
        return R;
      };
      const Eigen::VectorXd sc = input_scale(freqs);
      Eigen::MatrixXcd Qlow = Eigen::MatrixXcd::Zero(M, M), Qup;
      Eigen::MatrixXcd Qmass = Eigen::MatrixXcd::Zero(M, M);
      if (to_integer) {
        for (std::size_t d = 0; d < wt.size(); ++d) {
          const Eigen::MatrixXcd R = residual(static_cast<int>(d));
          Qlow += wt[d] * I.n * R.adjoint() * R;
        }
        Qup = Qlow;
      } else {
        const Eigen::MatrixXcd R0 = residual(0);
        Qmass = double(I.n) * R0.adjoint() * R0;
        std::vector<int> outs;
        for (long long nu = q - static_cast<long long>(I.n) * ((q + Nout) / I.n); nu <= Nout; nu += I.n)
          if (nu >= -Nout) outs.push_back(static_cast<int>(nu));
        Eigen::MatrixXcd Rf(outs.size(), M);
        Eigen::VectorXd wts(outs.size());
        for (std::size_t o = 0; o < outs.size(); ++o) {
          const auto mom = legendre_exp_moments(outs[o], I.h, p);
          const cplx ph = double(I.n) / two_pi * std::polar(1.0, -double(outs[o]) * circle_origin);
          for (int m = 0; m < M; ++m) {
            cplx s = 0.0;
            for (int r = 0; r < I.P; ++r) s += cells(r, m) * std::conj(mom[r]);
            Rf(o, m) = (outs[o] == freqs[m] ? 1.0 : 0.0) - ph * s;
          }
          wts[o] = tp.spectral_weight(outs[o]);
        }
        Qlow = two_pi * Rf.adjoint() * wts.asDiagonal() * Rf;
        const Eigen::MatrixXcd T = Qmass - two_pi * Rf.adjoint() * Rf;
        Qup = Qlow + cap * T;
      }
      const Eigen::MatrixXcd Sl = sc.asDiagonal() * Qlow * sc.asDiagonal();
      const Eigen::MatrixXcd Su = sc.asDiagonal() * Qup * sc.asDiagonal();
      lo = std::max(lo, top_eigenvalue(Sl));
      hi = std::max(hi, top_eigenvalue(Su));
    }
    return {std::sqrt(lo), std::sqrt(std::max(hi, lo))};
  }
  // Dense: every mode of the section at once.
  std::vector<int> freqs;
  std::vector<Mode> modes;
  for (int nu = -N; nu <= N; ++nu) {
    freqs.push_back(nu);
    modes.push_back({nu, 1.0});
  }
  const int M = static_cast<int>(freqs.size());
  const int derivs = std::max<int>(ell_, static_cast<int>(wt.size()) - 1);
  const auto probes = build_probes(*space_.mesh(), p, derivs, modes);
  const Eigen::MatrixXd &B = space_.basis();
  Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(B.cols(), M);
  for (int i = 0; i < I.n; ++i) {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(I.P, M);
    for (std::size_t d = 0; d < I.w.size(); ++d) {
      const int dd = static_cast<int>(d);
      acc += I.w[d] * probes[i].poly_matrix(dd).transpose().cast<cplx>() * probes[i].trig_matrix(dd);
    }
    F += B.middleRows(i * I.P, I.P).transpose().cast<cplx>() * acc;
  }
  Eigen::MatrixXcd Y(F.rows(), M);
  Y.real() = refined_solve(I.lltd, I.Gd, Eigen::MatrixXd(F.real()));
  Y.imag() = refined_solve(I.lltd, I.Gd, Eigen::MatrixXd(F.imag()));
  const Eigen::MatrixXcd C = B.cast<cplx>() * Y;
  auto residual_form = [&](int d) {
    Eigen::MatrixXcd Q = Eigen::MatrixXcd::Zero(M, M);
    for (int i = 0; i < I.n; ++i) {
      const Eigen::MatrixXcd R =
          probes[i].trig_matrix(d) - probes[i].poly_matrix(d).cast<cplx>() * C.middleRows(i * I.P, I.P);
      Q += R.adjoint() * R;
    }
    return Q;
  };
  const Eigen::VectorXd sc = input_scale(freqs);
  Eigen::MatrixXcd Qlow = Eigen::MatrixXcd::Zero(M, M), Qup;
  if (to_integer) {
    for (std::size_t d = 0; d < wt.size(); ++d) Qlow += wt[d] * residual_form(static_cast<int>(d));
    Qup = Qlow;
  } else {
    const Eigen::MatrixXcd Qmass = residual_form(0);
    std::vector<int> outs;
    for (int nu = -Nout; nu <= Nout; ++nu) outs.push_back(nu);
    // Fourier map of the spline coefficients, one unit coefficient at a time.
    Eigen::MatrixXcd Phi(outs.size(), I.n * I.P);
    for (int col = 0; col < I.n * I.P; ++col) {
      Eigen::VectorXcd e = Eigen::VectorXcd::Zero(I.n * I.P);
      e[col] = 1.0;
      const auto c = spline_fourier_coeffs(space_.from_coefficients(e), outs);
      for (std::size_t o = 0; o < outs.size(); ++o) Phi(o, col) = c[o];
    }
    Eigen::MatrixXcd Rf = -Phi * C;
    Eigen::VectorXd wts(outs.size());
    for (std::size_t o = 0; o < outs.size(); ++o) {
      if (std::abs(outs[o]) <= N) Rf(o, outs[o] + N) += 1.0;
      wts[o] = tp.spectral_weight(outs[o]);
    }
    Qlow = two_pi * Rf.adjoint() * wts.asDiagonal() * Rf;
    Qup = Qlow + cap * (Qmass - two_pi * Rf.adjoint() * Rf);
  }
  lo = top_eigenvalue(sc.asDiagonal() * Qlow * sc.asDiagonal());
  hi = top_eigenvalue(sc.asDiagonal() * Qup * sc.asDiagonal());
  return {std::sqrt(lo), std::sqrt(std::max(hi, lo))};
}

OperatorNormEstimate Projector::operator_norm(double from, double to, int N, int out_N) const {
  if (N < 2) throw Error(ErrorKind::invalid_argument, "operator_norm needs N >= 2");
  if (from < 0) throw Error(ErrorKind::invalid_argument, "from_order must be >= 0");
  OperatorNormEstimate est;
  est.from_order = from;
  est.to_order = to;
  est.N = N;
  est.k = k_;
  est.h = space_.mesh()->scale();
  const auto full = section_norm(from, to, N, out_N);
  const auto half = section_norm(from, to, N / 2, out_N);
  est.lower = full.first;
  est.upper = full.second;
  est.value = full.second;
  est.value_half = half.second;
  const double change = est.value > 0 ? std::abs(est.value - est.value_half) / est.value : 0.0;
  if (change > 0.05) {
    est.stabilized = false;
    est.warning = "non-stabilized: value changes by " + std::to_string(100 * change) + "% between N/2 and N";
  }
  return est;
}

ProjectionResult project(const SplineSpace &space, const TrigPoly &u, double k, int ell) {
  return Projector(space, k, ell).project(u);
}

NormBracket residual_error(const TrigPoly &u, const SplineSpace &space, double k, int ell,
                           const SobolevParams &eval) {
  return Projector(space, k, ell).residual_error(u, eval);
}

OperatorNormEstimate operator_norm(const SplineSpace &space, double k, int ell, double from, double to, int N,
                                   int out_N) {
  return Projector(space, k, ell).operator_norm(from, to, N, out_N);
}

OperatorNormEstimate operator_norm_trig_span(int span_N, double k, double from, double to, int N) {
  auto norm_at = [&](int n_max) {
    double best = 0.0;
    for (int n = span_N + 1; n <= n_max; ++n)
      best = std::max(best, std::sqrt(std::pow(1.0 + std::pow(n / k, 2), to - from)));
    return best;
  };
  OperatorNormEstimate est;
  est.from_order = from;
  est.to_order = to;
  est.N = N;
  est.k = k;
  est.value = est.lower = est.upper = norm_at(N);
  est.value_half = norm_at(N / 2);
  return est;
}

double membership_residual(const SplineSpace &space, const TrigPoly &f) {
  return Projector(space, 1.0, 0).project(f).residual_norm;
}

std::shared_ptr<const Projector> ProjectorCache::get(const SplineSpace &space, double k, int ell) {
  const auto key = std::make_tuple(&space, k, ell);
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  auto made = std::make_shared<const Projector>(space, k, ell);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, std::move(made));
  return it->second;
}

} // namespace osc
