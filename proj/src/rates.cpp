#include "osc/rates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <numbers>
#include <sstream>
#include <thread>
#include <tuple>

#include "osc/error.hpp"
#include "osc/lemmas.hpp"
#include "osc/oscillator.hpp"
#include "osc/polyspace.hpp"
#include "osc/projector.hpp"

namespace osc {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

int resolve_n(double k, double hk) { return static_cast<int>(std::lround(two_pi * k / hk)); }

bool is_integer(double v) { return v == std::round(v); }

struct Task {
  int p;
  double k;
  double hk;
};

void fail_row(SweepRow &row, const std::string &status, const std::string &message) {
  row.status = status;
  row.message = message;
  row.error = row.bracket_lo = row.bracket_hi = nan;
}

std::vector<SweepRow> run_task(const SweepConfig &cfg, const Task &task) {
  std::vector<SweepRow> rows;
  const int n = resolve_n(task.k, task.hk);
  SweepRow base;
  base.p = task.p;
  base.m = cfg.m;
  base.ell = cfg.ell;
  base.k = task.k;
  base.n = n;
  base.h = two_pi / std::max(n, 1);
  base.hk = base.h * task.k;
  // Space and projector once per task; problems there fail every row of the task.
  std::optional<SplineSpace> space;
  std::optional<Projector> proj;
  std::string setup_status, setup_message;
  try {
    space.emplace(build_space(build_uniform_mesh(n), task.p, cfg.m));
    proj.emplace(*space, task.k, cfg.ell);
  } catch (const Error &e) {
    setup_status = to_string(e.kind());
    setup_message = e.what();
  }
  for (int si = 0; si < cfg.seeds; ++si) {
    const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(si);
    std::optional<TrigPoly> u;
    std::string in_status, in_message;
    if (setup_status.empty()) try {
        if (cfg.input == InputKind::band)
          u = random_oscillating(task.k, cfg.xi_lo, cfg.xi_hi, seed, cfg.real_valued).first;
        else
          u = approx_oscillating(task.k, cfg.leak_eps, {cfg.leak_J, cfg.xi_lo, cfg.xi_hi, cfg.real_valued}, seed).first;
      } catch (const Error &e) {
        in_status = to_string(e.kind());
        in_message = e.what();
      }
    nlohmann::json lemmas = nlohmann::json::object();
    std::string lemma_status, lemma_message;
    if (u && (cfg.identities || cfg.upout)) try {
        if (cfg.identities) {
          const auto q = proj->project(*u).coefficients;
          const auto low = lowout_sum(*u, *space->mesh(), task.p, task.k, &q);
          const double bound = std::pow(cfg.xi_lo, 2 * (task.p + 1));
          lemmas["identities"] = to_json(low);
          lemmas["identities"]["ratio_bound"] = bound;
          lemmas["identities"]["ratio_ok"] = low.ratio >= bound;
        }
        if (cfg.upout) {
          nlohmann::json up = nlohmann::json::array();
          for (double e : cfg.eval)
            if (e >= 0 && is_integer(e) && e <= cfg.m) up.push_back(to_json(upout_check(*u, *proj, int(e), cfg.upout_eps)));
          lemmas["upout"] = up;
        }
      } catch (const Error &e) {
        lemma_status = to_string(e.kind());
        lemma_message = e.what();
      }
    for (double eval : cfg.eval) {
      const auto flavors = eval < 0 ? std::vector<NormFlavor>{NormFlavor::spectral} : cfg.flavors;
      for (NormFlavor fl : flavors) {
        SweepRow row = base;
        row.seed = seed;
        row.eval = eval;
        row.flavor = fl;
        row.lemmas = lemmas;
        if (!setup_status.empty()) {
          fail_row(row, setup_status, setup_message);
        } else if (!in_status.empty()) {
          fail_row(row, in_status, in_message);
        } else if (!lemma_status.empty()) {
          row.unorm = u->l2_norm();
          fail_row(row, lemma_status, lemma_message);
        } else {
          try {
            row.unorm = u->l2_norm();
            const SobolevParams params{task.k, eval, fl, eval < 0 ? cfg.bracket_N : 0};
            const NormBracket b = proj->residual_error(*u, params);
            row.bracket_lo = b.lower;
            row.bracket_hi = b.upper;
            row.error = b.mid();
          } catch (const Error &e) {
            fail_row(row, to_string(e.kind()), e.what());
          }
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string to_string(InputKind kind) { return kind == InputKind::band ? "band" : "approx"; }

InputKind parse_input_kind(const std::string &s) {
  if (s == "band") return InputKind::band;
  if (s == "approx") return InputKind::approx;
  throw Error(ErrorKind::config, "input must be band or approx, got '" + s + "'");
}

void validate_config(const SweepConfig &c) {
  auto bad = [](const std::string &what) { throw Error(ErrorKind::config, what); };
  for (int p : c.p)
    if (p < 0) bad("p entries must be >= 0");
  if (c.m < 0) bad("m must be >= 0");
  for (int p : c.p)
    if (c.m > p + 1) bad("m must be <= p+1 for every p");
  if (c.ell < 0 || c.ell > c.m) bad("ell must satisfy 0 <= ell <= m");
  for (double e : c.eval) {
    if (e >= 0 && !is_integer(e)) bad("non-negative eval orders must be integers");
    if (e > c.m) bad("eval order m' must be <= m");
  }
  for (double k : c.k)
    if (!(k > 0)) bad("k entries must be positive");
  for (double hk : c.hk) {
    if (!(hk > 0)) bad("hk entries must be positive");
    if (c.upout && hk >= 1) bad("hk entry " + fmt(hk) + " >= 1 violates the upout lemma hypothesis hk < 1");
  }
  for (double k : c.k)
    for (double hk : c.hk)
      if (resolve_n(k, hk) < 2) bad("k=" + fmt(k) + ", hk=" + fmt(hk) + " resolves to fewer than 2 elements");
  if (!(c.xi_lo > 0 && c.xi_lo < c.xi_hi)) bad("need 0 < xi_lo < xi_hi");
  if (c.seeds < 0) bad("seeds must be >= 0");
  if (c.flavors.empty()) bad("flavors must not be empty");
  if (c.bracket_N < 1) bad("bracket_N must be >= 1");
  if (c.input == InputKind::approx) {
    if (!(c.leak_eps > 0 && c.leak_eps <= c.xi_lo)) bad("leak_eps must lie in (0, xi_lo]");
    if (c.leak_J < 1) bad("leak_J must be >= 1");
  }
  if (!(c.upout_eps > 0 && c.upout_eps < 1)) bad("upout_eps must lie in (0, 1)");
  if (!(c.slope_tol > 0) || !(c.ratio_tol >= 1)) bad("slope_tol must be > 0 and ratio_tol >= 1");
  if (!(c.max_bracket_width > 0)) bad("max_bracket_width must be positive");
  if (c.threads < 0) bad("threads must be >= 0");
}

SweepTable run_sweep(const SweepConfig &cfg, int threads) {
  std::vector<Task> tasks;
  for (int p : cfg.p)
    for (double k : cfg.k)
      for (double hk : cfg.hk) tasks.push_back({p, k, hk});
  std::vector<std::vector<SweepRow>> out(tasks.size());
  int workers = threads > 0 ? threads : cfg.threads > 0 ? cfg.threads : int(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max<int>(1, int(tasks.size())));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks.size();) out[i] = run_task(cfg, tasks[i]);
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  SweepTable table{cfg, {}};
  for (auto &rows : out)
    for (auto &r : rows) table.rows.push_back(std::move(r));
  return table;
}

RateFit fit_rate(const std::vector<RatePoint> &points, double rho) {
  if (points.size() < 3) throw Error(ErrorKind::span, "rate fit needs at least 3 points");
  double lo = points[0].hk, hi = points[0].hk;
  for (const auto &pt : points) {
    if (!(pt.hk > 0 && pt.error > 0)) throw Error(ErrorKind::span, "rate fit needs positive hk and error");
    lo = std::min(lo, pt.hk);
    hi = std::max(hi, pt.hk);
  }
  if (hi < 4 * lo * (1 - 1e-12)) throw Error(ErrorKind::span, "hk range spans less than a factor 4");
  RateFit f;
  f.points = points;
  f.rho = rho;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = double(points.size());
  for (const auto &pt : points) {
    const double x = std::log(pt.hk), y = std::log(pt.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.intercept = (sy - f.slope * sx) / n;
  f.c_min = std::numeric_limits<double>::infinity();
  f.C_max = 0.0;
  for (const auto &pt : points) {
    const double c = pt.error / std::pow(pt.hk, rho);
    f.c_min = std::min(f.c_min, c);
    f.C_max = std::max(f.C_max, c);
  }
  return f;
}

Verdict judge(const RateFit &fit, double rho, double slope_tol, double ratio_tol) {
  Verdict v;
  if (!(std::abs(fit.slope - rho) <= slope_tol)) v.reasons.push_back("slope");
  if (!(fit.c_min > 0 && fit.C_max / fit.c_min <= ratio_tol)) v.reasons.push_back("constant drift");
  v.pass = v.reasons.empty();
  return v;
}

double expected_rate(int p, int ell, double eval) {
  if (eval >= 0) return p + 1 - eval;
  return std::min(p + 1 - eval, 2.0 * (p + 1 - ell));
}

std::vector<GroupFit> fit_table(const std::vector<SweepRow> &rows, const SweepConfig &cfg) {
  using Key = std::tuple<int, int, int, double, int>;
  std::map<Key, GroupFit> groups;
  std::map<Key, std::vector<RatePoint>> points;
  for (const auto &r : rows) {
    const Key key{r.p, r.m, r.ell, r.eval, static_cast<int>(r.flavor)};
    auto &g = groups[key];
    g.p = r.p;
    g.m = r.m;
    g.ell = r.ell;
    g.eval = r.eval;
    g.flavor = r.flavor;
    ++g.rows;
    if (!r.ok() || !std::isfinite(r.error)) {
      ++g.failed;
      continue;
    }
    if (r.p >= 1 && r.k < cfg.k_min) {
      ++g.excluded_k;
      continue;
    }
    const double width = r.error > 0 ? (r.bracket_hi - r.bracket_lo) / r.error : 0.0;
    if (width > cfg.max_bracket_width) {
      ++g.rejected_bracket;
      continue;
    }
    g.max_bracket_width = std::max(g.max_bracket_width, width);
    points[key].push_back({r.hk, r.error});
  }
  std::vector<GroupFit> out;
  for (auto &[key, g] : groups) {
    const double rho = expected_rate(g.p, g.ell, g.eval);
    try {
      g.fit = fit_rate(points[key], rho);
      g.fit.verdict = judge(g.fit, rho, cfg.slope_tol, cfg.ratio_tol);
    } catch (const Error &e) {
      g.error = e.what();
      g.fit.rho = rho;
      g.fit.points = points[key];
      g.fit.verdict = {false, {"span"}};
    }
    out.push_back(std::move(g));
  }
  return out;
}

bool all_pass(const std::vector<GroupFit> &fits) {
  return std::all_of(fits.begin(), fits.end(), [](const GroupFit &g) { return g.fit.verdict.pass; });
}

std::string csv_header() { return "p,m,ell,eval,k,n,h,hk,seed,flavor,error,bracket_lo,bracket_hi,unorm"; }

std::string to_csv(const std::vector<SweepRow> &rows) {
  std::string s = csv_header() + "\n";
  for (const auto &r : rows) {
    s += std::to_string(r.p) + "," + std::to_string(r.m) + "," + std::to_string(r.ell) + "," + fmt(r.eval) + "," +
         fmt(r.k) + "," + std::to_string(r.n) + "," + fmt(r.h) + "," + fmt(r.hk) + "," + std::to_string(r.seed) + "," +
         to_string(r.flavor) + "," + fmt(r.error) + "," + fmt(r.bracket_lo) + "," + fmt(r.bracket_hi) + "," +
         fmt(r.unorm) + "\n";
  }
  return s;
}

std::vector<SweepRow> parse_csv(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != csv_header())
    throw Error(ErrorKind::config, "csv header must be '" + csv_header() + "'");
  std::vector<SweepRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (f.size() != 14) throw Error(ErrorKind::config, "csv line " + std::to_string(lineno) + ": expected 14 fields");
    try {
      SweepRow r;
      r.p = std::stoi(f[0]);
      r.m = std::stoi(f[1]);
      r.ell = std::stoi(f[2]);
      r.eval = std::strtod(f[3].c_str(), nullptr);
      r.k = std::strtod(f[4].c_str(), nullptr);
      r.n = std::stoi(f[5]);
      r.h = std::strtod(f[6].c_str(), nullptr);
      r.hk = std::strtod(f[7].c_str(), nullptr);
      r.seed = std::stoull(f[8]);
      r.flavor = parse_flavor(f[9]);
      r.error = std::strtod(f[10].c_str(), nullptr);
      r.bracket_lo = std::strtod(f[11].c_str(), nullptr);
      r.bracket_hi = std::strtod(f[12].c_str(), nullptr);
      r.unorm = std::strtod(f[13].c_str(), nullptr);
      if (!std::isfinite(r.error)) r.status = "failed";
      rows.push_back(std::move(r));
    } catch (const std::logic_error &) {
      throw Error(ErrorKind::config, "csv line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return rows;
}

nlohmann::json to_json(const SweepRow &r) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"p", r.p},
          {"m", r.m},
          {"ell", r.ell},
          {"eval", r.eval},
          {"k", r.k},
          {"n", r.n},
          {"h", r.h},
          {"hk", r.hk},
          {"seed", r.seed},
          {"flavor", to_string(r.flavor)},
          {"error", num(r.error)},
          {"bracket_lo", num(r.bracket_lo)},
          {"bracket_hi", num(r.bracket_hi)},
          {"unorm", num(r.unorm)},
          {"status", r.status},
          {"message", r.message},
          {"lemmas", r.lemmas}};
}

nlohmann::json to_json(const RateFit &f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto &pt : f.points) pts.push_back({pt.hk, pt.error});
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"points", pts},
          {"slope", num(f.slope)},
          {"intercept", num(f.intercept)},
          {"rho", f.rho},
          {"c_min", num(f.c_min)},
          {"C_max", num(f.C_max)},
          {"verdict", {{"pass", f.verdict.pass}, {"reasons", f.verdict.reasons}}}};
}

nlohmann::json to_json(const GroupFit &g) {
  return {{"p", g.p},
          {"m", g.m},
          {"ell", g.ell},
          {"eval", g.eval},
          {"flavor", to_string(g.flavor)},
          {"rows", g.rows},
          {"excluded_k", g.excluded_k},
          {"rejected_bracket", g.rejected_bracket},
          {"failed", g.failed},
          {"max_bracket_width", g.max_bracket_width},
          {"fit", to_json(g.fit)},
          {"error", g.error}};
}

nlohmann::json to_json(const SweepConfig &c) {
  std::vector<std::string> flavors;
  for (auto f : c.flavors) flavors.push_back(to_string(f));
  return {{"p", c.p},
          {"m", c.m},
          {"ell", c.ell},
          {"eval", c.eval},
          {"k", c.k},
          {"hk", c.hk},
          {"xi_lo", c.xi_lo},
          {"xi_hi", c.xi_hi},
          {"seeds", c.seeds},
          {"seed_base", c.seed_base},
          {"real_valued", c.real_valued},
          {"flavors", flavors},
          {"bracket_N", c.bracket_N},
          {"input", to_string(c.input)},
          {"leak_eps", c.leak_eps},
          {"leak_J", c.leak_J},
          {"upout", c.upout},
          {"upout_eps", c.upout_eps},
          {"identities", c.identities},
          {"k_min", c.k_min},
          {"slope_tol", c.slope_tol},
          {"ratio_tol", c.ratio_tol},
          {"max_bracket_width", c.max_bracket_width},
          {"threads", c.threads}};
}

} // namespace osc
