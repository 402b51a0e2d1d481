#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "osc/funcspace.hpp"

namespace osc {

enum class InputKind { band, approx };

std::string to_string(InputKind kind);
InputKind parse_input_kind(const std::string &s);

struct SweepConfig {
  std::vector<int> p{1};
  int m = 0;
  int ell = 0;
  /// m' >= 0 or -s < 0.
  std::vector<double> eval{0.0};
  std::vector<double> k{40.0, 80.0, 160.0};
  /// Resolved to n = round(2 pi k / hk) elements, so the realized hk is 2 pi k / n.
  std::vector<double> hk{0.5, 0.35, 0.25, 0.18, 0.125};
  double xi_lo = 0.5;
  double xi_hi = 1.0;
  int seeds = 5;
  std::uint64_t seed_base = 0;
  bool real_valued = false;
  /// Flavors for non-negative evaluation orders; negative orders always use the multiplier.
  std::vector<NormFlavor> flavors{NormFlavor::derivative_sum};
  int bracket_N = 2048;
  InputKind input = InputKind::band;
  double leak_eps = 0.25;
  int leak_J = 8;
  bool upout = false;
  double upout_eps = 0.1;
  bool identities = false;
  /// Rows with k below this are reported but excluded from verdicts when p >= 1.
  double k_min = 40.0;
  double slope_tol = 0.25;
  double ratio_tol = 10.0;
  double max_bracket_width = 0.05;
  int threads = 0;

  bool operator==(const SweepConfig &) const = default;
};

/// Throws ErrorKind::config on inconsistent values.
void validate_config(const SweepConfig &cfg);

struct SweepRow {
  int p = 0;
  int m = 0;
  int ell = 0;
  double eval = 0.0;
  double k = 0.0;
  int n = 0;
  double h = 0.0;
  double hk = 0.0;
  std::uint64_t seed = 0;
  NormFlavor flavor = NormFlavor::derivative_sum;
  /// Bracket midpoint; NaN for failed rows.
  double error = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  double unorm = 0.0;
  /// "ok" or the error kind that failed the row.
  std::string status = "ok";
  std::string message;
  /// Lemma checks attached to this row when enabled.
  nlohmann::json lemmas = nlohmann::json::object();

  bool ok() const { return status == "ok"; }
};

struct SweepTable {
  SweepConfig config;
  std::vector<SweepRow> rows;
};

/// Rows in deterministic (p, k, hk, seed, eval, flavor) order regardless of threads.
SweepTable run_sweep(const SweepConfig &cfg, int threads = 0);

struct RatePoint {
  double hk = 0.0;
  double error = 0.0;
};

struct Verdict {
  bool pass = false;
  std::vector<std::string> reasons;
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double rho = 0.0;
  double c_min = 0.0;
  double C_max = 0.0;
  Verdict verdict;
};

/// Least squares on (log hk, log error); constants error / hk^rho.
/// Needs >= 3 points spanning a factor >= 4 in hk (ErrorKind::span).
RateFit fit_rate(const std::vector<RatePoint> &points, double rho);

Verdict judge(const RateFit &fit, double rho, double slope_tol, double ratio_tol);

/// p+1-m' for m' >= 0, min(p+1+s, 2(p+1-l)) for -s < 0.
double expected_rate(int p, int ell, double eval);

struct GroupFit {
  int p = 0;
  int m = 0;
  int ell = 0;
  double eval = 0.0;
  NormFlavor flavor = NormFlavor::derivative_sum;
  int rows = 0;
  int excluded_k = 0;
  int rejected_bracket = 0;
  int failed = 0;
  /// Worst relative bracket width among the fitted rows.
  double max_bracket_width = 0.0;
  RateFit fit;
  std::string error;
};

/// One fit per (p, m, l, eval, flavor) in sorted order.
std::vector<GroupFit> fit_table(const std::vector<SweepRow> &rows, const SweepConfig &cfg);

bool all_pass(const std::vector<GroupFit> &fits);

std::string csv_header();
std::string to_csv(const std::vector<SweepRow> &rows);
/// Inverse of to_csv; rows with a NaN error come back with status "failed".
std::vector<SweepRow> parse_csv(const std::string &text);

nlohmann::json to_json(const SweepRow &row);
nlohmann::json to_json(const RateFit &fit);
nlohmann::json to_json(const GroupFit &fit);
nlohmann::json to_json(const SweepConfig &cfg);

} // namespace osc
