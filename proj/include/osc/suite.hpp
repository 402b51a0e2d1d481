#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "osc/rates.hpp"

namespace osc {

/// One named verdict with the numbers behind it.
struct SuiteResult {
  std::string name;
  bool pass = false;
  nlohmann::json detail = nlohmann::json::object();
};

nlohmann::json to_json(const SuiteResult &r);
bool all_pass(const std::vector<SuiteResult> &results);

/// sin in S^{2,2} on the four-element analytic circle mesh, cos not.
SuiteResult counterexample_suite();

/// Moment matching on `trials` random smooth inputs (m = trial mod 5) plus
/// exact reproduction of random polynomials of each degree m <= 4.
SuiteResult moment_suite(int trials, std::uint64_t seed);

/// Scaled trace constant over random smooth inputs, h and eps; bounded C
/// with spread across h at most `spread_tol`.
SuiteResult trace_suite(int trials, std::uint64_t seed, double spread_tol = 4.0);

/// Parseval decomposition and polynomial insertion to 1e-10 and the lowout
/// ratio bound on every row carrying identity data; rows without it fail.
SuiteResult identity_suite(const std::vector<SweepRow> &rows);

/// Upout constants finite on every row, spread within `spread_tol` per (p, m').
SuiteResult upout_suite(const std::vector<SweepRow> &rows, double spread_tol = 4.0);

/// ||I-P||_{p+1 -> l} <= C (hk)^{p+1-l}, C stable within `spread_tol` across hk.
SuiteResult conforming_suite(int p, int ell, double k, const std::vector<double> &hk, int N,
                             double spread_tol = 2.0);

struct DualityCase {
  int ell = 0;
  double s = 0.0;
};

/// Duality lhs/rhs <= c_max on uniform meshes of degree p with m = l; the
/// (0, 0) case must give C = 1 to 1e-10.
SuiteResult duality_suite(int p, const std::vector<DualityCase> &cases, double k, const std::vector<double> &hk,
                          int N, double c_max = 4.0);

/// Optimality chain for s in `s_list` with C <= c_max.
SuiteResult optimality_suite(int p, int ell, const std::vector<double> &s_list, double k,
                             const std::vector<double> &hk, int N, double c_max = 4.0);

/// Idempotence, self-adjointness, Pythagoras and nested monotonicity on
/// random (u, space, k) triples, all defects <= tol.
SuiteResult algebra_suite(int trials, std::uint64_t seed, double tol = 1e-9);

} // namespace osc
