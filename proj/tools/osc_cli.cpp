// Command-line driver: sweep, counterexample, lemmas, duality, report.
// Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 bad config or usage,
// 3 any other error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "osc/config.hpp"
#include "osc/error.hpp"
#include "osc/rates.hpp"
#include "osc/suite.hpp"

#ifndef OSC_VERSION
#define OSC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace osc;

namespace {

constexpr int exit_pass = 0, exit_verdict = 1, exit_config = 2, exit_internal = 3;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot write '" + path.string() + "'");
  out << text;
}

/// Options shared by every subcommand; lists left empty keep the config value.
struct Options {
  std::string config;
  std::string out;
  std::string format = "csv";
  std::optional<int> seeds;
  std::optional<int> threads;
  std::vector<int> p;
  std::optional<int> m, ell;
  std::vector<double> k, hk, eval;
  std::optional<std::string> input;
  std::optional<int> bracket_N;
};

void add_common(CLI::App *cmd, Options &o) {
  cmd->add_option("--config", o.config, "YAML configuration file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seeds", o.seeds, "input seeds per sweep point")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", o.threads, "worker threads (fallback OSC_THREADS)")->check(CLI::NonNegativeNumber);
}

void add_overrides(CLI::App *cmd, Options &o) {
  cmd->add_option("--format", o.format, "table format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--p", o.p, "polynomial degrees");
  cmd->add_option("--m", o.m, "smoothness of the space");
  cmd->add_option("--ell", o.ell, "projection order");
  cmd->add_option("--k", o.k, "wavenumbers");
  cmd->add_option("--hk", o.hk, "targets for h k");
  cmd->add_option("--eval", o.eval, "error norm orders");
  cmd->add_option("--input", o.input, "band or approx");
  cmd->add_option("--bracket-N", o.bracket_N, "exact section for negative norms");
}

SweepConfig resolve(const Options &o) {
  SweepConfig c = o.config.empty() ? SweepConfig{} : parse_config(o.config);
  if (o.seeds) c.seeds = *o.seeds;
  if (!o.p.empty()) c.p = o.p;
  if (o.m) c.m = *o.m;
  if (o.ell) c.ell = *o.ell;
  if (!o.k.empty()) c.k = o.k;
  if (!o.hk.empty()) c.hk = o.hk;
  if (!o.eval.empty()) c.eval = o.eval;
  if (o.input) c.input = parse_input_kind(*o.input);
  if (o.bracket_N) c.bracket_N = *o.bracket_N;
  validate_config(c);
  return c;
}

int resolve_threads(const Options &o) {
  if (o.threads) return *o.threads;
  if (const char *env = std::getenv("OSC_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (const std::exception &) {
      throw Error(ErrorKind::config, std::string("OSC_THREADS is not an integer: '") + env + "'");
    }
  }
  return 0;
}

/// Writes the manifest and returns the exit code for `pass`.
class Run {
public:
  Run(std::string command, const Options &o) : command_(std::move(command)), out_(o.out), started_(utc_now()) {
    if (!out_.empty()) fs::create_directories(out_);
  }

  /// Writes `text` under the output directory when one is given.
  void emit(const std::string &name, const std::string &text) {
    if (out_.empty()) return;
    const fs::path path = out_ / name;
    write_file(path, text);
    outputs_.push_back(path.string());
  }

  int finish(bool pass, const SweepConfig *cfg, json extra = json::object()) {
    json m = {{"tool", "osc"},
              {"version", OSC_VERSION},
              {"command", command_},
              {"started", started_},
              {"finished", utc_now()},
              {"pass", pass}};
    if (cfg) {
      json seeds = json::array();
      for (int i = 0; i < cfg->seeds; ++i) seeds.push_back(cfg->seed_base + std::uint64_t(i));
      m["config_hash"] = config_hash(*cfg);
      m["seeds"] = seeds;
      m["config"] = to_json(*cfg);
    }
    for (auto &[key, v] : extra.items()) m[key] = v;
    if (!out_.empty()) {
      const fs::path path = out_ / "manifest.json";
      outputs_.push_back(path.string());
      m["outputs"] = outputs_;
      write_file(path, m.dump(2) + "\n");
    }
    return pass ? exit_pass : exit_verdict;
  }

private:
  std::string command_;
  fs::path out_;
  std::string started_;
  std::vector<std::string> outputs_;
};

void print_fits(const std::vector<GroupFit> &fits) {
  for (const auto &g : fits) {
    std::printf("p=%d m=%d ell=%d eval=%g %-14s ", g.p, g.m, g.ell, g.eval, to_string(g.flavor).c_str());
    if (!g.error.empty()) {
      std::printf("FAIL %s\n", g.error.c_str());
      continue;
    }
    std::string reasons;
    for (const auto &r : g.fit.verdict.reasons) reasons += " " + r;
    std::printf("slope %.4f (rho %g) C %.4g..%.4g %s%s\n", g.fit.slope, g.fit.rho, g.fit.c_min, g.fit.C_max,
                g.fit.verdict.pass ? "PASS" : "FAIL", reasons.c_str());
  }
}

json fits_json(const std::vector<GroupFit> &fits) {
  json a = json::array();
  for (const auto &g : fits) a.push_back(to_json(g));
  return a;
}

void print_suite(const SuiteResult &r) {
  std::printf("%-20s %s %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL", r.detail.dump().c_str());
}

json suites_json(const std::vector<SuiteResult> &rs) {
  json a = json::array();
  for (const auto &r : rs) a.push_back(to_json(r));
  return a;
}

int cmd_sweep(const Options &o) {
  const SweepConfig cfg = resolve(o);
  Run run("sweep", o);
  const auto table = run_sweep(cfg, resolve_threads(o));
  const auto fits = fit_table(table.rows, cfg);
  print_fits(fits);
  if (o.format == "csv") {
    run.emit("sweep.csv", to_csv(table.rows));
  } else {
    json rows = json::array();
    for (const auto &r : table.rows) rows.push_back(to_json(r));
    run.emit("sweep.json", json{{"config", to_json(cfg)}, {"rows", rows}}.dump(2) + "\n");
  }
  run.emit("config.yaml", serialize_config(cfg));
  run.emit("fits.json", json{{"config", to_json(cfg)}, {"fits", fits_json(fits)}}.dump(2) + "\n");
  return run.finish(all_pass(fits), &cfg);
}

int cmd_counterexample(const Options &o) {
  Run run("counterexample", o);
  const auto r = counterexample_suite();
  std::printf("sin membership residual %.3e\n", r.detail["sin_membership"].get<double>());
  std::printf("cos membership residual %.3e\n", r.detail["cos_membership"].get<double>());
  for (const auto &e : r.detail["projection"])
    std::printf("ell=%d  ||(I-P) sin||_L2 %.3e\n", e["ell"].get<int>(), e["l2_residual"].get<double>());
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
  run.emit("counterexample.json", to_json(r).dump(2) + "\n");
  return run.finish(r.pass, nullptr);
}

int cmd_lemmas(const Options &o) {
  SweepConfig cfg = resolve(o);
  cfg.identities = true;
  cfg.upout = true;
  validate_config(cfg);
  Run run("lemmas", o);
  const auto table = run_sweep(cfg, resolve_threads(o));
  const std::vector<SuiteResult> rs{moment_suite(100, cfg.seed_base), trace_suite(20, cfg.seed_base),
                                    identity_suite(table.rows), upout_suite(table.rows)};
  for (const auto &r : rs) print_suite(r);
  json records = json::array();
  for (const auto &row : table.rows)
    if (row.eval == cfg.eval.front() && row.flavor == cfg.flavors.front())
      records.push_back({{"p", row.p}, {"k", row.k}, {"hk", row.hk}, {"seed", row.seed}, {"lemmas", row.lemmas}});
  run.emit("lemmas.json", json{{"config", to_json(cfg)}, {"suites", suites_json(rs)}, {"records", records}}.dump(2) + "\n");
  return run.finish(all_pass(rs), &cfg);
}

int cmd_duality(const Options &o, int N) {
  const SweepConfig cfg = resolve(o);
  Run run("duality", o);
  const double k = o.k.empty() ? 40.0 : o.k.front();
  const std::vector<double> hk = o.hk.empty() ? std::vector<double>{0.5, 0.25} : o.hk;
  const int p = o.p.empty() ? 1 : o.p.front();
  std::vector<SuiteResult> rs{duality_suite(p, {{0, 0.0}, {1, 1.0}, {1, 2.0}}, k, hk, N)};
  if (p >= 1) {
    const double s0 = std::max(1.0, double(p - 1));
    rs.push_back(optimality_suite(p, 1, {s0, s0 + 1.0}, k, hk, N));
    rs.push_back(conforming_suite(p, 1, k, hk, 2048));
  }
  for (const auto &r : rs) print_suite(r);
  run.emit("duality.json", json{{"suites", suites_json(rs)}}.dump(2) + "\n");
  return run.finish(all_pass(rs), &cfg, {{"N", N}});
}

int cmd_report(const Options &o, const std::string &csv) {
  Options resolved = o;
  if (resolved.config.empty()) {
    const fs::path sibling = fs::path(csv).parent_path() / "config.yaml";
    if (fs::exists(sibling)) resolved.config = sibling.string();
  }
  const SweepConfig cfg = resolve(resolved);
  Run run("report", o);
  const auto rows = parse_csv(read_file(csv));
  const auto fits = fit_table(rows, cfg);
  print_fits(fits);
  run.emit("fits.json", json{{"config", to_json(cfg)}, {"source", csv}, {"fits", fits_json(fits)}}.dump(2) + "\n");
  return run.finish(all_pass(fits), &cfg, {{"source", csv}});
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Best-approximation rates of splines for oscillating functions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(OSC_VERSION));
  Options o;
  int N = 8192;
  std::string csv;

  auto *sweep = app.add_subcommand("sweep", "run the rate sweep and judge the fitted exponents");
  add_common(sweep, o);
  add_overrides(sweep, o);
  auto *ce = app.add_subcommand("counterexample", "sin in S^{2,2} on the analytic four-element mesh");
  ce->add_option("--out", o.out, "output directory");
  auto *lem = app.add_subcommand("lemmas", "moment matching, trace, identity layer and upout checks");
  add_common(lem, o);
  add_overrides(lem, o);
  auto *dual = app.add_subcommand("duality", "duality, optimality chain and conforming bound");
  add_common(dual, o);
  add_overrides(dual, o);
  dual->add_option("--N", N, "finite section size")->check(CLI::PositiveNumber);
  auto *rep = app.add_subcommand("report", "re-fit an existing sweep CSV");
  add_common(rep, o);
  rep->add_option("csv", csv, "CSV written by sweep")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_config;
  }

  try {
    if (*sweep) return cmd_sweep(o);
    if (*ce) return cmd_counterexample(o);
    if (*lem) return cmd_lemmas(o);
    if (*dual) return cmd_duality(o, N);
    if (*rep) return cmd_report(o, csv);
  } catch (const Error &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.kind() == ErrorKind::config ? exit_config : exit_internal;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_internal;
  }
  return exit_internal;
}
