#include "osc/config.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "osc/error.hpp"

namespace osc {

namespace {

[[noreturn]] void fail_at(const YAML::Node &node, const std::string &what) {
  const auto mark = node.Mark();
  const std::string where = mark.line >= 0 ? "line " + std::to_string(mark.line + 1) + ": " : "";
  throw Error(ErrorKind::config, where + what);
}

template <class T> T scalar(const YAML::Node &node, const std::string &field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception &) {
    fail_at(node, "field '" + field + "' has the wrong type");
  }
}

template <class T> std::vector<T> list(const YAML::Node &node, const std::string &field) {
  if (node.IsScalar()) return {scalar<T>(node, field)};
  if (!node.IsSequence()) fail_at(node, "field '" + field + "' must be a list");
  std::vector<T> out;
  for (const auto &item : node) out.push_back(scalar<T>(item, field));
  return out;
}

using Setter = std::function<void(SweepConfig &, const YAML::Node &, const std::string &)>;

const std::map<std::string, std::map<std::string, Setter>> &schema() {
  static const std::map<std::string, std::map<std::string, Setter>> s = {
      {"space",
       {{"p", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.p = list<int>(n, f); }},
        {"m", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.m = scalar<int>(n, f); }},
        {"ell", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.ell = scalar<int>(n, f); }}}},
      {"input",
       {{"kind",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) {
           try {
             c.input = parse_input_kind(scalar<std::string>(n, f));
           } catch (const Error &e) {
             fail_at(n, e.what());
           }
         }},
        {"xi_lo", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.xi_lo = scalar<double>(n, f); }},
        {"xi_hi", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.xi_hi = scalar<double>(n, f); }},
        {"seeds", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.seeds = scalar<int>(n, f); }},
        {"seed_base",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.seed_base = scalar<std::uint64_t>(n, f); }},
        {"real_valued",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.real_valued = scalar<bool>(n, f); }},
        {"leak_eps",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.leak_eps = scalar<double>(n, f); }},
        {"leak_J", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.leak_J = scalar<int>(n, f); }}}},
      {"sweep",
       {{"k", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.k = list<double>(n, f); }},
        {"hk", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.hk = list<double>(n, f); }},
        {"eval", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.eval = list<double>(n, f); }},
        {"flavors",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) {
           c.flavors.clear();
           for (const auto &s : list<std::string>(n, f)) try {
               c.flavors.push_back(parse_flavor(s));
             } catch (const Error &e) {
               fail_at(n, std::string("field 'flavors': ") + e.what());
             }
         }},
        {"bracket_N",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.bracket_N = scalar<int>(n, f); }},
        {"threads", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.threads = scalar<int>(n, f); }}}},
      {"lemmas",
       {{"upout", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.upout = scalar<bool>(n, f); }},
        {"upout_eps",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.upout_eps = scalar<double>(n, f); }},
        {"identities",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.identities = scalar<bool>(n, f); }}}},
      {"verdict",
       {{"k_min", [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.k_min = scalar<double>(n, f); }},
        {"slope_tol",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.slope_tol = scalar<double>(n, f); }},
        {"ratio_tol",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) { c.ratio_tol = scalar<double>(n, f); }},
        {"max_bracket_width",
         [](SweepConfig &c, const YAML::Node &n, const std::string &f) {
           c.max_bracket_width = scalar<double>(n, f);
         }}}},
  };
  return s;
}

} // namespace

SweepConfig parse_config_text(const std::string &text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException &e) {
    throw Error(ErrorKind::config, "line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  SweepConfig cfg;
  if (root.IsNull()) {
    validate_config(cfg);
    return cfg;
  }
  if (!root.IsMap()) fail_at(root, "top level must be a map of sections");
  for (auto sec = root.begin(); sec != root.end(); ++sec) {
    const std::string name = scalar<std::string>(sec->first, "section");
    const auto found = schema().find(name);
    if (found == schema().end()) fail_at(sec->first, "unknown section '" + name + "'");
    if (sec->second.IsNull()) continue;
    if (!sec->second.IsMap()) fail_at(sec->second, "section '" + name + "' must be a map");
    for (auto kv = sec->second.begin(); kv != sec->second.end(); ++kv) {
      const std::string key = scalar<std::string>(kv->first, "key");
      const auto setter = found->second.find(key);
      if (setter == found->second.end()) fail_at(kv->first, "unknown key '" + name + "." + key + "'");
      setter->second(cfg, kv->second, name + "." + key);
    }
  }
  validate_config(cfg);
  return cfg;
}

SweepConfig parse_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const SweepConfig &c) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "p" << YAML::Value << YAML::Flow << c.p;
  out << YAML::Key << "m" << YAML::Value << c.m;
  out << YAML::Key << "ell" << YAML::Value << c.ell;
  out << YAML::EndMap;
  out << YAML::Key << "input" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << to_string(c.input);
  out << YAML::Key << "xi_lo" << YAML::Value << c.xi_lo;
  out << YAML::Key << "xi_hi" << YAML::Value << c.xi_hi;
  out << YAML::Key << "seeds" << YAML::Value << c.seeds;
  out << YAML::Key << "seed_base" << YAML::Value << c.seed_base;
  out << YAML::Key << "real_valued" << YAML::Value << c.real_valued;
  out << YAML::Key << "leak_eps" << YAML::Value << c.leak_eps;
  out << YAML::Key << "leak_J" << YAML::Value << c.leak_J;
  out << YAML::EndMap;
  out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k" << YAML::Value << YAML::Flow << c.k;
  out << YAML::Key << "hk" << YAML::Value << YAML::Flow << c.hk;
  out << YAML::Key << "eval" << YAML::Value << YAML::Flow << c.eval;
  std::vector<std::string> flavors;
  for (auto f : c.flavors) flavors.push_back(to_string(f));
  out << YAML::Key << "flavors" << YAML::Value << YAML::Flow << flavors;
  out << YAML::Key << "bracket_N" << YAML::Value << c.bracket_N;
  out << YAML::Key << "threads" << YAML::Value << c.threads;
  out << YAML::EndMap;
  out << YAML::Key << "lemmas" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "upout" << YAML::Value << c.upout;
  out << YAML::Key << "upout_eps" << YAML::Value << c.upout_eps;
  out << YAML::Key << "identities" << YAML::Value << c.identities;
  out << YAML::EndMap;
  out << YAML::Key << "verdict" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "k_min" << YAML::Value << c.k_min;
  out << YAML::Key << "slope_tol" << YAML::Value << c.slope_tol;
  out << YAML::Key << "ratio_tol" << YAML::Value << c.ratio_tol;
  out << YAML::Key << "max_bracket_width" << YAML::Value << c.max_bracket_width;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string config_hash(const SweepConfig &cfg) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace osc
