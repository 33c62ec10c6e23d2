#include "seisbed/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "seisbed/errors.hpp"
#include "seisbed/rng.hpp"
#include "seisbed/solver.hpp"
#include "seisbed/source.hpp"

namespace seisbed {

std::vector<int> RunConfig::free_params() const {
  std::vector<int> out;
  for (int i = 0; i < 7; ++i) {
    if (prior[i].has_value()) out.push_back(i);
  }
  return out;
}

std::vector<int> RunConfig::fixed_params() const {
  std::vector<int> out;
  for (int i = 0; i < 7; ++i) {
    if (fixed[i].has_value()) out.push_back(i);
  }
  return out;
}

int RunConfig::n_levels() const { return make_time_grid(dt, t_end).n_levels; }

namespace {

struct RawEntry {
  std::string value;
  int line;
};

[[noreturn]] void fail(int line, const std::string& msg) {
  std::ostringstream os;
  os << "config line " << line << ": " << msg;
  throw config_error(os.str());
}

double to_double(const RawEntry& e, const std::string& key) {
  std::size_t pos = 0;
  double v = 0;
  try {
    v = std::stod(e.value, &pos);
  } catch (const std::exception&) {
    fail(e.line, "value of '" + key + "' is not a number: " + e.value);
  }
  while (pos < e.value.size() && std::isspace(static_cast<unsigned char>(e.value[pos])))
    ++pos;
  if (pos != e.value.size()) fail(e.line, "trailing junk in '" + key + "'");
  return v;
}

std::vector<double> to_doubles(const RawEntry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(to_double({item, e.line}, key));
  }
  if (out.empty()) fail(e.line, "empty list for '" + key + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> k = {
      "x1_min", "x1_max", "x2_min", "x2_max", "h", "dt", "t_end", "cfl_safety",
      "layer", "noise_var", "noise_cov",
      "prior_x1s", "prior_x2s", "prior_ts", "prior_ws", "prior_m11", "prior_m12",
      "prior_m22", "fixed_x1s", "fixed_x2s", "fixed_ts", "fixed_ws", "fixed_m11",
      "fixed_m12", "fixed_m22", "theta_star", "receivers_x1", "n_receivers",
      "receiver_spacing", "estimator", "integrator", "mc_samples", "quad_level",
      "nested_outer", "nested_inner", "nested_reuse", "scenario", "diagnostic",
      "conv_mc_sizes", "conv_mc_replicates", "conv_quad_levels", "seed", "workers",
      "per_param", "dump_binary"};
  return k;
}

const std::array<const char*, 7> kParamNames = {"x1s", "x2s", "ts", "ws",
                                                "m11", "m12", "m22"};

// Paper model-problem priors used as defaults.
const std::array<std::pair<double, double>, 7> kDefaultPrior = {{{-1000, 1000},
                                                                 {-3000, -1000},
                                                                 {0.5, 1.5},
                                                                 {3, 5},
                                                                 {1e13, 1e15},
                                                                 {1e13, 1e15},
                                                                 {1e13, 1e15}}};

}  // namespace

RunConfig parse_config(const std::string& text) {
  std::map<std::string, RawEntry> entries;
  std::vector<std::pair<RawEntry, int>> layer_entries;  // value + line

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().count(key)) fail(lineno, "unknown key '" + key + "'");
    if (key == "layer") {
      layer_entries.push_back({{value, lineno}, lineno});
    } else {
      if (entries.count(key)) fail(lineno, "duplicate key '" + key + "'");
      entries[key] = {value, lineno};
    }
  }

  RunConfig cfg;
  auto used = std::set<std::string>{};
  auto take = [&](const std::string& key) -> std::optional<RawEntry> {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    used.insert(key);
    return it->second;
  };
  auto require_double = [&](const std::string& key) {
    auto e = take(key);
    if (!e) throw config_error("config: missing required key '" + key + "'");
    return to_double(*e, key);
  };
  auto default_note = [&](const std::string& key, const std::string& val) {
    cfg.defaults_applied.push_back(key + " = " + val);
  };
  auto opt_double = [&](const std::string& key, double dflt) {
    auto e = take(key);
    if (!e) {
      std::ostringstream os;
      os << dflt;
      default_note(key, os.str());
      return dflt;
    }
    return to_double(*e, key);
  };
  auto opt_int = [&](const std::string& key, int dflt) {
    return static_cast<int>(std::llround(opt_double(key, dflt)));
  };
  auto opt_string = [&](const std::string& key, const std::string& dflt) {
    auto e = take(key);
    if (!e) {
      if (!dflt.empty()) default_note(key, dflt);
      return dflt;
    }
    return e->value;
  };

  cfg.x1_min = require_double("x1_min");
  cfg.x1_max = require_double("x1_max");
  cfg.x2_min = require_double("x2_min");
  cfg.x2_max = require_double("x2_max");
  cfg.h = require_double("h");
  cfg.dt = require_double("dt");
  cfg.t_end = require_double("t_end");
  cfg.cfl_safety = opt_double("cfl_safety", 0.9);

  if (layer_entries.empty()) throw config_error("config: missing required key 'layer'");
  for (const auto& [e, ln] : layer_entries) {
    const auto v = to_doubles(e, "layer");
    if (v.size() != 5) fail(ln, "layer needs x2_top,x2_bottom,density,cp,cs");
    cfg.layers.push_back({v[0], v[1], v[2], v[3], v[4]});
  }

  if (entries.count("noise_cov")) {
    const auto v = to_doubles(*take("noise_cov"), "noise_cov");
    if (v.size() != 3) throw config_error("config: noise_cov needs c11,c12,c22");
    cfg.noise_cov << v[0], v[1], v[1], v[2];
  } else {
    const double s2 = opt_double("noise_var", 1e-4);
    cfg.noise_cov << s2, 0, 0, s2;
  }

  for (int i = 0; i < 7; ++i) {
    const std::string pk = std::string("prior_") + kParamNames[i];
    const std::string fk = std::string("fixed_") + kParamNames[i];
    const bool has_p = entries.count(pk) > 0;
    const bool has_f = entries.count(fk) > 0;
    if (has_p && has_f) {
      fail(entries[fk].line, "parameter '" + std::string(kParamNames[i]) +
                                 "' has both a prior and a fixed value");
    }
    if (has_f) {
      cfg.fixed[i] = to_double(*take(fk), fk);
    } else if (has_p) {
      const auto v = to_doubles(*take(pk), pk);
      if (v.size() != 2 || !(v[1] > v[0])) {
        fail(entries[pk].line, "prior range must be 'lo,hi' with hi > lo");
      }
      cfg.prior[i] = {v[0], v[1]};
    } else {
      cfg.prior[i] = kDefaultPrior[i];
      std::ostringstream os;
      os << kDefaultPrior[i].first << "," << kDefaultPrior[i].second;
      default_note(pk, os.str());
    }
  }

  cfg.theta_star.resize(7);
  if (entries.count("theta_star")) {
    const auto v = to_doubles(*take("theta_star"), "theta_star");
    if (v.size() != 7) throw config_error("config: theta_star needs 7 values");
    for (int i = 0; i < 7; ++i) cfg.theta_star[i] = v[i];
  } else {
    for (int i = 0; i < 7; ++i) {
      cfg.theta_star[i] = cfg.fixed[i] ? *cfg.fixed[i]
                                       : 0.5 * (cfg.prior[i]->first + cfg.prior[i]->second);
    }
    default_note("theta_star", "prior means");
  }

  if (entries.count("receivers_x1")) {
    cfg.receivers_x1 = to_doubles(*take("receivers_x1"), "receivers_x1");
  }
  cfg.n_receivers = opt_int("n_receivers", 0);
  cfg.receiver_spacing = opt_double("receiver_spacing", 0);

  cfg.estimator = opt_string("estimator", "laplace");
  cfg.integrator = opt_string("integrator", "mc");
  cfg.mc_samples = opt_int("mc_samples", 500);
  cfg.quad_level = opt_int("quad_level", 3);
  cfg.nested_outer = opt_int("nested_outer", 200);
  cfg.nested_inner = opt_int("nested_inner", 1000);
  cfg.nested_reuse = opt_int("nested_reuse", 0) != 0;
  cfg.scenario = opt_string("scenario", "");
  cfg.diagnostic = opt_string("diagnostic", "");
  if (entries.count("conv_mc_sizes")) {
    cfg.conv_mc_sizes.clear();
    for (double v : to_doubles(*take("conv_mc_sizes"), "conv_mc_sizes")) {
      cfg.conv_mc_sizes.push_back(static_cast<int>(std::llround(v)));
    }
  }
  cfg.conv_mc_replicates = opt_int("conv_mc_replicates", 10);
  if (entries.count("conv_quad_levels")) {
    cfg.conv_quad_levels.clear();
    for (double v : to_doubles(*take("conv_quad_levels"), "conv_quad_levels")) {
      cfg.conv_quad_levels.push_back(static_cast<int>(std::llround(v)));
    }
  }
  cfg.seed = static_cast<std::uint64_t>(opt_double("seed", 0));
  cfg.workers = opt_int("workers", 1);
  cfg.per_param = opt_int("per_param", 0) != 0;
  cfg.dump_binary = opt_int("dump_binary", 0) != 0;

  // ---- validation ----
  const Grid grid = build_grid(cfg.x1_min, cfg.x1_max, cfg.x2_min, cfg.x2_max, cfg.h);
  const MaterialField mat = layered_material(cfg.layers, grid);
  (void)make_time_grid(cfg.dt, cfg.t_end);
  double min_limit = std::numeric_limits<double>::infinity();
  for (int id = 0; id < grid.n_nodes(); ++id) {
    min_limit = std::min(min_limit, cfg.h / std::hypot(mat.cp[id], mat.cs[id]));
  }
  if (cfg.dt > cfg.cfl_safety * min_limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "config: dt=" << cfg.dt << " violates the CFL limit "
       << cfg.cfl_safety * min_limit << " (= " << cfg.cfl_safety
       << " * h/max sqrt(cp^2+cs^2))";
    throw config_error(os.str());
  }
  {
    Eigen::LLT<Eigen::Matrix2d> llt(cfg.noise_cov);
    if (llt.info() != Eigen::Success) {
      throw config_error("config: noise covariance is not positive definite");
    }
  }
  if (cfg.estimator != "laplace" && cfg.estimator != "laplace2" &&
      cfg.estimator != "nested") {
    throw config_error("config: estimator must be laplace, laplace2 or nested");
  }
  if (cfg.integrator != "mc" && cfg.integrator != "quad") {
    throw config_error("config: integrator must be mc or quad");
  }
  if (!cfg.scenario.empty() && cfg.scenario != "I" && cfg.scenario != "II" &&
      cfg.scenario != "III") {
    throw config_error("config: scenario must be I, II or III");
  }
  if (!cfg.diagnostic.empty() && cfg.diagnostic != "condition" &&
      cfg.diagnostic != "convergence" && cfg.diagnostic != "comparison") {
    throw config_error("config: diagnostic must be condition, convergence or comparison");
  }
  // source admissibility at theta_star and across the prior box
  auto check_pos = [&](double x1, double x2, const char* what) {
    if (x1 < cfg.x1_min + 3 * cfg.h - 1e-9 || x1 > cfg.x1_max - 3 * cfg.h + 1e-9 ||
        x2 < cfg.x2_min + 3 * cfg.h - 1e-9 || x2 > cfg.x2_max - 3 * cfg.h + 1e-9) {
      std::ostringstream os;
      os << "config: " << what << " source position (" << x1 << "," << x2
         << ") is closer than 3h to a boundary";
      throw config_error(os.str());
    }
  };
  check_pos(cfg.theta_star[kX1s], cfg.theta_star[kX2s], "theta_star");
  const auto range = [&](int i) {
    return cfg.fixed[i] ? std::pair<double, double>{*cfg.fixed[i], *cfg.fixed[i]}
                        : *cfg.prior[i];
  };
  check_pos(range(kX1s).first, range(kX2s).first, "prior corner");
  check_pos(range(kX1s).second, range(kX2s).second, "prior corner");
  const auto ws_range = range(kWs);
  if (!(ws_range.first > 0.0)) throw config_error("config: omega_s must stay positive");

  // canonical hash over the semantic content (raw text modulo comments/space)
  std::uint64_t hsh = 0x5eb1cafe00000001ull;
  std::istringstream in2(text);
  while (std::getline(in2, line)) {
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    for (char c : line) hsh = splitmix64(hsh ^ static_cast<unsigned char>(c));
  }
  cfg.config_hash = hsh;
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_config(os.str());
}

}  // namespace seisbed
