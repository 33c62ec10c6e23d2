#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seisbed/grid.hpp"

namespace seisbed {

/// Fully validated run configuration parsed from the flat key = value format
/// (# comments, comma-separated arrays, repeatable `layer` key).
struct RunConfig {
  // grid / time
  double x1_min = 0, x1_max = 0, x2_min = 0, x2_max = 0, h = 0;
  double dt = 0, t_end = 0;
  double cfl_safety = 0.9;
  LayerSpec layers;

  // noise
  Eigen::Matrix2d noise_cov = Eigen::Matrix2d::Zero();

  // per-parameter prior ranges or fixed values (exactly one per parameter)
  std::array<std::optional<std::pair<double, double>>, 7> prior;
  std::array<std::optional<double>, 7> fixed;

  Eigen::VectorXd theta_star;  // 7 entries

  // receivers for single-design subcommands
  std::vector<double> receivers_x1;
  int n_receivers = 0;
  double receiver_spacing = 0;

  // estimation
  std::string estimator = "laplace";   // laplace | laplace2 | nested
  std::string integrator = "mc";       // mc | quad
  int mc_samples = 500;
  int quad_level = 3;
  int nested_outer = 200;
  int nested_inner = 1000;
  bool nested_reuse = false;

  // sweep / diagnostics
  std::string scenario;    // I | II | III
  std::string diagnostic;  // condition | convergence | comparison
  std::vector<int> conv_mc_sizes = {100, 1000, 10000};
  int conv_mc_replicates = 10;
  std::vector<int> conv_quad_levels = {0, 1, 2, 3, 4};

  std::uint64_t seed = 0;
  int workers = 1;
  bool per_param = false;
  bool dump_binary = false;

  // provenance
  std::vector<std::string> defaults_applied;
  std::uint64_t config_hash = 0;

  std::vector<int> free_params() const;
  std::vector<int> fixed_params() const;
  int n_levels() const;  // 1 + T/dt
};

/// Parse and validate; throws config_error with the offending line number for
/// parse problems and with the computed limit for CFL violations.
RunConfig parse_config(const std::string& text);

/// Convenience: read a file and parse it.
RunConfig parse_config_file(const std::string& path);

}  // namespace seisbed
