#pragma once

#include <functional>
#include <string>
#include <vector>

#include "seisbed/config.hpp"
#include "seisbed/inference.hpp"
#include "seisbed/operators.hpp"
#include "seisbed/quadrature.hpp"
#include "seisbed/solver.hpp"

namespace seisbed {

/// Receiver-array design: count and spacing, placed evenly and symmetrically
/// around x1 = 0 on the ground surface.
struct DesignSpec {
  int n_receivers = 0;
  double spacing = 0;

  std::vector<double> positions() const;
};

/// Everything assembled once per configuration and shared (read-only) by all
/// concurrent evaluations.
struct SeismicSetup {
  Grid grid;
  MaterialField material;
  DiscreteOperators ops;
  TimeGrid time;
  NoiseModel noise;
  UniformPrior prior_free;        // box over free parameters, paper ordering
  std::vector<int> free_idx;
  Eigen::VectorXd theta_base;     // 7-vector carrying the fixed values
  Eigen::VectorXd theta_star;
  double cfl_safety = 0.9;
  int workers = 1;
};

SeismicSetup make_setup(const RunConfig& cfg);

/// Embed a free-parameter vector into the full 7-vector.
SourceParams theta_full(const SeismicSetup& s, const Eigen::VectorXd& theta_free);

/// Receivers at the surface row; positions not on a grid node are snapped to
/// the nearest node with a warning recording the snap distance.
Receivers build_receivers(const Grid& grid, const std::vector<double>& x1_positions);
Receivers build_receivers(const Grid& grid, const DesignSpec& design);

/// Laplace D_KL-hat at one data-generating parameter (solves one sensitivity
/// problem per free parameter and assembles the Gauss-Newton Hessian).
double dkl_laplace_at(const SeismicSetup& s, const Receivers& recv,
                      const Eigen::VectorXd& theta_free);

/// Gauss-Newton Hessian over the free parameters at theta_free.
Eigen::MatrixXd h1_at(const SeismicSetup& s, const Receivers& recv,
                      const Eigen::VectorXd& theta_free);

/// Second-order (Theorem 3 style) integrand: draws one synthetic data
/// realization, assembles H1 + H2 through the dual problem.
double dkl_second_order_at(const SeismicSetup& s, const Receivers& recv,
                           const Eigen::VectorXd& theta_free,
                           std::uint64_t noise_counter, std::uint64_t seed);

/// Per-parameter marginal gains at theta_free (free parameters only).
Eigen::VectorXd per_parameter_gain_at(const SeismicSetup& s, const Receivers& recv,
                                      const Eigen::VectorXd& theta_free);

/// Expected information gain of one design under the configured estimator.
EigEstimate eig_for_design(const SeismicSetup& s, const RunConfig& cfg,
                           const Receivers& recv);

/// Expected per-parameter gains (outer MC over the prior).
Eigen::VectorXd expected_per_parameter_gain(const SeismicSetup& s, const RunConfig& cfg,
                                            const Receivers& recv);

/// Whitened nested-MC adapter for this setup/design.
NestedMcModel make_nested_model(const SeismicSetup& s, const Receivers& recv);

/// Deterministic parallel map: fn(i) for i in [0,n), results slotted by index.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

// ---- batch front-end ----

struct SweepRow {
  std::string key;    // canonical design-point key
  std::string line;   // formatted CSV row
};

/// Run scenario I/II/III per cfg.scenario, writing <out_dir>/scenario_<X>.csv.
/// Already-present rows (matching config hash) are reused; solver failures
/// abort the design point, are logged, and the sweep continues.
/// Returns the path written.
std::string run_scenario(const RunConfig& cfg, const std::string& out_dir);

/// Diagnostics per cfg.diagnostic: condition | convergence | comparison.
std::string run_diagnostics(const RunConfig& cfg, const std::string& out_dir);

/// Scenario III per-parameter sweep (Q_i columns vs spacing).
std::string per_parameter_sweep(const RunConfig& cfg, const std::string& out_dir);

/// Single forward solve at theta_star: waveform CSV (+ binary dump if
/// configured).
std::string run_simulate(const RunConfig& cfg, const std::string& out_dir);

/// H1 (+H2 with synthetic noisy data) and conditioning at theta_star.
std::string run_hessian(const RunConfig& cfg, const std::string& out_dir);

/// Single-design EIG.
std::string run_eig(const RunConfig& cfg, const std::string& out_dir);

/// Binary receiver dump: int64 n_receivers, int64 n_levels, float64 dt, then
/// row-major samples (rows = 2*n_receivers, columns = levels), little endian.
void write_receivers_binary(const std::string& path, const ReceiverSeries& series);
ReceiverSeries read_receivers_binary(const std::string& path);

std::string version_string();

}  // namespace seisbed
