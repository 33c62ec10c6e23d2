#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "seisbed/operators.hpp"
#include "seisbed/source.hpp"

namespace seisbed {

/// Equidistant time levels t_m = m*dt, m = 0..n_levels-1, with t_end = T.
struct TimeGrid {
  double dt = 0;
  double t_end = 0;
  int n_levels = 0;

  double t(int m) const { return m * dt; }
};

/// Validates that T/dt is an integer (1e-9 relative) and returns N_t = 1 + T/dt.
TimeGrid make_time_grid(double dt, double t_end);

/// Throws config_error (message contains the computed limit) if dt exceeds
/// safety * ops.dt_limit.
void check_cfl(const DiscreteOperators& ops, double dt, double safety = 0.9);

struct Receivers {
  std::vector<int> nodes;
  std::vector<double> x1;
  std::vector<double> x2;

  int count() const { return static_cast<int>(nodes.size()); }
};

/// Two-component waveforms at the receivers: row 2r is component 1 and row
/// 2r+1 component 2 of receiver r; column m is time level m.
struct ReceiverSeries {
  double dt = 0;
  double t_end = 0;
  std::vector<int> nodes;
  Eigen::MatrixXd data;

  int n_levels() const { return static_cast<int>(data.cols()); }
  int n_receivers() const { return static_cast<int>(nodes.size()); }
};

/// Full displacement (or dual) field at every time level; column m = level m.
struct WavefieldHistory {
  Eigen::MatrixXd u1;
  Eigen::MatrixXd u2;
};

/// Body forcing as a sum of time-separable terms: f_k(t_m) = sum_j time[m] * f_k.
struct ForcingTerm {
  std::vector<double> time;
  SparseVec f1;
  SparseVec f2;
};
struct Forcing {
  std::vector<ForcingTerm> terms;
};

/// Dual-problem source, dense in time on a sparse node set (receiver nodes).
struct DualSource {
  std::vector<int> nodes;
  Eigen::MatrixXd w1;  // nodes x n_levels
  Eigen::MatrixXd w2;
};

struct SolveOptions {
  bool record_history = false;
  bool validate_cfl = true;
  double cfl_safety = 0.9;
  /// Optional initial state (u at level 0 and the virtual level -1); defaults
  /// to rest. Used by plane-wave verification runs.
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init_u1;
  std::optional<std::pair<Eigen::VectorXd, Eigen::VectorXd>> init_u2;
};

struct ForwardResult {
  ReceiverSeries series;
  WavefieldHistory history;  // populated only when requested
};

/// Advance the full-discrete scheme from rest and record receiver samples at
/// every level. Throws numeric_error naming the step index if the field blows up.
ForwardResult run_forward(const DiscreteOperators& ops, const Forcing& forcing,
                          const TimeGrid& tg, const Receivers& recv,
                          const SolveOptions& opts = {});

/// Solve the transposed scheme backward in time (terminal conditions zero) and
/// return the full dual history.
WavefieldHistory run_dual(const DiscreteOperators& ops, const DualSource& src,
                          const TimeGrid& tg, const SolveOptions& opts = {});

/// Forcing builders for a moment-tensor source term.
Forcing build_source_forcing(const SourceTerm& src, const TimeGrid& tg);
/// d(forcing)/d theta_j; at most two separable terms.
Forcing build_sensitivity_forcing(const SourceTerm& src, const TimeGrid& tg, int param);

/// Primal solve for a moment-tensor source (warns when S(0) is not negligible
/// against the peak, i.e. the zero-initial-data start is not smooth).
ForwardResult run_forward_source(const DiscreteOperators& ops, const SourceTerm& src,
                                 const TimeGrid& tg, const Receivers& recv,
                                 const SolveOptions& opts = {});

/// Sensitivity receiver series d u / d theta_j for the listed parameters.
std::vector<ReceiverSeries> solve_sensitivities(const DiscreteOperators& ops,
                                                const SourceTerm& src,
                                                const TimeGrid& tg,
                                                const Receivers& recv,
                                                const std::vector<int>& params,
                                                const SolveOptions& opts = {});

}  // namespace seisbed
