#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "seisbed/grid.hpp"

namespace seisbed {

/// Point moment-tensor source parameters, fixed ordering
/// theta = (x1s, x2s, t_s, omega_s, m11, m12, m22).
struct SourceParams {
  double x1s = 0;   // [m]
  double x2s = 0;   // [m]
  double ts = 0;    // center time [s]
  double ws = 0;    // frequency [1/s]
  double m11 = 0;   // moment components [N m s]
  double m12 = 0;
  double m22 = 0;

  static constexpr int n_params = 7;

  Eigen::VectorXd to_vector() const;
  static SourceParams from_vector(const Eigen::VectorXd& v);
  static const std::array<const char*, 7>& names();
};

enum ParamIndex { kX1s = 0, kX2s = 1, kTs = 2, kWs = 3, kM11 = 4, kM12 = 5, kM22 = 6 };

/// Gaussian source time function S(t) = omega_s/sqrt(2 pi) * exp(-omega_s^2 (t-t_s)^2 / 2)
/// together with its first and second derivatives in (t_s, omega_s).
struct TimeFunctionEval {
  double value;
  double d_ts;
  double d_ws;
  double d2_ts_ts;
  double d2_ts_ws;
  double d2_ws_ws;
};
TimeFunctionEval time_function(double t, double ts, double ws);

/// Six-point regularized discretization of delta(x - x_s) or delta'(x - x_s)
/// on a uniform axis, C^2 in x_s. Weights cover nodes k-2 .. k+3 where
/// x_k <= x_s < x_{k+1}; dw and d2w are derivatives with respect to x_s.
struct DeltaStencil {
  int k = 0;            // 1-based anchor node
  bool prime = false;   // false: delta, true: delta'
  double alpha = 0;     // (x_s - x_k)/h in [0,1)
  std::array<double, 6> w{};
  std::array<double, 6> dw{};
  std::array<double, 6> d2w{};
};

DeltaStencil delta_stencil(double x_s, double axis_min, int n_nodes, double h);
DeltaStencil delta_prime_stencil(double x_s, double axis_min, int n_nodes, double h);

/// Sparse vector over grid nodes (patch-supported forces and their derivatives).
struct SparseVec {
  std::vector<int> idx;
  Eigen::VectorXd val;
};

/// Time-separable spatial patterns of the discretized source: the force is
/// f1 = S(t) (m11 p1 + m12 p2), f2 = S(t) (m12 p1 + m22 p2) on a 6x6 node
/// patch, where p1 ~ delta' x delta and p2 ~ delta x delta'. First and second
/// location derivatives of the patterns are carried along so that source
/// Jacobians and Hessian rows are analytic.
struct SourceTerm {
  SourceParams theta;
  std::vector<int> nodes;                         // 36 patch node ids
  Eigen::Matrix<double, 36, 1> p1, p2;            // patterns
  Eigen::Matrix<double, 36, 1> dp1_x1, dp1_x2;    // d/dx1s, d/dx2s
  Eigen::Matrix<double, 36, 1> dp2_x1, dp2_x2;
  Eigen::Matrix<double, 36, 1> d2p1_x1x1, d2p1_x1x2, d2p1_x2x2;
  Eigen::Matrix<double, 36, 1> d2p2_x1x1, d2p2_x1x2, d2p2_x2x2;

  Eigen::Matrix<double, 36, 1> g1() const { return theta.m11 * p1 + theta.m12 * p2; }
  Eigen::Matrix<double, 36, 1> g2() const { return theta.m12 * p1 + theta.m22 * p2; }
};

/// Validate the 3h admissibility margin and build the patch patterns.
/// Throws std::domain_error when the source is too close to a boundary.
SourceTerm build_source_term(const SourceParams& theta, const Grid& grid);

/// Discretized force vectors at time t (36-entry sparse fields).
struct DiscreteForce {
  SparseVec f1;
  SparseVec f2;
};
DiscreteForce discretize_source(const SourceParams& theta, const Grid& grid, double t);

/// Columns d f_k / d theta_j at time t; [j][k] with k in {0,1} for components 1,2.
std::array<std::array<SparseVec, 2>, SourceParams::n_params>
source_jacobian(const SourceParams& theta, const Grid& grid, double t);

/// Per-patch-node symmetric 7x7 second-derivative blocks of f_k(i) at time t.
struct SourceHessianRows {
  std::vector<int> nodes;
  std::vector<Eigen::Matrix<double, 7, 7>> h1;  // blocks of f1
  std::vector<Eigen::Matrix<double, 7, 7>> h2;  // blocks of f2
};
SourceHessianRows source_hessian_rows(const SourceParams& theta, const Grid& grid,
                                      double t);

/// As source_hessian_rows but reusing a prebuilt SourceTerm (hot path of H_II).
void accumulate_source_hessian(const SourceTerm& src, double t,
                               const Eigen::VectorXd& weight1,
                               const Eigen::VectorXd& weight2,
                               Eigen::MatrixXd& h_accum);

}  // namespace seisbed
