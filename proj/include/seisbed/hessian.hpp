#pragma once

#include <Eigen/Dense>
#include <vector>

#include "seisbed/rng.hpp"
#include "seisbed/solver.hpp"

namespace seisbed {

/// Per-receiver 2x2 measurement-noise covariance, i.i.d. across receivers,
/// time levels and noise draws.
struct NoiseModel {
  Eigen::Matrix2d cov;
  Eigen::Matrix2d inv;
  Eigen::Matrix2d chol;    // lower Cholesky factor of cov
  Eigen::Matrix2d whiten;  // chol^{-1}

  static NoiseModel isotropic(double sigma2);
  static NoiseModel from_cov(const Eigen::Matrix2d& cov);
};

/// data = clean + noise, fresh i.i.d. draw per (receiver, level, component).
ReceiverSeries add_noise(const ReceiverSeries& clean, const NoiseModel& noise,
                         CounterRng& rng);

/// data - simulated, shapes must match.
ReceiverSeries residual_series(const ReceiverSeries& data, const ReceiverSeries& sim);

/// Gauss-Newton part: H_I[a][b] = sum_r sum_m (du/dtheta_a)^T C^-1 (du/dtheta_b).
Eigen::MatrixXd misfit_hessian_H1(const std::vector<ReceiverSeries>& sensitivities,
                                  const NoiseModel& noise);

/// Dual source for the adjoint problem of the data misfit: C_eps^{-1} r at the
/// receiver nodes per level (the negative of the misfit's state gradient).
DualSource dual_source_from_residual(const ReceiverSeries& residual,
                                     const NoiseModel& noise);

/// Adjoint misfit gradient: grad_j = -sum_m phi^m . C d f / d theta_j (t_m).
Eigen::VectorXd misfit_gradient_adjoint(const DiscreteOperators& ops,
                                        const WavefieldHistory& dual,
                                        const SourceTerm& src, const TimeGrid& tg);

/// Dual-weighted second-derivative part H_II (7x7; restrict columns for
/// reduced problems at the call site).
Eigen::MatrixXd misfit_hessian_H2(const DiscreteOperators& ops,
                                  const WavefieldHistory& dual,
                                  const SourceTerm& src, const TimeGrid& tg);

/// Diagonal rescaling S = sqrt(diag(H)) and condition numbers from singular
/// values (Jacobi SVD keeps relative accuracy on strongly graded matrices).
struct ScaledHessian {
  Eigen::VectorXd scale;      // S diagonal
  Eigen::MatrixXd h_scaled;   // S^-T H S^-1, unit diagonal
  double cond_unscaled;
  double cond_scaled;
};
ScaledHessian scale_hessian(const Eigen::MatrixXd& h1);

/// 1/2 sum_r sum_m r^T C^-1 r for r = data - sim.
double misfit_half(const ReceiverSeries& data, const ReceiverSeries& sim,
                   const NoiseModel& noise);

}  // namespace seisbed
