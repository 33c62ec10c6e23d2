#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

#include "seisbed/hessian.hpp"
#include "seisbed/rng.hpp"

namespace seisbed {

/// Independent uniform box prior over the (free) parameters.
struct UniformPrior {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double width(int i) const { return hi[i] - lo[i]; }
  bool contains(const Eigen::VectorXd& theta) const;
  /// Constant log-density on the support.
  double log_density() const;
  /// h(theta): log density inside the box, -inf outside.
  double h(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd sample(CounterRng& rng) const;
};

UniformPrior make_uniform_prior(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// log det of a symmetric positive definite matrix via Cholesky.
/// Throws numeric_error naming the closest-to-null direction if not SPD.
double log_det_spd(const Eigen::MatrixXd& m);

struct EigEstimate {
  double value = 0;       // nats
  double stderr_ = 0;     // 0 for deterministic estimators
  std::string estimator;  // "laplace-T4" | "laplace-T3" | "nested-mc"
  long n_points = 0;      // samples or quadrature points
  int m_outer = 0;
  int m_inner = 0;
};

/// Laplace-approximated information gain at the data-generating parameter:
/// dkl = -1/2 log((2 pi)^n |H1^-1|) - n/2 - h_at_theta, evaluated through the
/// diagonally rescaled Hessian for numerical stability.
double dkl_hat(const Eigen::MatrixXd& h1, double h_at_theta);

/// Same value computed through the direct log-determinant (cross-check path).
double dkl_hat_direct(const Eigen::MatrixXd& h1, double h_at_theta);

/// Second-order variant with the full Hessian H = H1 + H2 - hess_h and the
/// prior-curvature trace term (zero for uniform priors).
double dkl_second_order(const Eigen::MatrixXd& h_full, double h_at_theta,
                        const Eigen::MatrixXd& hess_h);

/// Marginal entropy difference per parameter:
/// Q_i = log(width_i) - 1/2 log(2 pi e (H1^-1)_ii).
Eigen::VectorXd per_parameter_gain(const Eigen::MatrixXd& h1, const UniformPrior& prior);

/// Negative log posterior (additive constant dropped): misfit + (-h(theta));
/// +inf outside the prior support.
double cost_functional(const ReceiverSeries& simulated, const ReceiverSeries& data,
                       const NoiseModel& noise, const UniformPrior& prior,
                       const Eigen::VectorXd& theta);

/// Forward model interface for the nested Monte Carlo estimator, in whitened
/// data space: observations are simulate_whitened(theta) + standard normal.
struct NestedMcModel {
  std::function<Eigen::VectorXd(std::uint64_t seed, std::uint64_t counter)> sample_prior;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> simulate_whitened;
};

/// Double-loop Monte Carlo estimate of the expected information gain. The
/// unbiased variant draws fresh inner prior samples per outer sample;
/// reuse_inner shares the outer sample set with the inner loop (cheaper,
/// biased). Inner likelihood averages run in log space.
EigEstimate nested_mc_eig(const NestedMcModel& model, int m_outer, int m_inner,
                          std::uint64_t seed, bool reuse_inner = false);

}  // namespace seisbed
