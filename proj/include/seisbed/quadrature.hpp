#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "seisbed/numeric.hpp"

namespace seisbed {

/// Quadrature rule on the cube [-1,1]^dim. Weights sum to 2^dim; Smolyak
/// combination weights may be negative.
struct QuadratureRule {
  int dim = 0;
  Eigen::MatrixXd points;   // size x dim
  Eigen::VectorXd weights;  // size
  std::string tag;          // "tensor" | "smolyak-total-degree"
  int level = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Gauss-Legendre nodes/weights on [-1,1]; exact for polynomials of degree
/// <= 2n-1. Nodes by Newton iteration on P_n to ~1e-15.
std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_1d(int n);

/// Full tensor Gauss-Legendre rule with n points per direction.
QuadratureRule tensor_rule(int dim, int n);

/// Sparse Gauss-Legendre rule from the combination technique over the total
/// degree index set |i| <= level + dim, with linear growth m(i) = i.
QuadratureRule smolyak_total_degree(int dim, int level);

/// Integrate f against the uniform density on the box (affine map from the
/// cube; weights normalized by 2^dim so constants integrate to themselves).
/// Throws numeric_error if f returns a non-finite value.
double expectation_quadrature(const std::function<double(const Eigen::VectorXd&)>& f,
                              const QuadratureRule& rule, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi);

/// Monte Carlo expectation over the uniform box; counter-based streams make
/// the estimate independent of evaluation order.
MeanStderr expectation_mc(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int n_samples, std::uint64_t seed);

/// Least-squares rate of log(error) against log(size); positive for decay.
double convergence_rate(const std::vector<double>& errors,
                        const std::vector<double>& sizes);

}  // namespace seisbed
