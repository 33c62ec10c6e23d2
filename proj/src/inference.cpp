#include "seisbed/inference.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "seisbed/errors.hpp"
#include "seisbed/numeric.hpp"
#include "seisbed/warnings.hpp"

namespace seisbed {

bool UniformPrior::contains(const Eigen::VectorXd& theta) const {
  for (int i = 0; i < dim(); ++i) {
    if (theta[i] < lo[i] || theta[i] > hi[i]) return false;
  }
  return true;
}

double UniformPrior::log_density() const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s -= std::log(width(i));
  return s;
}

double UniformPrior::h(const Eigen::VectorXd& theta) const {
  return contains(theta) ? log_density() : -std::numeric_limits<double>::infinity();
}

Eigen::VectorXd UniformPrior::sample(CounterRng& rng) const {
  Eigen::VectorXd v(dim());
  for (int i = 0; i < dim(); ++i) v[i] = rng.uniform(lo[i], hi[i]);
  return v;
}

UniformPrior make_uniform_prior(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  if (lo.size() != hi.size()) throw config_error("prior: bound sizes differ");
  for (int i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) {
      std::ostringstream os;
      os << "prior: empty range for parameter " << i;
      throw config_error(os.str());
    }
  }
  return {lo, hi};
}

namespace {

[[noreturn]] void throw_singular(const Eigen::MatrixXd& m, const char* what) {
  // name the direction closest to the null space
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  int dir = 0;
  es.eigenvectors().col(0).cwiseAbs().maxCoeff(&dir);
  std::ostringstream os;
  os << what << ": matrix is numerically singular (null direction strongest in "
     << "parameter " << dir << ", eigenvalue " << es.eigenvalues()[0] << ")";
  throw numeric_error(os.str());
}

}  // namespace

double log_det_spd(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw_singular(m, "log_det_spd");
  const Eigen::MatrixXd l = llt.matrixL();
  double acc = 0.0;
  for (int i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
  return 2.0 * acc;
}

double dkl_hat(const Eigen::MatrixXd& h1, double h_at_theta) {
  const int n = static_cast<int>(h1.rows());
  const ScaledHessian sc = scale_hessian(h1);
  Eigen::LLT<Eigen::MatrixXd> llt(sc.h_scaled);
  if (llt.info() != Eigen::Success) throw_singular(sc.h_scaled, "dkl_hat");
  const Eigen::MatrixXd l = llt.matrixL();
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += 2.0 * std::log(l(i, i)) + 2.0 * std::log(sc.scale[i]);
  return 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI) - 0.5 * n - h_at_theta;
}

double dkl_hat_direct(const Eigen::MatrixXd& h1, double h_at_theta) {
  const int n = static_cast<int>(h1.rows());
  return 0.5 * log_det_spd(h1) - 0.5 * n * std::log(2.0 * M_PI) - 0.5 * n - h_at_theta;
}

double dkl_second_order(const Eigen::MatrixXd& h_full, double h_at_theta,
                        const Eigen::MatrixXd& hess_h) {
  const int n = static_cast<int>(h_full.rows());
  const Eigen::MatrixXd sym = 0.5 * (h_full + h_full.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues()[0] <= 0.0) throw_singular(sym, "dkl_second_order");
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(es.eigenvalues()[i]);
  double trace_term = 0.0;
  if (hess_h.size() > 0 && hess_h.norm() > 0.0) {
    const Eigen::MatrixXd hinv_hh = es.operatorInverseSqrt() * es.operatorInverseSqrt() * hess_h;
    trace_term = 0.5 * hinv_hh.trace();
  }
  return 0.5 * logdet - 0.5 * n * std::log(2.0 * M_PI) - 0.5 * n - h_at_theta - trace_term;
}

Eigen::VectorXd per_parameter_gain(const Eigen::MatrixXd& h1, const UniformPrior& prior) {
  const int n = static_cast<int>(h1.rows());
  if (prior.dim() != n) throw std::invalid_argument("per_parameter_gain: dim mismatch");
  const ScaledHessian sc = scale_hessian(h1);
  Eigen::LLT<Eigen::MatrixXd> llt(sc.h_scaled);
  if (llt.info() != Eigen::Success) throw_singular(sc.h_scaled, "per_parameter_gain");
  const Eigen::MatrixXd inv_scaled =
      llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) {
    const double var_i = inv_scaled(i, i) / (sc.scale[i] * sc.scale[i]);
    q[i] = std::log(prior.width(i)) - 0.5 * std::log(2.0 * M_PI * M_E * var_i);
  }
  return q;
}

double cost_functional(const ReceiverSeries& simulated, const ReceiverSeries& data,
                       const NoiseModel& noise, const UniformPrior& prior,
                       const Eigen::VectorXd& theta) {
  if (!prior.contains(theta)) return std::numeric_limits<double>::infinity();
  return misfit_half(data, simulated, noise) - prior.log_density();
}

EigEstimate nested_mc_eig(const NestedMcModel& model, int m_outer, int m_inner,
                          std::uint64_t seed, bool reuse_inner) {
  if (m_outer < 1 || m_inner < 1) {
    throw std::invalid_argument("nested_mc_eig: sample counts must be >= 1");
  }
  // Disjoint counter blocks for outer prior draws, noise draws, inner draws.
  constexpr std::uint64_t kNoiseBlock = 1ull << 40;
  constexpr std::uint64_t kInnerBlock = 1ull << 41;

  std::vector<Eigen::VectorXd> outer_g;
  if (reuse_inner) {
    outer_g.reserve(m_outer);
    for (int i = 0; i < m_outer; ++i) {
      outer_g.push_back(model.simulate_whitened(model.sample_prior(seed, i)));
    }
  }

  std::vector<double> gain(m_outer);
  std::vector<double> inner_ll(reuse_inner ? m_outer : m_inner);
  for (int i = 0; i < m_outer; ++i) {
    const Eigen::VectorXd gi =
        reuse_inner ? outer_g[i] : model.simulate_whitened(model.sample_prior(seed, i));
    CounterRng noise_rng(seed, kNoiseBlock + static_cast<std::uint64_t>(i));
    Eigen::VectorXd y(gi.size());
    double self_ll = 0.0;
    for (int k = 0; k < gi.size(); ++k) {
      const double z = noise_rng.normal();
      y[k] = gi[k] + z;
      self_ll -= 0.5 * z * z;
    }
    if (reuse_inner) {
      for (int j = 0; j < m_outer; ++j) {
        inner_ll[j] = -0.5 * (y - outer_g[j]).squaredNorm();
      }
    } else {
      for (int j = 0; j < m_inner; ++j) {
        const std::uint64_t ctr = kInnerBlock +
                                  static_cast<std::uint64_t>(i) *
                                      static_cast<std::uint64_t>(m_inner) +
                                  static_cast<std::uint64_t>(j);
        const Eigen::VectorXd gj = model.simulate_whitened(model.sample_prior(seed, ctr));
        inner_ll[j] = -0.5 * (y - gj).squaredNorm();
      }
    }
    const double lse = logsumexp(inner_ll);
    gain[i] = self_ll - (lse - std::log(static_cast<double>(inner_ll.size())));
  }

  const MeanStderr ms = mean_stderr(gain);
  EigEstimate e;
  e.value = ms.mean;
  e.stderr_ = ms.stderr_;
  e.estimator = "nested-mc";
  e.m_outer = m_outer;
  e.m_inner = reuse_inner ? m_outer : m_inner;
  e.n_points = static_cast<long>(m_outer) * (reuse_inner ? 1 : (1 + m_inner));
  return e;
}

}  // namespace seisbed
