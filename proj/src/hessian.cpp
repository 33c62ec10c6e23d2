#include "seisbed/hessian.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "seisbed/errors.hpp"

namespace seisbed {

NoiseModel NoiseModel::isotropic(double sigma2) {
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  c(0, 0) = c(1, 1) = sigma2;
  return from_cov(c);
}

NoiseModel NoiseModel::from_cov(const Eigen::Matrix2d& cov) {
  if ((cov - cov.transpose()).norm() > 1e-12 * cov.norm()) {
    throw std::invalid_argument("noise covariance must be symmetric");
  }
  Eigen::LLT<Eigen::Matrix2d> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("noise covariance must be positive definite");
  }
  NoiseModel n;
  n.cov = cov;
  n.chol = llt.matrixL();
  n.whiten = n.chol.inverse();
  n.inv = n.whiten.transpose() * n.whiten;
  return n;
}

ReceiverSeries add_noise(const ReceiverSeries& clean, const NoiseModel& noise,
                         CounterRng& rng) {
  ReceiverSeries out = clean;
  for (int r = 0; r < clean.n_receivers(); ++r) {
    for (int m = 0; m < clean.n_levels(); ++m) {
      const Eigen::Vector2d z(rng.normal(), rng.normal());
      out.data.block<2, 1>(2 * r, m) += noise.chol * z;
    }
  }
  return out;
}

namespace {

void check_same_shape(const ReceiverSeries& a, const ReceiverSeries& b) {
  if (a.data.rows() != b.data.rows() || a.data.cols() != b.data.cols() ||
      a.nodes != b.nodes) {
    throw std::invalid_argument("receiver series shapes/receivers do not match");
  }
}

}  // namespace

ReceiverSeries residual_series(const ReceiverSeries& data, const ReceiverSeries& sim) {
  check_same_shape(data, sim);
  ReceiverSeries r = data;
  r.data -= sim.data;
  return r;
}

Eigen::MatrixXd misfit_hessian_H1(const std::vector<ReceiverSeries>& sens,
                                  const NoiseModel& noise) {
  const int np = static_cast<int>(sens.size());
  if (np == 0) throw std::invalid_argument("H1: no sensitivity series");
  for (const auto& s : sens) check_same_shape(sens.front(), s);
  const int nr = sens.front().n_receivers();

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(np, np);
  for (int a = 0; a < np; ++a) {
    for (int b = a; b < np; ++b) {
      double acc = 0.0;
      for (int r = 0; r < nr; ++r) {
        const auto sa = sens[a].data.middleRows(2 * r, 2);
        const auto sb = sens[b].data.middleRows(2 * r, 2);
        acc += sa.cwiseProduct(noise.inv * sb).sum();
      }
      h(a, b) = acc;
      h(b, a) = acc;
    }
  }
  return h;
}

DualSource dual_source_from_residual(const ReceiverSeries& residual,
                                     const NoiseModel& noise) {
  DualSource s;
  s.nodes = residual.nodes;
  const int nr = residual.n_receivers();
  const int nt = residual.n_levels();
  s.w1.setZero(nr, nt);
  s.w2.setZero(nr, nt);
  for (int r = 0; r < nr; ++r) {
    const Eigen::MatrixXd w = noise.inv * residual.data.middleRows(2 * r, 2);
    s.w1.row(r) = w.row(0);
    s.w2.row(r) = w.row(1);
  }
  return s;
}

namespace {

// Patch-restricted dual history weighted by the force scaling C.
struct PatchWeights {
  Eigen::MatrixXd w1;  // 36 x n_levels
  Eigen::MatrixXd w2;
};

PatchWeights gather_patch(const DiscreteOperators& ops, const WavefieldHistory& dual,
                          const SourceTerm& src) {
  const int nt = static_cast<int>(dual.u1.cols());
  PatchWeights p;
  p.w1.resize(36, nt);
  p.w2.resize(36, nt);
  for (int a = 0; a < 36; ++a) {
    const int id = src.nodes[a];
    p.w1.row(a) = ops.force_scale[id] * dual.u1.row(id);
    p.w2.row(a) = ops.force_scale[id] * dual.u2.row(id);
  }
  return p;
}

}  // namespace

Eigen::VectorXd misfit_gradient_adjoint(const DiscreteOperators& ops,
                                        const WavefieldHistory& dual,
                                        const SourceTerm& src, const TimeGrid& tg) {
  const PatchWeights p = gather_patch(ops, dual, src);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(SourceParams::n_params);
  for (int j = 0; j < SourceParams::n_params; ++j) {
    const Forcing f = build_sensitivity_forcing(src, tg, j);
    double acc = 0.0;
    for (const ForcingTerm& term : f.terms) {
      const Eigen::VectorXd dots =
          p.w1.transpose() * term.f1.val + p.w2.transpose() * term.f2.val;
      for (int m = 0; m < tg.n_levels; ++m) acc += term.time[m] * dots[m];
    }
    grad[j] = -acc;
  }
  return grad;
}

Eigen::MatrixXd misfit_hessian_H2(const DiscreteOperators& ops,
                                  const WavefieldHistory& dual,
                                  const SourceTerm& src, const TimeGrid& tg) {
  const PatchWeights p = gather_patch(ops, dual, src);
  Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(7, 7);
  for (int m = 0; m < tg.n_levels; ++m) {
    accumulate_source_hessian(src, tg.t(m), p.w1.col(m), p.w2.col(m), h2);
  }
  return h2;
}

ScaledHessian scale_hessian(const Eigen::MatrixXd& h1) {
  const int n = static_cast<int>(h1.rows());
  ScaledHessian out;
  out.scale.resize(n);
  for (int i = 0; i < n; ++i) {
    const double d = h1(i, i);
    if (!(d > 1e-300)) {
      std::ostringstream os;
      os << "scale_hessian: parameter " << i << " is unidentifiable (diag=" << d << ")";
      throw numeric_error(os.str());
    }
    out.scale[i] = std::sqrt(d);
  }
  out.h_scaled = out.scale.cwiseInverse().asDiagonal() * h1 *
                 out.scale.cwiseInverse().asDiagonal();
  auto cond_of = [](const Eigen::MatrixXd& m) {
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues();
    const double smin = sv[sv.size() - 1];
    return smin > 0.0 ? sv[0] / smin : std::numeric_limits<double>::infinity();
  };
  out.cond_unscaled = cond_of(h1);
  out.cond_scaled = cond_of(out.h_scaled);
  return out;
}

double misfit_half(const ReceiverSeries& data, const ReceiverSeries& sim,
                   const NoiseModel& noise) {
  check_same_shape(data, sim);
  double acc = 0.0;
  for (int r = 0; r < data.n_receivers(); ++r) {
    const Eigen::MatrixXd d =
        data.data.middleRows(2 * r, 2) - sim.data.middleRows(2 * r, 2);
    acc += d.cwiseProduct(noise.inv * d).sum();
  }
  return 0.5 * acc;
}

}  // namespace seisbed
