#pragma once

// Shared builders for solver-level tests and the acceptance suite.

#include <cmath>
#include <functional>
#include <vector>

#include "seisbed/design.hpp"
#include "seisbed/grid.hpp"
#include "seisbed/hessian.hpp"
#include "seisbed/operators.hpp"
#include "seisbed/solver.hpp"
#include "seisbed/source.hpp"

namespace seisbed::testing {

// Compactly supported C^5 bump on |z| < 1 and its derivatives.
inline double bump(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return q * q * q * q * q * q;
}
inline double bump_d1(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return -12.0 * z * q * q * q * q * q;
}
inline double bump_d2(double z) {
  if (std::abs(z) >= 1.0) return 0.0;
  const double q = 1.0 - z * z;
  return (-12.0 * q + 120.0 * z * z) * q * q * q * q;
}

struct HomogeneousMedium {
  Grid grid;
  MaterialField mat;
  DiscreteOperators ops;
};

inline HomogeneousMedium homogeneous_medium(double x1_min, double x1_max, double x2_min,
                                            double x2_max, double h, double nu,
                                            double cp, double cs) {
  HomogeneousMedium m;
  m.grid = build_grid(x1_min, x1_max, x2_min, x2_max, h);
  m.mat = layered_material({{x2_max, x2_min, nu, cp, cs}}, m.grid);
  m.ops = assemble_operators(m.grid, m.mat);
  return m;
}

// Manufactured problem: exact solution u1 = T(t) W(x), u2 = 0 with
// T = sin^2(w0 t) and W a separable compact bump; the body force is chosen
// analytically so this field solves the constant-coefficient equations.
struct Manufactured {
  double w0 = 3.0;
  double c1 = 2.0, c2 = -2.0, radius = 1.2;
  double lam = 1.0, mu = 1.0, nu = 1.0;

  double tfun(double t) const { const double s = std::sin(w0 * t); return s * s * s; }
  double tfun_dd(double t) const { const double s = std::sin(w0 * t), c = std::cos(w0 * t); return 3.0 * w0 * w0 * s * (2.0 * c * c - s * s); }
  double w(double x1, double x2) const {
    return bump((x1 - c1) / radius) * bump((x2 - c2) / radius);
  }
  double w_11(double x1, double x2) const {
    return bump_d2((x1 - c1) / radius) * bump((x2 - c2) / radius) / (radius * radius);
  }
  double w_22(double x1, double x2) const {
    return bump((x1 - c1) / radius) * bump_d2((x2 - c2) / radius) / (radius * radius);
  }
  double w_12(double x1, double x2) const {
    return bump_d1((x1 - c1) / radius) * bump_d1((x2 - c2) / radius) / (radius * radius);
  }

  double exact_u1(double t, double x1, double x2) const { return tfun(t) * w(x1, x2); }

  Forcing forcing(const Grid& g, const TimeGrid& tg) const {
    const int n = g.n_nodes();
    ForcingTerm inertial, stiffness, cross;
    inertial.time.resize(tg.n_levels);
    stiffness.time.resize(tg.n_levels);
    cross.time.resize(tg.n_levels);
    for (int m = 0; m < tg.n_levels; ++m) {
      inertial.time[m] = tfun_dd(tg.t(m));
      stiffness.time[m] = -tfun(tg.t(m));
      cross.time[m] = -tfun(tg.t(m));
    }
    Eigen::VectorXd w_field(n), l1w(n), l2w(n);
    std::vector<int> all(n);
    for (int j = 1; j <= g.n2; ++j) {
      for (int i = 1; i <= g.n1; ++i) {
        const int id = g.node(i, j);
        all[id] = id;
        const double x1 = g.x1(i), x2 = g.x2(j);
        w_field[id] = nu * w(x1, x2);
        l1w[id] = (2 * mu + lam) * w_11(x1, x2) + mu * w_22(x1, x2);
        l2w[id] = (mu + lam) * w_12(x1, x2);
      }
    }
    inertial.f1 = {all, w_field};
    inertial.f2 = {all, Eigen::VectorXd::Zero(n)};
    stiffness.f1 = {all, l1w};
    stiffness.f2 = {all, Eigen::VectorXd::Zero(n)};
    cross.f1 = {all, Eigen::VectorXd::Zero(n)};
    cross.f2 = {all, l2w};
    return {{inertial, stiffness, cross}};
  }
};

// Small LOH-like setting shared by gradient/Hessian tests: truncated domain,
// two layers, source inside the top of the halfspace.
struct SmallSeismic {
  Grid grid;
  MaterialField mat;
  DiscreteOperators ops;
  TimeGrid tg;
  Receivers recv;
  SourceParams theta;
  NoiseModel noise = NoiseModel::isotropic(1e-4);
};

inline SmallSeismic small_seismic(double h = 200, double dt = 0.025, double t_end = 1.5) {
  SmallSeismic s;
  s.grid = build_grid(-4000, 4000, -4000, 0, h);
  s.mat = layered_material(
      {{0, -1000, 2600, 4000, 2000}, {-1000, -4000, 2700, 6000, 3464}}, s.grid);
  s.ops = assemble_operators(s.grid, s.mat);
  s.tg = make_time_grid(dt, t_end);
  s.recv = build_receivers(s.grid, std::vector<double>{-2000, 0, 1000});
  s.theta.x1s = 250;
  s.theta.x2s = -1850;
  s.theta.ts = 0.25;
  s.theta.ws = 5.0;
  s.theta.m11 = 1.0e13;
  s.theta.m12 = 0.5e13;
  s.theta.m22 = 1.4e13;
  return s;
}

// Data misfit 1/2 sum r^T C^-1 r as a function of theta, for FD oracles.
inline double misfit_at(const SmallSeismic& s, const ReceiverSeries& data,
                        const Eigen::VectorXd& theta_vec) {
  const SourceTerm src = build_source_term(SourceParams::from_vector(theta_vec), s.grid);
  const ReceiverSeries sim =
      run_forward(s.ops, build_source_forcing(src, s.tg), s.tg, s.recv, {}).series;
  return misfit_half(data, sim, s.noise);
}

}  // namespace seisbed::testing
