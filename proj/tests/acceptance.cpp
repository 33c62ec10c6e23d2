// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Run with no arguments for all criteria or with a
// criterion number. Exit code = number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "seisbed/config.hpp"
#include "seisbed/design.hpp"
#include "seisbed/errors.hpp"
#include "seisbed/inference.hpp"
#include "seisbed/numeric.hpp"
#include "seisbed/quadrature.hpp"
#include "seisbed/rng.hpp"
#include "seisbed/warnings.hpp"
#include "test_helpers.hpp"

using namespace seisbed;
using namespace seisbed::testing;

namespace {

// ------------------------------------------------------------------ shared

// Desk-scale scenario configuration: paper domain laterally, depth truncated
// (absorbing bottom eats the down-going energy), full 7-parameter priors.
std::string scenario_config(const std::string& extra) {
  return R"(x1_min = -10000
x1_max = 10000
x2_min = -4000
x2_max = 0
h = 200
dt = 0.025
t_end = 2
layer = 0,-1000,2600,4000,2000
layer = -1000,-4000,2700,6000,3464
noise_var = 1e-4
seed = 101
)" + extra;
}

// Reduced three-parameter problem (source depth, frequency, moment) on a
// laterally truncated domain; free parameters follow the paper's convergence
// study, the other four stay fixed.
std::string reduced_config(const std::string& extra) {
  return R"(x1_min = -10000
x1_max = 2500
x2_min = -4000
x2_max = 0
h = 250
dt = 0.025
t_end = 1.25
layer = 0,-1000,2600,4000,2000
layer = -1000,-4000,2700,6000,3464
noise_var = 1e-4
fixed_x1s = -1000
prior_x2s = -3000,-1000
fixed_ts = 1
prior_ws = 3,5
prior_m11 = 1e13,1e15
fixed_m12 = 1e14
fixed_m22 = 1e14
receivers_x1 = -9000,1000
seed = 7
)" + extra;
}

bool check(bool ok, std::string& detail, const std::string& msg) {
  if (!ok) detail += " [FAILED: " + msg + "]";
  return ok;
}

// ------------------------------------------------------------------ criteria

// 1. Delta-stencil moment conditions, degrees 0..4, 1e-12, 200 positions.
bool c01(std::string& detail) {
  CounterRng rng(3, 0);
  const double h = 200, lo = -15000;
  const int n = 76;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const double xs = rng.uniform(lo + 3 * h, lo + (n - 1) * h - 3 * h);
    const DeltaStencil d = delta_stencil(xs, lo, n, h);
    const DeltaStencil dp = delta_prime_stencil(xs, lo, n, h);
    for (int p = 0; p <= 4; ++p) {
      double md = 0.0, mdp = 0.0;
      for (int o = 0; o < 6; ++o) {
        const double z = (o - 2) - d.alpha;  // (x_i - x_s)/h
        md += h * d.w[o] * std::pow(z, p);
        mdp += h * h * dp.w[o] * std::pow(z, p);
      }
      worst = std::max(worst, std::abs(md - (p == 0 ? 1.0 : 0.0)));
      worst = std::max(worst, std::abs(mdp - (p == 1 ? -1.0 : 0.0)));
    }
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "max moment defect %.2e", worst);
  detail = buf;
  return worst < 1e-12;
}

// 2. Manufactured-solution convergence: observed order in [1.8, 2.2].
bool c02(std::string& detail) {
  const Manufactured mf;
  const std::vector<double> hs = {0.2, 0.1, 0.05};
  std::vector<double> lh, le;
  for (double h : hs) {
    const auto m = homogeneous_medium(0, 4, -4, 0, h, mf.nu, std::sqrt(3.0), 1.0);
    const TimeGrid tg = make_time_grid(0.2 * h, 0.8);
    Receivers recv = build_receivers(m.grid, std::vector<double>{2.0});
    SolveOptions opts;
    opts.record_history = true;
    const auto out = run_forward(m.ops, mf.forcing(m.grid, tg), tg, recv, opts);
    double err = 0.0;
    for (int lvl = 0; lvl < tg.n_levels; ++lvl) {
      for (int j = 1; j <= m.grid.n2; ++j) {
        for (int i = 1; i <= m.grid.n1; ++i) {
          const double ex = mf.exact_u1(tg.t(lvl), m.grid.x1(i), m.grid.x2(j));
          err = std::max(err, std::abs(out.history.u1(m.grid.node(i, j), lvl) - ex));
        }
      }
    }
    lh.push_back(std::log(h));
    le.push_back(std::log(err));
  }
  const double order = regression_slope(lh, le);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "observed order %.3f", order);
  detail = buf;
  return order > 1.8 && order < 2.2;
}

// 3. Discrete adjoint identity on random 11x11 instances, 1e-10 relative.
bool c03(std::string& detail) {
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 8; ++trial) {
    CounterRng rng(101, trial);
    const Grid grid = build_grid(0, 10, -10, 0, 1.0);
    const double cs1 = rng.uniform(0.5, 1.0), cs2 = rng.uniform(0.5, 1.0);
    const MaterialField mat = layered_material(
        {{0, -4, rng.uniform(1, 3), cs1 * rng.uniform(1.5, 2.5), cs1},
         {-4, -10, rng.uniform(1, 3), cs2 * rng.uniform(1.5, 2.5), cs2}},
        grid);
    const DiscreteOperators ops = assemble_operators(grid, mat);
    const TimeGrid tg = make_time_grid(0.05, 1.0);

    Forcing q;
    for (int term = 0; term < 3; ++term) {
      ForcingTerm ft;
      ft.time.resize(tg.n_levels);
      for (double& v : ft.time) v = rng.uniform(-1, 1);
      ft.f1.idx.resize(10);
      ft.f2.idx.resize(10);
      ft.f1.val.resize(10);
      ft.f2.val.resize(10);
      for (int a = 0; a < 10; ++a) {
        ft.f1.idx[a] = static_cast<int>(rng.uniform(0, grid.n_nodes() - 1));
        ft.f2.idx[a] = static_cast<int>(rng.uniform(0, grid.n_nodes() - 1));
        ft.f1.val[a] = rng.uniform(-1, 1);
        ft.f2.val[a] = rng.uniform(-1, 1);
      }
      q.terms.push_back(ft);
    }
    DualSource w;
    w.nodes = {grid.node(3, 10), grid.node(6, 10), grid.node(8, 6)};
    w.w1.resize(3, tg.n_levels);
    w.w2.resize(3, tg.n_levels);
    for (int a = 0; a < 3; ++a) {
      for (int m = 0; m < tg.n_levels; ++m) {
        w.w1(a, m) = rng.uniform(-1, 1);
        w.w2(a, m) = rng.uniform(-1, 1);
      }
    }
    Receivers recv;
    recv.nodes = w.nodes;
    recv.x1 = {0, 0, 0};
    recv.x2 = {0, 0, 0};
    SolveOptions opts;
    opts.record_history = true;
    const auto u = run_forward(ops, q, tg, recv, opts);
    const WavefieldHistory phi = run_dual(ops, w, tg, {});

    double lhs = 0.0;
    for (std::size_t a = 0; a < w.nodes.size(); ++a) {
      lhs += w.w1.row(static_cast<int>(a)).dot(u.history.u1.row(w.nodes[a]));
      lhs += w.w2.row(static_cast<int>(a)).dot(u.history.u2.row(w.nodes[a]));
    }
    double rhs = 0.0;
    for (const ForcingTerm& term : q.terms) {
      for (int m = 0; m < tg.n_levels; ++m) {
        double dot = 0.0;
        for (std::size_t a = 0; a < term.f1.idx.size(); ++a) {
          dot += phi.u1(term.f1.idx[a], m) * ops.force_scale[term.f1.idx[a]] *
                 term.f1.val[a];
        }
        for (std::size_t a = 0; a < term.f2.idx.size(); ++a) {
          dot += phi.u2(term.f2.idx[a], m) * ops.force_scale[term.f2.idx[a]] *
                 term.f2.val[a];
        }
        rhs += term.time[m] * dot;
      }
    }
    worst = std::max(worst,
                     std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs)));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max relative defect %.2e", worst);
  detail = buf;
  return worst < 1e-10;
}

// 4. Adjoint misfit gradient vs central finite differences, <= 1e-5 relative.
bool c04(std::string& detail) {
  const auto s = small_seismic();
  const SourceTerm src = build_source_term(s.theta, s.grid);
  const ReceiverSeries clean =
      run_forward(s.ops, build_source_forcing(src, s.tg), s.tg, s.recv, {}).series;
  CounterRng rng(55, 0);
  const ReceiverSeries data = add_noise(clean, s.noise, rng);
  const DualSource w = dual_source_from_residual(residual_series(data, clean), s.noise);
  const WavefieldHistory phi = run_dual(s.ops, w, s.tg, {});
  const Eigen::VectorXd grad = misfit_gradient_adjoint(s.ops, phi, src, s.tg);

  Eigen::VectorXd steps(7);
  steps << s.grid.h * 1e-3, s.grid.h * 1e-3, 1e-5, 1e-5, 1e7, 1e7, 1e7;
  const Eigen::VectorXd t0 = s.theta.to_vector();
  double worst = 0.0;
  for (int p = 0; p < 7; ++p) {
    Eigen::VectorXd tp = t0, tm = t0;
    tp[p] += steps[p];
    tm[p] -= steps[p];
    const double fd = (misfit_at(s, data, tp) - misfit_at(s, data, tm)) / (2 * steps[p]);
    worst = std::max(worst, std::abs(grad[p] - fd) / std::abs(fd));
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max relative gradient error %.2e", worst);
  detail = buf;
  return worst <= 1e-5;
}

// 5. H_I + H_II vs FD Hessian of the cost, 1e-3 relative, noisy data.
bool c05(std::string& detail) {
  const auto s = small_seismic();
  const std::vector<int> free_idx = {kX2s, kWs, kM11};
  const SourceTerm src = build_source_term(s.theta, s.grid);
  const Eigen::MatrixXd h1 = misfit_hessian_H1(
      solve_sensitivities(s.ops, src, s.tg, s.recv, free_idx, {}), s.noise);
  const ReceiverSeries clean =
      run_forward(s.ops, build_source_forcing(src, s.tg), s.tg, s.recv, {}).series;
  CounterRng rng(99, 0);
  const ReceiverSeries data = add_noise(clean, s.noise, rng);
  const DualSource w = dual_source_from_residual(residual_series(data, clean), s.noise);
  const WavefieldHistory phi = run_dual(s.ops, w, s.tg, {});
  const Eigen::MatrixXd h2_full = misfit_hessian_H2(s.ops, phi, src, s.tg);
  Eigen::MatrixXd h_exact(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      h_exact(a, b) = h1(a, b) + h2_full(free_idx[a], free_idx[b]);
    }
  }

  Eigen::VectorXd steps(3);
  steps << 0.4, 1e-3, 1e10;
  auto misfit_off = [&](double d0, double d1, double d2) {
    Eigen::VectorXd t = s.theta.to_vector();
    t[kX2s] += d0;
    t[kWs] += d1;
    t[kM11] += d2;
    return misfit_at(s, data, t);
  };
  Eigen::MatrixXd h_fd(3, 3);
  const double l0 = misfit_off(0, 0, 0);
  for (int a = 0; a < 3; ++a) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[a] = steps[a];
    h_fd(a, a) =
        (misfit_off(e[0], e[1], e[2]) + misfit_off(-e[0], -e[1], -e[2]) - 2 * l0) /
        (steps[a] * steps[a]);
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      Eigen::Vector3d ep = Eigen::Vector3d::Zero();
      ep[a] = steps[a];
      ep[b] = steps[b];
      Eigen::Vector3d em = ep;
      em[b] = -steps[b];
      const double v =
          (misfit_off(ep[0], ep[1], ep[2]) - misfit_off(em[0], em[1], em[2]) -
           misfit_off(-em[0], -em[1], -em[2]) + misfit_off(-ep[0], -ep[1], -ep[2])) /
          (4 * steps[a] * steps[b]);
      h_fd(a, b) = v;
      h_fd(b, a) = v;
    }
  }
  const double rel = (h_exact - h_fd).norm() / h_exact.norm();
  char buf[64];
  std::snprintf(buf, sizeof(buf), "relative Hessian error %.2e", rel);
  detail = buf;
  return rel < 1e-3;
}

// 6. Sensitivity linearity in moments (1e-12) and location/time vs FD (1e-4).
bool c06(std::string& detail) {
  const auto s = small_seismic();
  const SourceTerm src = build_source_term(s.theta, s.grid);

  const auto sens_m = solve_sensitivities(s.ops, src, s.tg, s.recv, {kM11}, {});
  SourceParams unit = s.theta;
  unit.m11 = 1;
  unit.m12 = 0;
  unit.m22 = 0;
  const auto prim =
      run_forward(s.ops, build_source_forcing(build_source_term(unit, s.grid), s.tg),
                  s.tg, s.recv, {});
  const double lin_err = (sens_m[0].data - prim.series.data).cwiseAbs().maxCoeff() /
                         prim.series.data.cwiseAbs().maxCoeff();

  auto fd_check = [&](int param, double step) {
    const auto sens = solve_sensitivities(s.ops, src, s.tg, s.recv, {param}, {});
    Eigen::VectorXd tp = s.theta.to_vector(), tm = s.theta.to_vector();
    tp[param] += step;
    tm[param] -= step;
    auto run_at = [&](const Eigen::VectorXd& t) {
      return run_forward(
                 s.ops,
                 build_source_forcing(
                     build_source_term(SourceParams::from_vector(t), s.grid), s.tg),
                 s.tg, s.recv, {})
          .series.data;
    };
    const Eigen::MatrixXd fd = (run_at(tp) - run_at(tm)) / (2 * step);
    return (sens[0].data - fd).cwiseAbs().maxCoeff() /
           sens[0].data.cwiseAbs().maxCoeff();
  };
  const double e_x1 = fd_check(kX1s, s.grid.h * 1e-3);
  const double e_x2 = fd_check(kX2s, s.grid.h * 1e-3);
  const double e_ts = fd_check(kTs, 1e-5);
  const double e_ws = fd_check(kWs, 1e-5);
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "moment linearity %.2e; FD errors x1 %.1e x2 %.1e ts %.1e ws %.1e",
                lin_err, e_x1, e_x2, e_ts, e_ws);
  detail = buf;
  return lin_err <= 1e-12 && e_x1 <= 1e-4 && e_x2 <= 1e-4 && e_ts <= 1e-4 &&
         e_ws <= 1e-4;
}

// 7. Scaling laws: H1 ~ N (slope in [0.9,1.1]); noise-gradient ~ sqrt(N)
//    (slope in [0.35,0.65] over 20 draws). N densified via dt refinement.
bool c07(std::string& detail) {
  const std::vector<double> dts = {0.025, 0.0125, 0.00625, 0.003125};
  const double dt_fine = dts.back();
  std::vector<double> log_n, log_h1;
  std::vector<std::vector<double>> log_g(dts.size());
  const std::vector<int> free_idx = {kX2s, kWs, kM11};
  for (std::size_t k = 0; k < dts.size(); ++k) {
    const auto s = small_seismic(200, dts[k], 1.5);
    const SourceTerm src = build_source_term(s.theta, s.grid);
    const auto sens = solve_sensitivities(s.ops, src, s.tg, s.recv, free_idx, {});
    const Eigen::MatrixXd h1 = misfit_hessian_H1(sens, s.noise);
    const double n_meas = s.recv.count() * s.tg.n_levels;
    log_n.push_back(std::log(n_meas));
    log_h1.push_back(std::log(h1.norm()));
    // gradient-noise term sum over (r, m) of eps^T C^-1 du/dtheta. Noise is
    // indexed by physical sample time, so refining dt densifies the same
    // noise process and each draw's growth rate is measured coherently.
    const int stride = static_cast<int>(std::lround(dts[k] / dt_fine));
    for (std::uint64_t draw = 0; draw < 20; ++draw) {
      Eigen::Vector3d g = Eigen::Vector3d::Zero();
      for (int r = 0; r < s.recv.count(); ++r) {
        for (int m = 0; m < s.tg.n_levels; ++m) {
          const std::uint64_t fine_idx =
              (static_cast<std::uint64_t>(r) << 32) +
              static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(stride);
          CounterRng rng(600 + draw, fine_idx);
          const Eigen::Vector2d eps = s.noise.chol * Eigen::Vector2d(rng.normal(),
                                                                     rng.normal());
          const Eigen::Vector2d ce = s.noise.inv * eps;
          for (int p = 0; p < 3; ++p) {
            g[p] += ce.dot(sens[p].data.block<2, 1>(2 * r, m));
          }
        }
      }
      log_g[k].push_back(std::log(g.norm()));
    }
  }
  const double h1_slope = regression_slope(log_n, log_h1);
  std::vector<double> mean_log_g;
  for (auto& v : log_g) mean_log_g.push_back(mean_stderr(v).mean);
  const double g_slope = regression_slope(log_n, mean_log_g);
  char buf[96];
  std::snprintf(buf, sizeof(buf), "H1 slope %.3f, noise-gradient slope %.3f", h1_slope,
                g_slope);
  detail = buf;
  return h1_slope > 0.9 && h1_slope < 1.1 && g_slope > 0.35 && g_slope < 0.65;
}

// 8. Conditioning at E[theta]: cond_unscaled >= 1e20, cond_scaled <= 1e3,
//    scaled diagonal exactly one to 1e-12.
bool c08(std::string& detail) {
  const RunConfig cfg = parse_config(scenario_config(""));
  const SeismicSetup setup = make_setup(cfg);
  const Receivers recv = build_receivers(setup.grid, DesignSpec{5, 1000});
  const SourceTerm src =
      build_source_term(SourceParams::from_vector(cfg.theta_star), setup.grid);
  const auto sens = solve_sensitivities(setup.ops, src, setup.time, recv,
                                        {0, 1, 2, 3, 4, 5, 6}, {});
  const Eigen::MatrixXd h1 = misfit_hessian_H1(sens, setup.noise);
  const ScaledHessian sc = scale_hessian(h1);
  double diag_err = 0.0;
  for (int i = 0; i < 7; ++i) diag_err = std::max(diag_err, std::abs(sc.h_scaled(i, i) - 1.0));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "cond %.2e -> %.2f, unit-diagonal defect %.1e",
                sc.cond_unscaled, sc.cond_scaled, diag_err);
  detail = buf;
  return sc.cond_unscaled >= 1e20 && sc.cond_scaled <= 1e3 && diag_err < 1e-12;
}

// 9. Linear-Gaussian oracle: Laplace and nested MC vs 1/2 log(1 + sp^2 N/s^2).
bool c09(std::string& detail) {
  const double sigma_p = 1.0, sigma = 1.0;
  const int n_obs = 400;  // posterior std = prior/20
  const double exact = 0.5 * std::log(1.0 + n_obs * sigma_p * sigma_p / (sigma * sigma));

  // Laplace route through the library: H1 assembled from unit sensitivities,
  // integrated over the Gaussian prior by MC on h(theta*).
  ReceiverSeries unit_sens;
  unit_sens.nodes.assign(1, 0);
  unit_sens.dt = 1;
  unit_sens.data.setZero(2, n_obs);
  unit_sens.data.row(0).setOnes();  // dg/dtheta = 1 on one component
  const Eigen::MatrixXd h1 =
      misfit_hessian_H1({unit_sens}, NoiseModel::isotropic(sigma * sigma));
  std::vector<double> dvals(4000);
  for (std::size_t i = 0; i < dvals.size(); ++i) {
    CounterRng rng(21, i);
    const double th = sigma_p * rng.normal();
    const double h_at = -0.5 * std::log(2.0 * M_PI * sigma_p * sigma_p) -
                        0.5 * th * th / (sigma_p * sigma_p);
    dvals[i] = dkl_hat(h1, h_at);
  }
  const MeanStderr lap = mean_stderr(dvals);

  NestedMcModel model;
  model.sample_prior = [=](std::uint64_t seed, std::uint64_t ctr) {
    CounterRng rng(seed, ctr);
    Eigen::VectorXd v(1);
    v << sigma_p * rng.normal();
    return v;
  };
  model.simulate_whitened = [=](const Eigen::VectorXd& th) {
    return Eigen::VectorXd::Constant(n_obs, th[0] / sigma);
  };
  const EigEstimate nested = nested_mc_eig(model, 2000, 2000, 5);

  const double lap_rel = std::abs(lap.mean - exact) / exact;
  const bool nested_ok = std::abs(nested.value - exact) <= 3.0 * nested.stderr_ + 0.02 * exact;
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "exact %.4f, laplace %.4f (rel %.2e), nested %.4f +- %.4f", exact,
                lap.mean, lap_rel, nested.value, nested.stderr_);
  detail = buf;
  return lap_rel <= 0.02 && nested_ok;
}

// 10. Laplace vs nested MC on the reduced problem, gap <= 10%.
bool c10(std::string& detail);

// 11. MC convergence rate 0.5 +- 0.15 for the EIG integrand; sparse-quadrature
//     successive relative errors decreasing in >= 4 of 5 pairs.
bool c11(std::string& detail);

// 12. Scenario properties at desk scale.
bool c12(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "seisbed_acceptance" / "c12";
  fs::remove_all(dir);

  auto eigs_of = [&](const std::string& scenario) {
    const RunConfig cfg = parse_config(scenario_config(
        "scenario = " + scenario + "\nestimator = laplace\nintegrator = mc\nmc_samples = 32\n"));
    const std::string path = run_scenario(cfg, dir.string());
    std::ifstream in(path);
    std::string line;
    std::vector<double> eig;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || !std::isdigit(line[0])) continue;
      // n_receivers,spacing,eig,...
      std::stringstream ss(line);
      std::string cell;
      std::getline(ss, cell, ',');
      std::getline(ss, cell, ',');
      std::getline(ss, cell, ',');
      eig.push_back(std::stod(cell));
    }
    return eig;
  };

  const std::vector<double> s1 = eigs_of("I");
  const std::vector<double> s2 = eigs_of("II");
  const std::vector<double> s3 = eigs_of("III");
  bool ok = true;
  ok &= check(s1.size() == 6 && s2.size() == 10 && s3.size() == 20, detail,
              "sweep row counts");
  bool mono1 = true;
  for (std::size_t i = 0; i + 1 < s1.size(); ++i) mono1 &= s1[i + 1] >= s1[i];
  ok &= check(mono1, detail, "scenario I monotone in N_R");
  bool mono2 = true;
  for (std::size_t i = 0; i + 1 < s2.size(); ++i) mono2 &= s2[i + 1] >= s2[i];
  ok &= check(mono2, detail, "scenario II monotone in N_R");
  ok &= check(s2.back() - s2[s2.size() - 2] < s2[1] - s2[0], detail,
              "scenario II diminishing increments");
  const auto max_it = std::max_element(s3.begin(), s3.end());
  const std::size_t argmax = static_cast<std::size_t>(max_it - s3.begin());
  ok &= check(argmax != 0 && argmax != s3.size() - 1, detail,
              "scenario III interior maximum");
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "I: %.2f..%.2f, II: %.2f..%.2f, III max at d_R=%d (%.2f)", s1.front(),
                s1.back(), s2.front(), s2.back(), static_cast<int>(200 * (argmax + 1)),
                *max_it);
  detail = buf + std::string(detail.empty() ? "" : " ") + detail;
  return ok;
}

// 13. Determinism: rerun with identical config+seed gives bit-identical CSVs.
bool c13(std::string& detail) {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "seisbed_acceptance" / "c13";
  fs::remove_all(base);
  const std::string cfg_text = reduced_config(
      "estimator = laplace\nintegrator = mc\nmc_samples = 8\nscenario = III\nper_param = 1\n");
  const RunConfig cfg = parse_config(cfg_text);

  auto read_file = [](const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  bool ok = true;
  for (const char* sub : {"eig", "hessian", "sweep", "perparam"}) {
    const std::string d1 = (base / (std::string(sub) + "_a")).string();
    const std::string d2 = (base / (std::string(sub) + "_b")).string();
    std::string p1, p2;
    if (!std::strcmp(sub, "eig")) {
      p1 = run_eig(cfg, d1);
      p2 = run_eig(cfg, d2);
    } else if (!std::strcmp(sub, "hessian")) {
      p1 = run_hessian(cfg, d1);
      p2 = run_hessian(cfg, d2);
    } else if (!std::strcmp(sub, "sweep")) {
      p1 = run_scenario(cfg, d1);
      p2 = run_scenario(cfg, d2);
    } else {
      p1 = per_parameter_sweep(cfg, d1);
      p2 = per_parameter_sweep(cfg, d2);
    }
    ok &= check(read_file(p1) == read_file(p2), detail,
                std::string(sub) + " output differs across reruns");
  }
  if (ok) detail = "eig/hessian/sweep/per-param CSVs bit-identical";
  return ok;
}

// ------------------------------------------------------------------ c10, c11

bool c10(std::string& detail) {
  // Reduced problem with desk-scale sizing: the unbiased double-loop estimator
  // needs the posterior volume fraction exp(-I) to be resolvable by the inner
  // loop, while the Laplace route needs a tight near-Gaussian posterior well
  // inside the box. The grid is coarsened to h=500 (the narrowed depth prior
  // keeps the source 3h inside), which makes the large inner loop affordable.
  const std::string cfg_text = R"(x1_min = -10000
x1_max = 2500
x2_min = -4500
x2_max = 0
h = 500
dt = 0.03125
t_end = 1.25
layer = 0,-1000,2600,4000,2000
layer = -1000,-4500,2700,6000,3464
noise_var = 2e-4
fixed_x1s = -1000
prior_x2s = -2275,-1825
fixed_ts = 1
prior_ws = 3.64,4.36
prior_m11 = 3.8e14,6.2e14
fixed_m12 = 5e14
fixed_m22 = 5e14
receivers_x1 = -9000,1000
seed = 12
quad_level = 3
nested_outer = 100
nested_inner = 60000
)";
  RunConfig cfg = parse_config(cfg_text);
  const SeismicSetup setup = make_setup(cfg);
  const Receivers recv = build_receivers(setup.grid, cfg.receivers_x1);

  RunConfig lap = cfg;
  lap.estimator = "laplace";
  lap.integrator = "quad";
  const EigEstimate el = eig_for_design(setup, lap, recv);

  RunConfig nst = cfg;
  nst.estimator = "nested";
  const EigEstimate en = eig_for_design(setup, nst, recv);

  const double gap = std::abs(el.value - en.value) / std::abs(en.value);
  char buf[128];
  std::snprintf(buf, sizeof(buf), "laplace %.4f, nested %.4f +- %.4f, gap %.1f%%",
                el.value, en.value, en.stderr_, 100.0 * gap);
  detail = buf;
  return gap <= 0.10;
}

bool c11(std::string& detail) {
  const RunConfig base = parse_config(reduced_config(""));
  const SeismicSetup setup = make_setup(base);
  const Receivers recv = build_receivers(setup.grid, base.receivers_x1);
  auto integrand = [&](const Eigen::VectorXd& x) {
    return dkl_laplace_at(setup, recv, x);
  };

  // sparse-quadrature ladder: successive relative errors (7 levels -> 6
  // errors -> 5 consecutive pairs)
  std::vector<double> qvals;
  for (int level : {0, 1, 2, 3, 4, 5, 6}) {
    const QuadratureRule rule = smolyak_total_degree(3, level);
    std::vector<double> terms(rule.size());
    for (int p = 0; p < rule.size(); ++p) {
      Eigen::VectorXd x(3);
      for (int d = 0; d < 3; ++d) {
        x[d] = setup.prior_free.lo[d] +
               (setup.prior_free.hi[d] - setup.prior_free.lo[d]) * 0.5 *
                   (rule.points(p, d) + 1.0);
      }
      terms[p] = rule.weights[p] * integrand(x);
    }
    qvals.push_back(pairwise_sum(terms) / 8.0);
  }
  std::vector<double> qerr;
  for (std::size_t i = 0; i + 1 < qvals.size(); ++i) {
    qerr.push_back(std::abs(qvals[i + 1] - qvals[i]) / std::abs(qvals[i + 1]));
  }
  int decreasing = 0;
  for (std::size_t i = 0; i + 1 < qerr.size(); ++i) {
    if (qerr[i + 1] < qerr[i]) ++decreasing;
  }

  // Monte Carlo rate over M = 100, 1000, 10000 with 10 replicates
  const double reference = qvals.back();
  std::vector<double> msizes, merr;
  for (int size : {100, 1000, 10000}) {
    std::vector<double> rel;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> vals(size);
      for (int i = 0; i < size; ++i) {
        CounterRng rng(base.seed, (static_cast<std::uint64_t>(rep + 1) << 32) +
                                       static_cast<std::uint64_t>(i));
        vals[i] = integrand(setup.prior_free.sample(rng));
      }
      rel.push_back(std::abs(mean_stderr(vals).mean - reference) / std::abs(reference));
    }
    msizes.push_back(size);
    merr.push_back(mean_stderr(rel).mean);
  }
  const double rate = convergence_rate(merr, msizes);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "MC rate %.3f; quadrature errors decreasing in %d of %zu pairs", rate,
                decreasing, qerr.size() - 1);
  detail = buf;
  return rate >= 0.35 && rate <= 0.65 && decreasing >= 4;
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  set_warn_handler([](const std::string&) {});
  const std::vector<Criterion> criteria = {
      {1, "delta-stencil moment conditions exact to 1e-12", c01},
      {2, "manufactured-solution convergence order in [1.8, 2.2]", c02},
      {3, "discrete adjoint identity to 1e-10", c03},
      {4, "adjoint gradient vs finite differences <= 1e-5", c04},
      {5, "H_I + H_II vs FD Hessian <= 1e-3", c05},
      {6, "sensitivity linearity and FD agreement", c06},
      {7, "scaling laws: H1 ~ N, noise gradient ~ sqrt(N)", c07},
      {8, "conditioning collapse under diagonal rescaling", c08},
      {9, "linear-Gaussian closed-form oracle", c09},
      {10, "Laplace vs nested MC gap <= 10% (reduced problem)", c10},
      {11, "MC rate 0.5 +- 0.15; sparse-quadrature errors decreasing", c11},
      {12, "scenario I/II monotone, III interior maximum", c12},
      {13, "bit-identical CSVs across reruns", c13},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);
  int failures = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %02d %s - %s (%s) [%.1fs]\n", c.id, ok ? "PASS" : "FAIL",
                c.title, detail.c_str(), secs);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
