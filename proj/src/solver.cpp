#include "seisbed/solver.hpp"

#include <cmath>
#include <sstream>

#include "seisbed/errors.hpp"
#include "seisbed/warnings.hpp"

namespace seisbed {

TimeGrid make_time_grid(double dt, double t_end) {
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw config_error("time grid: dt and T must be positive");
  }
  const double steps = t_end / dt;
  const double rounded = std::round(steps);
  if (rounded < 1.0 || std::abs(steps - rounded) > 1e-9 * steps) {
    std::ostringstream os;
    os << "time grid: T=" << t_end << " is not a multiple of dt=" << dt;
    throw config_error(os.str());
  }
  return {dt, t_end, static_cast<int>(rounded) + 1};
}

void check_cfl(const DiscreteOperators& ops, double dt, double safety) {
  const double limit = safety * ops.dt_limit;
  if (dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "CFL violated: dt=" << dt << " exceeds " << limit
       << " (= " << safety << " * h/max sqrt(cp^2+cs^2))";
    throw config_error(os.str());
  }
}

namespace {

void check_finite(const Eigen::VectorXd& u, int step) {
  if (!u.allFinite()) {
    std::ostringstream os;
    os << "solver: field became non-finite at step " << step;
    throw numeric_error(os.str());
  }
}

void scatter_forcing(const Forcing& forcing, int level, const Eigen::VectorXd& scale,
                     Eigen::VectorXd& r1, Eigen::VectorXd& r2) {
  for (const ForcingTerm& term : forcing.terms) {
    const double c = term.time[level];
    if (c == 0.0) continue;
    for (std::size_t a = 0; a < term.f1.idx.size(); ++a) {
      const int id = term.f1.idx[a];
      r1[id] += c * scale[id] * term.f1.val[a];
    }
    for (std::size_t a = 0; a < term.f2.idx.size(); ++a) {
      const int id = term.f2.idx[a];
      r2[id] += c * scale[id] * term.f2.val[a];
    }
  }
}

}  // namespace

ForwardResult run_forward(const DiscreteOperators& ops, const Forcing& forcing,
                          const TimeGrid& tg, const Receivers& recv,
                          const SolveOptions& opts) {
  if (opts.validate_cfl) check_cfl(ops, tg.dt, opts.cfl_safety);
  const int n = ops.n_nodes();
  const int nt = tg.n_levels;
  const double dt = tg.dt;
  const double dt2 = dt * dt;

  Eigen::VectorXd u1 = Eigen::VectorXd::Zero(n), u2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd p1 = Eigen::VectorXd::Zero(n), p2 = Eigen::VectorXd::Zero(n);
  if (opts.init_u1) {
    u1 = opts.init_u1->first;
    p1 = opts.init_u1->second;
  }
  if (opts.init_u2) {
    u2 = opts.init_u2->first;
    p2 = opts.init_u2->second;
  }
  Eigen::VectorXd r1(n), r2(n), n1v(n), n2v(n);

  ForwardResult out;
  out.series.dt = dt;
  out.series.t_end = tg.t_end;
  out.series.nodes = recv.nodes;
  out.series.data.setZero(2 * recv.count(), nt);
  if (opts.record_history) {
    out.history.u1.setZero(n, nt);
    out.history.u2.setZero(n, nt);
  }

  auto record = [&](int m) {
    for (int r = 0; r < recv.count(); ++r) {
      out.series.data(2 * r, m) = u1[recv.nodes[r]];
      out.series.data(2 * r + 1, m) = u2[recv.nodes[r]];
    }
    if (opts.record_history) {
      out.history.u1.col(m) = u1;
      out.history.u2.col(m) = u2;
    }
  };

  record(0);
  for (int m = 0; m < nt - 1; ++m) {
    r1.noalias() = ops.s11 * u1;
    r1.noalias() += ops.s12 * u2;
    r2.noalias() = ops.s21 * u1;
    r2.noalias() += ops.s22 * u2;
    scatter_forcing(forcing, m, ops.force_scale, r1, r2);
    for (int id = 0; id < n; ++id) {
      if (ops.interior[id]) {
        n1v[id] = 2.0 * u1[id] - p1[id] + dt2 * r1[id];
        n2v[id] = 2.0 * u2[id] - p2[id] + dt2 * r2[id];
      } else {
        // forward Euler on the first-order characteristic rows; the centered
        // form has an unconditionally growing parasitic mode
        n1v[id] = u1[id] + dt * r1[id];
        n2v[id] = u2[id] + dt * r2[id];
      }
    }
    p1.swap(u1);
    p2.swap(u2);
    u1.swap(n1v);
    u2.swap(n2v);
    if ((m & 15) == 0 || m == nt - 2) {
      check_finite(u1, m + 1);
      check_finite(u2, m + 1);
    }
    record(m + 1);
  }
  return out;
}

WavefieldHistory run_dual(const DiscreteOperators& ops, const DualSource& src,
                          const TimeGrid& tg, const SolveOptions& opts) {
  if (opts.validate_cfl) check_cfl(ops, tg.dt, opts.cfl_safety);
  const int n = ops.n_nodes();
  const int nt = tg.n_levels;
  const double dt = tg.dt;
  const double dt2 = dt * dt;

  WavefieldHistory hist;
  hist.u1.setZero(n, nt);
  hist.u2.setZero(n, nt);

  // Exact transpose of the forward recursion, marched backward with terminal
  // conditions phi^{N_t} = phi^{N_t-1} = 0. The spatial blocks apply to the
  // mask-scaled field (dt^2 on second-order rows, dt on absorbing rows); the
  // source enters scaled by dt^2 so that sum_m w^m . u^m = sum_m phi^m . C f^m.
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n), c2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd f1 = Eigen::VectorXd::Zero(n), f2 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd v1(n), v2(n), r1(n), r2(n), o1(n), o2(n);

  for (int m = nt - 1; m >= 1; --m) {
    for (int id = 0; id < n; ++id) {
      const double scale = ops.interior[id] ? dt2 : dt;
      v1[id] = scale * c1[id];
      v2[id] = scale * c2[id];
    }
    r1.noalias() = ops.d11 * v1;
    r1.noalias() += ops.d12 * v2;
    r2.noalias() = ops.d21 * v1;
    r2.noalias() += ops.d22 * v2;
    for (std::size_t a = 0; a < src.nodes.size(); ++a) {
      r1[src.nodes[a]] += dt2 * src.w1(static_cast<int>(a), m);
      r2[src.nodes[a]] += dt2 * src.w2(static_cast<int>(a), m);
    }
    for (int id = 0; id < n; ++id) {
      if (ops.interior[id]) {
        o1[id] = 2.0 * c1[id] - f1[id] + r1[id];
        o2[id] = 2.0 * c2[id] - f2[id] + r2[id];
      } else {
        o1[id] = c1[id] + r1[id];
        o2[id] = c2[id] + r2[id];
      }
    }
    f1.swap(c1);
    f2.swap(c2);
    c1.swap(o1);
    c2.swap(o2);
    if ((m & 15) == 0 || m == 1) {
      check_finite(c1, m - 1);
      check_finite(c2, m - 1);
    }
    hist.u1.col(m - 1) = c1;
    hist.u2.col(m - 1) = c2;
  }
  return hist;
}

Forcing build_source_forcing(const SourceTerm& src, const TimeGrid& tg) {
  ForcingTerm term;
  term.time.resize(tg.n_levels);
  for (int m = 0; m < tg.n_levels; ++m) {
    term.time[m] = time_function(tg.t(m), src.theta.ts, src.theta.ws).value;
  }
  term.f1.idx = src.nodes;
  term.f1.val = src.g1();
  term.f2.idx = src.nodes;
  term.f2.val = src.g2();
  return {{std::move(term)}};
}

Forcing build_sensitivity_forcing(const SourceTerm& src, const TimeGrid& tg, int param) {
  Forcing f;
  ForcingTerm term;
  term.time.resize(tg.n_levels);
  term.f1.idx = src.nodes;
  term.f2.idx = src.nodes;
  const auto& th = src.theta;
  auto fill_time = [&](auto&& eval) {
    for (int m = 0; m < tg.n_levels; ++m) term.time[m] = eval(tg.t(m));
  };
  switch (param) {
    case kX1s:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).value; });
      term.f1.val = th.m11 * src.dp1_x1 + th.m12 * src.dp2_x1;
      term.f2.val = th.m12 * src.dp1_x1 + th.m22 * src.dp2_x1;
      break;
    case kX2s:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).value; });
      term.f1.val = th.m11 * src.dp1_x2 + th.m12 * src.dp2_x2;
      term.f2.val = th.m12 * src.dp1_x2 + th.m22 * src.dp2_x2;
      break;
    case kTs:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).d_ts; });
      term.f1.val = src.g1();
      term.f2.val = src.g2();
      break;
    case kWs:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).d_ws; });
      term.f1.val = src.g1();
      term.f2.val = src.g2();
      break;
    case kM11:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).value; });
      term.f1.val = src.p1;
      term.f2.val = Eigen::VectorXd::Zero(36);
      break;
    case kM12:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).value; });
      term.f1.val = src.p2;
      term.f2.val = src.p1;
      break;
    case kM22:
      fill_time([&](double t) { return time_function(t, th.ts, th.ws).value; });
      term.f1.val = Eigen::VectorXd::Zero(36);
      term.f2.val = src.p2;
      break;
    default:
      throw std::invalid_argument("sensitivity forcing: bad parameter index");
  }
  f.terms.push_back(std::move(term));
  return f;
}

ForwardResult run_forward_source(const DiscreteOperators& ops, const SourceTerm& src,
                                 const TimeGrid& tg, const Receivers& recv,
                                 const SolveOptions& opts) {
  const double s0 = time_function(0.0, src.theta.ts, src.theta.ws).value;
  const double speak = time_function(src.theta.ts, src.theta.ts, src.theta.ws).value;
  if (s0 > 1e-8 * speak) {
    std::ostringstream os;
    os << "source: S(0)/S(t_s) = " << s0 / speak
       << " > 1e-8; zero initial data start is not smooth";
    warn(os.str());
  }
  return run_forward(ops, build_source_forcing(src, tg), tg, recv, opts);
}

std::vector<ReceiverSeries> solve_sensitivities(const DiscreteOperators& ops,
                                                const SourceTerm& src,
                                                const TimeGrid& tg,
                                                const Receivers& recv,
                                                const std::vector<int>& params,
                                                const SolveOptions& opts) {
  std::vector<ReceiverSeries> out;
  out.reserve(params.size());
  for (int j : params) {
    out.push_back(
        run_forward(ops, build_sensitivity_forcing(src, tg, j), tg, recv, opts).series);
  }
  return out;
}

}  // namespace seisbed
