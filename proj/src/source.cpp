#include "seisbed/source.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "seisbed/errors.hpp"

namespace seisbed {

Eigen::VectorXd SourceParams::to_vector() const {
  Eigen::VectorXd v(7);
  v << x1s, x2s, ts, ws, m11, m12, m22;
  return v;
}

SourceParams SourceParams::from_vector(const Eigen::VectorXd& v) {
  if (v.size() != 7) throw std::invalid_argument("SourceParams: need 7 entries");
  SourceParams p;
  p.x1s = v[0];
  p.x2s = v[1];
  p.ts = v[2];
  p.ws = v[3];
  p.m11 = v[4];
  p.m12 = v[5];
  p.m22 = v[6];
  return p;
}

const std::array<const char*, 7>& SourceParams::names() {
  static const std::array<const char*, 7> n = {"x1s", "x2s", "ts",
                                               "ws",  "m11", "m12", "m22"};
  return n;
}

TimeFunctionEval time_function(double t, double ts, double ws) {
  if (!(ws > 0.0)) throw std::domain_error("time_function: omega_s must be positive");
  const double tau = t - ts;
  const double s = ws / std::sqrt(2.0 * M_PI) * std::exp(-0.5 * ws * ws * tau * tau);
  TimeFunctionEval e;
  e.value = s;
  e.d_ts = s * ws * ws * tau;
  e.d_ws = s * (1.0 / ws - ws * tau * tau);
  e.d2_ts_ts = s * ws * ws * (ws * ws * tau * tau - 1.0);
  e.d2_ts_ws = s * ws * tau * (3.0 - ws * ws * tau * tau);
  e.d2_ws_ws = s * tau * tau * (ws * ws * tau * tau - 3.0);
  return e;
}

namespace {

// Regularizing polynomials and their derivatives.
inline double poly_p(double a) {
  return a * a * a * a * a *
         (5.0 / 3.0 + a * (-7.0 / 24.0 + a * (-17.0 / 12.0 + a * (9.0 / 8.0 - a / 4.0))));
}
inline double poly_p1(double a) {
  return a * a * a * a *
         (25.0 / 3.0 + a * (-7.0 / 4.0 + a * (-119.0 / 12.0 + a * (9.0 - 9.0 / 4.0 * a))));
}
inline double poly_p2(double a) {
  return a * a * a *
         (100.0 / 3.0 + a * (-35.0 / 4.0 + a * (-119.0 / 2.0 + a * (63.0 - 18.0 * a))));
}
inline double poly_r(double a) {
  return a * a * a * a *
         (-25.0 / 12.0 + a * (-3.0 / 4.0 + a * (59.0 / 12.0 + a * (-4.0 + a))));
}
inline double poly_r1(double a) {
  return a * a * a *
         (-25.0 / 3.0 + a * (-15.0 / 4.0 + a * (59.0 / 2.0 + a * (-28.0 + 8.0 * a))));
}
inline double poly_r2(double a) {
  return a * a *
         (-25.0 + a * (-15.0 + a * (295.0 / 2.0 + a * (-168.0 + 56.0 * a))));
}

struct AnchoredCell {
  int k;        // 1-based anchor, x_k <= x_s < x_{k+1}
  double alpha;
};

AnchoredCell anchor(double x_s, double axis_min, int n_nodes, double h) {
  const double lo = axis_min + 3.0 * h;
  const double hi = axis_min + (n_nodes - 1) * h - 3.0 * h;
  if (!(x_s >= lo - 1e-12 * h) || !(x_s <= hi + 1e-12 * h)) {
    std::ostringstream os;
    os << "source stencil: position " << x_s << " is closer than 3h to an axis end ["
       << axis_min << ", " << axis_min + (n_nodes - 1) * h << "], h=" << h;
    throw std::domain_error(os.str());
  }
  const double s = (x_s - axis_min) / h;
  int k0 = static_cast<int>(std::floor(s));
  double alpha = s - k0;
  if (alpha >= 1.0) {  // guard fp round-up at cell boundaries
    ++k0;
    alpha = 0.0;
  }
  return {k0 + 1, alpha};
}

}  // namespace

DeltaStencil delta_stencil(double x_s, double axis_min, int n_nodes, double h) {
  const AnchoredCell c = anchor(x_s, axis_min, n_nodes, h);
  const double a = c.alpha;
  const double p = poly_p(a), p1 = poly_p1(a), p2 = poly_p2(a);
  DeltaStencil st;
  st.k = c.k;
  st.prime = false;
  st.alpha = a;

  const double a2 = a * a, a3 = a2 * a, a4 = a3 * a;
  // Weight polynomials c_i(alpha); w_i = c_i/h.
  const double cw[6] = {
      a / 12 - a2 / 24 - a3 / 12 - 19.0 * a4 / 24 + p,
      -2 * a / 3 + 2 * a2 / 3 + a3 / 6 + 4 * a4 - 5 * p,
      1 - 5 * a2 / 4 - 97.0 * a4 / 12 + 10 * p,
      2 * a / 3 + 2 * a2 / 3 - a3 / 6 + 49.0 * a4 / 6 - 10 * p,
      -a / 12 - a2 / 24 + a3 / 12 - 33.0 * a4 / 8 + 5 * p,
      5.0 * a4 / 6 - p};
  const double cd[6] = {
      1.0 / 12 - a / 12 - a2 / 4 - 19.0 * a3 / 6 + p1,
      -2.0 / 3 + 4 * a / 3 + a2 / 2 + 16 * a3 - 5 * p1,
      -5 * a / 2 - 97.0 * a3 / 3 + 10 * p1,
      2.0 / 3 + 4 * a / 3 - a2 / 2 + 98.0 * a3 / 3 - 10 * p1,
      -1.0 / 12 - a / 12 + a2 / 4 - 33.0 * a3 / 2 + 5 * p1,
      10.0 * a3 / 3 - p1};
  const double cdd[6] = {
      -1.0 / 12 - a / 2 - 19.0 * a2 / 2 + p2,
      4.0 / 3 + a + 48 * a2 - 5 * p2,
      -5.0 / 2 - 97.0 * a2 + 10 * p2,
      4.0 / 3 - a + 98 * a2 - 10 * p2,
      -1.0 / 12 + a / 2 - 99.0 * a2 / 2 + 5 * p2,
      10 * a2 - p2};
  for (int i = 0; i < 6; ++i) {
    st.w[i] = cw[i] / h;
    st.dw[i] = cd[i] / (h * h);        // d alpha/d x_s = 1/h
    st.d2w[i] = cdd[i] / (h * h * h);
  }
  return st;
}

DeltaStencil delta_prime_stencil(double x_s, double axis_min, int n_nodes, double h) {
  const AnchoredCell c = anchor(x_s, axis_min, n_nodes, h);
  const double a = c.alpha;
  const double r = poly_r(a), r1 = poly_r1(a), r2 = poly_r2(a);
  DeltaStencil st;
  st.k = c.k;
  st.prime = true;
  st.alpha = a;

  const double a2 = a * a, a3 = a2 * a;
  const double dw[6] = {
      -1.0 / 12 + a / 12 + a2 / 4 + 2 * a3 / 3 + r,
      2.0 / 3 - 4 * a / 3 - a2 / 2 - 7 * a3 / 2 - 5 * r,
      5 * a / 2 + 22.0 * a3 / 3 + 10 * r,
      -2.0 / 3 - 4 * a / 3 + a2 / 2 - 23.0 * a3 / 3 - 10 * r,
      1.0 / 12 + a / 12 - a2 / 4 + 4 * a3 + 5 * r,
      -5.0 * a3 / 6 - r};
  const double dd[6] = {
      1.0 / 12 + a / 2 + 2 * a2 + r1,
      -4.0 / 3 - a - 21.0 * a2 / 2 - 5 * r1,
      5.0 / 2 + 22 * a2 + 10 * r1,
      -4.0 / 3 + a - 23 * a2 - 10 * r1,
      1.0 / 12 - a / 2 + 12 * a2 + 5 * r1,
      -5.0 * a2 / 2 - r1};
  const double ddd[6] = {
      0.5 + 4 * a + r2,
      -1.0 - 21 * a - 5 * r2,
      44 * a + 10 * r2,
      1.0 - 46 * a - 10 * r2,
      -0.5 + 24 * a + 5 * r2,
      -5 * a - r2};
  const double h2 = h * h;
  for (int i = 0; i < 6; ++i) {
    st.w[i] = dw[i] / h2;
    st.dw[i] = dd[i] / (h2 * h);
    st.d2w[i] = ddd[i] / (h2 * h2);
  }
  return st;
}

SourceTerm build_source_term(const SourceParams& theta, const Grid& grid) {
  if (!(theta.ws > 0.0)) throw std::domain_error("source: omega_s must be positive");
  const DeltaStencil dxp = delta_prime_stencil(theta.x1s, grid.x1_min, grid.n1, grid.h);
  const DeltaStencil dx = delta_stencil(theta.x1s, grid.x1_min, grid.n1, grid.h);
  const DeltaStencil dyp = delta_prime_stencil(theta.x2s, grid.x2_min, grid.n2, grid.h);
  const DeltaStencil dy = delta_stencil(theta.x2s, grid.x2_min, grid.n2, grid.h);

  SourceTerm s;
  s.theta = theta;
  s.nodes.resize(36);
  const int i0 = dxp.k - 2;  // patch spans k-2 .. k+3 on each axis
  const int j0 = dyp.k - 2;
  for (int jy = 0; jy < 6; ++jy) {
    for (int ix = 0; ix < 6; ++ix) {
      const int a = jy * 6 + ix;
      s.nodes[a] = grid.node(i0 + ix, j0 + jy);
      // p1 = delta'(x1) delta(x2), p2 = delta(x1) delta'(x2)
      s.p1[a] = dxp.w[ix] * dy.w[jy];
      s.p2[a] = dx.w[ix] * dyp.w[jy];
      s.dp1_x1[a] = dxp.dw[ix] * dy.w[jy];
      s.dp1_x2[a] = dxp.w[ix] * dy.dw[jy];
      s.dp2_x1[a] = dx.dw[ix] * dyp.w[jy];
      s.dp2_x2[a] = dx.w[ix] * dyp.dw[jy];
      s.d2p1_x1x1[a] = dxp.d2w[ix] * dy.w[jy];
      s.d2p1_x1x2[a] = dxp.dw[ix] * dy.dw[jy];
      s.d2p1_x2x2[a] = dxp.w[ix] * dy.d2w[jy];
      s.d2p2_x1x1[a] = dx.d2w[ix] * dyp.w[jy];
      s.d2p2_x1x2[a] = dx.dw[ix] * dyp.dw[jy];
      s.d2p2_x2x2[a] = dx.w[ix] * dyp.d2w[jy];
    }
  }
  return s;
}

namespace {

SparseVec make_sparse(const std::vector<int>& nodes,
                      const Eigen::Matrix<double, 36, 1>& v) {
  SparseVec out;
  out.idx = nodes;
  out.val = v;
  return out;
}

}  // namespace

DiscreteForce discretize_source(const SourceParams& theta, const Grid& grid, double t) {
  const SourceTerm s = build_source_term(theta, grid);
  const double sv = time_function(t, theta.ts, theta.ws).value;
  DiscreteForce f;
  f.f1 = make_sparse(s.nodes, (sv * s.g1()).eval());
  f.f2 = make_sparse(s.nodes, (sv * s.g2()).eval());
  return f;
}

std::array<std::array<SparseVec, 2>, SourceParams::n_params>
source_jacobian(const SourceParams& theta, const Grid& grid, double t) {
  const SourceTerm s = build_source_term(theta, grid);
  const TimeFunctionEval tf = time_function(t, theta.ts, theta.ws);
  const auto& m = theta;

  std::array<std::array<SparseVec, 2>, 7> cols;
  auto set = [&](int j, const Eigen::Matrix<double, 36, 1>& f1,
                 const Eigen::Matrix<double, 36, 1>& f2) {
    cols[j][0] = make_sparse(s.nodes, f1);
    cols[j][1] = make_sparse(s.nodes, f2);
  };
  set(kX1s, tf.value * (m.m11 * s.dp1_x1 + m.m12 * s.dp2_x1),
      tf.value * (m.m12 * s.dp1_x1 + m.m22 * s.dp2_x1));
  set(kX2s, tf.value * (m.m11 * s.dp1_x2 + m.m12 * s.dp2_x2),
      tf.value * (m.m12 * s.dp1_x2 + m.m22 * s.dp2_x2));
  set(kTs, tf.d_ts * s.g1(), tf.d_ts * s.g2());
  set(kWs, tf.d_ws * s.g1(), tf.d_ws * s.g2());
  set(kM11, tf.value * s.p1, Eigen::Matrix<double, 36, 1>::Zero());
  set(kM12, tf.value * s.p2, tf.value * s.p1);
  set(kM22, Eigen::Matrix<double, 36, 1>::Zero(), tf.value * s.p2);
  return cols;
}

namespace {

// One component's contribution: f = S(t) (a p1 + b p2), with the moment a at
// parameter index ia and b at ib. Fills the symmetric 7x7 block given the
// patch-contracted pattern dots.
void fill_block(Eigen::Matrix<double, 7, 7>& blk, const TimeFunctionEval& tf,
                double a, double b, int ia, int ib, double P1, double P2,
                double D1x, double D1y, double D2x, double D2y, double H1xx,
                double H1xy, double H1yy, double H2xx, double H2xy, double H2yy) {
  const double gx = a * D1x + b * D2x;
  const double gy = a * D1y + b * D2y;
  const double g = a * P1 + b * P2;
  blk(kX1s, kX1s) += tf.value * (a * H1xx + b * H2xx);
  blk(kX1s, kX2s) += tf.value * (a * H1xy + b * H2xy);
  blk(kX2s, kX2s) += tf.value * (a * H1yy + b * H2yy);
  blk(kX1s, kTs) += tf.d_ts * gx;
  blk(kX2s, kTs) += tf.d_ts * gy;
  blk(kX1s, kWs) += tf.d_ws * gx;
  blk(kX2s, kWs) += tf.d_ws * gy;
  blk(kTs, kTs) += tf.d2_ts_ts * g;
  blk(kTs, kWs) += tf.d2_ts_ws * g;
  blk(kWs, kWs) += tf.d2_ws_ws * g;
  blk(kX1s, ia) += tf.value * D1x;
  blk(kX2s, ia) += tf.value * D1y;
  blk(kTs, ia) += tf.d_ts * P1;
  blk(kWs, ia) += tf.d_ws * P1;
  blk(kX1s, ib) += tf.value * D2x;
  blk(kX2s, ib) += tf.value * D2y;
  blk(kTs, ib) += tf.d_ts * P2;
  blk(kWs, ib) += tf.d_ws * P2;
}

void symmetrize_lower(Eigen::Matrix<double, 7, 7>& blk) {
  for (int r = 0; r < 7; ++r)
    for (int c = r + 1; c < 7; ++c) blk(c, r) = blk(r, c);
}

}  // namespace

SourceHessianRows source_hessian_rows(const SourceParams& theta, const Grid& grid,
                                      double t) {
  const SourceTerm s = build_source_term(theta, grid);
  const TimeFunctionEval tf = time_function(t, theta.ts, theta.ws);
  SourceHessianRows out;
  out.nodes = s.nodes;
  out.h1.assign(36, Eigen::Matrix<double, 7, 7>::Zero());
  out.h2.assign(36, Eigen::Matrix<double, 7, 7>::Zero());
  for (int i = 0; i < 36; ++i) {
    fill_block(out.h1[i], tf, theta.m11, theta.m12, kM11, kM12, s.p1[i], s.p2[i],
               s.dp1_x1[i], s.dp1_x2[i], s.dp2_x1[i], s.dp2_x2[i], s.d2p1_x1x1[i],
               s.d2p1_x1x2[i], s.d2p1_x2x2[i], s.d2p2_x1x1[i], s.d2p2_x1x2[i],
               s.d2p2_x2x2[i]);
    symmetrize_lower(out.h1[i]);
    fill_block(out.h2[i], tf, theta.m12, theta.m22, kM12, kM22, s.p1[i], s.p2[i],
               s.dp1_x1[i], s.dp1_x2[i], s.dp2_x1[i], s.dp2_x2[i], s.d2p1_x1x1[i],
               s.d2p1_x1x2[i], s.d2p1_x2x2[i], s.d2p2_x1x1[i], s.d2p2_x1x2[i],
               s.d2p2_x2x2[i]);
    symmetrize_lower(out.h2[i]);
  }
  return out;
}

void accumulate_source_hessian(const SourceTerm& src, double t,
                               const Eigen::VectorXd& weight1,
                               const Eigen::VectorXd& weight2,
                               Eigen::MatrixXd& h_accum) {
  const TimeFunctionEval tf = time_function(t, src.theta.ts, src.theta.ws);
  Eigen::Matrix<double, 7, 7> blk = Eigen::Matrix<double, 7, 7>::Zero();
  const struct {
    const Eigen::VectorXd& w;
    double a, b;
    int ia, ib;
  } comps[2] = {{weight1, src.theta.m11, src.theta.m12, kM11, kM12},
                {weight2, src.theta.m12, src.theta.m22, kM12, kM22}};
  for (const auto& c : comps) {
    fill_block(blk, tf, c.a, c.b, c.ia, c.ib, c.w.dot(src.p1), c.w.dot(src.p2),
               c.w.dot(src.dp1_x1), c.w.dot(src.dp1_x2), c.w.dot(src.dp2_x1),
               c.w.dot(src.dp2_x2), c.w.dot(src.d2p1_x1x1), c.w.dot(src.d2p1_x1x2),
               c.w.dot(src.d2p1_x2x2), c.w.dot(src.d2p2_x1x1),
               c.w.dot(src.d2p2_x1x2), c.w.dot(src.d2p2_x2x2));
  }
  symmetrize_lower(blk);
  h_accum -= blk;  // dual-weighted curvature enters with a minus sign
}

}  // namespace seisbed
