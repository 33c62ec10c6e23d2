#include "seisbed/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seisbed/errors.hpp"

namespace seisbed {

namespace {

struct Assembler {
  const Grid& g;
  const MaterialField& m;
  std::vector<Eigen::Triplet<double>> t11, t12, t21, t22;

  double lam(int i, int j) const { return m.lam[g.node(i, std::min(j, g.n2))]; }
  double mu(int i, int j) const { return m.mu[g.node(i, std::min(j, g.n2))]; }
  double lp(int i, int j) const { return lam(i, j) + 2.0 * mu(i, j); }
  double nu(int i, int j) const { return m.nu[g.node(i, j)]; }

  void push(int eq, int var, int row, int col, double c) {
    auto& t = (eq == 0) ? (var == 0 ? t11 : t12) : (var == 0 ? t21 : t22);
    t.emplace_back(row, col, c);
  }

  // Second-order one-sided/centered tangential derivative entries (times 2h)
  // used when eliminating top ghost values at surface column i.
  std::vector<std::pair<int, double>> tangential(int i) const {
    if (i == 1) return {{1, -3.0}, {2, 4.0}, {3, -1.0}};
    if (i == g.n1) return {{g.n1, 3.0}, {g.n1 - 1, -4.0}, {g.n1 - 2, 1.0}};
    return {{i + 1, 1.0}, {i - 1, -1.0}};
  }

  // Add coefficient c for component `var` at node (i,j) into equation row
  // (eq, row). Ghost nodes j = n2+1 are eliminated through the discrete
  // stress-free conditions sigma12 = sigma22 = 0 at the surface.
  void add(int eq, int var, int row, int i, int j, double c) {
    if (j <= g.n2) {
      push(eq, var, row, g.node(i, j), c);
      return;
    }
    // ghost above the free surface
    add(eq, var, row, i, g.n2 - 1, c);
    const double ratio = (var == 0) ? 1.0 : lam(i, g.n2) / lp(i, g.n2);
    const int other = 1 - var;
    for (const auto& [col, s] : tangential(i)) {
      add(eq, other, row, col, g.n2, -c * ratio * s);
    }
  }

  // Interior / free-surface discretization of (1/nu) (div sigma)_k at (i,j).
  void interior_row(int i, int j) {
    const double inv_h2 = 1.0 / (g.h * g.h);
    const double q = 0.25 * inv_h2;  // cross terms carry 1/(4h^2)
    const double inl = 1.0 / nu(i, j);
    const int row = g.node(i, j);

    // eq1: Dx((2mu+lam) Dx u1) + Dy(mu Dy u1) + D0x(lam D0y u2) + D0y(mu D0x u2)
    {
      const double ap = 0.5 * (lp(i, j) + lp(i + 1, j));
      const double am = 0.5 * (lp(i, j) + lp(i - 1, j));
      const double bp = 0.5 * (mu(i, j) + mu(i, j + 1));
      const double bm = 0.5 * (mu(i, j) + mu(i, j - 1));
      add(0, 0, row, i + 1, j, inl * ap * inv_h2);
      add(0, 0, row, i - 1, j, inl * am * inv_h2);
      add(0, 0, row, i, j + 1, inl * bp * inv_h2);
      add(0, 0, row, i, j - 1, inl * bm * inv_h2);
      add(0, 0, row, i, j, -inl * (ap + am + bp + bm) * inv_h2);

      const double lE = lam(i + 1, j), lW = lam(i - 1, j);
      const double mN = mu(i, j + 1), mS = mu(i, j - 1);
      add(0, 1, row, i + 1, j + 1, inl * q * (lE + mN));
      add(0, 1, row, i - 1, j - 1, inl * q * (lW + mS));
      add(0, 1, row, i + 1, j - 1, -inl * q * (lE + mS));
      add(0, 1, row, i - 1, j + 1, -inl * q * (lW + mN));
    }
    // eq2: Dx(mu Dx u2) + Dy((2mu+lam) Dy u2) + D0x(mu D0y u1) + D0y(lam D0x u1)
    {
      const double ap = 0.5 * (mu(i, j) + mu(i + 1, j));
      const double am = 0.5 * (mu(i, j) + mu(i - 1, j));
      const double bp = 0.5 * (lp(i, j) + lp(i, j + 1));
      const double bm = 0.5 * (lp(i, j) + lp(i, j - 1));
      add(1, 1, row, i + 1, j, inl * ap * inv_h2);
      add(1, 1, row, i - 1, j, inl * am * inv_h2);
      add(1, 1, row, i, j + 1, inl * bp * inv_h2);
      add(1, 1, row, i, j - 1, inl * bm * inv_h2);
      add(1, 1, row, i, j, -inl * (ap + am + bp + bm) * inv_h2);

      const double mE = mu(i + 1, j), mW = mu(i - 1, j);
      const double lN = lam(i, j + 1), lS = lam(i, j - 1);
      add(1, 0, row, i + 1, j + 1, inl * q * (mE + lN));
      add(1, 0, row, i - 1, j - 1, inl * q * (mW + lS));
      add(1, 0, row, i + 1, j - 1, -inl * q * (mE + lS));
      add(1, 0, row, i - 1, j + 1, -inl * q * (mW + lN));
    }
  }

  enum class Diff { Forward, Backward, Centered };

  std::vector<std::pair<int, double>> stencil_1d(int pos, Diff d, double inv_h) const {
    switch (d) {
      case Diff::Forward:
        return {{pos + 1, inv_h}, {pos, -inv_h}};
      case Diff::Backward:
        return {{pos, inv_h}, {pos - 1, -inv_h}};
      default:
        return {{pos + 1, 0.5 * inv_h}, {pos - 1, -0.5 * inv_h}};
    }
  }

  // Absorbing row for one edge: u_t = -(1/(nu c)) of the outward traction,
  // written with one-sided normal differences. `scale` lets corners average
  // two incident edge conditions.
  void absorbing_row(int i, int j, int edge /*0=left,1=right,2=bottom*/,
                     Diff dx1, Diff dx2, double scale) {
    const int row = g.node(i, j);
    const int id = g.node(i, j);
    const double inv_h = 1.0 / g.h;
    const double icp = 1.0 / (m.nu[id] * m.cp[id]);
    const double ics = 1.0 / (m.nu[id] * m.cs[id]);
    const auto ddx1 = stencil_1d(i, dx1, inv_h);
    const auto ddx2 = stencil_1d(j, dx2, inv_h);

    // traction components through sigma at (i,j)
    auto add_dx1 = [&](int eq, int var, double c) {
      for (const auto& [ii, s] : ddx1) add(eq, var, row, ii, j, c * s);
    };
    auto add_dx2 = [&](int eq, int var, double c) {
      for (const auto& [jj, s] : ddx2) add(eq, var, row, i, jj, c * s);
    };
    const double l = lam(i, j), u = mu(i, j), p = lp(i, j);

    if (edge == 0 || edge == 1) {
      const double sgn = (edge == 1) ? -1.0 : 1.0;  // right: u_t = -(1/nu c) sigma . e1
      // eq1: sgn (1/(nu cp)) sigma11
      add_dx1(0, 0, scale * sgn * icp * p);
      add_dx2(0, 1, scale * sgn * icp * l);
      // eq2: sgn (1/(nu cs)) sigma12
      add_dx2(1, 0, scale * sgn * ics * u);
      add_dx1(1, 1, scale * sgn * ics * u);
    } else {
      // bottom, outward normal -e2: u1_t = (1/(nu cs)) sigma12, u2_t = (1/(nu cp)) sigma22
      add_dx2(0, 0, scale * ics * u);
      add_dx1(0, 1, scale * ics * u);
      add_dx1(1, 0, scale * icp * l);
      add_dx2(1, 1, scale * icp * p);
    }
  }
};

}  // namespace

DiscreteOperators assemble_operators(const Grid& grid, const MaterialField& mat) {
  const int n = grid.n_nodes();
  if (mat.nu.size() != n) throw config_error("operators: material/grid size mismatch");
  for (int id = 0; id < n; ++id) {
    if (!(mat.nu[id] > 0.0) || !(mat.mu[id] > 0.0) ||
        !(mat.lam[id] + 2.0 * mat.mu[id] > 0.0)) {
      throw config_error("operators: material positivity violated");
    }
  }

  Assembler a{grid, mat, {}, {}, {}, {}};
  DiscreteOperators ops;
  ops.n1 = grid.n1;
  ops.n2 = grid.n2;
  ops.h = grid.h;
  ops.force_scale = Eigen::VectorXd::Zero(n);
  ops.interior.assign(n, 0);
  ops.dt_limit = std::numeric_limits<double>::infinity();

  for (int j = 1; j <= grid.n2; ++j) {
    for (int i = 1; i <= grid.n1; ++i) {
      const int id = grid.node(i, j);
      const double climit =
          grid.h / std::sqrt(mat.cp[id] * mat.cp[id] + mat.cs[id] * mat.cs[id]);
      ops.dt_limit = std::min(ops.dt_limit, climit);

      const bool left = (i == 1), right = (i == grid.n1), bottom = (j == 1);
      const bool top = (j == grid.n2);
      if (!left && !right && !bottom) {
        // interior and free surface (ghosts above j = n2 are eliminated)
        ops.interior[id] = 1;
        ops.force_scale[id] = 1.0 / mat.nu[id];
        a.interior_row(i, j);
      } else if (bottom && (left || right)) {
        const int side = left ? 0 : 1;
        const auto dx1 = left ? Assembler::Diff::Forward : Assembler::Diff::Backward;
        a.absorbing_row(i, j, side, dx1, Assembler::Diff::Forward, 0.5);
        a.absorbing_row(i, j, 2, dx1, Assembler::Diff::Forward, 0.5);
      } else if (bottom) {
        a.absorbing_row(i, j, 2, Assembler::Diff::Centered, Assembler::Diff::Forward, 1.0);
      } else {
        // lateral edges, including the two top corners
        const int side = left ? 0 : 1;
        const auto dx1 = left ? Assembler::Diff::Forward : Assembler::Diff::Backward;
        const auto dx2 = top ? Assembler::Diff::Backward : Assembler::Diff::Centered;
        a.absorbing_row(i, j, side, dx1, dx2, 1.0);
      }
    }
  }

  auto build = [&](std::vector<Eigen::Triplet<double>>& t) {
    Eigen::SparseMatrix<double, Eigen::RowMajor> s(n, n);
    s.setFromTriplets(t.begin(), t.end());
    s.makeCompressed();
    return s;
  };
  ops.s11 = build(a.t11);
  ops.s12 = build(a.t12);
  ops.s21 = build(a.t21);
  ops.s22 = build(a.t22);
  ops.d11 = ops.s11.transpose();
  ops.d12 = ops.s21.transpose();
  ops.d21 = ops.s12.transpose();
  ops.d22 = ops.s22.transpose();
  return ops;
}

}  // namespace seisbed
