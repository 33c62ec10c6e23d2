#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <vector>

#include "seisbed/grid.hpp"

namespace seisbed {

/// Semi-discrete operator blocks of the elastodynamic scheme in matrix form:
///   u1'' (interior) / u1' (absorbing) = s11 u1 + s12 u2 + C f1
///   u2''            /                 = s21 u1 + s22 u2 + C f2
/// Interior and free-surface rows hold the second-order discretization of
/// (1/nu) div sigma(u); rows on the absorbing edges hold the first-order
/// characteristic condition. d** are the transposed blocks used by the dual
/// (adjoint) solve. force_scale is the diagonal C: 1/nu at interior and
/// free-surface nodes, 0 at absorbing nodes.
struct DiscreteOperators {
  int n1 = 0, n2 = 0;
  double h = 0;
  Eigen::SparseMatrix<double, Eigen::RowMajor> s11, s12, s21, s22;
  Eigen::SparseMatrix<double, Eigen::RowMajor> d11, d12, d21, d22;
  Eigen::VectorXd force_scale;
  std::vector<char> interior;  // 1 where the second-order (I1) update applies
  double dt_limit = 0;         // von Neumann bound h / max sqrt(cp^2 + cs^2)

  int n_nodes() const { return n1 * n2; }
};

/// Assemble the operator blocks for a layered medium. The top row (j = n2) is
/// the stress-free surface; left, right, and bottom edges absorb outgoing
/// waves. The two top corners are treated as members of the lateral edges.
DiscreteOperators assemble_operators(const Grid& grid, const MaterialField& mat);

}  // namespace seisbed
