#pragma once

#include <Eigen/Dense>
#include <vector>

namespace seisbed {

/// Uniform 2D node-centered grid, single spacing h in both directions.
/// Node (i,j) is 1-based with i along x1 and j along x2; j = n2 is the top row
/// (the ground surface when x2_max = 0).
struct Grid {
  double x1_min = 0, x1_max = 0, x2_min = 0, x2_max = 0;
  double h = 0;
  int n1 = 0, n2 = 0;

  int n_nodes() const { return n1 * n2; }
  double x1(int i) const { return x1_min + (i - 1) * h; }
  double x2(int j) const { return x2_min + (j - 1) * h; }
  /// Zero-based linear index of node (i,j).
  int node(int i, int j) const { return (j - 1) * n1 + (i - 1); }
};

/// Per-node density, Lame parameters and derived wave speeds.
struct MaterialField {
  Eigen::VectorXd nu;   // density  [kg/m^3]
  Eigen::VectorXd lam;  // Lame lambda [Pa]
  Eigen::VectorXd mu;   // Lame mu     [Pa]
  Eigen::VectorXd cp;   // P speed  [m/s]
  Eigen::VectorXd cs;   // S speed  [m/s]

  double max_cp() const { return cp.maxCoeff(); }
};

/// One horizontal layer [x2_bottom, x2_top] with constant properties.
struct Layer {
  double x2_top;
  double x2_bottom;
  double nu;
  double cp;
  double cs;
};
using LayerSpec = std::vector<Layer>;

struct LameParams {
  double lam;
  double mu;
};

/// Build a grid covering [x1_min,x1_max] x [x2_min,x2_max] with spacing h.
/// Both spans must be integer multiples of h (tolerance 1e-9*h); throws
/// config_error naming the offending axis otherwise.
Grid build_grid(double x1_min, double x1_max, double x2_min, double x2_max,
                double h);

/// Invert the phase-velocity relations: mu = nu*cs^2, lam = nu*(cp^2 - 2 cs^2).
/// Throws std::domain_error for non-positive nu or cp, or negative cs; warns
/// (but proceeds) when lam <= 0 while lam + 2 mu > 0.
LameParams lame_from_velocities(double nu, double cp, double cs);

/// Assign each node the properties of the layer containing its x2; a node
/// exactly on an interface takes the upper layer. Layers must be ordered top to
/// bottom and cover the grid depth; gaps throw config_error.
MaterialField layered_material(const LayerSpec& layers, const Grid& grid);

}  // namespace seisbed
