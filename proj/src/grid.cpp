#include "seisbed/grid.hpp"

#include <cmath>
#include <sstream>

#include "seisbed/errors.hpp"
#include "seisbed/warnings.hpp"

namespace seisbed {

namespace {

int nodes_along(double span, double h, const char* axis) {
  const double steps = span / h;
  const double rounded = std::round(steps);
  if (rounded < 2.0 || std::abs(steps - rounded) * h > 1e-9 * h) {
    std::ostringstream os;
    os << "grid: extent of axis " << axis << " (" << span
       << ") is not a multiple of h=" << h << " with at least 2 cells";
    throw config_error(os.str());
  }
  return static_cast<int>(rounded) + 1;
}

}  // namespace

Grid build_grid(double x1_min, double x1_max, double x2_min, double x2_max,
                double h) {
  if (!(h > 0.0)) throw config_error("grid: spacing h must be positive");
  if (!(x1_max > x1_min) || !(x2_max > x2_min)) {
    throw config_error("grid: extents must define a nonempty rectangle");
  }
  Grid g;
  g.x1_min = x1_min;
  g.x1_max = x1_max;
  g.x2_min = x2_min;
  g.x2_max = x2_max;
  g.h = h;
  g.n1 = nodes_along(x1_max - x1_min, h, "x1");
  g.n2 = nodes_along(x2_max - x2_min, h, "x2");
  return g;
}

LameParams lame_from_velocities(double nu, double cp, double cs) {
  if (!(nu > 0.0)) throw std::domain_error("material: density must be positive");
  if (!(cp > 0.0)) throw std::domain_error("material: c_p must be positive");
  if (cs < 0.0) throw std::domain_error("material: c_s must be non-negative");
  LameParams p;
  p.mu = nu * cs * cs;
  p.lam = nu * (cp * cp - 2.0 * cs * cs);
  if (p.lam <= 0.0) {
    // lam + 2 mu = nu*cp^2 > 0 still holds, so the material is usable.
    warn("material: c_p <= sqrt(2)*c_s gives lambda <= 0");
  }
  return p;
}

MaterialField layered_material(const LayerSpec& layers, const Grid& grid) {
  if (layers.empty()) throw config_error("material: no layers given");
  for (std::size_t k = 0; k + 1 < layers.size(); ++k) {
    if (layers[k].x2_bottom <= layers[k].x2_top &&
        std::abs(layers[k].x2_bottom - layers[k + 1].x2_top) > 1e-9) {
      std::ostringstream os;
      os << "material: gap or overlap between layer " << k + 1 << " (bottom "
         << layers[k].x2_bottom << ") and layer " << k + 2 << " (top "
         << layers[k + 1].x2_top << ")";
      throw config_error(os.str());
    }
  }
  if (layers.front().x2_top < grid.x2_max - 1e-9 ||
      layers.back().x2_bottom > grid.x2_min + 1e-9) {
    throw config_error("material: layers do not cover the grid depth");
  }

  const int n = grid.n_nodes();
  MaterialField f;
  f.nu.resize(n);
  f.lam.resize(n);
  f.mu.resize(n);
  f.cp.resize(n);
  f.cs.resize(n);
  for (int j = 1; j <= grid.n2; ++j) {
    const double x2 = grid.x2(j);
    // First layer (topmost) whose closed interval contains x2 wins, so an
    // interface node takes the upper layer's values.
    const Layer* lay = nullptr;
    for (const Layer& l : layers) {
      if (x2 <= l.x2_top + 1e-9 && x2 >= l.x2_bottom - 1e-9) {
        lay = &l;
        break;
      }
    }
    if (lay == nullptr) {
      std::ostringstream os;
      os << "material: no layer covers depth x2=" << x2;
      throw config_error(os.str());
    }
    const LameParams p = lame_from_velocities(lay->nu, lay->cp, lay->cs);
    for (int i = 1; i <= grid.n1; ++i) {
      const int id = grid.node(i, j);
      f.nu[id] = lay->nu;
      f.lam[id] = p.lam;
      f.mu[id] = p.mu;
      f.cp[id] = lay->cp;
      f.cs[id] = lay->cs;
    }
  }
  return f;
}

}  // namespace seisbed
