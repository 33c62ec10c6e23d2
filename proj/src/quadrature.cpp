#include "seisbed/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "seisbed/errors.hpp"
#include "seisbed/rng.hpp"

namespace seisbed {

std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_legendre_1d(int n) {
  if (n < 1) throw std::domain_error("gauss_legendre_1d: n must be >= 1");
  Eigen::VectorXd x(n), w(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n.
    double t = std::cos(M_PI * (4.0 * i + 3.0) / (4.0 * n + 2.0));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      if (n == 1) p1 = t;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = (n == 1) ? t : p1;
      pp = n * (t * pn - p0) / (t * t - 1.0);
      const double dt = pn / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[n - 1 - i] = t;
    x[i] = -t;
    const double wi = 2.0 / ((1.0 - t * t) * pp * pp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
  if (n % 2 == 1) x[n / 2] = 0.0;
  return {x, w};
}

QuadratureRule tensor_rule(int dim, int n) {
  const auto [x, w] = gauss_legendre_1d(n);
  const long total = static_cast<long>(std::pow(n, dim));
  QuadratureRule r;
  r.dim = dim;
  r.tag = "tensor";
  r.level = n;
  r.points.resize(total, dim);
  r.weights.resize(total);
  for (long p = 0; p < total; ++p) {
    long rem = p;
    double wt = 1.0;
    for (int d = 0; d < dim; ++d) {
      const int k = static_cast<int>(rem % n);
      rem /= n;
      r.points(p, d) = x[k];
      wt *= w[k];
    }
    r.weights[p] = wt;
  }
  return r;
}

namespace {

long binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void enumerate_indices(int dim, int min_sum, int max_sum, std::vector<int>& idx,
                       int pos, int sum,
                       const std::function<void(const std::vector<int>&)>& emit) {
  if (pos == dim) {
    if (sum >= min_sum) emit(idx);
    return;
  }
  for (int i = 1; sum + i + (dim - pos - 1) <= max_sum; ++i) {
    idx[pos] = i;
    enumerate_indices(dim, min_sum, max_sum, idx, pos + 1, sum + i, emit);
  }
}

struct PointLess {
  bool operator()(const std::vector<double>& a, const std::vector<double>& b) const {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < b[i] - 1e-12) return true;
      if (a[i] > b[i] + 1e-12) return false;
    }
    return false;
  }
};

}  // namespace

QuadratureRule smolyak_total_degree(int dim, int level) {
  if (dim < 1) throw std::domain_error("smolyak: dim must be >= 1");
  if (level < 0) throw std::domain_error("smolyak: level must be >= 0");
  const int q = level + dim;

  // cache 1D rules, m(i) = i points at level i
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> rules(q + 1);
  for (int i = 1; i <= q; ++i) rules[i] = gauss_legendre_1d(i);

  std::map<std::vector<double>, double, PointLess> merged;
  std::vector<int> idx(dim);
  enumerate_indices(
      dim, std::max(dim, q - dim + 1), q, idx, 0, 0, [&](const std::vector<int>& mi) {
        int sum = 0;
        for (int v : mi) sum += v;
        const double coeff =
            ((q - sum) % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(binom(dim - 1, q - sum));
        if (coeff == 0.0) return;
        // tensor product of the 1D rules mi
        long total = 1;
        for (int v : mi) total *= v;
        for (long p = 0; p < total; ++p) {
          long rem = p;
          std::vector<double> pt(dim);
          double wt = coeff;
          for (int d = 0; d < dim; ++d) {
            const int k = static_cast<int>(rem % mi[d]);
            rem /= mi[d];
            pt[d] = rules[mi[d]].first[k];
            wt *= rules[mi[d]].second[k];
          }
          merged[pt] += wt;
        }
      });

  QuadratureRule r;
  r.dim = dim;
  r.tag = "smolyak-total-degree";
  r.level = level;
  r.points.resize(static_cast<long>(merged.size()), dim);
  r.weights.resize(static_cast<long>(merged.size()));
  long row = 0;
  for (const auto& [pt, wt] : merged) {
    for (int d = 0; d < dim; ++d) r.points(row, d) = pt[d];
    r.weights[row] = wt;
    ++row;
  }
  return r;
}

double expectation_quadrature(const std::function<double(const Eigen::VectorXd&)>& f,
                              const QuadratureRule& rule, const Eigen::VectorXd& lo,
                              const Eigen::VectorXd& hi) {
  if (lo.size() != rule.dim || hi.size() != rule.dim) {
    throw std::invalid_argument("expectation_quadrature: box/rule dim mismatch");
  }
  const double norm = std::pow(2.0, rule.dim);
  std::vector<double> terms(rule.size());
  Eigen::VectorXd x(rule.dim);
  for (int p = 0; p < rule.size(); ++p) {
    for (int d = 0; d < rule.dim; ++d) {
      x[d] = lo[d] + (hi[d] - lo[d]) * 0.5 * (rule.points(p, d) + 1.0);
    }
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "expectation_quadrature: non-finite integrand at point " << x.transpose();
      throw numeric_error(os.str());
    }
    terms[p] = rule.weights[p] * v;
  }
  return pairwise_sum(terms) / norm;
}

MeanStderr expectation_mc(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                          int n_samples, std::uint64_t seed) {
  if (n_samples < 2) throw std::invalid_argument("expectation_mc: need >= 2 samples");
  const int dim = static_cast<int>(lo.size());
  std::vector<double> vals(n_samples);
  Eigen::VectorXd x(dim);
  for (int s = 0; s < n_samples; ++s) {
    CounterRng rng(seed, static_cast<std::uint64_t>(s));
    for (int d = 0; d < dim; ++d) x[d] = rng.uniform(lo[d], hi[d]);
    const double v = f(x);
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "expectation_mc: non-finite integrand at sample " << s;
      throw numeric_error(os.str());
    }
    vals[s] = v;
  }
  return mean_stderr(vals);
}

double convergence_rate(const std::vector<double>& errors,
                        const std::vector<double>& sizes) {
  if (errors.size() != sizes.size() || errors.size() < 3) {
    throw std::domain_error("convergence_rate: need >= 3 (size, error) pairs");
  }
  std::vector<double> lx(sizes.size()), ly(errors.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (!(errors[i] > 0.0) || !(sizes[i] > 0.0)) {
      throw std::domain_error("convergence_rate: entries must be positive");
    }
    lx[i] = std::log(sizes[i]);
    ly[i] = std::log(errors[i]);
  }
  return -regression_slope(lx, ly);
}

}  // namespace seisbed
