#include "seisbed/design.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "seisbed/errors.hpp"
#include "seisbed/hessian.hpp"
#include "seisbed/warnings.hpp"

namespace seisbed {

namespace {

constexpr std::uint64_t kDataNoiseBlock = 1ull << 45;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string version_string() { return "seisbed 0.1.0"; }

std::vector<double> DesignSpec::positions() const {
  std::vector<double> x(n_receivers);
  for (int r = 1; r <= n_receivers; ++r) {
    x[r - 1] = (r - 0.5 * (n_receivers + 1)) * spacing;
  }
  return x;
}

Receivers build_receivers(const Grid& grid, const std::vector<double>& x1_positions) {
  Receivers recv;
  for (double x : x1_positions) {
    int i = static_cast<int>(std::lround((x - grid.x1_min) / grid.h)) + 1;
    i = std::max(1, std::min(grid.n1, i));
    const double snapped = grid.x1(i);
    if (std::abs(snapped - x) > 1e-9 * std::max(1.0, std::abs(x))) {
      std::ostringstream os;
      os << "receiver at x1=" << x << " snapped to grid node x1=" << snapped
         << " (distance " << std::abs(snapped - x) << ")";
      warn(os.str());
    }
    recv.nodes.push_back(grid.node(i, grid.n2));
    recv.x1.push_back(snapped);
    recv.x2.push_back(grid.x2(grid.n2));
  }
  return recv;
}

Receivers build_receivers(const Grid& grid, const DesignSpec& design) {
  return build_receivers(grid, design.positions());
}

SeismicSetup make_setup(const RunConfig& cfg) {
  SeismicSetup s;
  s.grid = build_grid(cfg.x1_min, cfg.x1_max, cfg.x2_min, cfg.x2_max, cfg.h);
  s.material = layered_material(cfg.layers, s.grid);
  s.ops = assemble_operators(s.grid, s.material);
  s.time = make_time_grid(cfg.dt, cfg.t_end);
  s.noise = NoiseModel::from_cov(cfg.noise_cov);
  s.free_idx = cfg.free_params();
  Eigen::VectorXd lo(s.free_idx.size()), hi(s.free_idx.size());
  for (std::size_t k = 0; k < s.free_idx.size(); ++k) {
    lo[static_cast<int>(k)] = cfg.prior[s.free_idx[k]]->first;
    hi[static_cast<int>(k)] = cfg.prior[s.free_idx[k]]->second;
  }
  s.prior_free = make_uniform_prior(lo, hi);
  s.theta_base.resize(7);
  for (int i = 0; i < 7; ++i) {
    s.theta_base[i] = cfg.fixed[i] ? *cfg.fixed[i]
                                   : 0.5 * (cfg.prior[i]->first + cfg.prior[i]->second);
  }
  s.theta_star = cfg.theta_star;
  s.cfl_safety = cfg.cfl_safety;
  s.workers = cfg.workers;
  return s;
}

SourceParams theta_full(const SeismicSetup& s, const Eigen::VectorXd& theta_free) {
  Eigen::VectorXd v = s.theta_base;
  for (std::size_t k = 0; k < s.free_idx.size(); ++k) {
    v[s.free_idx[k]] = theta_free[static_cast<int>(k)];
  }
  return SourceParams::from_vector(v);
}

Eigen::MatrixXd h1_at(const SeismicSetup& s, const Receivers& recv,
                      const Eigen::VectorXd& theta_free) {
  const SourceTerm src = build_source_term(theta_full(s, theta_free), s.grid);
  SolveOptions opts;
  opts.cfl_safety = s.cfl_safety;
  const auto sens = solve_sensitivities(s.ops, src, s.time, recv, s.free_idx, opts);
  return misfit_hessian_H1(sens, s.noise);
}

namespace {

std::atomic<bool> g_posterior_width_warned{false};

void warn_posterior_width(const Eigen::MatrixXd& h1, const UniformPrior& prior) {
  if (g_posterior_width_warned.load(std::memory_order_relaxed)) return;
  try {
    const ScaledHessian sc = scale_hessian(h1);
    Eigen::LLT<Eigen::MatrixXd> llt(sc.h_scaled);
    if (llt.info() != Eigen::Success) return;
    const Eigen::MatrixXd inv =
        llt.solve(Eigen::MatrixXd::Identity(h1.rows(), h1.cols()));
    for (int i = 0; i < h1.rows(); ++i) {
      const double sd = std::sqrt(inv(i, i)) / sc.scale[i];
      if (sd > prior.width(i) / 6.0) {
        if (!g_posterior_width_warned.exchange(true)) {
          std::ostringstream os;
          os << "laplace: posterior std of parameter " << i << " (" << sd
             << ") exceeds 1/6 of the prior width; the Gaussian approximation "
                "ignores prior truncation";
          warn(os.str());
        }
        return;
      }
    }
  } catch (const numeric_error&) {
  }
}

}  // namespace

double dkl_laplace_at(const SeismicSetup& s, const Receivers& recv,
                      const Eigen::VectorXd& theta_free) {
  const Eigen::MatrixXd h1 = h1_at(s, recv, theta_free);
  warn_posterior_width(h1, s.prior_free);
  return dkl_hat(h1, s.prior_free.log_density());
}

double dkl_second_order_at(const SeismicSetup& s, const Receivers& recv,
                           const Eigen::VectorXd& theta_free,
                           std::uint64_t noise_counter, std::uint64_t seed) {
  const SourceParams theta = theta_full(s, theta_free);
  const SourceTerm src = build_source_term(theta, s.grid);
  SolveOptions opts;
  opts.cfl_safety = s.cfl_safety;

  const auto sens = solve_sensitivities(s.ops, src, s.time, recv, s.free_idx, opts);
  const Eigen::MatrixXd h1 = misfit_hessian_H1(sens, s.noise);

  // synthetic data at theta (theta-hat approximated by theta): residual = noise
  const ReceiverSeries clean =
      run_forward(s.ops, build_source_forcing(src, s.time), s.time, recv, opts).series;
  CounterRng rng(seed, kDataNoiseBlock + noise_counter);
  const ReceiverSeries data = add_noise(clean, s.noise, rng);
  const ReceiverSeries resid = residual_series(data, clean);
  const DualSource dual_src = dual_source_from_residual(resid, s.noise);
  const WavefieldHistory dual = run_dual(s.ops, dual_src, s.time, opts);
  const Eigen::MatrixXd h2_full = misfit_hessian_H2(s.ops, dual, src, s.time);

  const int nf = static_cast<int>(s.free_idx.size());
  Eigen::MatrixXd h2(nf, nf);
  for (int a = 0; a < nf; ++a) {
    for (int b = 0; b < nf; ++b) h2(a, b) = h2_full(s.free_idx[a], s.free_idx[b]);
  }
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(nf, nf);
  return dkl_second_order(h1 + h2, s.prior_free.log_density(), zero);
}

Eigen::VectorXd per_parameter_gain_at(const SeismicSetup& s, const Receivers& recv,
                                      const Eigen::VectorXd& theta_free) {
  return per_parameter_gain(h1_at(s, recv, theta_free), s.prior_free);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto body = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

NestedMcModel make_nested_model(const SeismicSetup& s, const Receivers& recv) {
  NestedMcModel model;
  const UniformPrior prior = s.prior_free;
  model.sample_prior = [prior](std::uint64_t seed, std::uint64_t counter) {
    CounterRng rng(seed, counter);
    return prior.sample(rng);
  };
  // capture by value; the setup itself stays owned by the caller
  const SeismicSetup* sp = &s;
  Receivers rc = recv;
  model.simulate_whitened = [sp, rc](const Eigen::VectorXd& theta_free) {
    SolveOptions opts;
    opts.cfl_safety = sp->cfl_safety;
    const SourceTerm src = build_source_term(theta_full(*sp, theta_free), sp->grid);
    const ReceiverSeries u =
        run_forward(sp->ops, build_source_forcing(src, sp->time), sp->time, rc, opts)
            .series;
    const int nr = u.n_receivers(), nt = u.n_levels();
    Eigen::VectorXd out(2 * nr * nt);
    for (int r = 0; r < nr; ++r) {
      const Eigen::MatrixXd w = sp->noise.whiten * u.data.middleRows(2 * r, 2);
      for (int m = 0; m < nt; ++m) {
        out[2 * (r * nt + m)] = w(0, m);
        out[2 * (r * nt + m) + 1] = w(1, m);
      }
    }
    return out;
  };
  return model;
}

namespace {

// Deterministic outer integration of a pointwise integrand over the prior.
EigEstimate integrate_over_prior(const SeismicSetup& s, const RunConfig& cfg,
                                 const std::function<double(const Eigen::VectorXd&,
                                                            std::uint64_t)>& f) {
  EigEstimate e;
  if (cfg.integrator == "quad") {
    const QuadratureRule rule =
        smolyak_total_degree(s.prior_free.dim(), cfg.quad_level);
    std::vector<double> vals(rule.size());
    parallel_for(rule.size(), s.workers, [&](int p) {
      Eigen::VectorXd x(rule.dim);
      for (int d = 0; d < rule.dim; ++d) {
        x[d] = s.prior_free.lo[d] +
               (s.prior_free.hi[d] - s.prior_free.lo[d]) * 0.5 * (rule.points(p, d) + 1.0);
      }
      vals[p] = f(x, static_cast<std::uint64_t>(p));
    });
    std::vector<double> terms(rule.size());
    for (int p = 0; p < rule.size(); ++p) {
      if (!std::isfinite(vals[p])) {
        throw numeric_error("quadrature: non-finite integrand value");
      }
      terms[p] = rule.weights[p] * vals[p];
    }
    e.value = pairwise_sum(terms) / std::pow(2.0, rule.dim);
    e.stderr_ = 0.0;
    e.n_points = rule.size();
  } else {
    const int m = cfg.mc_samples;
    std::vector<double> vals(m);
    parallel_for(m, s.workers, [&](int i) {
      CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i));
      vals[i] = f(s.prior_free.sample(rng), static_cast<std::uint64_t>(i));
    });
    for (double v : vals) {
      if (!std::isfinite(v)) throw numeric_error("mc: non-finite integrand value");
    }
    const MeanStderr ms = mean_stderr(vals);
    e.value = ms.mean;
    e.stderr_ = ms.stderr_;
    e.n_points = m;
  }
  return e;
}

}  // namespace

EigEstimate eig_for_design(const SeismicSetup& s, const RunConfig& cfg,
                           const Receivers& recv) {
  if (cfg.estimator == "nested") {
    EigEstimate e = nested_mc_eig(make_nested_model(s, recv), cfg.nested_outer,
                                  cfg.nested_inner, cfg.seed, cfg.nested_reuse);
    return e;
  }
  if (cfg.estimator == "laplace2") {
    EigEstimate e = integrate_over_prior(
        s, cfg, [&](const Eigen::VectorXd& x, std::uint64_t ctr) {
          return dkl_second_order_at(s, recv, x, ctr, cfg.seed);
        });
    e.estimator = "laplace-T3";
    return e;
  }
  EigEstimate e = integrate_over_prior(
      s, cfg,
      [&](const Eigen::VectorXd& x, std::uint64_t) { return dkl_laplace_at(s, recv, x); });
  e.estimator = "laplace-T4";
  return e;
}

Eigen::VectorXd expected_per_parameter_gain(const SeismicSetup& s, const RunConfig& cfg,
                                            const Receivers& recv) {
  const int nf = s.prior_free.dim();
  const int m = cfg.mc_samples;
  Eigen::MatrixXd q(nf, m);
  parallel_for(m, s.workers, [&](int i) {
    CounterRng rng(cfg.seed, static_cast<std::uint64_t>(i));
    q.col(i) = per_parameter_gain_at(s, recv, s.prior_free.sample(rng));
  });
  Eigen::VectorXd mean(nf);
  for (int k = 0; k < nf; ++k) {
    std::vector<double> row(m);
    for (int i = 0; i < m; ++i) row[i] = q(k, i);
    mean[k] = mean_stderr(row).mean;
  }
  return mean;
}

// ---------------------------------------------------------------- CSV layer

namespace {

std::vector<std::string> provenance_lines(const RunConfig& cfg) {
  std::vector<std::string> lines;
  lines.push_back("# " + version_string());
  char buf[80];
  std::snprintf(buf, sizeof(buf), "# config_hash=%016llx seed=%llu",
                static_cast<unsigned long long>(cfg.config_hash),
                static_cast<unsigned long long>(cfg.seed));
  lines.push_back(buf);
  for (const std::string& d : cfg.defaults_applied) lines.push_back("# default: " + d);
  return lines;
}

void write_csv_file(const std::string& path, const std::vector<std::string>& head,
                    const std::string& columns, const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write output file: " + path);
  for (const auto& l : head) out << l << "\n";
  out << columns << "\n";
  for (const auto& r : rows) out << r << "\n";
}

// Existing rows keyed by their first fields; ignored when the stored config
// hash differs from the current one.
std::map<std::string, std::string> load_completed(const std::string& path,
                                                  std::uint64_t config_hash,
                                                  int key_fields) {
  std::map<std::string, std::string> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  bool hash_ok = false;
  while (std::getline(in, line)) {
    if (line.rfind("# config_hash=", 0) == 0) {
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%016llx",
                    static_cast<unsigned long long>(config_hash));
      hash_ok = line.find(buf) != std::string::npos;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    if (!std::isdigit(static_cast<unsigned char>(line[0])) && line[0] != '-') continue;
    std::string key;
    std::size_t pos = 0;
    for (int k = 0; k < key_fields; ++k) {
      const auto comma = line.find(',', pos);
      if (comma == std::string::npos) {
        key.clear();
        break;
      }
      key += line.substr(pos, comma - pos);
      key += ':';
      pos = comma + 1;
    }
    if (!key.empty()) rows[key] = line;
  }
  if (!hash_ok) rows.clear();
  return rows;
}

std::vector<DesignSpec> scenario_designs(const std::string& scenario) {
  std::vector<DesignSpec> pts;
  if (scenario == "I") {
    const int nr[6] = {3, 5, 9, 17, 41, 81};
    const double dr[6] = {8000, 4000, 2000, 1000, 400, 200};
    for (int k = 0; k < 6; ++k) pts.push_back({nr[k], dr[k]});
  } else if (scenario == "II") {
    for (int n = 1; n <= 19; n += 2) pts.push_back({n, 1000});
  } else if (scenario == "III") {
    for (int d = 200; d <= 4000; d += 200) pts.push_back({5, static_cast<double>(d)});
  } else {
    throw config_error("sweep: config must set scenario = I, II or III");
  }
  return pts;
}

std::string design_key(const DesignSpec& d) {
  return std::to_string(d.n_receivers) + ":" + fmt17(d.spacing) + ":";
}

}  // namespace

std::string run_scenario(const RunConfig& cfg, const std::string& out_dir) {
  const auto designs = scenario_designs(cfg.scenario);
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);
  const std::string path = out_dir + "/scenario_" + cfg.scenario + ".csv";
  auto completed = load_completed(path, cfg.config_hash, 2);

  std::vector<std::string> rows;
  for (const DesignSpec& d : designs) {
    const std::string key = design_key(d);
    if (auto it = completed.find(key); it != completed.end()) {
      rows.push_back(it->second);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Receivers recv = build_receivers(setup.grid, d);
      const EigEstimate e = eig_for_design(setup, cfg, recv);
      rows.push_back(std::to_string(d.n_receivers) + "," + fmt17(d.spacing) + "," +
                     fmt17(e.value) + "," + fmt17(e.stderr_) + "," + e.estimator + "," +
                     std::to_string(e.n_points));
    } catch (const numeric_error& err) {
      std::fprintf(stderr, "sweep: design point (%d, %g) failed: %s\n", d.n_receivers,
                   d.spacing, err.what());
      continue;
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::fprintf(stderr, "sweep %s: N_R=%d d_R=%g done in %.1fs\n",
                 cfg.scenario.c_str(), d.n_receivers, d.spacing, secs);
  }
  write_csv_file(path, provenance_lines(cfg),
                 "n_receivers,spacing,eig,stderr,estimator,n_points", rows);
  return path;
}

std::string run_diagnostics(const RunConfig& cfg, const std::string& out_dir) {
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);

  if (cfg.diagnostic == "condition") {
    const SourceTerm src =
        build_source_term(SourceParams::from_vector(cfg.theta_star), setup.grid);
    SolveOptions opts;
    opts.cfl_safety = setup.cfl_safety;
    Receivers recv = cfg.receivers_x1.empty()
                         ? build_receivers(setup.grid, DesignSpec{5, 1000})
                         : build_receivers(setup.grid, cfg.receivers_x1);
    const auto sens = solve_sensitivities(setup.ops, src, setup.time, recv,
                                          {0, 1, 2, 3, 4, 5, 6}, opts);
    const Eigen::MatrixXd h1 = misfit_hessian_H1(sens, setup.noise);
    const ScaledHessian sc = scale_hessian(h1);
    std::vector<std::string> rows;
    rows.push_back("cond_unscaled," + fmt17(sc.cond_unscaled));
    rows.push_back("cond_scaled," + fmt17(sc.cond_scaled));
    for (int i = 0; i < 7; ++i) {
      rows.push_back(std::string("scale_") + SourceParams::names()[i] + "," +
                     fmt17(sc.scale[i]));
    }
    const std::string path = out_dir + "/condition.csv";
    write_csv_file(path, provenance_lines(cfg), "quantity,value", rows);
    return path;
  }

  if (cfg.diagnostic == "convergence") {
    Receivers recv = cfg.receivers_x1.empty()
                         ? build_receivers(setup.grid, DesignSpec{5, 1000})
                         : build_receivers(setup.grid, cfg.receivers_x1);
    auto integrand = [&](const Eigen::VectorXd& x) {
      return dkl_laplace_at(setup, recv, x);
    };
    std::vector<std::string> rows;

    // sparse-quadrature ladder and successive relative errors
    std::vector<double> qvals, qsizes;
    for (int level : cfg.conv_quad_levels) {
      const QuadratureRule rule = smolyak_total_degree(setup.prior_free.dim(), level);
      std::vector<double> vals(rule.size());
      parallel_for(rule.size(), setup.workers, [&](int p) {
        Eigen::VectorXd x(rule.dim);
        for (int d = 0; d < rule.dim; ++d) {
          x[d] = setup.prior_free.lo[d] + (setup.prior_free.hi[d] - setup.prior_free.lo[d]) *
                                              0.5 * (rule.points(p, d) + 1.0);
        }
        vals[p] = integrand(x);
      });
      std::vector<double> terms(rule.size());
      for (int p = 0; p < rule.size(); ++p) terms[p] = rule.weights[p] * vals[p];
      qvals.push_back(pairwise_sum(terms) / std::pow(2.0, rule.dim));
      qsizes.push_back(rule.size());
    }
    std::vector<double> qerr;
    for (std::size_t i = 0; i + 1 < qvals.size(); ++i) {
      qerr.push_back(std::abs(qvals[i + 1] - qvals[i]) / std::abs(qvals[i + 1]));
    }
    for (std::size_t i = 0; i < qvals.size(); ++i) {
      rows.push_back("quad," + fmt17(qsizes[i]) + "," + fmt17(qvals[i]) + "," +
                     (i < qerr.size() ? fmt17(qerr[i]) : std::string("nan")));
    }
    const double reference = qvals.back();

    // Monte Carlo replicates; disjoint counter block per replicate
    std::vector<double> msizes, merr;
    for (int size : cfg.conv_mc_sizes) {
      std::vector<double> rel(cfg.conv_mc_replicates);
      for (int rep = 0; rep < cfg.conv_mc_replicates; ++rep) {
        std::vector<double> vals(size);
        parallel_for(size, setup.workers, [&](int i) {
          CounterRng rng(cfg.seed, (static_cast<std::uint64_t>(rep + 1) << 32) +
                                        static_cast<std::uint64_t>(i));
          vals[i] = integrand(setup.prior_free.sample(rng));
        });
        const double est = mean_stderr(vals).mean;
        rel[rep] = std::abs(est - reference) / std::abs(reference);
        rows.push_back("mc," + fmt17(size) + "," + fmt17(est) + "," + fmt17(rel[rep]));
      }
      msizes.push_back(size);
      merr.push_back(mean_stderr(rel).mean);
    }

    std::vector<std::string> head = provenance_lines(cfg);
    if (qerr.size() >= 3) {
      head.push_back("# quad_rate=" +
                     fmt17(convergence_rate(qerr, std::vector<double>(qsizes.begin(),
                                                                      qsizes.end() - 1))));
    }
    if (msizes.size() >= 3) {
      head.push_back("# mc_rate=" + fmt17(convergence_rate(merr, msizes)));
    }
    const std::string path = out_dir + "/convergence.csv";
    write_csv_file(path, head, "method,size,estimate,rel_error", rows);
    return path;
  }

  if (cfg.diagnostic == "comparison") {
    Receivers recv = cfg.receivers_x1.empty()
                         ? build_receivers(setup.grid, std::vector<double>{-9000, 1000})
                         : build_receivers(setup.grid, cfg.receivers_x1);
    RunConfig lap = cfg;
    lap.estimator = "laplace";
    lap.integrator = "quad";
    const EigEstimate el = eig_for_design(setup, lap, recv);
    RunConfig nst = cfg;
    nst.estimator = "nested";
    const EigEstimate en = eig_for_design(setup, nst, recv);
    const double gap = std::abs(el.value - en.value) / std::abs(en.value);
    std::vector<std::string> head = provenance_lines(cfg);
    head.push_back("# rel_gap=" + fmt17(gap));
    std::vector<std::string> rows;
    rows.push_back("laplace-quad," + fmt17(el.value) + "," + fmt17(el.stderr_) + "," +
                   std::to_string(el.n_points));
    rows.push_back("nested-mc," + fmt17(en.value) + "," + fmt17(en.stderr_) + "," +
                   std::to_string(en.n_points));
    const std::string path = out_dir + "/comparison.csv";
    write_csv_file(path, head, "method,value,stderr,n_points", rows);
    return path;
  }

  throw config_error("diagnose: config must set diagnostic = condition, convergence or comparison");
}

std::string per_parameter_sweep(const RunConfig& cfg, const std::string& out_dir) {
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);
  const auto designs = scenario_designs(cfg.scenario.empty() ? "III" : cfg.scenario);
  const std::string path = out_dir + "/per_param.csv";
  auto completed = load_completed(path, cfg.config_hash, 2);

  std::vector<std::string> rows;
  for (const DesignSpec& d : designs) {
    const std::string key = design_key(d);
    if (auto it = completed.find(key); it != completed.end()) {
      rows.push_back(it->second);
      continue;
    }
    try {
      const Receivers recv = build_receivers(setup.grid, d);
      const Eigen::VectorXd q = expected_per_parameter_gain(setup, cfg, recv);
      std::string row = std::to_string(d.n_receivers) + "," + fmt17(d.spacing);
      int kf = 0;
      for (int i = 0; i < 7; ++i) {
        const bool is_free =
            std::find(setup.free_idx.begin(), setup.free_idx.end(), i) !=
            setup.free_idx.end();
        row += ",";
        row += is_free ? fmt17(q[kf++]) : "nan";
      }
      rows.push_back(row);
    } catch (const numeric_error& err) {
      std::fprintf(stderr, "per-param: design point (%d, %g) failed: %s\n",
                   d.n_receivers, d.spacing, err.what());
    }
  }
  write_csv_file(path, provenance_lines(cfg),
                 "n_receivers,spacing,q_x1s,q_x2s,q_ts,q_ws,q_m11,q_m12,q_m22", rows);
  return path;
}

std::string run_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);
  if (cfg.receivers_x1.empty() && cfg.n_receivers == 0) {
    throw config_error("simulate: config needs receivers_x1 or n_receivers/receiver_spacing");
  }
  const Receivers recv =
      cfg.receivers_x1.empty()
          ? build_receivers(setup.grid, DesignSpec{cfg.n_receivers, cfg.receiver_spacing})
          : build_receivers(setup.grid, cfg.receivers_x1);
  const SourceTerm src =
      build_source_term(SourceParams::from_vector(cfg.theta_star), setup.grid);
  SolveOptions opts;
  opts.cfl_safety = setup.cfl_safety;
  const ReceiverSeries u = run_forward_source(setup.ops, src, setup.time, recv, opts).series;

  std::string columns = "t";
  for (int r = 0; r < u.n_receivers(); ++r) {
    columns += ",r" + std::to_string(r) + "_u1,r" + std::to_string(r) + "_u2";
  }
  std::vector<std::string> rows;
  for (int m = 0; m < u.n_levels(); ++m) {
    std::string row = fmt17(setup.time.t(m));
    for (int r = 0; r < u.n_receivers(); ++r) {
      row += "," + fmt17(u.data(2 * r, m)) + "," + fmt17(u.data(2 * r + 1, m));
    }
    rows.push_back(row);
  }
  const std::string path = out_dir + "/receivers.csv";
  write_csv_file(path, provenance_lines(cfg), columns, rows);
  if (cfg.dump_binary) write_receivers_binary(out_dir + "/receivers.bin", u);
  return path;
}

std::string run_hessian(const RunConfig& cfg, const std::string& out_dir) {
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);
  Receivers recv = cfg.receivers_x1.empty()
                       ? build_receivers(setup.grid, DesignSpec{5, 1000})
                       : build_receivers(setup.grid, cfg.receivers_x1);
  const SourceTerm src =
      build_source_term(SourceParams::from_vector(cfg.theta_star), setup.grid);
  SolveOptions opts;
  opts.cfl_safety = setup.cfl_safety;
  const auto sens =
      solve_sensitivities(setup.ops, src, setup.time, recv, {0, 1, 2, 3, 4, 5, 6}, opts);
  const Eigen::MatrixXd h1 = misfit_hessian_H1(sens, setup.noise);
  const ScaledHessian sc = scale_hessian(h1);

  const ReceiverSeries clean =
      run_forward(setup.ops, build_source_forcing(src, setup.time), setup.time, recv, opts)
          .series;
  CounterRng rng(cfg.seed, kDataNoiseBlock);
  const ReceiverSeries data = add_noise(clean, setup.noise, rng);
  const DualSource ds = dual_source_from_residual(residual_series(data, clean), setup.noise);
  const WavefieldHistory dual = run_dual(setup.ops, ds, setup.time, opts);
  const Eigen::MatrixXd h2 = misfit_hessian_H2(setup.ops, dual, src, setup.time);

  auto matrix_rows = [&](const Eigen::MatrixXd& m) {
    std::vector<std::string> rows;
    for (int r = 0; r < m.rows(); ++r) {
      std::string row = fmt17(m(r, 0));
      for (int c = 1; c < m.cols(); ++c) row += "," + fmt17(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  std::string cols = "x1s,x2s,ts,ws,m11,m12,m22";
  write_csv_file(out_dir + "/hessian_h1.csv", provenance_lines(cfg), cols, matrix_rows(h1));
  write_csv_file(out_dir + "/hessian_h2.csv", provenance_lines(cfg), cols, matrix_rows(h2));
  std::vector<std::string> scale_rows;
  scale_rows.push_back("cond_unscaled," + fmt17(sc.cond_unscaled));
  scale_rows.push_back("cond_scaled," + fmt17(sc.cond_scaled));
  for (int i = 0; i < 7; ++i) {
    scale_rows.push_back(std::string("scale_") + SourceParams::names()[i] + "," +
                         fmt17(sc.scale[i]));
  }
  write_csv_file(out_dir + "/hessian_scale.csv", provenance_lines(cfg), "quantity,value",
                 scale_rows);
  return out_dir + "/hessian_h1.csv";
}

std::string run_eig(const RunConfig& cfg, const std::string& out_dir) {
  const SeismicSetup setup = make_setup(cfg);
  std::filesystem::create_directories(out_dir);
  if (cfg.receivers_x1.empty() && cfg.n_receivers == 0) {
    throw config_error("eig: config needs receivers_x1 or n_receivers/receiver_spacing");
  }
  const Receivers recv =
      cfg.receivers_x1.empty()
          ? build_receivers(setup.grid, DesignSpec{cfg.n_receivers, cfg.receiver_spacing})
          : build_receivers(setup.grid, cfg.receivers_x1);
  const EigEstimate e = eig_for_design(setup, cfg, recv);
  std::vector<std::string> rows;
  rows.push_back(e.estimator + "," + fmt17(e.value) + "," + fmt17(e.stderr_) + "," +
                 std::to_string(e.n_points));
  const std::string path = out_dir + "/eig.csv";
  write_csv_file(path, provenance_lines(cfg), "estimator,value,stderr,n_points", rows);
  return path;
}

void write_receivers_binary(const std::string& path, const ReceiverSeries& series) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot write binary dump: " + path);
  const std::int64_t nr = series.n_receivers();
  const std::int64_t nt = series.n_levels();
  const double dt = series.dt;
  out.write(reinterpret_cast<const char*>(&nr), 8);
  out.write(reinterpret_cast<const char*>(&nt), 8);
  out.write(reinterpret_cast<const char*>(&dt), 8);
  for (int r = 0; r < 2 * nr; ++r) {
    for (int m = 0; m < nt; ++m) {
      const double v = series.data(r, m);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
  }
}

ReceiverSeries read_receivers_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot read binary dump: " + path);
  std::int64_t nr = 0, nt = 0;
  double dt = 0;
  in.read(reinterpret_cast<char*>(&nr), 8);
  in.read(reinterpret_cast<char*>(&nt), 8);
  in.read(reinterpret_cast<char*>(&dt), 8);
  ReceiverSeries s;
  s.dt = dt;
  s.t_end = dt * static_cast<double>(nt - 1);
  s.nodes.assign(static_cast<std::size_t>(nr), -1);
  s.data.resize(2 * nr, nt);
  for (int r = 0; r < 2 * nr; ++r) {
    for (int m = 0; m < nt; ++m) {
      double v = 0;
      in.read(reinterpret_cast<char*>(&v), 8);
      s.data(r, m) = v;
    }
  }
  if (!in) throw config_error("binary dump truncated: " + path);
  return s;
}

}  // namespace seisbed
