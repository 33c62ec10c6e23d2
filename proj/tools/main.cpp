// seisbed: batch front-end for seismic receiver-array design studies.
//
// Subcommands: simulate, hessian, eig, sweep, diagnose, per-param.
// Exit codes: 0 success, 2 configuration error, 3 numerical failure.

#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "seisbed/config.hpp"
#include "seisbed/design.hpp"
#include "seisbed/errors.hpp"

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  long long seed = -1;
  int workers = 0;
  std::string estimator;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config_path, "run configuration file")->required();
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--seed", o.seed, "override config seed");
  cmd->add_option("--workers", o.workers, "override worker count");
  cmd->add_option("--estimator", o.estimator, "laplace | laplace2 | nested")
      ->check(CLI::IsMember({"laplace", "laplace2", "nested"}));
}

seisbed::RunConfig load(const CommonOpts& o) {
  seisbed::RunConfig cfg = seisbed::parse_config_file(o.config_path);
  if (o.seed >= 0) cfg.seed = static_cast<std::uint64_t>(o.seed);
  if (o.workers > 0) cfg.workers = o.workers;
  if (!o.estimator.empty()) cfg.estimator = o.estimator;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seisbed: expected information gain for seismic receiver-array designs"};
  app.require_subcommand(1);

  CommonOpts o;
  auto* sim = app.add_subcommand("simulate", "one forward solve, dump receiver waveforms");
  auto* hes = app.add_subcommand("hessian", "H_I, H_II and conditioning at theta_star");
  auto* eig = app.add_subcommand("eig", "expected information gain of one design");
  auto* swp = app.add_subcommand("sweep", "scenario I/II/III design sweep");
  auto* dia = app.add_subcommand("diagnose", "condition / convergence / comparison studies");
  auto* ppr = app.add_subcommand("per-param", "per-parameter gains over a sweep");
  for (auto* cmd : {sim, hes, eig, swp, dia, ppr}) add_common(cmd, o);

  CLI11_PARSE(app, argc, argv);

  try {
    const seisbed::RunConfig cfg = load(o);
    std::string path;
    if (sim->parsed()) path = seisbed::run_simulate(cfg, o.out_dir);
    if (hes->parsed()) path = seisbed::run_hessian(cfg, o.out_dir);
    if (eig->parsed()) path = seisbed::run_eig(cfg, o.out_dir);
    if (swp->parsed()) path = seisbed::run_scenario(cfg, o.out_dir);
    if (dia->parsed()) path = seisbed::run_diagnostics(cfg, o.out_dir);
    if (ppr->parsed()) path = seisbed::per_parameter_sweep(cfg, o.out_dir);
    std::printf("%s\n", path.c_str());
    return 0;
  } catch (const seisbed::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
