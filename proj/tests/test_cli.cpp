#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "seisbed/config.hpp"
#include "seisbed/design.hpp"
#include "seisbed/errors.hpp"
#include "seisbed/warnings.hpp"

using namespace seisbed;
namespace fs = std::filesystem;

namespace {

// quiet snap warnings etc. for the whole binary
struct QuietWarnings {
  QuietWarnings() { set_warn_handler([](const std::string&) {}); }
} quiet_warnings;

std::string small_config_text() {
  return R"(# compact two-parameter setting for CLI-level tests
x1_min = -10000
x1_max = 10000
x2_min = -3000
x2_max = 0
h = 250
dt = 0.05
t_end = 0.6
cfl_safety = 0.95
layer = 0,-3000,2600,4000,2000
noise_var = 1e-4
fixed_x1s = 0
prior_x2s = -2000,-1500
fixed_ts = 0.2
fixed_ws = 8
prior_m11 = 1e13,2e13
fixed_m12 = 0
fixed_m22 = 1e13
receivers_x1 = -1000,500
seed = 3
)";
}

std::string paper_config_text() {
  return R"(x1_min = -10000
x1_max = 10000
x2_min = -15000
x2_max = 0
h = 200
dt = 0.025
t_end = 8
layer = 0,-1000,2600,4000,2000
layer = -1000,-15000,2700,6000,3464
)";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "seisbed_test" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("paper configuration parses with N_t = 321 and default priors recorded") {
  const RunConfig cfg = parse_config(paper_config_text());
  CHECK(cfg.n_levels() == 321);
  CHECK(cfg.free_params().size() == 7);
  // defaults are recorded for the provenance header
  bool has_prior_default = false;
  for (const auto& d : cfg.defaults_applied) {
    if (d.rfind("prior_x1s", 0) == 0) has_prior_default = true;
  }
  CHECK(has_prior_default);
  CHECK(cfg.theta_star[1] == -2000);  // prior mean
}

TEST_CASE("CFL violation is rejected with the computed limit in the message") {
  std::string text = paper_config_text();
  text.replace(text.find("dt = 0.025"), 10, "dt = 0.050");
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("CFL") != std::string::npos);
    CHECK(msg.find("0.025") != std::string::npos);  // 0.9*h/sqrt(cp^2+cs^2) = 0.02598
  }
}

TEST_CASE("unknown keys are rejected with their line number") {
  const std::string text = "x1_min = 0\nfoo = 3\n";
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 2") != std::string::npos);
    CHECK(msg.find("foo") != std::string::npos);
  }
}

TEST_CASE("missing required keys and malformed priors are rejected") {
  CHECK_THROWS_WITH_AS(parse_config("x1_min = 0\n"), doctest::Contains("x1_max"),
                       config_error);
  std::string text = small_config_text();
  text += "fixed_m11 = 1e13\n";  // conflicts with prior_m11
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("m11"), config_error);
}

TEST_CASE("theta_star too close to a boundary is rejected") {
  std::string text = small_config_text();
  text += "theta_star = 0,-400,0.2,8,1e13,0,1e13\n";  // x2s within 3h of surface
  CHECK_THROWS_WITH_AS(parse_config(text), doctest::Contains("3h"), config_error);
}

TEST_CASE("design positions are symmetric and snapping warns with the distance") {
  DesignSpec d{5, 1000};
  const auto pos = d.positions();
  CHECK(pos == std::vector<double>{-2000, -1000, 0, 1000, 2000});
  DesignSpec even{4, 1000};
  const auto pe = even.positions();
  CHECK(pe == std::vector<double>{-1500, -500, 500, 1500});

  const Grid grid = build_grid(-10000, 10000, -3000, 0, 250);
  std::vector<std::string> warnings;
  auto old = set_warn_handler([&](const std::string& w) { warnings.push_back(w); });
  const Receivers recv = build_receivers(grid, std::vector<double>{300});
  set_warn_handler(old);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("snapped") != std::string::npos);
  CHECK(recv.x1[0] == 250);
}

TEST_CASE("eig subcommand output is bit-identical across reruns") {
  const RunConfig cfg = parse_config(small_config_text() + "mc_samples = 6\n");
  const fs::path d1 = fresh_dir("eig_a"), d2 = fresh_dir("eig_b");
  run_eig(cfg, d1.string());
  run_eig(cfg, d2.string());
  const std::string a = read_file((d1 / "eig.csv").string());
  const std::string b = read_file((d2 / "eig.csv").string());
  CHECK(a == b);
  CHECK(a.find("# seisbed") != std::string::npos);
  CHECK(a.find("config_hash=") != std::string::npos);
  CHECK(a.find("# default:") != std::string::npos);
}

TEST_CASE("sweep is deterministic and restartable by design-point key") {
  std::string text = small_config_text();
  text += "scenario = III\nmc_samples = 4\n";
  const RunConfig cfg = parse_config(text);

  const fs::path d1 = fresh_dir("sweep_a");
  const std::string path = run_scenario(cfg, d1.string());
  const std::string full = read_file(path);

  // truncate to the first 3 data rows and rerun; completed rows are reused
  std::istringstream in(full);
  std::ostringstream trunc;
  std::string line;
  int data_rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#' && std::isdigit(line[0])) {
      if (++data_rows > 3) continue;
    }
    trunc << line << "\n";
  }
  {
    std::ofstream out(path, std::ios::binary);
    out << trunc.str();
  }
  run_scenario(cfg, d1.string());
  CHECK(read_file(path) == full);

  // a second fresh run is byte-identical too
  const fs::path d2 = fresh_dir("sweep_b");
  const std::string path2 = run_scenario(cfg, d2.string());
  CHECK(read_file(path2) == full);
}

TEST_CASE("stale cache rows are ignored when the config hash changes") {
  std::string text = small_config_text();
  text += "scenario = III\nmc_samples = 4\n";
  const RunConfig cfg = parse_config(text);
  const fs::path dir = fresh_dir("sweep_stale");
  const std::string path = run_scenario(cfg, dir.string());
  const std::string full = read_file(path);

  std::string text2 = text;
  text2.replace(text2.find("seed = 3"), 8, "seed = 4");
  const RunConfig cfg2 = parse_config(text2);
  const std::string path2 = run_scenario(cfg2, dir.string());
  const std::string full2 = read_file(path2);
  CHECK(full2 != full);  // recomputed, not reused
}

TEST_CASE("a one-point sweep equals the direct library call") {
  std::string text = small_config_text();
  text += "scenario = III\nmc_samples = 4\n";
  const RunConfig cfg = parse_config(text);
  const SeismicSetup setup = make_setup(cfg);
  const Receivers recv = build_receivers(setup.grid, DesignSpec{5, 1000});
  const EigEstimate direct = eig_for_design(setup, cfg, recv);

  const fs::path dir = fresh_dir("sweep_point");
  const std::string path = run_scenario(cfg, dir.string());
  std::istringstream in(read_file(path));
  std::string line;
  bool found = false;
  while (std::getline(in, line)) {
    if (line.rfind("5,1000,", 0) == 0) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", direct.value);
      CHECK(line.find(buf) != std::string::npos);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("simulate writes waveform CSV and a readable binary dump") {
  std::string text = small_config_text();
  text += "dump_binary = 1\n";
  const RunConfig cfg = parse_config(text);
  const fs::path dir = fresh_dir("simulate");
  const std::string path = run_simulate(cfg, dir.string());
  CHECK(fs::exists(path));
  const ReceiverSeries s = read_receivers_binary((dir / "receivers.bin").string());
  CHECK(s.n_receivers() == 2);
  CHECK(s.n_levels() == cfg.n_levels());
  CHECK(s.dt == cfg.dt);
  CHECK(s.data.allFinite());
  CHECK(s.data.cwiseAbs().maxCoeff() > 0.0);

  // header layout: three little-endian 64-bit values
  std::ifstream raw((dir / "receivers.bin").string(), std::ios::binary);
  std::int64_t nr = 0, nt = 0;
  double dt = 0;
  raw.read(reinterpret_cast<char*>(&nr), 8);
  raw.read(reinterpret_cast<char*>(&nt), 8);
  raw.read(reinterpret_cast<char*>(&dt), 8);
  CHECK(nr == 2);
  CHECK(nt == cfg.n_levels());
  CHECK(dt == cfg.dt);
}

TEST_CASE("hessian subcommand writes H1, H2 and the conditioning report") {
  const RunConfig cfg = parse_config(small_config_text());
  const fs::path dir = fresh_dir("hessian");
  run_hessian(cfg, dir.string());
  CHECK(fs::exists(dir / "hessian_h1.csv"));
  CHECK(fs::exists(dir / "hessian_h2.csv"));
  const std::string scale = read_file((dir / "hessian_scale.csv").string());
  CHECK(scale.find("cond_unscaled,") != std::string::npos);
  CHECK(scale.find("cond_scaled,") != std::string::npos);
}

TEST_CASE("per-parameter sweep emits one finite gain column per free parameter") {
  std::string text = small_config_text();
  text += "scenario = III\nmc_samples = 2\n";
  const RunConfig cfg = parse_config(text);
  const fs::path dir = fresh_dir("per_param");
  const std::string path = per_parameter_sweep(cfg, dir.string());
  std::istringstream in(read_file(path));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || !std::isdigit(line[0])) continue;
    ++rows;
    // free parameters here are x2s and m11 -> columns 4 and 8
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 9);
    CHECK(cells[3] != "nan");
    CHECK(cells[2] == "nan");  // x1s is fixed
    CHECK(std::isfinite(std::stod(cells[3])));
  }
  CHECK(rows == 20);
}
