// cellmatch: solve single scenarios, run parameter sweeps, self-check the
// geometry and radio models.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cellmatch/config.hpp"
#include "cellmatch/experiment.hpp"
#include "cellmatch/geometry.hpp"
#include "cellmatch/matching.hpp"
#include "cellmatch/radio.hpp"

namespace cm = cellmatch;

namespace {

constexpr int kOk = 0;
constexpr int kRuntimeError = 1;
constexpr int kUsageError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string preset;
  std::string fixture;
  std::string out;
  std::string format;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::size_t replicas = 0;
  std::uint64_t samples = 1000000;
  bool quiet = false;
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Preset, then config file, then environment seed, then flags.
cm::RunConfig load_config(const Options& o, const CLI::App& cmd) {
  cm::RunConfig c;
  if (!o.preset.empty()) c = cm::preset(o.preset);
  if (!o.config_path.empty()) {
    try {
      c = cm::run_config_from_text(read_text(o.config_path), c);
    } catch (const cm::FormatError& e) {
      throw UsageError(o.config_path + ": " + e.what());
    }
  }
  if (!c.seed) {
    if (const char* env = std::getenv("CELLMATCH_SEED")) {
      try {
        std::size_t used = 0;
        c.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw UsageError(std::string("CELLMATCH_SEED is not an unsigned integer: ") + env);
      }
    }
  }
  if (cmd.count("--seed")) c.seed = o.seed;
  if (cmd.count("--workers")) c.workers = o.workers;
  if (cmd.count("--replicas")) c.replicas = o.replicas;
  if (cmd.count("--out")) c.out = o.out;
  if (cmd.count("--format")) c.format = o.format;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

void add_common(CLI::App& cmd, Options& o) {
  cmd.add_option("--config", o.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  cmd.add_option("--preset", o.preset, "built-in sweep design")->check(CLI::IsMember({"fig2", "fig3", "fig4"}));
  cmd.add_option("--seed", o.seed, "master seed (fallback: CELLMATCH_SEED, then the config file)");
  cmd.add_option("--workers", o.workers, "worker threads for replicas")->check(CLI::PositiveNumber);
  cmd.add_option("--replicas", o.replicas, "Monte-Carlo replicas per sweep point")->check(CLI::PositiveNumber);
  cmd.add_option("--out", o.out, "output path");
  cmd.add_option("--format", o.format, "output format")->check(CLI::IsMember({"csv", "json-lines"}));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

// ---------------------------------------------------------------------------
// solve

std::string solve_text(const cm::GameModel& model, const cm::SolveReport& r, const std::string& source) {
  std::ostringstream os;
  const auto& m = r.final;
  os << "scenario: " << source << " (N=" << model.n_users() << ", P=" << model.n_cells() << ")\n";
  os << "outer iterations: " << r.outer_iterations << "\n";
  os << "proposal rounds: " << r.inner_proposal_rounds << "\n";
  os << "proposals: " << r.proposals << "\n";
  os << "applications per user: " << cm::format_double(r.applications_per_user()) << "\n";
  os << "converged: " << (r.converged ? "yes" : "no") << "\n";
  os << "cycle detected: " << (r.cycle_detected ? "yes" : "no") << "\n";
  if (r.stability_checked)
    os << "stable: " << (r.stable ? "yes" : "no") << " (blocking pairs: " << r.blocking_pairs << ")\n";
  else
    os << "stable: not checked\n";
  const double u = cm::mean_user_utility(model, m);
  os << "mean user utility (small-cell users): " << (std::isnan(u) ? std::string("n/a") : cm::format_double(u))
     << "\n";
  os << "mean cell utility: " << cm::format_double(cm::mean_cell_utility(model, m)) << "\n";
  os << "macro users: " << m.macro_load() << "\n";
  os << "cell occupancy:\n";
  for (std::size_t p = 0; p < m.n_cells(); ++p) {
    os << "  cell " << p << ": " << m.occupancy(p) << "/" << m.quota(p);
    if (!m.users_of(p).empty()) {
      os << " [";
      for (std::size_t k = 0; k < m.users_of(p).size(); ++k) os << (k ? " " : "") << m.users_of(p)[k];
      os << "]";
    }
    os << "\n";
  }
  return os.str();
}

std::string solve_json(const cm::GameModel& model, const cm::SolveReport& r) {
  cm::json j;
  j["users"] = model.n_users();
  j["cells"] = model.n_cells();
  j["outer_iterations"] = r.outer_iterations;
  j["inner_proposal_rounds"] = r.inner_proposal_rounds;
  j["proposals"] = r.proposals;
  j["applications_per_user"] = r.applications_per_user();
  j["converged"] = r.converged;
  j["cycle_detected"] = r.cycle_detected;
  j["stability_checked"] = r.stability_checked;
  j["stable"] = r.stable;
  j["blocking_pairs"] = r.blocking_pairs;
  j["assignment"] = r.final.assignment();
  std::vector<std::size_t> occ;
  for (std::size_t p = 0; p < r.final.n_cells(); ++p) occ.push_back(r.final.occupancy(p));
  j["occupancy"] = occ;
  j["record"] = cm::to_record(r);
  return j.dump() + "\n";
}

int cmd_solve(const Options& o, const CLI::App& cmd) {
  const auto cfg = load_config(o, cmd);
  cm::Scenario scenario;
  std::string source;
  if (cmd.count("--fixture")) {
    if (!std::filesystem::is_regular_file(o.fixture)) throw UsageError("fixture not found: " + o.fixture);
    try {
      scenario = cm::load_fixture(read_text(o.fixture));
    } catch (const cm::FormatError& e) {
      throw UsageError(o.fixture + ": " + e.what());
    }
    source = o.fixture;
  } else {
    auto sc = cfg.scenario;
    sc.seed = cfg.effective_seed();
    scenario = cm::generate(sc);
    source = "generated, seed " + std::to_string(sc.seed);
  }
  const cm::GameModel model(std::move(scenario));
  const auto report = cm::solve(model, cfg.solver);
  std::cout << (cfg.format == "json-lines" ? solve_json(model, report) : solve_text(model, report, source));
  if (!cfg.out.empty()) {
    cm::json dump{{"assignment", report.final.assignment()}};
    write_text(cfg.out, dump.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// sweep

std::string rows_json_lines(const std::vector<cm::MetricsRow>& rows, const cm::SweepSpec& spec) {
  std::string out;
  for (const auto& r : rows) {
    cm::json j;
    j["axis"] = cm::to_string(spec.axis);
    j["axis_value"] = r.axis_value;
    j["fixed"] = spec.fixed;
    j["algorithm"] = r.algorithm;
    j["mean_user_utility"] = r.mean_user_utility;
    j["se_user_utility"] = r.se_user_utility;
    j["mean_cell_utility"] = r.mean_cell_utility;
    j["se_cell_utility"] = r.se_cell_utility;
    j["mean_iter_per_user"] = r.mean_iter_per_user;
    j["se_iter"] = r.se_iter;
    j["convergence_rate"] = r.convergence_rate;
    j["replicas"] = r.replicas;
    j["failed"] = r.failed;
    out += j.dump() + "\n";
  }
  return out;
}

std::string output_path(const cm::RunConfig& cfg, std::size_t fixed_value) {
  if (cfg.fixed.size() == 1) return cfg.out;
  const std::filesystem::path p(cfg.out);
  const std::string tag = cfg.axis == cm::SweepAxis::n_users ? "_P" : "_N";
  return (p.parent_path() / (p.stem().string() + tag + std::to_string(fixed_value) + p.extension().string())).string();
}

int cmd_sweep(const Options& o, const CLI::App& cmd) {
  auto cfg = load_config(o, cmd);
  if (!cfg.workers) cfg.workers = std::max(1u, std::thread::hardware_concurrency());
  if (cfg.format == "csv" && cfg.fixed.size() > 1 && cfg.out.empty())
    throw UsageError("this sweep writes one CSV per fixed value; pass --out");

  std::size_t failures = 0;
  std::string json_out;
  for (std::size_t fixed : cfg.fixed) {
    const auto spec = cfg.sweep_for(fixed);
    std::size_t last_pct = 101;
    auto progress = [&](std::size_t done, std::size_t total) {
      if (o.quiet) return;
      const std::size_t pct = done * 100 / total;
      if (pct == last_pct) return;
      last_pct = pct;
      std::cerr << "\rsweep " << cm::to_string(spec.axis) << " (fixed " << fixed << "): " << pct << "%"
                << (done == total ? "\n" : "") << std::flush;
    };
    const auto result = cm::run_sweep_detailed(spec, progress);
    failures += result.failures;
    if (cfg.format == "csv") {
      if (cfg.out.empty())
        std::cout << cm::to_csv(result.rows);
      else
        cm::write_csv(result.rows, output_path(cfg, fixed));
    } else {
      json_out += rows_json_lines(result.rows, spec);
    }
  }
  if (cfg.format == "json-lines") {
    if (cfg.out.empty())
      std::cout << json_out;
    else
      write_text(cfg.out, json_out);
  }
  if (failures) std::cerr << "warning: " << failures << " replica(s) failed and were excluded\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// validate

struct Check {
  std::string name;
  bool pass;
  std::string detail;
};

int cmd_validate(const Options& o, const CLI::App& cmd) {
  const auto cfg = load_config(o, cmd);
  const std::uint64_t seed = cfg.effective_seed();
  std::vector<Check> checks;
  auto fmt = [](double v) { return cm::format_double(v); };

  {
    double worst = 0.0;
    for (int k = 0; k <= 1000; ++k) {
      const double ratio = k / 1000.0;
      const double v = cm::hf_probability({{0, 0}, 1.0, ratio, 1.1});
      worst = std::max(worst, std::abs(v - 2.0 / std::numbers::pi * std::asin(ratio)));
    }
    checks.push_back({"hf_probability vs (2/pi) asin(r/R), 1001 points", worst <= 1e-12,
                      "max |diff| = " + fmt(worst) + " (limit 1e-12)"});
  }
  for (double ratio : {0.05, 0.1, 0.3, 0.6}) {
    const cm::CellGeometry g{{0, 0}, 1.0, ratio, 1.1};
    const double p = cm::hf_probability(g);
    const double est = cm::mc_hf_oracle(g, o.samples, cm::derive_seed(seed, "validate-hf"));
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(o.samples));
    checks.push_back({"Monte-Carlo HF at r/R = " + fmt(ratio), std::abs(est - p) <= 3.0 * sigma,
                      "observed " + fmt(est) + ", expected " + fmt(p) + " +/- " + fmt(3.0 * sigma)});
  }
  {
    double worst = 0.0;
    for (int k = 1; k <= 1000; ++k) {
      const double ratio = 0.2 * k / 1000.0;
      const cm::CellGeometry g{{0, 0}, 1.0, ratio, 1.1};
      const double exact = cm::hf_probability(g);
      worst = std::max(worst, (exact - cm::hf_probability_linear(g).value) / exact);
    }
    checks.push_back({"linear HF within 1% for r/R <= 0.2", worst < 0.01, "max relative error " + fmt(worst)});
  }
  {
    const std::size_t side = 1000;
    const std::vector<cm::Point> pts(side, cm::Point{0.0, 0.0});
    const auto m = cm::realize_channels(pts, pts, cfg.scenario.radio, cm::derive_seed(seed, "validate-fading"));
    double sum = 0.0;
    for (std::size_t i = 0; i < side; ++i)
      for (double g : m.row(i)) sum += g;
    const double mean = sum / static_cast<double>(side * side);
    const double scale = cfg.scenario.radio.rayleigh_scale;
    const double expected = cfg.scenario.radio.fading ? 2.0 * scale * scale : 1.0;
    checks.push_back({"fading power mean over 10^6 draws", std::abs(mean - expected) <= 0.01 * expected,
                      "observed " + fmt(mean) + ", expected " + fmt(expected) + " +/- 1%"});
  }
  {
    auto sc = cfg.scenario;
    sc.seed = seed;
    sc.n_users = 30;
    sc.n_picos = 8;
    const auto s = cm::generate(sc);
    const auto powers = s.powers();
    double worst = 0.0;
    for (std::size_t i = 0; i < s.n_users(); ++i) {
      for (std::size_t j = 0; j < powers.size(); ++j) {
        double denom = s.radio.noise_power;
        for (std::size_t k = 0; k < powers.size(); ++k)
          if (k != j) denom += powers[k] * s.channels(i, k);
        const double v = cm::sinr(s.channels, powers, s.radio.noise_power, i, j);
        const double ref = powers[j] * s.channels(i, j) / denom;
        if (ref > 0.0) worst = std::max(worst, std::abs(v - ref) / ref);
      }
    }
    checks.push_back({"SINR vs brute-force interference sum", worst <= 1e-12, "max relative diff " + fmt(worst)});
  }

  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.pass;
  }
  return ok ? kOk : kRuntimeError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-aware user to small-cell association: matching solver and Monte-Carlo sweeps"};
  app.require_subcommand(1);
  Options o;

  auto* solve = app.add_subcommand("solve", "solve one scenario (generated or from a fixture)");
  add_common(*solve, o);
  solve->add_option("--fixture", o.fixture, "scenario fixture (JSON)");

  auto* sweep = app.add_subcommand("sweep", "run a Monte-Carlo parameter sweep");
  add_common(*sweep, o);
  sweep->add_flag("--quiet", o.quiet, "no progress on standard error");

  auto* validate = app.add_subcommand("validate", "check the geometry and radio models against Monte-Carlo oracles");
  add_common(*validate, o);
  validate->add_option("--samples", o.samples, "trajectories per HF oracle")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*solve) return cmd_solve(o, *solve);
    if (*sweep) return cmd_sweep(o, *sweep);
    return cmd_validate(o, *validate);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const cm::FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
