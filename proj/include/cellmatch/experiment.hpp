#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include "cellmatch/matching.hpp"
#include "cellmatch/preferences.hpp"
#include "cellmatch/random.hpp"
#include "cellmatch/scenario.hpp"

namespace cellmatch {

enum class SweepAxis { n_picos, n_users };

inline const char* to_string(SweepAxis a) noexcept { return a == SweepAxis::n_picos ? "n_picos" : "n_users"; }

inline SweepAxis parse_axis(std::string_view s) {
  if (s == "n_picos") return SweepAxis::n_picos;
  if (s == "n_users") return SweepAxis::n_users;
  throw std::invalid_argument("axis must be n_picos or n_users");
}

enum class Algorithm { proposed, max_sinr };

inline const char* to_string(Algorithm a) noexcept { return a == Algorithm::proposed ? "proposed" : "max_sinr"; }

inline Algorithm parse_algorithm(std::string_view s) {
  if (s == "proposed") return Algorithm::proposed;
  if (s == "max_sinr") return Algorithm::max_sinr;
  throw std::invalid_argument("algorithm must be proposed or max_sinr");
}

struct SweepSpec {
  SweepAxis axis = SweepAxis::n_picos;
  std::vector<std::size_t> values;
  std::size_t fixed = 60;  // the other dimension
  std::size_t replicas = 1000;
  ScenarioConfig base;  // base.seed is the master seed
  std::vector<Algorithm> algorithms{Algorithm::proposed, Algorithm::max_sinr};
  SolverConfig solver;
  BaselineConfig baseline;
  // Average user utility over all users (macro users included) instead of
  // over small-cell users only.
  bool include_macro_users = false;
  std::size_t workers = 1;

  void validate() const {
    if (values.empty()) throw std::invalid_argument("sweep values must be non-empty");
    for (std::size_t k = 1; k < values.size(); ++k)
      if (values[k] <= values[k - 1]) throw std::invalid_argument("sweep values must be strictly increasing");
    if (values.front() < 1 || fixed < 1) throw std::invalid_argument("sweep counts must be >= 1");
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
    if (algorithms.empty()) throw std::invalid_argument("at least one algorithm required");
    base.validate();
  }

  ScenarioConfig config_for(std::size_t axis_value, std::size_t replica) const {
    ScenarioConfig c = base;
    if (axis == SweepAxis::n_picos) {
      c.n_picos = axis_value;
      c.n_users = fixed;
    } else {
      c.n_users = axis_value;
      c.n_picos = fixed;
    }
    c.seed = derive_seed(base.seed, axis_value, replica);
    return c;
  }
};

/// Outcome of one algorithm on one scenario.
struct ReplicaRecord {
  // NaN when no user is in the averaged population.
  double mean_user_utility = 0.0;
  double mean_cell_utility = 0.0;
  double iterations_per_user = 0.0;
  bool converged = true;
  bool failed = false;

  friend bool operator==(const ReplicaRecord&, const ReplicaRecord&) = default;
};

/// Mean utility of the users served by small cells, or of all users
/// (macro users valued by macro_utility) when include_macro_users is set.
/// NaN when the population is empty.
inline double mean_user_utility(const GameModel& model, const Matching& m, bool include_macro_users = false) {
  if (include_macro_users) return total_user_utility(model, m) / static_cast<double>(model.n_users());
  double sum = 0.0;
  std::size_t served = 0;
  for (std::size_t i = 0; i < model.n_users(); ++i) {
    if (m.on_macro(i)) continue;
    sum += served_utility(model, m, i);
    ++served;
  }
  return served ? sum / static_cast<double>(served) : std::numeric_limits<double>::quiet_NaN();
}

/// Mean over small cells of the summed cell utility of their members.
inline double mean_cell_utility(const GameModel& model, const Matching& m) {
  double sum = 0.0;
  for (std::size_t p = 0; p < model.n_cells(); ++p)
    for (std::size_t n : m.users_of(p)) sum += cell_utility(model, m, p, n);
  return sum / static_cast<double>(model.n_cells());
}

inline ReplicaRecord evaluate(const GameModel& model, Algorithm algorithm, const SolverConfig& solver,
                              const BaselineConfig& baseline, bool include_macro_users = false) {
  ReplicaRecord rec;
  if (algorithm == Algorithm::proposed) {
    const SolveReport r = solve(model, solver);
    rec.mean_user_utility = mean_user_utility(model, r.final, include_macro_users);
    rec.mean_cell_utility = mean_cell_utility(model, r.final);
    rec.iterations_per_user = r.applications_per_user();
    rec.converged = r.converged;
  } else {
    const Matching m = max_sinr_baseline(model, baseline);
    rec.mean_user_utility = mean_user_utility(model, m, include_macro_users);
    rec.mean_cell_utility = mean_cell_utility(model, m);
  }
  return rec;
}

struct MetricsRow {
  std::size_t axis_value = 0;
  std::string algorithm;
  double mean_user_utility = 0.0;
  double se_user_utility = 0.0;
  double mean_cell_utility = 0.0;
  double se_cell_utility = 0.0;
  double mean_iter_per_user = 0.0;
  double se_iter = 0.0;
  double convergence_rate = 0.0;
  std::size_t replicas = 0;
  std::size_t failed = 0;  // not written to CSV

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct SweepResult {
  std::vector<MetricsRow> rows;
  // records[point][algorithm][replica]
  std::vector<std::vector<std::vector<ReplicaRecord>>> records;
  std::size_t failures = 0;
};

namespace detail {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

}  // namespace detail

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

/// Runs every (axis value, replica) scenario with each algorithm. Scenario
/// seeds depend only on (master seed, axis value, replica), and the
/// reduction walks replicas in index order, so results do not depend on the
/// worker count. A replica that throws is counted and left out of the means.
inline SweepResult run_sweep_detailed(const SweepSpec& spec, const ProgressFn& progress = {}) {
  spec.validate();
  const std::size_t n_points = spec.values.size();
  const std::size_t n_alg = spec.algorithms.size();
  SweepResult result;
  result.records.assign(n_points,
                        std::vector<std::vector<ReplicaRecord>>(n_alg, std::vector<ReplicaRecord>(spec.replicas)));

  const std::size_t total = n_points * spec.replicas;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto work = [&] {
    for (std::size_t job = next++; job < total; job = next++) {
      const std::size_t point = job / spec.replicas;
      const std::size_t replica = job % spec.replicas;
      try {
        const GameModel model(generate(spec.config_for(spec.values[point], replica)));
        for (std::size_t a = 0; a < n_alg; ++a)
          result.records[point][a][replica] =
              evaluate(model, spec.algorithms[a], spec.solver, spec.baseline, spec.include_macro_users);
      } catch (const std::exception&) {
        for (std::size_t a = 0; a < n_alg; ++a) result.records[point][a][replica].failed = true;
      }
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(spec.workers, total));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  for (std::size_t point = 0; point < n_points; ++point) {
    for (std::size_t a = 0; a < n_alg; ++a) {
      std::vector<double> user, cell, iter;
      std::size_t converged = 0, failed = 0;
      for (const auto& rec : result.records[point][a]) {
        if (rec.failed) {
          ++failed;
          continue;
        }
        if (!std::isnan(rec.mean_user_utility)) user.push_back(rec.mean_user_utility);
        cell.push_back(rec.mean_cell_utility);
        iter.push_back(rec.iterations_per_user);
        if (rec.converged) ++converged;
      }
      MetricsRow row;
      row.axis_value = spec.values[point];
      row.algorithm = to_string(spec.algorithms[a]);
      const auto u = detail::mean_se(user), c = detail::mean_se(cell), it = detail::mean_se(iter);
      row.mean_user_utility = u.mean;
      row.se_user_utility = u.se;
      row.mean_cell_utility = c.mean;
      row.se_cell_utility = c.se;
      row.mean_iter_per_user = it.mean;
      row.se_iter = it.se;
      row.replicas = cell.size();
      row.convergence_rate = cell.empty() ? 0.0 : static_cast<double>(converged) / static_cast<double>(cell.size());
      row.failed = failed;
      result.failures += failed;
      result.rows.push_back(row);
    }
  }
  return result;
}

inline std::vector<MetricsRow> run_sweep(const SweepSpec& spec, const ProgressFn& progress = {}) {
  return run_sweep_detailed(spec, progress).rows;
}

// ---------------------------------------------------------------------------
// CSV

inline constexpr std::string_view kCsvHeader =
    "axis,algorithm,mean_user_utility,se_user_utility,mean_cell_utility,se_cell_utility,"
    "mean_iter_per_user,se_iter,convergence_rate,replicas";

// Shortest round-trip decimal form; independent of the C/C++ locale.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf, res.ptr);
}

inline std::string to_csv(const std::vector<MetricsRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.axis_value) + ',' + r.algorithm + ',' + format_double(r.mean_user_utility) + ',' +
           format_double(r.se_user_utility) + ',' + format_double(r.mean_cell_utility) + ',' +
           format_double(r.se_cell_utility) + ',' + format_double(r.mean_iter_per_user) + ',' +
           format_double(r.se_iter) + ',' + format_double(r.convergence_rate) + ',' + std::to_string(r.replicas) +
           '\n';
  }
  return out;
}

inline void write_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("no rows to write to " + path.string());
  const std::string text = to_csv(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::vector<MetricsRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw std::runtime_error("unexpected CSV header");
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1)
      f.push_back(line.substr(start, pos - start));
    f.push_back(line.substr(start));
    if (f.size() != 10) throw std::runtime_error("CSV line " + std::to_string(lineno) + ": expected 10 fields");
    auto num = [&](const std::string& s) {
      double v = 0.0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("CSV line " + std::to_string(lineno) + ": bad number '" + s + "'");
      return v;
    };
    auto count = [&](const std::string& s) {
      std::size_t v = 0;
      const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
      if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::runtime_error("CSV line " + std::to_string(lineno) + ": bad count '" + s + "'");
      return v;
    };
    MetricsRow r;
    r.axis_value = count(f[0]);
    r.algorithm = f[1];
    r.mean_user_utility = num(f[2]);
    r.se_user_utility = num(f[3]);
    r.mean_cell_utility = num(f[4]);
    r.se_cell_utility = num(f[5]);
    r.mean_iter_per_user = num(f[6]);
    r.se_iter = num(f[7]);
    r.convergence_rate = num(f[8]);
    r.replicas = count(f[9]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace cellmatch
