#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "episcale/core/initial_distribution.hpp"
#include "episcale/core/random.hpp"
#include "episcale/core/test_function.hpp"
#include "episcale/ctmc/martingale.hpp"
#include "episcale/ctmc/trajectory.hpp"
#include "episcale/fields/field_io.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/fields/solvers.hpp"
#include "episcale/harness/config.hpp"
#include "episcale/harness/csv.hpp"
#include "episcale/harness/manifest.hpp"
#include "episcale/harness/worker_pool.hpp"
#include "episcale/kernels/kernel_spec.hpp"
#include "episcale/metrics/commutator.hpp"
#include "episcale/metrics/measures.hpp"
#include "episcale/metrics/slope_fit.hpp"
#include "episcale/metrics/transport.hpp"

namespace episcale {

/// Output directory exists and --force was not given.
class OutputExistsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::filesystem::path out;
  bool force = false;
};

/// Per-size master seed: splitmix64(master ^ splitmix64(N)). Replica r of
/// size N then draws its population from stream_seed(master_N, r, 0) and
/// its dynamics from stream_seed(master_N, r, 1).
inline std::uint64_t size_master_seed(std::uint64_t master, std::size_t n) {
  return splitmix64(master ^ splitmix64(static_cast<std::uint64_t>(n)));
}

inline ReplicaSeeds replica_seeds(std::uint64_t master, std::size_t n, std::size_t replica) {
  const std::uint64_t m = size_master_seed(master, n);
  return {n, replica, stream_seed(m, replica, kPopulationStream), stream_seed(m, replica, kDynamicsStream)};
}

/// One statistic of one metric across the population sizes.
struct Series {
  std::string metric;
  double t = 0.0;
  std::vector<std::size_t> sizes;
  std::vector<double> value;
  std::optional<SlopeFit> fit;
  double reference_slope = std::numeric_limits<double>::quiet_NaN();
};

/// One raw per-replica measurement.
struct MetricRow {
  std::size_t n = 0;
  double t = 0.0;
  std::string metric;
  double value = 0.0;
  std::size_t replica = 0;
  std::uint64_t seed = 0;
};

struct ExperimentReport {
  std::filesystem::path dir;
  std::vector<MetricRow> rows;
  std::vector<Series> series;

  const Series& find(const std::string& metric, double t) const {
    for (const auto& s : series) {
      if (s.metric == metric && std::abs(s.t - t) < 1e-12) return s;
    }
    throw std::out_of_range("no series " + metric);
  }
};

namespace detail {

inline void prepare_output(const std::filesystem::path& dir, bool force) {
  namespace fs = std::filesystem;
  if (dir.empty()) throw ConfigError("no output directory given");
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw OutputExistsError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!force) throw OutputExistsError(dir.string() + " already exists; pass --force to overwrite");
      for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
    }
  }
  fs::create_directories(dir);
}

inline RunManifest start_manifest(const std::string& command, const ExperimentConfig& config) {
  RunManifest m;
  m.command = command;
  m.config_ini = to_ini(config);
  m.seed = config.seed;
  m.workers = config.workers;
  m.started = utc_timestamp();
  for (std::size_t n : config.population_sizes) {
    for (std::size_t r = 0; r < config.replicas; ++r) m.replicas.push_back(replica_seeds(config.seed, n, r));
  }
  return m;
}

inline void finish_manifest(RunManifest& m, const std::filesystem::path& dir) {
  m.finished = utc_timestamp();
  m.record_files(dir);
  m.write(dir);
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : s / static_cast<double>(v.size());
}

/// Unbiased sample variance; NaN with fewer than two values.
inline double variance(const std::vector<double>& v) {
  if (v.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

inline std::string optional_number(double v) {
  return std::isfinite(v) ? format_double(v) : std::string();
}

inline std::optional<SlopeFit> try_fit(const std::vector<std::size_t>& sizes, const std::vector<double>& values) {
  if (sizes.size() < 3) return std::nullopt;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    if (!(values[k] > 0.0)) return std::nullopt;
    pts.push_back({static_cast<double>(sizes[k]), values[k]});
  }
  return slope_fit(pts);
}

/// Snapshot grid indices of the config's snapshot times.
inline std::vector<std::size_t> snapshot_steps(const ExperimentConfig& c) {
  std::vector<std::size_t> steps;
  for (double t : c.snapshot_times) steps.push_back(static_cast<std::size_t>(std::llround(t / c.dt)));
  return steps;
}

inline const InteractionKernel& meanfield_kernel(const ExperimentConfig& c) {
  const auto* mf = std::get_if<MeanFieldRegime>(&c.params.regime);
  if (!mf) throw ConfigError("[model] regime: this command needs regime = meanfield");
  return mf->kernel;
}

inline const LocalRegime& local_regime(const ExperimentConfig& c) {
  const auto* local = std::get_if<LocalRegime>(&c.params.regime);
  if (!local) throw ConfigError("[model] regime: this command needs regime = local");
  return *local;
}

/// Flattened (size index, replica) task list.
struct TaskIndex {
  std::size_t size_index;
  std::size_t replica;
};

inline std::vector<TaskIndex> task_list(const ExperimentConfig& c) {
  std::vector<TaskIndex> tasks;
  for (std::size_t i = 0; i < c.population_sizes.size(); ++i) {
    for (std::size_t r = 0; r < c.replicas; ++r) tasks.push_back({i, r});
  }
  return tasks;
}

inline void write_rows(const std::filesystem::path& path, const std::string& schema,
                       const std::vector<MetricRow>& rows, const std::string& beta) {
  CsvWriter csv(path.string(), schema, {"N", "beta", "t", "metric_name", "value", "replica", "seed"});
  for (const auto& r : rows) csv.row(r.n, beta, r.t, r.metric, r.value, r.replica, r.seed);
}

inline void write_slopes(const std::filesystem::path& path, const std::vector<Series>& series) {
  CsvWriter csv(path.string(), "slopes", {"t", "metric", "slope", "intercept", "stderr", "reference_slope"});
  for (const auto& s : series) {
    if (!s.fit) continue;
    csv.row(s.t, s.metric, s.fit->slope, s.fit->intercept, optional_number(s.fit->stderr_slope),
            optional_number(s.reference_slope));
  }
}

/// Medians per (metric, t) across sizes, with summary statistics written
/// to report.csv.
inline std::vector<Series> summarize(const ExperimentConfig& c, const std::vector<MetricRow>& rows,
                                     const std::vector<std::string>& metrics,
                                     const std::filesystem::path& report_path) {
  CsvWriter csv(report_path.string(), "convergence",
                {"t", "N", "metric", "replicas", "median", "mean", "stderr", "min", "max"});
  std::vector<Series> out;
  for (const std::string& metric : metrics) {
    for (double t : c.snapshot_times) {
      Series s{metric, t, {}, {}, std::nullopt, std::numeric_limits<double>::quiet_NaN()};
      for (std::size_t n : c.population_sizes) {
        std::vector<double> values;
        for (const auto& r : rows) {
          if (r.metric == metric && r.n == n && r.t == t) values.push_back(r.value);
        }
        if (values.empty()) continue;
        const double med = median(values);
        const double sd = std::sqrt(variance(values));
        const double se = values.size() > 1 ? sd / std::sqrt(static_cast<double>(values.size()))
                                            : std::numeric_limits<double>::quiet_NaN();
        csv.row(t, n, metric, values.size(), med, mean(values), optional_number(se),
                *std::min_element(values.begin(), values.end()),
                *std::max_element(values.begin(), values.end()));
        s.sizes.push_back(n);
        s.value.push_back(med);
      }
      s.fit = try_fit(s.sizes, s.value);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace detail

/// Limit-system solution at the config's snapshot times on the config grid.
/// Mean-field configs use the non-local solver, local configs the
/// pointwise field solver.
inline std::vector<GridField> solve_limit(const ExperimentConfig& c,
                                          std::vector<std::array<double, 4>>* aggregates = nullptr) {
  const GridField f0 = initial_field(c.initial, c.grid);
  const auto steps = detail::snapshot_steps(c);
  const std::size_t total = c.solver_steps();
  const std::size_t stride = std::max<std::size_t>(1, total / 1000);
  std::vector<GridField> snaps;
  auto observe = [&](std::size_t s, const GridField& f) {
    for (std::size_t k : steps) {
      if (k == s) snaps.push_back(f);
    }
    if (aggregates && (s % stride == 0 || s == total)) {
      aggregates->push_back({f.time(), f.mass(HealthState::S), f.mass(HealthState::I), f.mass(HealthState::R)});
    }
  };
  if (c.params.is_local()) {
    rk4_run(f0, LocalRhs(c.params.p, c.params.q), c.dt, total, observe);
  } else {
    const NonlocalRhs rhs(detail::meanfield_kernel(c), c.params.p, c.params.q, c.grid);
    rk4_run(f0, rhs, c.dt, total, observe);
  }
  return snaps;
}

/// simulate: event logs and compartment counts at the snapshot times.
inline ExperimentReport run_simulate(const ExperimentConfig& c, const RunOptions& opt) {
  detail::prepare_output(opt.out, opt.force);
  RunManifest manifest = detail::start_manifest("simulate", c);
  const auto tasks = detail::task_list(c);
  auto results = run_parallel<Trajectory>(tasks.size(), c.workers, [&](std::size_t k) {
    const std::size_t n = c.population_sizes[tasks[k].size_index];
    const ReplicaSeeds seeds = replica_seeds(c.seed, n, tasks[k].replica);
    const PopulationState pop = sample_initial_population(c.initial, n, seeds.population_seed);
    return simulate(pop, c.params, make_kernel_spec(c.params, n), c.snapshot_times, seeds.dynamics_seed);
  });

  CsvWriter events((opt.out / "events.csv").string(), "events",
                   {"N", "replica", "time", "kind", "individual", "x", "y"});
  CsvWriter snaps((opt.out / "snapshots.csv").string(), "snapshots",
                  {"N", "replica", "t", "n_S", "n_I", "n_R"});
  ExperimentReport report;
  report.dir = opt.out;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const Trajectory& traj = results[k];
    const std::size_t n = traj.initial.size();
    for (const Event& e : traj.events) {
      const Point x = traj.initial.positions[e.individual];
      events.row(n, tasks[k].replica, e.time, e.kind == EventKind::Recovery ? "recovery" : "infection",
                 e.individual, x.x, x.y);
    }
    for (const Snapshot& s : traj.snapshots) {
      snaps.row(n, tasks[k].replica, s.time, s.counts[0], s.counts[1], s.counts[2]);
      report.rows.push_back({n, s.time, "infected_fraction",
                             static_cast<double>(s.counts[1]) / static_cast<double>(n), tasks[k].replica,
                             traj.seed});
    }
  }
  events.close();
  snaps.close();
  detail::finish_manifest(manifest, opt.out);
  return report;
}

/// solve-nonlocal / solve-local: fields at the snapshot times plus the
/// domain aggregates over time.
inline ExperimentReport run_solve(const ExperimentConfig& c, const RunOptions& opt, bool local) {
  if (local) {
    detail::local_regime(c);
  } else {
    detail::meanfield_kernel(c);
  }
  detail::prepare_output(opt.out, opt.force);
  RunManifest manifest = detail::start_manifest(local ? "solve-local" : "solve-nonlocal", c);
  manifest.replicas.clear();
  std::vector<std::array<double, 4>> aggregates;
  const auto fields = solve_limit(c, &aggregates);

  CsvWriter agg((opt.out / "aggregates.csv").string(), "aggregates", {"t", "S", "I", "R", "total"});
  for (const auto& a : aggregates) agg.row(a[0], a[1], a[2], a[3], a[1] + a[2] + a[3]);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    const std::string stem = "field_" + std::to_string(k);
    std::ofstream csv(opt.out / (stem + ".csv"), std::ios::binary);
    csv << "# episcale-csv " << kCsvVersion << " field t=" << detail::format_double(fields[k].time()) << '\n';
    write_field_csv(csv, fields[k]);
    std::ofstream bin(opt.out / (stem + ".bin"), std::ios::binary);
    write_field_binary(bin, fields[k]);
  }
  agg.close();
  detail::finish_manifest(manifest, opt.out);
  ExperimentReport report;
  report.dir = opt.out;
  return report;
}

/// converge-meanfield: bounded-Lipschitz distance between the empirical
/// measure and the non-local solution at every snapshot, per replica.
inline ExperimentReport run_converge_meanfield(const ExperimentConfig& c, const RunOptions& opt) {
  detail::meanfield_kernel(c);
  if (c.population_sizes.size() < 3) throw ConfigError("[experiment] N: needs at least three sizes");
  detail::prepare_output(opt.out, opt.force);
  RunManifest manifest = detail::start_manifest("converge-meanfield", c);

  const auto limits = solve_limit(c);
  std::vector<std::array<AtomSet, 3>> limit_atoms;
  for (const GridField& f : limits) {
    std::array<AtomSet, 3> parts;
    for (HealthState a : kHealthStates) parts[index_of(a)] = aggregate(atoms_from_grid(f, a), c.transport_grid);
    limit_atoms.push_back(std::move(parts));
  }
  const double h = 1.0 / static_cast<double>(c.transport_grid);

  const auto tasks = detail::task_list(c);
  auto results = run_parallel<std::vector<MetricRow>>(tasks.size(), c.workers, [&](std::size_t k) {
    const std::size_t n = c.population_sizes[tasks[k].size_index];
    const ReplicaSeeds seeds = replica_seeds(c.seed, n, tasks[k].replica);
    const PopulationState pop = sample_initial_population(c.initial, n, seeds.population_seed);
    SimulateOptions so;
    so.record_events = false;
    const Trajectory traj =
        simulate(pop, c.params, make_kernel_spec(c.params, n), c.snapshot_times, seeds.dynamics_seed, so);
    std::vector<MetricRow> rows;
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
      const EmpiricalMeasure mu = empirical_measure(pop.positions, traj.snapshots[s].states);
      double total = 0.0;
      for (HealthState a : kHealthStates) {
        total += bounded_lipschitz(aggregate(mu[a], c.transport_grid), limit_atoms[s][index_of(a)]);
      }
      rows.push_back({n, traj.snapshots[s].time, "bounded_lipschitz", total, tasks[k].replica, seeds.dynamics_seed});
      rows.push_back({n, traj.snapshots[s].time, "aggregation_error", std::numbers::sqrt2 * h, tasks[k].replica,
                      seeds.dynamics_seed});
    }
    return rows;
  });

  ExperimentReport report;
  report.dir = opt.out;
  for (auto& rs : results) report.rows.insert(report.rows.end(), rs.begin(), rs.end());
  detail::write_rows(opt.out / "distances.csv", "distances", report.rows, "");
  report.series = detail::summarize(c, report.rows, {"bounded_lipschitz"}, opt.out / "report.csv");
  detail::write_slopes(opt.out / "slopes.csv", report.series);
  detail::finish_manifest(manifest, opt.out);
  return report;
}

/// converge-local: per snapshot (a) the transport distance between the
/// mollified and the raw empirical measure with its hard bound, (b) the
/// grid L2 distance between the mollified density and the local field
/// solution, (c) the sup of the commutator field.
inline ExperimentReport run_converge_local(const ExperimentConfig& c, const RunOptions& opt) {
  const LocalRegime local = detail::local_regime(c);
  if (c.population_sizes.size() < 3) throw ConfigError("[experiment] N: needs at least three sizes");
  detail::prepare_output(opt.out, opt.force);
  RunManifest manifest = detail::start_manifest("converge-local", c);
  const auto limits = solve_limit(c);

  const auto tasks = detail::task_list(c);
  auto results = run_parallel<std::vector<MetricRow>>(tasks.size(), c.workers, [&](std::size_t k) {
    const std::size_t n = c.population_sizes[tasks[k].size_index];
    const ReplicaSeeds seeds = replica_seeds(c.seed, n, tasks[k].replica);
    const PopulationState pop = sample_initial_population(c.initial, n, seeds.population_seed);
    const KernelSpec spec = make_kernel_spec(c.params, n);
    const LocalKernel& kernel = std::get<LocalKernel>(spec);
    SimulateOptions so;
    so.record_events = false;
    const Trajectory traj = simulate(pop, c.params, spec, c.snapshot_times, seeds.dynamics_seed, so);
    std::vector<MetricRow> rows;
    for (std::size_t s = 0; s < traj.snapshots.size(); ++s) {
      const double t = traj.snapshots[s].time;
      const auto& states = traj.snapshots[s].states;
      const EmpiricalMeasure mu = empirical_measure(pop.positions, states);
      auto add = [&](const std::string& metric, double value) {
        rows.push_back({n, t, metric, value, tasks[k].replica, seeds.dynamics_seed});
      };

      const DistanceEstimate w1 = mollification_distance(mu, kernel, c.transport_grid);
      add("w1_mollification", w1.value);
      add("w1_bound", kernel.support_radius());

      const GridField rho = mollified_density(mu, kernel, c.grid);
      const GridField& f = limits[s];
      double l2 = 0.0;
      for (std::size_t v = 0; v < rho.values().size(); ++v) {
        const double d = rho.values()[v] - f.values()[v];
        l2 += d * d;
      }
      add("l2_local", std::sqrt(l2 * rho.cell_area()));

      add("commutator_sup", commutator_field(pop.positions, states, kernel, c.grid).sup_norm());
    }
    return rows;
  });

  ExperimentReport report;
  report.dir = opt.out;
  for (auto& rs : results) report.rows.insert(report.rows.end(), rs.begin(), rs.end());
  detail::write_rows(opt.out / "distances.csv", "distances", report.rows, detail::format_double(local.beta));
  report.series = detail::summarize(c, report.rows, {"w1_mollification", "l2_local", "commutator_sup"},
                                    opt.out / "report.csv");
  for (auto& s : report.series) {
    if (s.metric == "w1_mollification") s.reference_slope = -local.beta / local.exponent_divisor;
    if (s.metric == "commutator_sup") s.reference_slope = -c.commutator_alpha * local.beta / 2.0;
  }
  detail::write_slopes(opt.out / "slopes.csv", report.series);
  detail::finish_manifest(manifest, opt.out);
  return report;
}

/// Fixed smooth test triple with sup norm below 1 used by the diagnostics.
inline TestFunction diagnostic_test_function() {
  return {[](Point x) { return -0.5 + 0.25 * std::cos(std::numbers::pi * x.x); },
          [](Point x) { return 0.5 + 0.25 * std::sin(std::numbers::pi * x.y); },
          [](Point x) { return -0.25 * std::cos(std::numbers::pi * (x.x + x.y)); }};
}

/// diagnostics: martingale variance versus its predictable quadratic
/// variation, the constant-test-function null check, the weak residual and
/// mean-square increments of <mu_t, phi>.
inline ExperimentReport run_diagnostics(const ExperimentConfig& c, const RunOptions& opt) {
  detail::prepare_output(opt.out, opt.force);
  RunManifest manifest = detail::start_manifest("diagnostics", c);
  const TestFunction phi = diagnostic_test_function();
  const TestFunction flat = TestFunction::constant(0.75);
  const double horizon = c.params.horizon;

  std::vector<double> times{c.increment_base};
  for (double lag : c.increment_lags) times.push_back(c.increment_base + lag);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  const auto tasks = detail::task_list(c);
  auto results = run_parallel<std::vector<MetricRow>>(tasks.size(), c.workers, [&](std::size_t k) {
    const std::size_t n = c.population_sizes[tasks[k].size_index];
    const ReplicaSeeds seeds = replica_seeds(c.seed, n, tasks[k].replica);
    const PopulationState pop = sample_initial_population(c.initial, n, seeds.population_seed);
    const KernelSpec spec = make_kernel_spec(c.params, n);
    const Trajectory traj = simulate(pop, c.params, spec, times, seeds.dynamics_seed);
    std::vector<MetricRow> rows;
    auto add = [&](double t, const std::string& metric, double value) {
      rows.push_back({n, t, metric, value, tasks[k].replica, seeds.dynamics_seed});
    };
    const MartingaleDiagnostic m = martingale_path(traj, spec, phi);
    add(horizon, "martingale", m.final_value());
    add(horizon, "quadratic_variation", m.final_qv());
    add(horizon, "martingale_constant", martingale_path(traj, spec, flat).final_value());
    add(horizon, "weak_residual", std::abs(m.final_value()));
    const double base = pairing(pop.positions, traj.snapshots.front().states, phi);
    for (double lag : c.increment_lags) {
      for (const Snapshot& s : traj.snapshots) {
        if (s.time == c.increment_base + lag) {
          const double d = pairing(pop.positions, s.states, phi) - base;
          add(lag, "increment_sq", d * d);
        }
      }
    }
    return rows;
  });

  ExperimentReport report;
  report.dir = opt.out;
  for (auto& rs : results) report.rows.insert(report.rows.end(), rs.begin(), rs.end());
  const std::string beta = c.params.is_local() ? detail::format_double(std::get<LocalRegime>(c.params.regime).beta) : "";
  detail::write_rows(opt.out / "diagnostics.csv", "diagnostics", report.rows, beta);

  auto collect = [&](std::size_t n, const std::string& metric, double t) {
    std::vector<double> v;
    for (const auto& r : report.rows) {
      if (r.n == n && r.metric == metric && r.t == t) v.push_back(r.value);
    }
    return v;
  };
  CsvWriter summary((opt.out / "summary.csv").string(), "diagnostics-summary", {"N", "t", "statistic", "value"});
  Series var_m{"var_martingale", horizon, {}, {}, std::nullopt, -1.0};
  Series mean_qv{"mean_quadratic_variation", horizon, {}, {}, std::nullopt, -1.0};
  Series ratio{"isometry_ratio", horizon, {}, {}, std::nullopt, std::numeric_limits<double>::quiet_NaN()};
  Series flat_var{"var_martingale_constant", horizon, {}, {}, std::nullopt, std::numeric_limits<double>::quiet_NaN()};
  Series residual{"median_weak_residual", horizon, {}, {}, std::nullopt, -0.5};
  Series rate{"increment_rate", horizon, {}, {}, std::nullopt, std::numeric_limits<double>::quiet_NaN()};
  std::vector<Series> lag_series;
  for (double lag : c.increment_lags) {
    lag_series.push_back({"increment_msq", lag, {}, {}, std::nullopt, std::numeric_limits<double>::quiet_NaN()});
  }
  for (std::size_t n : c.population_sizes) {
    const double v = detail::variance(collect(n, "martingale", horizon));
    const double q = detail::mean(collect(n, "quadratic_variation", horizon));
    const auto flat_values = collect(n, "martingale_constant", horizon);
    double flat_sq = 0.0;
    for (double x : flat_values) flat_sq = std::max(flat_sq, std::abs(x));
    const double res = detail::median(collect(n, "weak_residual", horizon));
    double max_rate = 0.0;
    for (std::size_t l = 0; l < c.increment_lags.size(); ++l) {
      const double lag = c.increment_lags[l];
      const double msq = detail::mean(collect(n, "increment_sq", lag));
      lag_series[l].sizes.push_back(n);
      lag_series[l].value.push_back(msq);
      summary.row(n, lag, "increment_msq", msq);
      max_rate = std::max(max_rate, msq / lag);
    }
    for (auto* s : {&var_m, &mean_qv, &ratio, &flat_var, &residual, &rate}) s->sizes.push_back(n);
    var_m.value.push_back(v);
    mean_qv.value.push_back(q);
    ratio.value.push_back(v / q);
    flat_var.value.push_back(flat_sq);
    residual.value.push_back(res);
    rate.value.push_back(max_rate);
    summary.row(n, horizon, "var_martingale", detail::optional_number(v));
    summary.row(n, horizon, "mean_quadratic_variation", q);
    summary.row(n, horizon, "isometry_ratio", detail::optional_number(v / q));
    summary.row(n, horizon, "max_abs_martingale_constant", flat_sq);
    summary.row(n, horizon, "median_weak_residual", res);
    summary.row(n, horizon, "increment_rate", max_rate);
  }
  var_m.fit = detail::try_fit(var_m.sizes, var_m.value);
  mean_qv.fit = detail::try_fit(mean_qv.sizes, mean_qv.value);
  residual.fit = detail::try_fit(residual.sizes, residual.value);
  report.series = {var_m, mean_qv, ratio, flat_var, residual, rate};
  report.series.insert(report.series.end(), lag_series.begin(), lag_series.end());
  detail::write_slopes(opt.out / "slopes.csv", report.series);
  summary.close();
  detail::finish_manifest(manifest, opt.out);
  return report;
}

/// Dispatches a subcommand by name.
inline ExperimentReport run_command(const std::string& command, const ExperimentConfig& c,
                                    const RunOptions& opt) {
  if (command == "simulate") return run_simulate(c, opt);
  if (command == "solve-nonlocal") return run_solve(c, opt, false);
  if (command == "solve-local") return run_solve(c, opt, true);
  if (command == "converge-meanfield") return run_converge_meanfield(c, opt);
  if (command == "converge-local") return run_converge_local(c, opt);
  if (command == "diagnostics") return run_diagnostics(c, opt);
  throw std::invalid_argument("unknown command " + command);
}

/// Reruns the experiment recorded in a manifest into `opt.out` and returns
/// the names of data files whose digests differ (empty when reproduced).
inline std::vector<std::string> rerun_from_manifest(const std::filesystem::path& manifest_path,
                                                    const RunOptions& opt,
                                                    std::optional<std::size_t> workers = std::nullopt) {
  const RunManifest original = RunManifest::read(manifest_path);
  ExperimentConfig c = parse_config(original.config_ini, manifest_path.string());
  if (workers) c.workers = *workers;
  run_command(original.command, c, opt);
  const RunManifest fresh = RunManifest::read(opt.out / "manifest.json");
  const auto a = original.digests();
  const auto b = fresh.digests();
  std::vector<std::string> mismatched;
  for (const auto& [name, digest] : a) {
    auto it = b.find(name);
    if (it == b.end() || it->second != digest) mismatched.push_back(name);
  }
  for (const auto& [name, digest] : b) {
    if (!a.count(name)) mismatched.push_back(name);
  }
  return mismatched;
}

}  // namespace episcale
