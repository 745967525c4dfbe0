// Acceptance suite: one PASS/FAIL line per criterion. Usage:
//   acceptance <configs dir> <scratch output dir>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "episcale/episcale.hpp"
#include "support/oracles.hpp"

using namespace episcale;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

PopulationState population(std::size_t n, double p_infected, std::uint64_t seed) {
  CompartmentProfile c;
  c.infected_base = p_infected;
  return sample_initial_population(InitialDistribution(SpatialDensity(), c), n, seed);
}

ModelParams params_with(Regime regime, double p, double q) {
  ModelParams m;
  m.p = p;
  m.q = q;
  m.regime = std::move(regime);
  return m;
}

InitialDistribution smooth_initial() {
  CompartmentProfile c;
  c.infected_base = 0.05;
  c.infected_amplitude = 0.5;
  c.infected_center = {0.6, 0.4};
  c.infected_width = 0.15;
  return InitialDistribution(SpatialDensity({{SineBumpDensity{}, 1.0}, {UniformDensity{}, 1.0}}), c);
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (!(v[k] < v[k - 1])) return false;
  }
  return !v.empty();
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + fmt("%.4g", x);
  return s;
}

// C1: exact count conservation per event and per-cell mass conservation.
Outcome conservation() {
  const auto params = params_with(MeanFieldRegime{InteractionKernel::constant(1.0)}, 1.0, 3.0);
  std::size_t events = 0;
  bool counts_ok = true;
  for (std::uint64_t r = 0; events < 1000000; ++r) {
    const std::size_t n = 100000;
    Engine engine(population(n, 0.01, stream_seed(1, r, 0)), params, make_kernel_spec(params, n), stream_seed(1, r, 1));
    auto counts = engine.counts();
    while (auto e = engine.step()) {
      ++events;
      if (e->kind == EventKind::Infection) {
        --counts[0];
        ++counts[1];
      } else {
        --counts[1];
        ++counts[2];
      }
      const auto c = engine.counts();
      if (c != counts || c[0] + c[1] + c[2] != n) counts_ok = false;
    }
  }
  const GridField f0 = initial_field(smooth_initial(), 64);
  auto drift = [&](const auto& rhs) {
    double worst = 0.0;
    rk4_run(f0, rhs, 1e-3, 1000, [&](std::size_t, const GridField& y) {
      for (std::size_t c = 0; c < y.cells(); ++c) worst = std::max(worst, std::abs(y.cell_sum(c) - f0.cell_sum(c)));
    });
    return worst;
  };
  const double nonlocal = drift(NonlocalRhs(InteractionKernel::gaussian(1.0, 0.2), 1.0, 3.0, 64));
  const double local = drift(LocalRhs(1.0, 3.0));
  return {counts_ok && nonlocal <= 1e-10 && local <= 1e-10,
          fmt("%zu events, counts exact=%s, cell drift nonlocal=%.2e local=%.2e", events,
              counts_ok ? "yes" : "no", nonlocal, local)};
}

// C2: incremental rates against brute force; cell lists against full sums.
Outcome rate_oracle() {
  double worst = 0.0;
  std::size_t checked = 0;
  const std::vector<ModelParams> regimes{params_with(MeanFieldRegime{InteractionKernel::gaussian(1.0, 0.2)}, 1.0, 3.0),
                                         params_with(LocalRegime{0.25, 2.0}, 1.0, 3.0)};
  for (std::size_t g = 0; g < regimes.size(); ++g) {
    const auto& params = regimes[g];
    std::size_t regime_events = 0;
    for (std::uint64_t r = 0; regime_events < 10000; ++r) {
      const std::size_t n = 300;
      const auto spec = make_kernel_spec(params, n);
      Engine engine(population(n, 0.2, stream_seed(2 + g, r, 0)), params, spec, stream_seed(2 + g, r, 1));
      while (regime_events < 10000 && engine.step()) {
        ++regime_events;
        auto kernel = [&](Point a, Point b) { return kernel_value(spec, a, b); };
        const auto ref = oracle::brute_pressure(engine.positions(), engine.states(), params.q, kernel);
        double total = params.p * static_cast<double>(engine.count(HealthState::I));
        for (std::size_t i = 0; i < n; ++i) {
          worst = std::max(worst, std::abs(engine.pressure(i) - ref[i]));
          if (engine.states()[i] == HealthState::S && engine.count(HealthState::I) > 0) total += ref[i];
        }
        worst = std::max(worst, std::abs(engine.total_rate() - total) / std::max(1.0, total));
      }
      if (r > 1000) break;
    }
    checked += regime_events;
  }

  Rng rng(77);
  bool exact = true;
  for (int config = 0; config < 100; ++config) {
    const std::size_t n = 20 + uniform_index(rng, 481);
    const auto params = params_with(LocalRegime{0.05 + 0.28 * uniform01(rng), 2.0}, 1.0, 1.0 + uniform01(rng));
    const auto pop = population(n, 0.1 + 0.5 * uniform01(rng), rng());
    const auto spec = make_kernel_spec(params, n);
    const auto index = build_spatial_index(pop, spec);
    const double radius = support_radius(spec);
    for (std::size_t i = 0; i < n; ++i) {
      if (index.neighbors(pop.positions, pop.positions[i]) != oracle::brute_neighbors(pop.positions, pop.positions[i], radius))
        exact = false;
      if (pop.states[i] != HealthState::S) continue;
      double full = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (pop.states[j] == HealthState::I) full += eval_tau(spec, params, n, pop.positions[i], pop.positions[j]);
      }
      if (infection_pressure(pop, index, spec, params, i) != full) exact = false;
    }
  }
  return {checked >= 20000 && worst <= 1e-9 && exact,
          fmt("%zu events checked, max rate error %.2e; 100 cell-list configurations exact=%s", checked, worst,
              exact ? "yes" : "no")};
}

// C3: constant kernel aggregates against an adaptive classical SIR solve.
Outcome meanfield_closure() {
  const double p = 1.0, q = 3.0;
  const GridField f0 = initial_field(smooth_initial(), 64);
  const auto out = rk4_integrate(f0, NonlocalRhs(InteractionKernel::constant(1.0), p, q, 64), 1e-3, 10000, 100);
  const auto ref = oracle::classical_sir({f0.mass(HealthState::S), f0.mass(HealthState::I), f0.mass(HealthState::R)},
                                         q, p, 0.1, 100);
  double worst = 0.0;
  for (std::size_t k = 0; k < out.size(); ++k) {
    for (HealthState a : kHealthStates) worst = std::max(worst, std::abs(out[k].mass(a) - ref[k][index_of(a)]));
  }
  return {worst <= 1e-4, fmt("sup aggregate error %.2e over horizon 10", worst)};
}

// C4: pointwise conserved quantity of the local field system.
Outcome local_invariant() {
  const double p = 1.0, q = 3.0, dt = 1e-4, horizon = 1.0;
  const GridField f0 = initial_field(smooth_initial(), 64);
  auto invariant = [&](const GridField& f, std::size_t c) {
    const double s = f.at(HealthState::S, c);
    return s + f.at(HealthState::I, c) - p / q * std::log(s);
  };
  double worst = 0.0;
  rk4_run(f0, LocalRhs(p, q), dt, static_cast<std::size_t>(horizon / dt), [&](std::size_t step, const GridField& y) {
    const double t = static_cast<double>(step) * dt;
    if (step == 0) return;
    for (std::size_t c = 0; c < y.cells(); ++c) {
      if (y.at(HealthState::S, c) <= 1e-6) continue;
      worst = std::max(worst, std::abs(invariant(y, c) - invariant(f0, c)) / std::max(t, 1.0));
    }
  });
  return {worst <= 1e-8, fmt("max drift per unit time %.2e", worst)};
}

struct Context {
  fs::path configs;
  fs::path out;
};

// C5: mean-field convergence and the null-dynamics slope.
Outcome meanfield_convergence(const Context& ctx) {
  const auto c = load_config((ctx.configs / "meanfield_convergence.ini").string());
  const auto report = run_converge_meanfield(c, {ctx.out / "c5", true});
  bool ok = true;
  std::string detail;
  for (double t : c.snapshot_times) {
    const Series& s = report.find("bounded_lipschitz", t);
    ok = ok && strictly_decreasing(s.value);
    detail += fmt("t=%g medians [%s]; ", t, join(s.value).c_str());
  }
  const auto null_cfg = load_config((ctx.configs / "meanfield_null.ini").string());
  const auto null_report = run_converge_meanfield(null_cfg, {ctx.out / "c5-null", true});
  const Series& s = null_report.find("bounded_lipschitz", null_cfg.snapshot_times.back());
  const double slope = s.fit ? s.fit->slope : std::nan("");
  ok = ok && std::abs(slope + 0.5) <= 0.15;
  return {ok, detail + fmt("p=q=0 slope %.3f", slope)};
}

// C6, C7, C9 share one local convergence run.
struct LocalOutcomes {
  Outcome mollification, local_limit, commutator;
};

LocalOutcomes local_convergence(const Context& ctx) {
  const auto c = load_config((ctx.configs / "local_convergence.ini").string());
  const auto report = run_converge_local(c, {ctx.out / "c6", true});
  const double beta = std::get<LocalRegime>(c.params.regime).beta;

  bool bound_ok = true;
  std::size_t rows = 0;
  for (const auto& w : report.rows) {
    if (w.metric != "w1_mollification") continue;
    ++rows;
    for (const auto& b : report.rows) {
      if (b.metric == "w1_bound" && b.n == w.n && b.t == w.t && b.replica == w.replica && !(w.value <= b.value))
        bound_ok = false;
    }
  }
  LocalOutcomes out;
  bool slope_ok = true;
  std::string slopes;
  for (double t : c.snapshot_times) {
    const Series& s = report.find("w1_mollification", t);
    const double slope = s.fit ? s.fit->slope : std::nan("");
    slope_ok = slope_ok && slope <= -beta / 2.0 + 0.1;
    slopes += fmt(" t=%g:%.3f", t, slope);
  }
  out.mollification = {bound_ok && slope_ok && rows > 0,
                       fmt("%zu rows within bound=%s; slopes%s (limit %.3f)", rows, bound_ok ? "yes" : "no",
                           slopes.c_str(), -beta / 2.0 + 0.1)};

  const Series& l2 = report.find("l2_local", c.params.horizon);
  out.local_limit = {strictly_decreasing(l2.value), fmt("median L2 at T [%s]", join(l2.value).c_str())};

  bool comm_ok = true;
  std::string comm;
  for (double t : c.snapshot_times) {
    const Series& s = report.find("commutator_sup", t);
    const double slope = s.fit ? s.fit->slope : std::nan("");
    comm_ok = comm_ok && slope < 0.0 && slope <= -beta / 8.0;
    comm += fmt(" t=%g:%.3f", t, slope);
  }
  out.commutator = {comm_ok, fmt("slopes%s (limit %.4f)", comm.c_str(), -beta / 8.0)};
  return out;
}

// C8: martingale isometry, variance scaling and increment bounds.
Outcome martingale(const Context& ctx) {
  const auto c = load_config((ctx.configs / "diagnostics.ini").string());
  const auto report = run_diagnostics(c, {ctx.out / "c8", true});
  const double t = c.params.horizon;
  const Series& ratio = report.find("isometry_ratio", t);
  const Series& var = report.find("var_martingale", t);
  const Series& rate = report.find("increment_rate", t);
  const Series& flat = report.find("var_martingale_constant", t);
  bool ok = c.replicas >= 200;
  for (double r : ratio.value) ok = ok && r >= 0.5 && r <= 2.0;
  const double slope = var.fit ? var.fit->slope : std::nan("");
  ok = ok && std::abs(slope + 1.0) <= 0.3;
  const auto [lo, hi] = std::minmax_element(rate.value.begin(), rate.value.end());
  ok = ok && *hi <= 3.0 * *lo;
  for (double v : flat.value) ok = ok && v == 0.0;
  return {ok, fmt("isometry ratios [%s]; var slope %.3f; increment constants [%s]; constant-phi max |M| %g",
                  join(ratio.value).c_str(), slope, join(rate.value).c_str(),
                  *std::max_element(flat.value.begin(), flat.value.end()))};
}

// C10: exact W1 against enumeration, metric axioms.
Outcome w1_oracle() {
  Rng rng(10);
  auto points = [&](std::size_t n) {
    std::vector<Point> x(n);
    for (auto& p : x) p = {uniform01(rng), uniform01(rng)};
    return x;
  };
  auto atoms = [](const std::vector<Point>& x) {
    AtomSet a;
    for (Point p : x) a.add(p, 1.0 / static_cast<double>(x.size()));
    return a;
  };
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto a = points(5), b = points(5);
    worst = std::max(worst, std::abs(w1_exact(atoms(a), atoms(b)) - oracle::permutation_w1(a, b)));
  }
  std::size_t violations = 0;
  for (int k = 0; k < 1000; ++k) {
    const AtomSet a = atoms(points(4)), b = atoms(points(6)), c = atoms(points(5));
    const double ab = w1_exact(a, b), ba = w1_exact(b, a), bc = w1_exact(b, c), ac = w1_exact(a, c);
    if (ab < 0.0 || std::abs(ab - ba) > 1e-12 || ac > ab + bc + 1e-12 || w1_exact(a, a) > 1e-12) ++violations;
  }
  return {worst <= 1e-10 && violations == 0,
          fmt("max enumeration gap %.2e; %zu axiom violations in 1000 triples", worst, violations)};
}

// C11: rerun the criterion-5 experiment from its manifest.
Outcome reproducibility(const Context& ctx) {
  const fs::path manifest = ctx.out / "c5" / "manifest.json";
  const auto serial = rerun_from_manifest(manifest, {ctx.out / "c11-w1", true}, 1);
  const auto parallel = rerun_from_manifest(manifest, {ctx.out / "c11-w8", true}, 8);
  const auto files = RunManifest::read(manifest).files.size();
  return {serial.empty() && parallel.empty() && files > 0,
          fmt("%zu files; mismatches workers=1: %zu, workers=8: %zu", files, serial.size(), parallel.size())};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::fprintf(stderr, "usage: %s <configs dir> <output dir>\n", argv[0]);
    return 2;
  }
  const Context ctx{argv[1], argv[2]};
  fs::create_directories(ctx.out);

  bool all = true;
  auto report = [&](int id, const std::function<Outcome()>& run) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("C%d %s %s (%.1fs)\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  };

  report(1, conservation);
  report(2, rate_oracle);
  report(3, meanfield_closure);
  report(4, local_invariant);
  report(5, [&] { return meanfield_convergence(ctx); });
  LocalOutcomes local;
  bool local_ran = false;
  auto local_once = [&]() -> const LocalOutcomes& {
    if (!local_ran) {
      local_ran = true;
      try {
        local = local_convergence(ctx);
      } catch (const std::exception& e) {
        const Outcome failed{false, std::string("error: ") + e.what()};
        local = {failed, failed, failed};
      }
    }
    return local;
  };
  report(6, [&] { return local_once().mollification; });
  report(7, [&] { return local_once().local_limit; });
  report(8, [&] { return martingale(ctx); });
  report(9, [&] { return local_once().commutator; });
  report(10, w1_oracle);
  report(11, [&] { return reproducibility(ctx); });
  return all ? 0 : 1;
}
