#include "holoreg/experiments.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "holoreg/errors.hpp"
#include "holoreg/exact_engine.hpp"
#include "holoreg/protocols.hpp"

namespace holoreg {

namespace {

DeviceParams bench_device() {
  DeviceParams device;
  device.omega_c = two_pi * 5e9;
  device.kappa = 0.0;
  device.bias_field = 0.18;
  device.length = 0.0275;
  return device;
}

EnsembleGeometry grid_ensemble(std::size_t n, double coupling) {
  EnsembleSpec spec;
  spec.n_spins = n;
  spec.length = 0.0275;
  spec.profile = CouplingProfile::Uniform;
  spec.placement = Placement::Grid;
  spec.coupling_scale = coupling;
  return EnsembleGeometry::build(spec, 0);
}

EnsembleGeometry random_ensemble(std::size_t n, std::uint64_t seed) {
  EnsembleSpec spec;
  spec.n_spins = n;
  spec.length = 0.0275;
  spec.profile = CouplingProfile::Uniform;
  spec.placement = Placement::UniformRandom;
  spec.coupling_scale = two_pi * 20.0;
  return EnsembleGeometry::build(spec, seed);
}

double mean_off_diagonal(const Eigen::MatrixXcd& gram) {
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j) {
        sum += std::abs(gram(i, j));
        ++count;
      }
  return sum / count;
}

}  // namespace

std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t point, std::uint64_t shot) {
  // splitmix64 over the packed identifiers
  std::uint64_t z = seed ^ (point * 0x9e3779b97f4a7c15ull) ^ (shot + 0xbf58476d1ce4e5b9ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void parallel_for(int jobs, int count, const std::function<void(int)>& body) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next(0);
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

double fit_exchange_frequency(std::size_t n_spins, double coupling_scale, double krylov_tol) {
  const EnsembleGeometry geometry = grid_ensemble(n_spins, coupling_scale);
  ExactEngineOptions options;
  options.krylov_tol = krylov_tol;
  ExactEngine engine(PhysicalConstants{}, bench_device(), geometry, options);

  const double rate_guess = collective_rabi(geometry);
  const int samples = 24;
  const double t_max = 1.2 / rate_guess;  // stays within the first quarter period
  const double dt = t_max / samples;

  SectorState state = engine.cavity_photon_state();
  const SectorState probe = engine.cavity_photon_state();
  std::vector<double> ts(samples), amps(samples);
  for (int j = 0; j < samples; ++j) {
    engine.evolve(state, Segment(ResonanceWindow{dt}));
    ts[j] = (j + 1) * dt;
    amps[j] = std::abs(engine.overlap(probe, state));
  }

  // least squares on amp = cos(omega t), Newton on the normal equation
  double omega = std::acos(std::clamp(amps[samples / 2], 0.0, 1.0)) / ts[samples / 2];
  for (int it = 0; it < 40; ++it) {
    double f = 0.0, df = 0.0;
    for (int j = 0; j < samples; ++j) {
      const double c = std::cos(omega * ts[j]);
      const double s = std::sin(omega * ts[j]);
      f += (c - amps[j]) * (-ts[j] * s);
      df += ts[j] * ts[j] * (s * s - (c - amps[j]) * c);
    }
    if (df == 0.0) break;
    const double step = f / df;
    omega -= step;
    if (std::abs(step) < 1e-15 * omega) break;
  }
  return omega;
}

SweepOutcome run_named_sweep(const std::string& name, const std::vector<double>& grid,
                             int shots, std::uint64_t seed, int jobs) {
  if (grid.size() < 2) throw ConfigError("sweep grid needs at least two points");
  if (shots < 1) throw ConfigError("sweep needs at least one shot");
  SweepOutcome outcome;
  outcome.points.resize(grid.size());

  auto reduce_shots = [&](std::size_t point, const std::vector<double>& values) {
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    const double stderr_ = values.size() > 1
                               ? std::sqrt(var / (static_cast<double>(values.size()) - 1.0) /
                                           static_cast<double>(values.size()))
                               : 0.0;
    outcome.points[point] = SweepPoint{grid[point], mean, stderr_};
  };

  if (name == "rabi_vs_n") {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto n = static_cast<std::size_t>(grid[p]);
      outcome.points[p] = SweepPoint{grid[p], fit_exchange_frequency(n, two_pi * 20.0), 0.0};
    }
  } else if (name == "gram_offdiag_vs_n") {
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const auto n = static_cast<std::size_t>(grid[p]);
      const RegisterLayout layout =
          select_register_modes(8, ModeScheme::Dense, 0.0275, n);
      std::vector<double> values(shots);
      parallel_for(jobs, shots, [&](int s) {
        const EnsembleGeometry geom = random_ensemble(n, shot_seed(seed, p, s));
        std::vector<double> ks;
        for (std::size_t i = 0; i < layout.size(); ++i) ks.push_back(layout.wavenumber(i));
        values[s] = mean_off_diagonal(gram_matrix(geom, ks));
      });
      reduce_shots(p, values);
    }
  } else if (name == "echo_register_gain_vs_eps") {
    const std::size_t n = 1000;
    const double interval = 1.0;
    const double sigma = 5.0;  // sigma * interval = 5
    const RegisterLayout layout = select_register_modes(3, ModeScheme::Stride3, 0.0275, n);
    for (std::size_t p = 0; p < grid.size(); ++p) {
      const double eps = grid[p];
      std::vector<double> values(shots);
      parallel_for(jobs, shots, [&](int s) {
        std::mt19937_64 rng(shot_seed(seed, p, s));
        const EnsembleGeometry geom = random_ensemble(n, rng());
        const auto detunings = draw_inhomogeneity(n, sigma, rng);
        const auto gains = echo_error_injection(geom, layout, eps, eps, detunings, interval);
        values[s] = gains.register_gains.at(1);  // winding 3
      });
      reduce_shots(p, values);
    }
  } else {
    throw ConfigError("unknown sweep experiment '" + name + "'");
  }

  std::vector<double> xs, ys;
  for (const auto& pt : outcome.points) {
    xs.push_back(pt.x);
    ys.push_back(pt.value);
  }
  outcome.fit = fit_loglog(xs, ys);
  return outcome;
}

namespace {

RegisterLayout layout_from_config(const ExperimentConfig& config,
                                  const EnsembleGeometry* geometry) {
  const double length = geometry            ? geometry->length()
                        : config.device.length > 0 ? config.device.length
                                                   : 1.0;
  std::optional<std::size_t> n_spins;
  if (geometry) n_spins = geometry->n_spins();
  RegisterLayout layout = select_register_modes(config.mode_count, config.scheme, length,
                                                n_spins, config.crosstalk_budget);
  if (config.layout_discrete) {
    if (!geometry) throw ConfigError("discrete layout needs an [ensemble] section");
    layout = discrete_layout(*geometry, layout.windings, config.crosstalk_budget);
  }
  return layout;
}

nlohmann::json gram_to_json(const Eigen::MatrixXcd& gram) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      row.push_back({gram(i, j).real(), gram(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

SimReport cmd_overlap(const ExperimentConfig& config) {
  SimReport report("overlap", config);

  std::optional<EnsembleGeometry> geometry;
  if (config.has_ensemble)
    geometry = EnsembleGeometry::build(config.ensemble, config.ensemble_seed);

  const RegisterLayout layout =
      layout_from_config(config, geometry ? &*geometry : nullptr);

  auto& results = report.results();
  results["windings"] = layout.windings;
  results["gram"] = gram_to_json(layout.gram);
  results["max_off_diagonal"] = layout.max_off_diagonal();

  nlohmann::json table;
  table["columns"] = {"delta_w", "continuum_overlap"};
  table["rows"] = nlohmann::json::array();
  for (double dw = -6.0; dw <= 6.0 + 1e-9; dw += 0.25)
    table["rows"].push_back({dw, continuum_overlap(dw)});
  results["overlap_table"] = table;
  results["overlap_at_2"] = continuum_overlap(2.0);

  if (geometry) {
    nlohmann::json dtable;
    dtable["columns"] = {"delta_w", "discrete_re", "discrete_im", "abs_error_vs_continuum"};
    dtable["rows"] = nlohmann::json::array();
    for (double dw = -6.0; dw <= 6.0 + 1e-9; dw += 0.25) {
      const auto discrete =
          mode_overlap(*geometry, dw * two_pi / geometry->length());
      const auto continuum = continuum_overlap_phased(dw);
      dtable["rows"].push_back(
          {dw, discrete.real(), discrete.imag(), std::abs(discrete - continuum)});
    }
    results["discrete_table"] = dtable;
  }
  return report;
}

SimReport cmd_sweep(const ExperimentConfig& config) {
  if (config.sweep_experiment.empty()) throw ConfigError("config has no [sweep] section");
  SimReport report("sweep", config);
  const SweepOutcome outcome = run_named_sweep(config.sweep_experiment, config.sweep_grid,
                                               config.sweep_shots, config.seed, config.jobs);
  auto& results = report.results();
  nlohmann::json table;
  table["columns"] = {"x", "value", "stderr"};
  table["rows"] = nlohmann::json::array();
  for (const auto& pt : outcome.points) table["rows"].push_back({pt.x, pt.value, pt.stderr_});
  results["points"] = table;
  results["experiment"] = config.sweep_experiment;
  results["slope"] = outcome.fit.slope;
  results["slope_stderr"] = outcome.fit.slope_stderr;
  results["intercept"] = outcome.fit.intercept;
  return report;
}

namespace {

SimReport simulate_exact(const ExperimentConfig& config) {
  if (!config.has_ensemble) throw ConfigError("exact engine needs an [ensemble] section");
  SimReport report("simulate", config);
  const EnsembleGeometry geometry =
      EnsembleGeometry::build(config.ensemble, config.ensemble_seed);
  const RegisterLayout layout = layout_from_config(config, &geometry);
  const double exchange = collective_rabi(geometry);

  ExactEngineOptions options;
  options.max_excitations = config.max_excitations;
  options.idle_detuning = config.idle_detuning_factor * exchange;
  options.krylov_tol = config.krylov_tol;
  std::mt19937_64 rng(config.seed);
  if (config.noise.sigma_inhomogeneity > 0)
    options.static_detunings =
        draw_inhomogeneity(geometry.n_spins(), config.noise.sigma_inhomogeneity, rng);

  ExactEngine engine(config.constants, config.device, geometry, options);

  CompileOptions copts;
  copts.idle_detuning = options.idle_detuning;
  copts.cpb_idle_detuning = options.cpb_idle_detuning;
  copts.gradient_duration = config.gradient_duration;
  const CompiledProtocol compiled =
      compile(config.program, layout, config.constants, config.device, exchange, copts);

  SectorState state = config.initial_location == "cavity" ? engine.cavity_photon_state()
                                                          : engine.cpb_excited_state();
  const SectorState initial = state;
  if (config.initial_state == "plus") {
    state.amplitudes *= 1.0 / std::numbers::sqrt2;
    state.amplitudes[0] = 1.0 / std::numbers::sqrt2;
  }
  const SectorState prepared = state;

  engine.evolve(state, compiled.schedule);

  auto& results = report.results();
  nlohmann::json occ;
  for (std::size_t i = 0; i < layout.size(); ++i)
    occ["w" + std::to_string(layout.windings[i])] =
        engine.mode_occupation(state, layout.wavenumber(i));
  occ["cavity"] = engine.cavity_population(state);
  occ["cpb"] = engine.cpb_population(state);
  results["occupations"] = occ;
  results["norm"] = state.norm_squared();
  results["norm_deficit"] = state.norm_deficit;
  results["schedule_segments"] = compiled.schedule.segments.size();
  results["schedule_text"] = compiled.schedule.to_text();
  report.doc()["diagnostics"]["matvecs"] = engine.stats().matvecs;

  for (const auto& [name, phase] : compiled.qubit_phases)
    results["qubit_phases"][name] = {phase.real(), phase.imag()};

  if (config.expect == ExpectKind::Roundtrip) {
    if (compiled.qubit_phases.size() != 1)
      throw ConfigError("roundtrip expectation needs exactly one qubit");
    const auto phase = compiled.qubit_phases.begin()->second;
    SectorState target = prepared;
    for (Eigen::Index i = 1; i < target.amplitudes.size(); ++i)
      target.amplitudes[i] *= phase;
    const double fidelity = std::norm(engine.overlap(target, state));
    results["roundtrip_fidelity"] = fidelity;
  }
  return report;
}

SimReport simulate_register(const ExperimentConfig& config) {
  SimReport report("simulate", config);
  std::optional<EnsembleGeometry> geometry;
  if (config.has_ensemble)
    geometry = EnsembleGeometry::build(config.ensemble, config.ensemble_seed);
  const RegisterLayout layout = layout_from_config(config, geometry ? &*geometry : nullptr);

  RegisterEngineOptions options;
  options.fock_levels = config.fock_levels;
  options.crosstalk = config.crosstalk;
  options.kappa = config.device.kappa;
  options.exchange_rate =
      geometry ? collective_rabi(*geometry) : collective_rabi(1e11, two_pi * 20.0);
  options.g_cpb = config.device.g_cpb;
  options.gradient_duration = config.gradient_duration;
  RegisterEngine engine(layout, options);

  RegisterState state = engine.vacuum_state();
  const std::vector<GateOp> gates = lower_to_gates(config.program);
  const ProgramResult outcome = engine.run_program(state, gates);

  auto& results = report.results();
  for (const auto& entry : outcome.log) {
    nlohmann::json op;
    op["op"] = entry.op;
    op["duration"] = entry.duration;
    op["norm"] = entry.norm;
    op["leakage"] = entry.leakage;
    op["occupations"] = entry.occupations;
    report.doc()["operations"].push_back(op);
  }
  nlohmann::json occ;
  for (std::size_t i = 0; i < layout.size(); ++i)
    occ["w" + std::to_string(layout.windings[i])] = engine.mode_occupation(state, i);
  occ["cavity"] = engine.site_occupation(state, RegisterEngine::cavity_site);
  occ["cpb"] = engine.site_occupation(state, RegisterEngine::cpb_site);
  results["occupations"] = occ;
  results["norm"] = state.amplitudes.squaredNorm();
  results["leakage"] = engine.truncation_leakage(state);
  for (const auto& [name, phase] : outcome.qubit_phases)
    results["qubit_phases"][name] = {phase.real(), phase.imag()};
  for (const auto& [name, loc] : outcome.qubit_locations)
    results["qubit_locations"][name] = loc;

  if (config.expect == ExpectKind::Bell) {
    const auto loc_a = outcome.qubit_locations.at(config.expect_qubit_a);
    const auto loc_b = outcome.qubit_locations.at(config.expect_qubit_b);
    if (loc_a == "cpb" || loc_a == "cavity" || loc_b == "cpb" || loc_b == "cavity")
      throw ConfigError("bell expectation needs both qubits stored in modes");
    const std::size_t site_a = engine.mode_site(std::stoul(loc_a));
    const std::size_t site_b = engine.mode_site(std::stoul(loc_b));
    Eigen::MatrixXcd rho = engine.reduced_density(state, {site_a, site_b});
    const int nf = config.fock_levels;
    // undo the recorded deterministic phases on each |1> amplitude
    const auto pa = std::conj(outcome.qubit_phases.at(config.expect_qubit_a));
    const auto pb = std::conj(outcome.qubit_phases.at(config.expect_qubit_b));
    Eigen::VectorXcd corr = Eigen::VectorXcd::Ones(rho.rows());
    for (Eigen::Index idx = 0; idx < rho.rows(); ++idx) {
      const int na = static_cast<int>(idx) / nf;
      const int nb = static_cast<int>(idx) % nf;
      if (na == 1) corr[idx] *= pa;
      if (nb == 1) corr[idx] *= pb;
    }
    rho = corr.asDiagonal() * rho * corr.conjugate().asDiagonal();
    Eigen::VectorXcd bell = Eigen::VectorXcd::Zero(rho.rows());
    bell[0] = 1.0 / std::numbers::sqrt2;
    bell[1 * nf + 1] = 1.0 / std::numbers::sqrt2;
    results["bell_fidelity"] = (bell.adjoint() * rho * bell)(0, 0).real();
  }
  return report;
}

SimReport simulate_classical(const ExperimentConfig& config) {
  if (!config.has_ensemble) throw ConfigError("classical demo needs an [ensemble] section");
  SimReport report("simulate", config);
  const EnsembleGeometry geometry =
      EnsembleGeometry::build(config.ensemble, config.ensemble_seed);
  const ClassicalDemoResult demo = classical_echo_demo(geometry, config.demo);

  auto& results = report.results();
  nlohmann::json table;
  table["columns"] = {"time", "signal"};
  table["rows"] = nlohmann::json::array();
  for (std::size_t i = 0; i < demo.trace.times.size(); ++i)
    table["rows"].push_back({demo.trace.times[i], demo.trace.values[i]});
  results["trace"] = table;
  results["stored_amplitudes"] = demo.stored_amplitudes;
  results["revived_peaks"] = demo.revived_peaks;
  results["leakage_peaks"] = demo.leakage_peaks;
  return report;
}

}  // namespace

SimReport cmd_simulate(const ExperimentConfig& config) {
  switch (config.engine) {
    case EngineKind::Exact: return simulate_exact(config);
    case EngineKind::Register: return simulate_register(config);
    default: return simulate_classical(config);
  }
}

}  // namespace holoreg
