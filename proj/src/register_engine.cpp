#include "holoreg/register_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/KroneckerProduct>

#include "holoreg/errors.hpp"

namespace holoreg {

namespace {

constexpr std::complex<double> im(0.0, 1.0);

/// exp(-i H t) for the 2x2 manifold H = [[0, w],[w, delta]].
Eigen::Matrix2cd manifold_window(double w, double delta, double t) {
  const double vx = w, vz = -0.5 * delta;
  const double mag = std::hypot(vx, vz);
  const double c = std::cos(mag * t);
  const double s = mag == 0.0 ? t : std::sin(mag * t) / mag;
  Eigen::Matrix2cd u;
  u(0, 0) = c + im * s * vz;
  u(1, 1) = c - im * s * vz;
  u(0, 1) = -im * s * vx;
  u(1, 0) = -im * s * vx;
  return std::polar(1.0, -0.5 * delta * t) * u;
}

struct CzCost {
  double operator()(const Eigen::VectorXd& x) const {
    const double d1 = x[0], t1 = x[1], phi = x[2], d2 = x[3], t2 = x[4];
    if (t1 <= 0.0 || t2 <= 0.0) return 1e6 + t1 * t1 + t2 * t2;
    double cost = 0.0;
    std::complex<double> diag[2][2];
    for (int n = 1; n <= 2; ++n) {
      const double w = std::sqrt(static_cast<double>(n));
      const Eigen::Matrix2cd z = (Eigen::Matrix2cd() << 1.0, 0.0, 0.0,
                                  std::polar(1.0, -phi)).finished();
      const Eigen::Matrix2cd c =
          manifold_window(w, d2, t2) * z * manifold_window(w, d1, t1);
      cost += std::norm(c(0, 1)) + std::norm(c(1, 0));
      diag[n - 1][0] = c(0, 0);
      diag[n - 1][1] = c(1, 1);
    }
    // conditional phase chi = arg(e1) - arg(g1) - arg(e0); want chi = pi
    const std::complex<double> chi_phase =
        diag[1][1] / (diag[0][0] * diag[0][1]);
    cost += 0.25 * std::norm(chi_phase / std::abs(chi_phase) + 1.0);
    return cost;
  }
};

/// Plain Nelder-Mead; deterministic for a fixed start simplex.
template <typename F>
Eigen::VectorXd nelder_mead(const F& f, Eigen::VectorXd x0, double scale, int iters,
                            double* best_out) {
  const int n = static_cast<int>(x0.size());
  std::vector<Eigen::VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (int i = 0; i < n; ++i) pts[i + 1][i] += scale;
  for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  for (int it = 0; it < iters; ++it) {
    std::vector<int> order(n + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    std::vector<Eigen::VectorXd> p2(n + 1);
    std::vector<double> v2(n + 1);
    for (int i = 0; i <= n; ++i) {
      p2[i] = pts[order[i]];
      v2[i] = vals[order[i]];
    }
    pts = std::move(p2);
    vals = std::move(v2);
    if (vals[0] < 1e-26) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) centroid += pts[i];
    centroid /= n;

    const Eigen::VectorXd refl = centroid + (centroid - pts[n]);
    const double fr = f(refl);
    if (fr < vals[0]) {
      const Eigen::VectorXd exp_pt = centroid + 2.0 * (centroid - pts[n]);
      const double fe = f(exp_pt);
      if (fe < fr) {
        pts[n] = exp_pt;
        vals[n] = fe;
      } else {
        pts[n] = refl;
        vals[n] = fr;
      }
    } else if (fr < vals[n - 1]) {
      pts[n] = refl;
      vals[n] = fr;
    } else {
      const Eigen::VectorXd contr = centroid + 0.5 * (pts[n] - centroid);
      const double fc = f(contr);
      if (fc < vals[n]) {
        pts[n] = contr;
        vals[n] = fc;
      } else {
        for (int i = 1; i <= n; ++i) {
          pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
          vals[i] = f(pts[i]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i <= n; ++i)
    if (vals[i] < vals[best]) best = i;
  if (best_out) *best_out = vals[best];
  return pts[best];
}

}  // namespace

CzCalibration calibrate_cz() {
  const CzCost cost;
  std::mt19937_64 rng(20090617);
  std::uniform_real_distribution<double> ud(-2.5, 2.5);
  std::uniform_real_distribution<double> ut(0.8, 6.0);
  std::uniform_real_distribution<double> uphi(0.0, two_pi);

  Eigen::VectorXd best;
  double best_val = 1e9;
  double best_time = 1e9;
  for (int start = 0; start < 400; ++start) {
    Eigen::VectorXd x0(5);
    x0 << ud(rng), ut(rng), uphi(rng), ud(rng), ut(rng);
    double val = 0.0;
    Eigen::VectorXd x = nelder_mead(cost, x0, 0.4, 800, &val);
    // polish with shrinking restarts
    for (double s : {0.05, 0.003, 1e-4, 1e-6}) x = nelder_mead(cost, x, s, 400, &val);
    const double time = x[1] + x[4];
    if (val < 1e-24 && (best_val >= 1e-24 || time < best_time)) {
      best = x;
      best_val = val;
      best_time = time;
    } else if (best_val >= 1e-24 && val < best_val) {
      best = x;
      best_val = val;
      best_time = time;
    }
    if (best_val < 1e-26 && best_time < 7.0 && start > 40) break;
  }

  CzCalibration cal;
  cal.delta1 = best[0];
  cal.t1 = best[1];
  cal.phi = best[2];
  cal.delta2 = best[3];
  cal.t2 = best[4];
  cal.residual = std::sqrt(best_val);

  // local phases of the calibrated diagonal
  const Eigen::Matrix2cd z =
      (Eigen::Matrix2cd() << 1.0, 0.0, 0.0, std::polar(1.0, -cal.phi)).finished();
  const Eigen::Matrix2cd c1 =
      manifold_window(1.0, cal.delta2, cal.t2) * z * manifold_window(1.0, cal.delta1, cal.t1);
  cal.local_phase_cavity = std::arg(c1(0, 0));  // |g,1>
  cal.local_phase_cpb = std::arg(c1(1, 1));     // |e,0>
  return cal;
}

double ThermalRegisterState::mean_occupation(std::size_t site) const {
  const auto& d = distributions.at(site);
  double mean = 0.0;
  for (Eigen::Index n = 0; n < d.size(); ++n) mean += static_cast<double>(n) * d[n];
  return mean;
}

std::vector<int> ThermalRegisterState::sample(std::mt19937_64& rng) const {
  std::vector<int> occ(distributions.size(), 0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t s = 0; s < distributions.size(); ++s) {
    double r = u(rng);
    for (Eigen::Index n = 0; n < distributions[s].size(); ++n) {
      r -= distributions[s][n];
      if (r <= 0.0) {
        occ[s] = static_cast<int>(n);
        break;
      }
    }
  }
  return occ;
}

GateOp GateOp::write(std::string qubit, int mode) {
  GateOp op;
  op.kind = Kind::Write;
  op.qubit = std::move(qubit);
  op.mode_a = mode;
  return op;
}
GateOp GateOp::read(std::string qubit) {
  GateOp op;
  op.kind = Kind::Read;
  op.qubit = std::move(qubit);
  return op;
}
GateOp GateOp::swap(int mode) {
  GateOp op;
  op.kind = Kind::Swap;
  op.mode_a = mode;
  return op;
}
GateOp GateOp::one_qubit(std::string qubit, double angle, double axis_phase, double axis_z) {
  GateOp op;
  op.kind = Kind::OneQubit;
  op.qubit = std::move(qubit);
  op.angle = angle;
  op.axis_phase = axis_phase;
  op.axis_z = axis_z;
  return op;
}
GateOp GateOp::two_qubit(std::string control_qubit, std::string target_qubit) {
  GateOp op;
  op.kind = Kind::TwoQubit;
  op.qubit = std::move(control_qubit) + "," + target_qubit;
  return op;
}
GateOp GateOp::cool(int mode) {
  GateOp op;
  op.kind = Kind::Cool;
  op.mode_a = mode;
  return op;
}

RegisterEngine::RegisterEngine(RegisterLayout layout, RegisterEngineOptions options)
    : layout_(std::move(layout)), options_(options) {
  if (options_.fock_levels < 2) throw ConfigError("fock truncation must be at least 2");
  if (layout_.windings.empty()) throw ConfigError("register layout has no modes");
  dims_.push_back(2);  // CPB
  for (std::size_t s = 0; s < layout_.size() + 1; ++s)
    dims_.push_back(static_cast<std::size_t>(options_.fock_levels));
  strides_.assign(dims_.size(), 1);
  for (int s = static_cast<int>(dims_.size()) - 2; s >= 0; --s)
    strides_[s] = strides_[s + 1] * dims_[s + 1];
  total_dim_ = strides_[0] * dims_[0];
  cz_ = calibrate_cz();
}

RegisterState RegisterEngine::vacuum_state() const {
  RegisterState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total_dim_));
  s.amplitudes[0] = 1.0;
  return s;
}

RegisterState RegisterEngine::qubit_state(std::size_t site, std::complex<double> alpha,
                                          std::complex<double> beta) const {
  RegisterState s = vacuum_state();
  s.amplitudes[0] = alpha;
  s.amplitudes[static_cast<Eigen::Index>(strides_[site])] = beta;
  s.amplitudes.normalize();
  return s;
}

RegisterState RegisterEngine::fock_state(const std::vector<int>& occupations) const {
  if (occupations.size() != dims_.size())
    throw ConfigError("occupation list must cover every site");
  std::size_t idx = 0;
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    if (occupations[s] < 0 || static_cast<std::size_t>(occupations[s]) >= dims_[s])
      throw ConfigError("occupation outside the Fock truncation");
    idx += static_cast<std::size_t>(occupations[s]) * strides_[s];
  }
  RegisterState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total_dim_));
  s.amplitudes[static_cast<Eigen::Index>(idx)] = 1.0;
  return s;
}

void RegisterEngine::apply_one_site(RegisterState& state, const Eigen::MatrixXcd& u,
                                    std::size_t site) const {
  const std::size_t d = dims_[site];
  const std::size_t stride = strides_[site];
  const std::size_t block = d * stride;
  Eigen::VectorXcd tmp(static_cast<Eigen::Index>(d));
  for (std::size_t base = 0; base < total_dim_; base += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      for (std::size_t l = 0; l < d; ++l)
        tmp[static_cast<Eigen::Index>(l)] =
            state.amplitudes[static_cast<Eigen::Index>(base + lo + l * stride)];
      const Eigen::VectorXcd out = u * tmp;
      for (std::size_t l = 0; l < d; ++l)
        state.amplitudes[static_cast<Eigen::Index>(base + lo + l * stride)] =
            out[static_cast<Eigen::Index>(l)];
    }
  }
}

void RegisterEngine::apply_two_site(RegisterState& state, const Eigen::MatrixXcd& u,
                                    std::size_t site_a, std::size_t site_b) const {
  const std::size_t da = dims_[site_a], db = dims_[site_b];
  const std::size_t sa = strides_[site_a], sb = strides_[site_b];
  const std::size_t d = da * db;
  Eigen::VectorXcd tmp(static_cast<Eigen::Index>(d));
  std::vector<std::size_t> offsets(d);
  for (std::size_t la = 0; la < da; ++la)
    for (std::size_t lb = 0; lb < db; ++lb) offsets[la * db + lb] = la * sa + lb * sb;

  // enumerate all indices with both site digits zero
  std::vector<std::size_t> rest;
  rest.reserve(total_dim_ / d);
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    const std::size_t a_digit = (idx / sa) % da;
    const std::size_t b_digit = (idx / sb) % db;
    if (a_digit == 0 && b_digit == 0) rest.push_back(idx);
  }
  for (const std::size_t base : rest) {
    for (std::size_t l = 0; l < d; ++l)
      tmp[static_cast<Eigen::Index>(l)] =
          state.amplitudes[static_cast<Eigen::Index>(base + offsets[l])];
    const Eigen::VectorXcd out = u * tmp;
    for (std::size_t l = 0; l < d; ++l)
      state.amplitudes[static_cast<Eigen::Index>(base + offsets[l])] =
          out[static_cast<Eigen::Index>(l)];
  }
}

Eigen::MatrixXcd RegisterEngine::fock_lowering() const {
  const int nf = options_.fock_levels;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nf, nf);
  for (int n = 1; n < nf; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

void RegisterEngine::check_leakage(RegisterState& state, const char* context) const {
  const double leak = truncation_leakage(state);
  if (leak > options_.leakage_limit)
    throw SimulationError(std::string(context) + ": truncation overflow, top-level population " +
                          std::to_string(leak));
}

double RegisterEngine::swap_duration() const {
  return 0.5 * std::numbers::pi / options_.exchange_rate + 2.0 * options_.gradient_duration;
}

double RegisterEngine::cpb_swap_duration() const {
  if (options_.g_cpb <= 0) throw SimulationError("CPB coupling disabled");
  return 0.5 * std::numbers::pi / options_.g_cpb;
}

void RegisterEngine::swap_mode_cavity(RegisterState& state, std::size_t mode) {
  if (mode >= n_modes()) throw SimulationError("swap target outside the layout");
  const double kappa_norm = options_.kappa / options_.exchange_rate;
  const Eigen::MatrixXcd a = fock_lowering();
  const Eigen::MatrixXcd num = a.adjoint() * a;
  const int nf = options_.fock_levels;
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(nf, nf);

  // cavity decay while the stored wavenumber travels to and from k = 0
  if (options_.kappa > 0 && options_.gradient_duration > 0) cavity_decay(state, options_.gradient_duration);

  if (!options_.crosstalk) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(nf * nf, nf * nf);
    // pair ordering (cavity, mode): index = n_cav * nf + n_mode
    h += Eigen::kroneckerProduct(a.adjoint(), a).eval();
    h += Eigen::kroneckerProduct(a, a.adjoint()).eval();
    h -= im * 0.5 * kappa_norm * Eigen::kroneckerProduct(num, eye).eval();
    const Eigen::MatrixXcd u = dense_exp(-im * 0.5 * std::numbers::pi * h);
    const double before = state.amplitudes.squaredNorm();
    apply_two_site(state, u, cavity_site, mode_site(mode));
    state.norm_deficit += std::max(0.0, before - state.amplitudes.squaredNorm());
  } else {
    // the cavity exchanges with the Gram-weighted bright combination seen
    // from mode `mode`'s frame; spectators enter with weight M(k_j - k_i)
    std::vector<std::complex<double>> weights(n_modes());
    for (std::size_t j = 0; j < n_modes(); ++j)
      weights[j] = layout_.gram(static_cast<Eigen::Index>(mode), static_cast<Eigen::Index>(j));
    ApplyFn apply = [&](const Eigen::VectorXcd& x, Eigen::VectorXcd& y) {
      y.setZero();
      const std::size_t sc = strides_[cavity_site];
      const std::size_t dc = dims_[cavity_site];
      for (std::size_t j = 0; j < n_modes(); ++j) {
        if (std::abs(weights[j]) == 0.0) continue;
        const std::size_t sm = strides_[mode_site(j)];
        const std::size_t dm = dims_[mode_site(j)];
        for (std::size_t idx = 0; idx < total_dim_; ++idx) {
          const std::complex<double> amp = x[static_cast<Eigen::Index>(idx)];
          if (amp == 0.0) continue;
          const std::size_t nc = (idx / sc) % dc;
          const std::size_t nm = (idx / sm) % dm;
          // a_c^dag b_j: (nc, nm) -> (nc + 1, nm - 1)
          if (nm > 0 && nc + 1 < dc) {
            const double amp_f = std::sqrt(static_cast<double>(nc + 1) * static_cast<double>(nm));
            y[static_cast<Eigen::Index>(idx + sc - sm)] += weights[j] * amp_f * amp;
          }
          // a_c b_j^dag
          if (nc > 0 && nm + 1 < dm) {
            const double amp_f = std::sqrt(static_cast<double>(nc) * static_cast<double>(nm + 1));
            y[static_cast<Eigen::Index>(idx - sc + sm)] += std::conj(weights[j]) * amp_f * amp;
          }
        }
      }
      if (kappa_norm > 0) {
        for (std::size_t idx = 0; idx < total_dim_; ++idx) {
          const std::size_t nc = (idx / sc) % dc;
          y[static_cast<Eigen::Index>(idx)] +=
              -im * 0.5 * kappa_norm * static_cast<double>(nc) * x[static_cast<Eigen::Index>(idx)];
        }
      }
      y *= -im;
    };
    const double before = state.amplitudes.squaredNorm();
    state.amplitudes = expmv(apply, 0.5 * std::numbers::pi, state.amplitudes);
    state.norm_deficit += std::max(0.0, before - state.amplitudes.squaredNorm());
  }

  if (options_.kappa > 0 && options_.gradient_duration > 0) cavity_decay(state, options_.gradient_duration);
  check_leakage(state, "swap_mode_cavity");
}

void RegisterEngine::cpb_one_qubit(RegisterState& state, const Eigen::Matrix2cd& u) {
  apply_one_site(state, u, cpb_site);
}

void RegisterEngine::cpb_one_qubit(RegisterState& state, double angle, double axis_phase,
                                   double axis_z) {
  const double az = std::clamp(axis_z, -1.0, 1.0);
  const double planar = std::sqrt(1.0 - az * az);
  const Eigen::Vector3d axis(std::cos(axis_phase) * planar, std::sin(axis_phase) * planar, az);
  const double c = std::cos(0.5 * angle);
  const std::complex<double> is = im * std::sin(0.5 * angle);
  Eigen::Matrix2cd u;
  u(0, 0) = c - is * axis.z();
  u(1, 1) = c + is * axis.z();
  u(0, 1) = -is * (axis.x() - im * axis.y());
  u(1, 0) = -is * (axis.x() + im * axis.y());
  cpb_one_qubit(state, u);
}

Eigen::MatrixXcd RegisterEngine::jc_window(double detuning, double time,
                                           double kappa_over_g) const {
  const int nf = options_.fock_levels;
  const int d = 2 * nf;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  // pair ordering (CPB, cavity): index = e * nf + n
  for (int n = 0; n < nf; ++n) {
    h(nf + n, nf + n) += detuning;
    h(n, n) += -im * 0.5 * kappa_over_g * static_cast<double>(n);
    h(nf + n, nf + n) += -im * 0.5 * kappa_over_g * static_cast<double>(n);
  }
  for (int n = 0; n + 1 < nf; ++n) {
    const double g = std::sqrt(static_cast<double>(n + 1));
    h(nf + n, n + 1) += g;  // a sigma+ : |g,n+1> -> |e,n>
    h(n + 1, nf + n) += g;
  }
  return dense_exp(-im * time * h);
}

void RegisterEngine::cpb_cavity_swap(RegisterState& state) {
  if (options_.g_cpb <= 0) throw SimulationError("CPB coupling disabled");
  const double before = state.amplitudes.squaredNorm();
  apply_two_site(state, jc_window(0.0, 0.5 * std::numbers::pi, options_.kappa / options_.g_cpb),
                 cpb_site, cavity_site);
  state.norm_deficit += std::max(0.0, before - state.amplitudes.squaredNorm());
  check_leakage(state, "cpb_cavity_swap");
}

void RegisterEngine::cpb_cavity_conditional_phase(RegisterState& state) {
  if (options_.g_cpb <= 0) throw SimulationError("CPB coupling disabled");
  if (cz_.residual > 1e-6)
    throw SimulationError("conditional-phase calibration residual " +
                          std::to_string(cz_.residual));
  const double kog = options_.kappa / options_.g_cpb;
  const double before = state.amplitudes.squaredNorm();
  apply_two_site(state, jc_window(cz_.delta1, cz_.t1, kog), cpb_site, cavity_site);
  Eigen::Matrix2cd z;
  z << 1.0, 0.0, 0.0, std::polar(1.0, -cz_.phi);
  cpb_one_qubit(state, z);
  apply_two_site(state, jc_window(cz_.delta2, cz_.t2, kog), cpb_site, cavity_site);
  state.norm_deficit += std::max(0.0, before - state.amplitudes.squaredNorm());
  check_leakage(state, "conditional_phase");
}

void RegisterEngine::cavity_decay(RegisterState& state, double duration) {
  if (options_.kappa <= 0 || duration <= 0) return;
  const double before = state.amplitudes.squaredNorm();
  const std::size_t sc = strides_[cavity_site];
  const std::size_t dc = dims_[cavity_site];
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    const std::size_t nc = (idx / sc) % dc;
    if (nc > 0)
      state.amplitudes[static_cast<Eigen::Index>(idx)] *=
          std::exp(-0.5 * options_.kappa * duration * static_cast<double>(nc));
  }
  state.norm_deficit += std::max(0.0, before - state.amplitudes.squaredNorm());
}

int RegisterEngine::predicted_cool_cycles(double target_ratio, double wait_factor) {
  return static_cast<int>(std::ceil(-std::log(target_ratio) / wait_factor));
}

int RegisterEngine::cool_mode(RegisterState& state, std::size_t mode) {
  if (options_.kappa <= 0)
    throw SimulationError("cooling requires cavity decay (kappa > 0)");
  const double initial = mode_occupation(state, mode);
  if (initial <= 0.0) return 0;
  const double target = options_.cool_target_ratio * initial;
  const double wait = options_.cool_wait_factor / options_.kappa;
  int cycles = 0;
  while (mode_occupation(state, mode) > target) {
    swap_mode_cavity(state, mode);
    cavity_decay(state, wait);
    if (++cycles > 1000) throw SimulationError("cooling failed to converge");
  }
  return cycles;
}

int RegisterEngine::cool_mode(ThermalRegisterState& state, std::size_t mode) {
  if (options_.kappa <= 0)
    throw SimulationError("cooling requires cavity decay (kappa > 0)");
  const std::size_t site = mode_site(mode);
  const double initial = state.mean_occupation(site);
  if (initial <= 0.0) return 0;
  const double target = options_.cool_target_ratio * initial;
  const double survival =
      std::exp(-options_.kappa * options_.cool_wait_factor / options_.kappa);
  int cycles = 0;
  while (state.mean_occupation(site) > target) {
    // full swap relabels the two distributions exactly
    std::swap(state.distributions[cavity_site], state.distributions[site]);
    // photon-loss channel on the cavity distribution: binomial survival
    const Eigen::VectorXd old = state.distributions[cavity_site];
    Eigen::VectorXd fresh = Eigen::VectorXd::Zero(old.size());
    for (Eigen::Index m = 0; m < old.size(); ++m) {
      for (Eigen::Index n = 0; n <= m; ++n) {
        double binom = 1.0;
        for (Eigen::Index j = 0; j < n; ++j)
          binom *= static_cast<double>(m - j) / static_cast<double>(n - j);
        fresh[n] += old[m] * binom * std::pow(survival, static_cast<double>(n)) *
                    std::pow(1.0 - survival, static_cast<double>(m - n));
      }
    }
    state.distributions[cavity_site] = fresh;
    if (++cycles > 1000) throw SimulationError("cooling failed to converge");
  }
  return cycles;
}

void RegisterEngine::dephasing_kick(RegisterState& state, std::size_t site, double gamma,
                                    double duration, std::mt19937_64& rng) {
  if (gamma <= 0 || duration <= 0) return;
  std::normal_distribution<double> kick(0.0, std::sqrt(2.0 * gamma * duration));
  const double phi = kick(rng);
  const std::size_t s = strides_[site];
  const std::size_t d = dims_[site];
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    const std::size_t n = (idx / s) % d;
    if (n > 0)
      state.amplitudes[static_cast<Eigen::Index>(idx)] *=
          std::polar(1.0, -phi * static_cast<double>(n));
  }
}

double RegisterEngine::site_occupation(const RegisterState& state, std::size_t site) const {
  const std::size_t s = strides_[site];
  const std::size_t d = dims_[site];
  double occ = 0.0;
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    const std::size_t n = (idx / s) % d;
    if (n > 0) occ += static_cast<double>(n) * std::norm(state.amplitudes[static_cast<Eigen::Index>(idx)]);
  }
  return occ;
}

double RegisterEngine::truncation_leakage(const RegisterState& state) const {
  double leak = 0.0;
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    bool top = false;
    for (std::size_t s = 1; s < dims_.size() && !top; ++s)
      top = ((idx / strides_[s]) % dims_[s]) == dims_[s] - 1;
    if (top) leak += std::norm(state.amplitudes[static_cast<Eigen::Index>(idx)]);
  }
  return leak;
}

Eigen::MatrixXcd RegisterEngine::reduced_density(const RegisterState& state,
                                                 const std::vector<std::size_t>& sites) const {
  std::size_t d_sub = 1;
  for (std::size_t s : sites) d_sub *= dims_[s];
  const std::size_t d_rest = total_dim_ / d_sub;
  Eigen::MatrixXcd gathered = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d_rest),
                                                     static_cast<Eigen::Index>(d_sub));
  for (std::size_t idx = 0; idx < total_dim_; ++idx) {
    std::size_t sub = 0;
    for (std::size_t s : sites) sub = sub * dims_[s] + (idx / strides_[s]) % dims_[s];
    std::size_t rest = 0;
    for (std::size_t s = 0; s < dims_.size(); ++s) {
      if (std::find(sites.begin(), sites.end(), s) != sites.end()) continue;
      rest = rest * dims_[s] + (idx / strides_[s]) % dims_[s];
    }
    gathered(static_cast<Eigen::Index>(rest), static_cast<Eigen::Index>(sub)) =
        state.amplitudes[static_cast<Eigen::Index>(idx)];
  }
  return gathered.adjoint() * gathered;
}

std::complex<double> RegisterEngine::overlap(const RegisterState& a, const RegisterState& b) const {
  return a.amplitudes.dot(b.amplitudes);
}

ThermalRegisterState RegisterEngine::thermal_product_state(
    const std::vector<double>& mode_mean_occupations) const {
  if (mode_mean_occupations.size() != n_modes())
    throw ConfigError("one mean occupation per register mode required");
  ThermalRegisterState t;
  t.distributions.resize(dims_.size());
  t.distributions[cpb_site] = Eigen::VectorXd::Zero(2);
  t.distributions[cpb_site][0] = 1.0;
  t.distributions[cavity_site] = Eigen::VectorXd::Zero(options_.fock_levels);
  t.distributions[cavity_site][0] = 1.0;
  for (std::size_t m = 0; m < n_modes(); ++m) {
    const double p = mode_mean_occupations[m];
    Eigen::VectorXd d = Eigen::VectorXd::Zero(options_.fock_levels);
    if (p <= 0) {
      d[0] = 1.0;
    } else {
      // thermal (geometric) distribution with untruncated mean p
      const double q = p / (1.0 + p);
      double norm = 0.0;
      for (Eigen::Index n = 0; n < d.size(); ++n) {
        d[n] = std::pow(q, static_cast<double>(n));
        norm += d[n];
      }
      d /= norm;
    }
    t.distributions[mode_site(m)] = d;
  }
  return t;
}

ProgramResult RegisterEngine::run_program(RegisterState& state,
                                          const std::vector<GateOp>& program) {
  ProgramResult result;
  // where each named qubit currently lives: -2 = CPB, -1 = cavity, >= 0 mode
  std::map<std::string, int> where;
  auto move_phase = [&](int location, std::complex<double> factor, int new_location) {
    for (auto& [name, loc] : where)
      if (loc == location) {
        result.qubit_phases[name] *= factor;
        loc = new_location;
      }
  };

  for (std::size_t n = 0; n < program.size(); ++n) {
    const GateOp& op = program[n];
    OpLogEntry entry;
    try {
      switch (op.kind) {
        case GateOp::Kind::Write: {
          if (op.mode_a < 0 || static_cast<std::size_t>(op.mode_a) >= n_modes())
            throw SimulationError("write target outside the layout");
          for (const auto& [name, loc] : where)
            if (loc == op.mode_a && name != op.qubit)
              throw SimulationError("mode already holds qubit " + name);
          if (!where.count(op.qubit)) {
            where[op.qubit] = -2;  // the freshly prepared CPB excitation
            result.qubit_phases[op.qubit] = 1.0;
          }
          if (where[op.qubit] != -2)
            throw SimulationError("write expects qubit " + op.qubit + " on the CPB");
          cpb_cavity_swap(state);
          move_phase(-2, -im, -1);
          swap_mode_cavity(state, static_cast<std::size_t>(op.mode_a));
          move_phase(-1, -im, op.mode_a);
          entry.op = "write " + op.qubit;
          entry.duration = cpb_swap_duration() + swap_duration();
          break;
        }
        case GateOp::Kind::Read: {
          if (!where.count(op.qubit))
            throw SimulationError("unknown qubit " + op.qubit);
          const int loc = where[op.qubit];
          if (loc < 0) throw SimulationError("read expects qubit " + op.qubit + " in a mode");
          swap_mode_cavity(state, static_cast<std::size_t>(loc));
          move_phase(loc, -im, -1);
          cpb_cavity_swap(state);
          move_phase(-1, -im, -2);
          entry.op = "read " + op.qubit;
          entry.duration = cpb_swap_duration() + swap_duration();
          break;
        }
        case GateOp::Kind::Swap: {
          if (op.mode_a < 0 || static_cast<std::size_t>(op.mode_a) >= n_modes())
            throw SimulationError("swap target outside the layout");
          swap_mode_cavity(state, static_cast<std::size_t>(op.mode_a));
          // cavity and mode contents exchange
          for (auto& [name, loc] : where) {
            if (loc == -1) {
              result.qubit_phases[name] *= -im;
              loc = op.mode_a;
            } else if (loc == op.mode_a) {
              result.qubit_phases[name] *= -im;
              loc = -1;
            }
          }
          entry.op = "swap";
          entry.duration = swap_duration();
          break;
        }
        case GateOp::Kind::OneQubit: {
          if (!op.qubit.empty() && where.count(op.qubit) && where[op.qubit] != -2)
            throw SimulationError("one-qubit gate expects " + op.qubit + " on the CPB");
          if (!op.qubit.empty() && !where.count(op.qubit)) {
            where[op.qubit] = -2;
            result.qubit_phases[op.qubit] = 1.0;
          }
          cpb_one_qubit(state, op.angle, op.axis_phase, op.axis_z);
          entry.op = "one_qubit";
          entry.duration = 0.0;
          break;
        }
        case GateOp::Kind::TwoQubit: {
          const auto comma = op.qubit.find(',');
          const std::string qc = op.qubit.substr(0, comma);
          const std::string qt = op.qubit.substr(comma + 1);
          if (!where.count(qc) || !where.count(qt))
            throw SimulationError("two-qubit gate on unknown qubits");
          const int mc = where[qc], mt = where[qt];
          if (mc < 0 || mt < 0)
            throw SimulationError("two-qubit gate expects both qubits stored in modes");
          swap_mode_cavity(state, static_cast<std::size_t>(mc));
          move_phase(mc, -im, -1);
          cpb_cavity_swap(state);
          move_phase(-1, -im, -2);
          swap_mode_cavity(state, static_cast<std::size_t>(mt));
          move_phase(mt, -im, -1);
          cpb_cavity_conditional_phase(state);
          result.qubit_phases[qc] *= std::polar(1.0, cz_.local_phase_cpb);
          result.qubit_phases[qt] *= std::polar(1.0, cz_.local_phase_cavity);
          swap_mode_cavity(state, static_cast<std::size_t>(mt));
          move_phase(-1, -im, mt);
          cpb_cavity_swap(state);
          move_phase(-2, -im, -1);
          swap_mode_cavity(state, static_cast<std::size_t>(mc));
          move_phase(-1, -im, mc);
          entry.op = "two_qubit " + op.qubit;
          entry.duration = 4.0 * swap_duration() + 2.0 * cpb_swap_duration() +
                           cz_.duration_over_g() / options_.g_cpb;
          break;
        }
        case GateOp::Kind::Cool: {
          if (op.mode_a < 0 || static_cast<std::size_t>(op.mode_a) >= n_modes())
            throw SimulationError("cool target outside the layout");
          const int cycles = cool_mode(state, static_cast<std::size_t>(op.mode_a));
          entry.op = "cool x" + std::to_string(cycles);
          entry.duration =
              cycles * (swap_duration() + options_.cool_wait_factor / options_.kappa);
          break;
        }
      }
    } catch (const SimulationError& err) {
      throw SimulationError("op #" + std::to_string(n) + ": " + err.what());
    }
    entry.norm = state.amplitudes.squaredNorm();
    entry.leakage = truncation_leakage(state);
    entry.occupations.resize(n_sites());
    for (std::size_t s = 0; s < n_sites(); ++s)
      entry.occupations[s] = site_occupation(state, s);
    result.log.push_back(std::move(entry));
  }
  for (const auto& [name, loc] : where) {
    result.qubit_locations[name] =
        loc == -2 ? "cpb" : (loc == -1 ? "cavity" : std::to_string(loc));
  }
  return result;
}

}  // namespace holoreg
