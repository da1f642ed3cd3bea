#include "su11/tw.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

#include "tw_kernels.hpp"

namespace su11::tw {

namespace {

constexpr std::size_t kBlock = 256;

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_key(std::uint64_t seed, std::uint64_t traj, std::uint64_t stage, std::uint64_t step) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ traj);
  h = mix64(h ^ (stage * 0xd6e8feb86659fd93ULL));
  return mix64(h ^ step);
}

void normal_pair(std::uint64_t key, unsigned pair, double& a, double& b) {
  const std::uint64_t x = mix64(key + 2 * pair), y = mix64(key + 2 * pair + 1);
  const double u1 = static_cast<double>((x >> 11) + 1) * 0x1.0p-53;  // (0, 1]
  const double u2 = static_cast<double>(y >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  a = r * std::cos(kTwoPi * u2);
  b = r * std::sin(kTwoPi * u2);
}

std::atomic<KernelPath> g_path{KernelPath::Auto};

detail::StepFn pick(Platform p) {
#ifdef SU11_HAVE_AVX2
  if (active_kernel_path() == KernelPath::Avx2)
    return p == Platform::Spinor3 ? detail::spinor_step_avx2 : detail::hybrid_step_avx2;
#endif
  return p == Platform::Spinor3 ? detail::spinor_step_scalar : detail::hybrid_step_scalar;
}

void integrate(Ensemble& ens, const detail::StepParams& base, double t, const TWConfig& tw) {
  if (!(t >= 0)) throw ConfigError("integration time must be non-negative");
  const long steps = t == 0 ? 0 : std::max(1L, static_cast<long>(std::ceil(t / tw.dt - 1e-9)));
  const std::uint64_t stage = ens.next_stage++;
  if (steps == 0) return;
  const double h = t / steps;
  detail::StepParams p = base;
  const double sq = std::sqrt(0.5 * h);
  p.kdt = base.kdt * h;
  p.c_half = std::sqrt(0.5 * base.gdt) * sq;
  p.c_two = std::sqrt(2.0 * base.gdt) * sq;
  p.c_half_b = std::sqrt(0.5 * base.gdt_b) * sq;
  p.gdt = base.gdt * h;
  p.gdt_b = base.gdt_b * h;
  const int slots = ens.platform == Platform::Spinor3 ? detail::kSpinorNormals : detail::kHybridNormals;
  const detail::StepFn step = pick(ens.platform);
  const std::size_t nblocks = (ens.n_traj + kBlock - 1) / kBlock;
  std::vector<long> bad(nblocks, 0);
  parallel_for(nblocks, [&](std::size_t b) {
    const std::size_t lo = b * kBlock, n = std::min<std::size_t>(kBlock, ens.n_traj - lo);
    double* re[4];
    double* im[4];
    for (int m = 0; m < ens.n_modes; ++m) {
      re[m] = ens.re[m].data() + lo;
      im[m] = ens.im[m].data() + lo;
    }
    std::vector<double> buf(p.noisy ? slots * n : 0);
    const double* noise[detail::kSpinorNormals] = {};
    for (int s = 0; s < slots && p.noisy; ++s) noise[s] = buf.data() + s * n;
    for (long k = 0; k < steps; ++k) {
      if (p.noisy) {
        for (std::size_t j = 0; j < n; ++j) {
          const std::uint64_t key = stream_key(ens.master_seed, lo + j, stage, k);
          for (int s = 0; s < slots; s += 2) normal_pair(key, s / 2, buf[s * n + j], buf[(s + 1) * n + j]);
        }
      }
      bad[b] += step(re, im, noise, n, p);
      if (bad[b] > 0) return;
    }
  });
  long total = 0;
  for (long x : bad) total += x;
  if (total > 0)
    throw NumericalError("truncated-Wigner blow-up: " + std::to_string(total) +
                         " trajectories grew more than tenfold in one step; reduce dt");
  ens.time += t;
}

// Symmetric-ordered side sums for each trajectory.
std::vector<double> side_sums(const Ensemble& ens, const std::vector<int>& modes) {
  std::vector<double> w(ens.n_traj, 0.0);
  for (int m : modes) {
    if (m < 0 || m >= ens.n_modes) throw ConfigError("mode index out of range");
    for (int j = 0; j < ens.n_traj; ++j) w[j] += ens.re[m][j] * ens.re[m][j] + ens.im[m][j] * ens.im[m][j];
  }
  return w;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double jackknife_stderr(const std::vector<double>& loo) {
  const double n = static_cast<double>(loo.size());
  const double m = mean_of(loo);
  double s = 0;
  for (double x : loo) s += (x - m) * (x - m);
  return std::sqrt((n - 1) / n * s);
}

void validate_noise_for_tw(const NoiseSpec& noise) {
  validate(noise);
  if (noise.sigma_varphi > 0) throw ConfigError("the truncated-Wigner engine does not model phase-difference noise");
}

}  // namespace

void validate(const TWConfig& tw) {
  if (tw.n_traj < 2) throw ConfigError("n_traj must be at least 2");
  if (!(tw.dt > 0) || !std::isfinite(tw.dt)) throw ConfigError("dt must be positive");
  if (!(tw.phi_eval > 0) || !std::isfinite(tw.phi_eval)) throw ConfigError("phi_eval must be positive");
}

double counter_normal(std::uint64_t seed, std::uint64_t traj, std::uint64_t stage, std::uint64_t step,
                      unsigned slot) {
  double a, b;
  normal_pair(stream_key(seed, traj, stage, step), slot / 2, a, b);
  return slot % 2 == 0 ? a : b;
}

bool avx2_supported() {
#ifdef SU11_HAVE_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

void set_kernel_path(KernelPath p) { g_path = p; }

KernelPath active_kernel_path() {
  const KernelPath p = g_path.load();
  if (p == KernelPath::Scalar) return KernelPath::Scalar;
  return avx2_supported() ? KernelPath::Avx2 : KernelPath::Scalar;
}

Ensemble sample_initial(const InterferometerConfig& cfg, const TWConfig& tw) {
  validate(cfg);
  validate(tw);
  Ensemble e;
  e.platform = cfg.platform;
  e.n_traj = tw.n_traj;
  e.n_modes = cfg.platform == Platform::Spinor3 ? 3 : 4;
  e.master_seed = tw.master_seed;
  e.re.assign(e.n_modes, std::vector<double>(e.n_traj));
  e.im.assign(e.n_modes, std::vector<double>(e.n_traj));
  std::vector<double> mean(e.n_modes, 0.0);
  if (cfg.platform == Platform::Spinor3) {
    mean[0] = std::sqrt(cfg.n_total);
  } else {
    mean[0] = std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f));
    mean[1] = std::sqrt(hybrid_nb0(cfg.n_total, cfg.n_f));
  }
  const std::uint64_t stage = e.next_stage++;
  for (int j = 0; j < e.n_traj; ++j) {
    const std::uint64_t key = stream_key(e.master_seed, j, stage, 0);
    for (int m = 0; m < e.n_modes; ++m) {
      double a, b;
      normal_pair(key, m, a, b);
      // complex Gaussian with <|eta|^2> = 1/2
      e.re[m][j] = mean[m] + 0.5 * a;
      e.im[m][j] = 0.5 * b;
    }
  }
  return e;
}

void integrate_spin_mixing(Ensemble& ens, double kappa, double gamma, double t, const TWConfig& tw) {
  if (ens.platform != Platform::Spinor3) throw ConfigError("spin mixing needs a spinor ensemble");
  if (!(gamma >= 0)) throw ConfigError("loss rate must be non-negative");
  validate(tw);
  detail::StepParams p{kappa, gamma, 0.0, 0.0, 0.0, 0.0, gamma > 0};
  integrate(ens, p, t, tw);
}

void integrate_fwm(Ensemble& ens, double kappa, double gamma_a0, double gamma_b0, double t, const TWConfig& tw) {
  if (ens.platform != Platform::Hybrid4) throw ConfigError("four-wave mixing needs a hybrid ensemble");
  if (!(gamma_a0 >= 0) || !(gamma_b0 >= 0)) throw ConfigError("loss rates must be non-negative");
  validate(tw);
  detail::StepParams p{kappa, gamma_a0, gamma_b0, 0.0, 0.0, 0.0, gamma_a0 > 0 || gamma_b0 > 0};
  integrate(ens, p, t, tw);
}

void apply_linear(Ensemble& ens, const gaussian::Stage& stage) {
  if (std::holds_alternative<gaussian::ParametricAmp>(stage))
    throw ConfigError("parametric amplification is integrated, not applied as a linear map");
  const gaussian::LinearMap m = gaussian::stage_map(stage, ens.n_modes);
  const int nm = ens.n_modes;
  parallel_for((ens.n_traj + kBlock - 1) / kBlock, [&](std::size_t b) {
    const int lo = static_cast<int>(b * kBlock), hi = std::min<int>(ens.n_traj, lo + static_cast<int>(kBlock));
    cd in[4], out[4];
    for (int j = lo; j < hi; ++j) {
      for (int k = 0; k < nm; ++k) in[k] = {ens.re[k][j], ens.im[k][j]};
      for (int r = 0; r < nm; ++r) {
        out[r] = 0;
        for (int k = 0; k < nm; ++k) out[r] += m.M(r, k) * in[k];
      }
      for (int k = 0; k < nm; ++k) {
        ens.re[k][j] = out[k].real();
        ens.im[k][j] = out[k].imag();
      }
    }
  });
}

Estimate estimate(const Ensemble& ens, const std::vector<int>& modes) {
  const std::vector<double> w = side_sums(ens, modes);
  const double n = ens.n_traj, k = static_cast<double>(modes.size());
  const double m = mean_of(w);
  double d2 = 0;
  for (double x : w) d2 += (x - m) * (x - m);
  Estimate e;
  e.mean = m - 0.5 * k;
  e.variance = d2 / n - 0.25 * k;
  e.mean_stderr = std::sqrt(d2 / (n - 1) / n);
  std::vector<double> loo(ens.n_traj);
  for (int j = 0; j < ens.n_traj; ++j) {
    const double d = w[j] - m;
    loo[j] = (d2 - d * d) / (n - 1) - (d / (n - 1)) * (d / (n - 1));
  }
  e.variance_stderr = jackknife_stderr(loo);
  return e;
}

double total_number(const Ensemble& ens) {
  std::vector<int> all(ens.n_modes);
  for (int k = 0; k < ens.n_modes; ++k) all[k] = k;
  return estimate(ens, all).mean;
}

double loss_fraction(const Ensemble& ens, double n_total) { return 1.0 - total_number(ens) / n_total; }

TwResult tw_sensitivity(const InterferometerConfig& cfg, const NoiseSpec& noise, const TWConfig& tw) {
  validate(cfg);
  validate(tw);
  validate_noise_for_tw(noise);
  const bool spinor = cfg.platform == Platform::Spinor3;
  const double vt = 0.5 * canonical_nu(cfg);
  double kappa;
  if (spinor) {
    kappa = 1.0 / cfg.n_total;
  } else {
    kappa = 1.0 / std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f) * hybrid_nb0(cfg.n_total, cfg.n_f));
  }
  auto mix = [&](Ensemble& e, double sign) {
    if (spinor)
      integrate_spin_mixing(e, sign * kappa, noise.gamma, cfg.r, tw);
    else
      integrate_fwm(e, sign * kappa, noise.gamma_a0, noise.gamma_b0, cfg.r, tw);
  };

  Ensemble ens = sample_initial(cfg, tw);
  mix(ens, 1.0);
  TwResult out;
  out.loss_fraction_first = loss_fraction(ens, cfg.n_total);
  if (spinor) {
    apply_linear(ens, gaussian::Tritter{cfg.theta, vt});
  } else {
    apply_linear(ens, gaussian::BeamSplitter{cfg.theta, vt, 0, 2});
    apply_linear(ens, gaussian::BeamSplitter{cfg.theta, vt, 1, 3});
  }

  const double h = 0.5 * tw.phi_eval;
  const double phis[3] = {tw.phi_eval - h, tw.phi_eval, tw.phi_eval + h};
  const std::vector<int> side = gaussian::side_modes(cfg.platform);
  std::vector<double> w[3];
  for (int b = 0; b < 3; ++b) {
    Ensemble e = ens;  // same stage counter: common random numbers across the stencil
    const double half = 0.5 * phis[b];
    if (spinor) {
      apply_linear(e, gaussian::Phase{{0.0, half, half}});
      apply_linear(e, gaussian::Tritter{-cfg.theta, vt});
    } else {
      apply_linear(e, gaussian::Phase{{0.0, 0.0, half, half}});
      apply_linear(e, gaussian::BeamSplitter{-cfg.theta, vt, 0, 2});
      apply_linear(e, gaussian::BeamSplitter{-cfg.theta, vt, 1, 3});
    }
    mix(e, -1.0);
    if (b == 1) out.loss_fraction = loss_fraction(e, cfg.n_total);
    w[b] = side_sums(e, side);
  }

  const int nt = tw.n_traj;
  const double n = nt, k = static_cast<double>(side.size()), dn2 = noise.delta_n * noise.delta_n;
  const double mlo = mean_of(w[0]), m0 = mean_of(w[1]), mhi = mean_of(w[2]);
  double d2 = 0;
  for (double x : w[1]) d2 += (x - m0) * (x - m0);
  auto dphi = [&](double var_w, double slope) { return std::sqrt(std::max(0.0, var_w - 0.25 * k + dn2)) / std::abs(slope); };
  const double slope = (mhi - mlo) / (2 * h);
  out.moments.phi = tw.phi_eval;
  out.moments.mean = m0 - 0.5 * k;
  out.moments.variance = d2 / n - 0.25 * k;
  out.moments.slope = slope;
  if (slope == 0.0) throw NumericalError("zero slope in truncated-Wigner stencil");

  std::vector<double> loo(nt);
  for (int j = 0; j < nt; ++j) {
    const double d = w[1][j] - m0;
    const double var = (d2 - d * d) / (n - 1) - (d / (n - 1)) * (d / (n - 1));
    const double s = ((mhi * n - w[2][j]) - (mlo * n - w[0][j])) / ((n - 1) * 2 * h);
    loo[j] = dphi(var, s);
  }
  out.result.delta_phi = dphi(d2 / n, slope);
  out.result.std_error = jackknife_stderr(loo);
  out.result.method = Method::TW;
  out.result.operating_point = {cfg.theta, canonical_nu(cfg), tw.phi_eval};
  out.stderr_flag = out.result.std_error > 0.2 * out.result.delta_phi;
  return out;
}

Estimate mixing_side_population(const InterferometerConfig& cfg, const NoiseSpec& noise, const TWConfig& tw) {
  validate(cfg);
  validate_noise_for_tw(noise);
  Ensemble ens = sample_initial(cfg, tw);
  if (cfg.platform == Platform::Spinor3) {
    integrate_spin_mixing(ens, 1.0 / cfg.n_total, noise.gamma, cfg.r, tw);
  } else {
    const double kappa = 1.0 / std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f) * hybrid_nb0(cfg.n_total, cfg.n_f));
    integrate_fwm(ens, kappa, noise.gamma_a0, noise.gamma_b0, cfg.r, tw);
  }
  return estimate(ens, gaussian::side_modes(cfg.platform));
}

void write_trajectory_dump(std::ostream& os, const Ensemble& ens) {
  char buf[64];
  auto put = [&](double x) {
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    os << ' ' << std::string_view(buf, r.ptr - buf);
  };
  for (int j = 0; j < ens.n_traj; ++j) {
    os << j;
    put(ens.time);
    for (int m = 0; m < ens.n_modes; ++m) {
      put(ens.re[m][j]);
      put(ens.im[m][j]);
    }
    os << '\n';
  }
}

}  // namespace su11::tw
