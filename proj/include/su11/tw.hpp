#pragma once

#include <complex>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "su11/core.hpp"
#include "su11/gaussian.hpp"

namespace su11::tw {

using cd = std::complex<double>;

enum class Scheme { EulerMaruyama };

// Time is measured in units where kappa * (pump number) = 1, so the mixing
// time equals the nominal squeezing r and dt = 1e-3 gives 1e3 steps per unit r.
struct TWConfig {
  int n_traj = 10000;
  double dt = 1e-3;
  std::uint64_t master_seed = 20240607;
  Scheme scheme = Scheme::EulerMaruyama;
  double phi_eval = 0.02;  // operating phase; slope stencil uses phi_eval / 2
};

void validate(const TWConfig& tw);

// Structure-of-arrays trajectory storage: re[mode][traj], im[mode][traj].
struct Ensemble {
  Platform platform = Platform::Spinor3;
  int n_traj = 0;
  int n_modes = 0;
  double time = 0.0;
  std::uint64_t master_seed = 0;
  std::uint64_t next_stage = 0;  // substream id of the next stochastic stage
  std::vector<std::vector<double>> re, im;

  cd amp(int traj, int mode) const { return {re[mode][traj], im[mode][traj]}; }
};

// Standard normal deviate for a (seed, trajectory, stage, step, slot) counter.
double counter_normal(std::uint64_t seed, std::uint64_t traj, std::uint64_t stage, std::uint64_t step, unsigned slot);

Ensemble sample_initial(const InterferometerConfig& cfg, const TWConfig& tw);

// Euler-Maruyama on the Wigner SDEs with gamma_{ij} = gamma for the pump
// collisions. Throws NumericalError on blow-up.
void integrate_spin_mixing(Ensemble& ens, double kappa, double gamma, double t, const TWConfig& tw);
void integrate_fwm(Ensemble& ens, double kappa, double gamma_a0, double gamma_b0, double t, const TWConfig& tw);
// Tritter, BeamSplitter or Phase, applied per trajectory.
void apply_linear(Ensemble& ens, const gaussian::Stage& stage);

struct Estimate {
  double mean = 0;      // normal-ordered <S>
  double variance = 0;  // normal-ordered Var(S)
  double mean_stderr = 0;
  double variance_stderr = 0;
};
// S = sum of n_k over modes. Symmetric to normal ordering: <S> = <W> - k/2 and
// Var(S) = Var(W) - k/4 with W = sum |alpha_k|^2 over k distinct modes.
Estimate estimate(const Ensemble& ens, const std::vector<int>& modes);
double total_number(const Ensemble& ens);
double loss_fraction(const Ensemble& ens, double n_total);

enum class KernelPath { Auto, Scalar, Avx2 };
void set_kernel_path(KernelPath p);  // Avx2 falls back to Scalar when unsupported
KernelPath active_kernel_path();
bool avx2_supported();

struct TwResult {
  SensitivityResult result;
  SignalMoments moments;
  double loss_fraction_first = 0;  // after the first mixing
  double loss_fraction = 0;        // after the second mixing
  bool stderr_flag = false;        // stderr / delta_phi > 20 %
};

TwResult tw_sensitivity(const InterferometerConfig& cfg, const NoiseSpec& noise, const TWConfig& tw);

// Side-mode sum after the first mixing only (no interferometer).
Estimate mixing_side_population(const InterferometerConfig& cfg, const NoiseSpec& noise, const TWConfig& tw);

void write_trajectory_dump(std::ostream& os, const Ensemble& ens);

}  // namespace su11::tw
