#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

#include "su11/analytic.hpp"
#include "su11/core.hpp"
#include "su11/gaussian.hpp"

namespace su11::fock {

using cd = std::complex<double>;
using Composition = std::array<int, 4>;  // spinor uses the first three entries

// Fixed-number sector. Spinor: compositions (n0, n+, n-) with sum N, ordered
// lexicographically ascending. Hybrid: (n_a0, n_b0, n_a1, n_b1) with
// n_a0 + n_a1 = Na and n_b0 + n_b1 = Nb, ordered lexicographically ascending.
struct SectorBasis {
  Platform platform;
  int n_total;
  int na, nb;  // hybrid only
  std::vector<Composition> comps;

  int size() const { return static_cast<int>(comps.size()); }
  int index_of(const Composition& c) const;  // -1 when outside the sector
};

std::shared_ptr<const SectorBasis> spinor_basis(int n);
std::shared_ptr<const SectorBasis> hybrid_basis(int na, int nb);

struct FockSectorState {
  std::shared_ptr<const SectorBasis> basis;
  std::vector<cd> amplitudes;

  int n_total_sector() const { return basis->n_total; }
  double norm2() const;
};

struct MixtureEntry {
  double weight;
  FockSectorState state;
};

struct CoherentPumpMixture {
  std::vector<MixtureEntry> sectors;
  double tail = 0.0;  // 1 - sum of weights
};

struct FockOptions {
  int cap = 60;                 // largest sector particle number (per pump for hybrid)
  double weight_floor = 1e-18;  // sectors with smaller Poisson weight are dropped
  bool raw_q = false;           // use q_t below instead of the shift-cancelling default
  double q_t = 0.0;
};

inline constexpr double kTailFlag = 1e-6;

// |N,0,0> (or |Na,Nb,0,0>) sectors with Poisson weights for coherent pumps.
CoherentPumpMixture coherent_mixture(const InterferometerConfig& cfg, const FockOptions& opt = {});
// Ideal two-mode squeezed vacuum on the side modes, one sector per pair number.
CoherentPumpMixture two_mode_squeezed_mixture(double r, double tail_tol = 1e-12);

// exp(-i H) within the sector, H = kt [a0^2 a+^dag a-^dag + h.c.] + kt (N0 - 1/2) Ns + qt Ns.
void evolve_spin_mixing(FockSectorState& s, double kappa_t, double q_t, const FockOptions& opt = {});
// exp(-i H), H = kt (a0^dag b0^dag a1 b1 + h.c.).
void evolve_fwm(FockSectorState& s, double kappa_t, const FockOptions& opt = {});
// Tritter, BeamSplitter or Phase stage applied exactly (U = exp(-i theta G)).
void apply_linear_exact(FockSectorState& s, const gaussian::Stage& stage, const FockOptions& opt = {});

// Collisional shift cancellation at the mean pump population: q t = -kappa t (n_total - 1/2).
double default_q_t(double kappa_t, double n_total);
// Interaction strength giving nominal squeezing r: spinor r = n_total kt; hybrid r = sqrt(Na0 Nb0) kt.
double kappa_t_for(const InterferometerConfig& cfg);

analytic::GeneralMoments moments_and_correlators(const FockSectorState& s);
analytic::GeneralMoments moments_and_correlators(const CoherentPumpMixture& m);

struct NumberSumMoments {
  double mean = 0;
  double mean_sq = 0;
  double variance() const { return mean_sq - mean * mean; }
};
NumberSumMoments side_number_sum(const CoherentPumpMixture& m);

struct FockRun {
  SignalMoments moments;
  double tail = 0.0;
  bool tail_flag = false;
};

// Mixing and first mixer; then phase, inverse mixer and inverse mixing. The
// inverse mixing uses (-kappa t, -q t), so phi = 0 is an exact echo.
CoherentPumpMixture prepare(CoherentPumpMixture initial, const InterferometerConfig& cfg,
                            const FockOptions& opt = {});
CoherentPumpMixture close_chain(CoherentPumpMixture prepared, const InterferometerConfig& cfg, double phi_sum,
                                double phi_diff, const FockOptions& opt = {});
FockRun full_interferometer(const CoherentPumpMixture& mixture, const InterferometerConfig& cfg, double phi,
                            const FockOptions& opt = {});
// Maximum over theta of the general QFI built from the exact moments after mixing,
// with the mixer phase chosen from the exact pair correlator.
struct DepletedQfi {
  double qfi_opt;
  double theta_opt;
  double vartheta;
  analytic::GeneralMoments moments;
};
DepletedQfi depleted_qfi(const InterferometerConfig& cfg, const FockOptions& opt = {});

void write_dump(std::ostream& os, const CoherentPumpMixture& m);

}  // namespace su11::fock
