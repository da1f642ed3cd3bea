#pragma once

#include <Eigen/Dense>
#include <complex>
#include <variant>
#include <vector>

#include "su11/core.hpp"

namespace su11::gaussian {

using cd = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

struct GaussianState {
  int n_modes = 0;
  Vec mean;
  Mat normal_cov;  // <da_i^dag da_j>
  Mat anomalous;   // <da_i da_j>
};

// Undepleted two-mode squeezer on (i, j); the listed pump means share the
// population change 2 sinh^2 r (removed for r > 0, restored for r < 0).
struct ParametricAmp {
  double r;
  double vartheta_sq;
  int i, j;
  std::vector<int> pumps;
};
struct Tritter {  // modes 0 (pump), 1, 2
  double theta, vartheta;
};
struct BeamSplitter {  // pump-like mode p, side mode q
  double theta, vartheta;
  int p, q;
};
struct Phase {
  std::vector<double> phases;  // a_k -> exp(-i phases[k]) a_k
};
using Stage = std::variant<ParametricAmp, Tritter, BeamSplitter, Phase>;

struct LinearMap {  // a -> M a + L a^dag
  Mat M, L;
};

LinearMap stage_map(const Stage& s, int n_modes);
GaussianState init_state(const InterferometerConfig& cfg);
GaussianState vacuum_state(int n_modes);
GaussianState apply_stage(const GaussianState& st, const Stage& s);

std::vector<int> side_modes(Platform p);
// First half of the chain (squeezing and mixing) and the full five-stage chain.
std::vector<Stage> preparation_stages(const InterferometerConfig& cfg);
std::vector<Stage> chain_stages(const InterferometerConfig& cfg, double phi_sum, double phi_diff);

struct NumberSum {
  double mean;
  double variance;
};
// Wick evaluation of <S> and Var(S) for S = sum of n_k over the given modes.
NumberSum number_sum(const GaussianState& st, const std::vector<int>& modes);
double total_number(const GaussianState& st);

// Smallest symplectic eigenvalue of the quadrature covariance (vacuum = 1/2).
double min_symplectic_eigenvalue(const GaussianState& st);
bool is_physical(const GaussianState& st, double tol = 1e-9);

GaussianState run_stages(GaussianState st, const std::vector<Stage>& stages);
NumberSum chain_number_sum(const InterferometerConfig& cfg, double phi_sum, double phi_diff);

inline constexpr double kSlopeStep = 1e-4;
inline constexpr double kDefaultPhiEval = 1e-3;

// Exact mean and variance at phi_sum, slope by Richardson-extrapolated central differences.
SignalMoments run_chain(const InterferometerConfig& cfg, double phi_sum, double phi_diff);
SensitivityResult sensitivity_numeric(const InterferometerConfig& cfg, double phi_eval = kDefaultPhiEval);

// QFI of the pure state after squeezing and the first mixer: Var(N_s).
double qfi(const InterferometerConfig& cfg);

// Probabilists' Gauss-Hermite rule for a standard normal: nodes x_k, weights summing to 1.
void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w);

struct PhaseNoiseResult {
  SensitivityResult result;
  int nodes = 0;
  bool converged = true;
};

// Signal averaged over phi_diff ~ Normal(0, sigma^2) at fixed phi_sum.
NumberSum noisy_number_sum(const InterferometerConfig& cfg, double phi_sum, double sigma, int nodes);
double noisy_delta_phi(const InterferometerConfig& cfg, double phi_sum, double sigma, int nodes);
PhaseNoiseResult phase_noise_sensitivity(const InterferometerConfig& cfg, double sigma_varphi,
                                         int base_nodes = 41);

}  // namespace su11::gaussian
