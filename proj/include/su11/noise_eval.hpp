#pragma once

#include <string>
#include <vector>

#include "su11/core.hpp"
#include "su11/tw.hpp"

namespace su11 {

// One point of a robustness study. Absolute sensitivities and their ratio
// come from the same computation.
struct RobustnessRow {
  double x = 0;  // loss fraction, delta_n or sigma_varphi
  double delta_phi_pumped = 0;
  double delta_phi_conventional = 0;
  double ratio = 0;
  double stderr_pumped = 0;  // TW only
  double stderr_conventional = 0;
  double stderr_ratio = 0;
  double phi_pumped = 0;  // operating phase (0 means the phi -> 0 limit)
  double phi_conventional = 0;
  double loss_fraction_pumped = 0;
  double loss_fraction_conventional = 0;
  double control = 0;  // the grid value that produced the row (gamma for loss studies)
  std::string error;   // empty on success
};

// (theta, nu) of the pumped-up scheme: the lossless number-sum optimum, or
// the config's own angles when use_config_angles is set.
struct PumpedPoint {
  double theta;
  double nu;
};
PumpedPoint pumped_point(const InterferometerConfig& cfg, bool use_config_angles = false);

struct StudyOptions {
  bool use_config_angles = false;
  tw::TWConfig tw;  // loss study only
};

// Loss rates applied during both mixing stages (spinor: two-body gamma;
// hybrid: one-body gamma on both pumps). x is the pumped-up loss fraction.
std::vector<RobustnessRow> loss_study(const InterferometerConfig& cfg, const std::vector<double>& gammas,
                                      const StudyOptions& opt = {});
// Number resolution delta_n; the readout phase is re-optimized per row for both schemes.
std::vector<RobustnessRow> detection_study(const InterferometerConfig& cfg, const std::vector<double>& delta_ns,
                                           const StudyOptions& opt = {});
// Gaussian phase-difference noise. The conventional scheme is checked to be
// sigma-independent; a violation throws NumericalError.
std::vector<RobustnessRow> dephasing_study(const InterferometerConfig& cfg, const std::vector<double>& sigmas,
                                           const StudyOptions& opt = {});

// Largest relative change of the theta = 0 number-sum mean, variance and slope
// over the phi_diff grid, at fixed phi_sum.
double conventional_phase_diff_deviation(const InterferometerConfig& cfg, double phi_sum,
                                         const std::vector<double>& phi_diffs);

inline const std::vector<double> kSpinorLossGrid{0.0, 2e-7, 5e-7, 1e-6, 2e-6};
inline const std::vector<double> kHybridLossGrid{0.0, 0.005, 0.01, 0.02, 0.04};

}  // namespace su11
