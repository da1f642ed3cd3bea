#pragma once

#include <complex>
#include <utility>
#include <vector>

#include "su11/core.hpp"

namespace su11::analytic {

struct GeneralMoments {
  double mean_n0 = 0, mean_n0_sq = 0;
  double mean_ns = 0, mean_ns_sq = 0;
  double mean_n0_ns = 0;
  std::complex<double> pair_corr{0, 0};
};

struct CriticalSet {
  double x_c = 0;
  bool theta_c_exists = false;
  std::vector<std::pair<double, double>> candidates;  // (theta, qfi)
  double theta_opt = 0;
  double qfi_opt = 0;
};

struct ConventionalQfi {
  double qfi;
  double delta_phi;  // NaN when undefined (n_s = 0)
  bool defined;
};

struct DetectionOptimum {
  double phi_opt;
  double delta_phi;
};

ConventionalQfi conventional_sensitivity(double n_s);

// Full undepleted QFI (all orders in n_total).
double spinor_qfi(double theta, double nu, const InterferometerConfig& cfg);
// Main-text form written with G(n_s, nu) = n_s - sqrt(n_s(n_s+2)) sin nu.
double spinor_qfi_main_form(double theta, double nu, const InterferometerConfig& cfg);
double spinor_G(double n_s, double nu);
CriticalSet spinor_qfi_critical(const InterferometerConfig& cfg);
// Leading-order optimum per particle at nu = 3pi/2: e^{2r}(1 + coth r)/8.
double spinor_qfi_opt_leading_coeff(double r);
// Large-n_s asymptote of the critical angle, (pi + 2 arccsc G)/4.
double spinor_theta_c_asymptote(double n_s, double nu);

double hybrid_qfi(double theta, double nu, const InterferometerConfig& cfg);
CriticalSet hybrid_qfi_critical(const InterferometerConfig& cfg);
double hybrid_qfi_opt_leading_coeff(double r, double n_f);

SignalMoments spinor_number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg);
SignalMoments hybrid_number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg);
SignalMoments number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg);

// phi -> 0 number-sum sensitivity, exact in the undepleted model.
double delta_phi_N(double theta, double nu, const InterferometerConfig& cfg);
// 2|csc 2theta| / sqrt(eta n_total).
double delta_phi_N_leading(double theta, double nu, const InterferometerConfig& cfg);

SensitivityResult sensitivity_from_moments(const SignalMoments& m, double delta_n);

// Conventional (theta = 0) scheme with detection noise.
double conventional_detection_delta_phi(double r, double delta_n, double phi);
DetectionOptimum conventional_detection_noise(double r, double delta_n);

SensitivityResult loschmidt_restricted_sensitivity(double theta, const InterferometerConfig& cfg,
                                                   double var_n0_initial = -1.0);

double qfi_from_general_moments(const GeneralMoments& m, double theta, double vartheta, Platform platform);
// Mixer phase maximizing the general QFI for a given pair correlator (the lower branch).
double best_vartheta(const GeneralMoments& m);
GeneralMoments undepleted_general_moments(const InterferometerConfig& cfg);

}  // namespace su11::analytic
