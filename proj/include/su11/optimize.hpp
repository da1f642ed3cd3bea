#pragma once

#include <string>
#include <vector>

#include "su11/core.hpp"
#include "su11/search.hpp"
#include "su11/tw.hpp"

namespace su11 {

enum class Objective { QFI, DeltaPhiN, Ratio };
enum class Axis { NS, R, Theta, Nu, Phi, DeltaN, SigmaVarphi, Gamma, NF };

const char* to_string(Objective o);
const char* to_string(Axis a);
Objective objective_from_string(const std::string& s);
Axis axis_from_string(const std::string& s);

struct OptimizeOptions {
  NoiseSpec noise;        // delta_n (Analytic, Gaussian) and sigma_varphi (Gaussian) enter DeltaPhiN and Ratio
  double theta_tol = 1e-9;
  double nu_tol = 1e-8;
  double phi_tol = 1e-7;
  tw::TWConfig tw;        // used by point evaluations with Method::TW
};

struct OptimumResult {
  double theta_opt = 0;
  double nu_opt = 0;
  double phi_opt = 0;  // 0 means the phi -> 0 limit
  double value = 0;    // QFI (maximized) or delta phi / ratio (minimized)
  bool multimodal = false;
};

// Objective at fixed (theta, nu); phi is optimized when detection noise makes it matter.
OptimumResult evaluate_objective(const InterferometerConfig& cfg, Method engine, Objective obj,
                                 const OptimizeOptions& opt = {});
// Conventional reference at theta = 0: the QFI n_s(n_s+2), or its sensitivity with the same noise.
double conventional_reference(const InterferometerConfig& cfg, Method engine, Objective obj,
                              const OptimizeOptions& opt = {});

// Nested searches: nu outer on [0, 2pi), theta inner on [0, pi/2], phi innermost when applicable.
OptimumResult optimize_interferometer(const InterferometerConfig& cfg, Method engine, Objective obj,
                                      const OptimizeOptions& opt = {});

struct SweepSpec {
  Axis axis = Axis::NS;
  std::vector<double> values;
  Objective objective = Objective::QFI;
};

void validate(const SweepSpec& s);

struct SweepRow {
  double x = 0;
  double value = 0;
  double theta_opt = 0, nu_opt = 0, phi_opt = 0;
  double conventional = 0;
  double std_error = 0;
  std::string error;  // empty on success
};

// One row per value. Theta, nu and phi axes are point evaluations at the
// remaining config; other axes re-optimize. Method::TW rows are point
// evaluations of the delta phi objectives. Row failures are recorded, not thrown.
std::vector<SweepRow> sweep(const InterferometerConfig& cfg, const SweepSpec& spec, Method engine,
                            const OptimizeOptions& opt = {});

}  // namespace su11
