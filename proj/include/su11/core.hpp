#pragma once

#include <cstddef>
#include <functional>

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace su11 {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Platform { Spinor3, Hybrid4 };
enum class Method { Analytic, Gaussian, Fock, TW };

const char* to_string(Platform p);
const char* to_string(Method m);
Platform platform_from_string(const std::string& s);

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Raised when an engine cannot produce a finite answer (blow-up, indeterminate ratio, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InterferometerConfig {
  Platform platform = Platform::Spinor3;
  double n_total = 1.0e4;
  double r = 1.0;
  double theta = kPi / 4;
  double vartheta = 3 * kPi / 4;  // nu = 3pi/2 with zero pump and squeezing phases
  double vartheta_pump = 0.0;     // hybrid: sum of atomic and optical pump phases
  double vartheta_sq = 0.0;
  double phi = 0.0;
  double n_f = 1.0;
  bool allow_depleted = false;  // lifts the n_s < n_total guard (oracle use)
};

struct NoiseSpec {
  double delta_n = 0.0;
  double sigma_varphi = 0.0;
  double gamma = 0.0;
  double gamma_a0 = 0.0;
  double gamma_b0 = 0.0;
};

struct DerivedParams {
  double n_s;
  double nu;
  double eta;
};

struct OperatingPoint {
  double theta;
  double nu;
  double phi;
};

struct SensitivityResult {
  double delta_phi = 0.0;
  double std_error = 0.0;  // Monte Carlo only
  Method method = Method::Analytic;
  OperatingPoint operating_point{0.0, 0.0, 0.0};
};

// Moments of the side-mode number sum. When has_series is set, var_phi2 and
// slope_phi1 are the leading coefficients of Var ~ var_phi2 phi^2 and
// slope ~ slope_phi1 phi, used for the phi -> 0 limit.
struct SignalMoments {
  double phi = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double slope = 0.0;
  bool has_series = false;
  double var_phi2 = 0.0;
  double slope_phi1 = 0.0;
};

double side_population(double r);  // 2 sinh^2 r
double r_from_side_population(double n_s);
double wrap_2pi(double x);

// nu = 2(vartheta - vartheta_pump) - vartheta_sq for Spinor3; the hybrid
// pump phase is already the sum of both pumps, giving 2 vartheta - vartheta_pump - vartheta_sq.
double canonical_nu(const InterferometerConfig& cfg);
InterferometerConfig with_nu(InterferometerConfig cfg, double nu);

double eta(Platform p, double r, double nu, double n_f);

void validate(const InterferometerConfig& cfg);
void validate(const NoiseSpec& noise);
DerivedParams derive_params(const InterferometerConfig& cfg);

// Hybrid pump populations before squeezing.
double hybrid_na0(double n_total, double n_f);
double hybrid_nb0(double n_total, double n_f);

// Process-wide worker count used by trajectory- and sector-parallel engines.
// 0 means: SU11_THREADS from the environment, else hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();
// Runs fn(i) for i in [0, n) on thread_count() workers with static contiguous chunks.
// The first exception (lowest index) is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace su11
