#include "su11/noise_eval.hpp"

#include <algorithm>
#include <cmath>

#include "su11/analytic.hpp"
#include "su11/gaussian.hpp"
#include "su11/optimize.hpp"

namespace su11 {

namespace {

InterferometerConfig at(const InterferometerConfig& cfg, double theta, double nu) {
  InterferometerConfig c = with_nu(cfg, nu);
  c.theta = theta;
  return c;
}

void check_grid(const std::vector<double>& xs, const char* what) {
  if (xs.empty()) throw ConfigError(std::string(what) + " grid is empty");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] >= 0) || !std::isfinite(xs[i])) throw ConfigError(std::string(what) + " values must be >= 0");
    if (i > 0 && !(xs[i] > xs[i - 1])) throw ConfigError(std::string(what) + " values must be strictly increasing");
  }
}

void finish(RobustnessRow& row) {
  if (!(row.delta_phi_pumped > 0) || !(row.delta_phi_conventional > 0))
    throw NumericalError("non-positive sensitivity in robustness row");
  row.ratio = row.delta_phi_pumped / row.delta_phi_conventional;
  const double a = row.stderr_pumped / row.delta_phi_pumped, b = row.stderr_conventional / row.delta_phi_conventional;
  row.stderr_ratio = row.ratio * std::sqrt(a * a + b * b);
}

double rel(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace

PumpedPoint pumped_point(const InterferometerConfig& cfg, bool use_config_angles) {
  if (use_config_angles) return {cfg.theta, canonical_nu(cfg)};
  const OptimumResult r = optimize_interferometer(cfg, Method::Analytic, Objective::DeltaPhiN);
  return {r.theta_opt, r.nu_opt};
}

std::vector<RobustnessRow> loss_study(const InterferometerConfig& cfg, const std::vector<double>& gammas,
                                      const StudyOptions& opt) {
  validate(cfg);
  check_grid(gammas, "gamma");
  const PumpedPoint p = pumped_point(cfg, opt.use_config_angles);
  const InterferometerConfig pumped = at(cfg, p.theta, p.nu), conv = at(cfg, 0.0, p.nu);
  std::vector<RobustnessRow> rows(gammas.size());
  // TW parallelizes over trajectories; rows run in order.
  for (std::size_t i = 0; i < rows.size(); ++i) {
    RobustnessRow& row = rows[i];
    row.control = gammas[i];
    NoiseSpec nz;
    if (cfg.platform == Platform::Spinor3)
      nz.gamma = gammas[i];
    else
      nz.gamma_a0 = nz.gamma_b0 = gammas[i];
    try {
      const tw::TwResult a = tw::tw_sensitivity(pumped, nz, opt.tw);
      const tw::TwResult b = tw::tw_sensitivity(conv, nz, opt.tw);
      row.x = a.loss_fraction;
      row.delta_phi_pumped = a.result.delta_phi;
      row.delta_phi_conventional = b.result.delta_phi;
      row.stderr_pumped = a.result.std_error;
      row.stderr_conventional = b.result.std_error;
      row.phi_pumped = row.phi_conventional = opt.tw.phi_eval;
      row.loss_fraction_pumped = a.loss_fraction;
      row.loss_fraction_conventional = b.loss_fraction;
      finish(row);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
  }
  return rows;
}

std::vector<RobustnessRow> detection_study(const InterferometerConfig& cfg, const std::vector<double>& delta_ns,
                                           const StudyOptions& opt) {
  validate(cfg);
  check_grid(delta_ns, "delta_n");
  const PumpedPoint p = pumped_point(cfg, opt.use_config_angles);
  const InterferometerConfig pumped = at(cfg, p.theta, p.nu);
  std::vector<RobustnessRow> rows(delta_ns.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    RobustnessRow& row = rows[i];
    row.x = row.control = delta_ns[i];
    try {
      OptimizeOptions o;
      o.noise.delta_n = delta_ns[i];
      const OptimumResult a = evaluate_objective(pumped, Method::Analytic, Objective::DeltaPhiN, o);
      row.delta_phi_pumped = a.value;
      row.phi_pumped = a.phi_opt;
      if (delta_ns[i] == 0) {
        row.delta_phi_conventional = analytic::conventional_sensitivity(side_population(cfg.r)).delta_phi;
      } else {
        const analytic::DetectionOptimum c = analytic::conventional_detection_noise(cfg.r, delta_ns[i]);
        row.delta_phi_conventional = c.delta_phi;
        row.phi_conventional = c.phi_opt;
      }
      finish(row);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
  });
  return rows;
}

std::vector<RobustnessRow> dephasing_study(const InterferometerConfig& cfg, const std::vector<double>& sigmas,
                                           const StudyOptions& opt) {
  validate(cfg);
  check_grid(sigmas, "sigma_varphi");
  const PumpedPoint p = pumped_point(cfg, opt.use_config_angles);
  const InterferometerConfig pumped = at(cfg, p.theta, p.nu), conv = at(cfg, 0.0, p.nu);
  const gaussian::PhaseNoiseResult conv0 = gaussian::phase_noise_sensitivity(conv, 0.0);
  std::vector<RobustnessRow> rows(sigmas.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    RobustnessRow& row = rows[i];
    row.x = row.control = sigmas[i];
    try {
      const gaussian::PhaseNoiseResult a = gaussian::phase_noise_sensitivity(pumped, sigmas[i]);
      const gaussian::PhaseNoiseResult b = gaussian::phase_noise_sensitivity(conv, sigmas[i]);
      if (rel(b.result.delta_phi, conv0.result.delta_phi) > 1e-8)
        throw NumericalError("conventional sensitivity changed with phase-difference noise");
      row.delta_phi_pumped = a.result.delta_phi;
      row.phi_pumped = a.result.operating_point.phi;
      row.delta_phi_conventional = b.result.delta_phi;
      row.phi_conventional = b.result.operating_point.phi;
      finish(row);
    } catch (const NumericalError& e) {
      row.error = e.what();
    }
  });
  return rows;
}

double conventional_phase_diff_deviation(const InterferometerConfig& cfg, double phi_sum,
                                         const std::vector<double>& phi_diffs) {
  const InterferometerConfig c = at(cfg, 0.0, canonical_nu(cfg));
  const SignalMoments ref = gaussian::run_chain(c, phi_sum, 0.0);
  double worst = 0;
  for (double d : phi_diffs) {
    const SignalMoments m = gaussian::run_chain(c, phi_sum, d);
    worst = std::max({worst, rel(m.mean, ref.mean), rel(m.variance, ref.variance), rel(m.slope, ref.slope)});
  }
  return worst;
}

}  // namespace su11
