#include "su11/optimize.hpp"

#include <cmath>
#include <limits>

#include "su11/analytic.hpp"
#include "su11/gaussian.hpp"

namespace su11 {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Eval {
  double value;
  double phi;
  double std_error;
};

InterferometerConfig at(const InterferometerConfig& cfg, double theta, double nu) {
  InterferometerConfig c = with_nu(cfg, nu);
  c.theta = theta;
  return c;
}

// Sensitivity of the number-sum readout at the config's (theta, nu).
Eval delta_phi(const InterferometerConfig& c, Method engine, const OptimizeOptions& opt) {
  const NoiseSpec& nz = opt.noise;
  const double nu = canonical_nu(c);
  switch (engine) {
    case Method::Analytic: {
      if (nz.sigma_varphi > 0) throw ConfigError("phase-difference noise needs the Gaussian engine");
      if (nz.delta_n == 0) return {analytic::delta_phi_N(c.theta, nu, c), 0.0, 0.0};
      const Extremum e = minimize_1d(
          [&](double phi) {
            return analytic::sensitivity_from_moments(analytic::number_sum_moments(c.theta, nu, phi, c), nz.delta_n)
                .delta_phi;
          },
          1e-4, kPi, opt.phi_tol);
      return {e.f_star, e.x_star, 0.0};
    }
    case Method::Gaussian: {
      if (nz.sigma_varphi > 0) {
        if (nz.delta_n > 0) throw ConfigError("combined detection and phase-difference noise is not supported");
        const gaussian::PhaseNoiseResult r = gaussian::phase_noise_sensitivity(c, nz.sigma_varphi);
        return {r.result.delta_phi, r.result.operating_point.phi, 0.0};
      }
      if (nz.delta_n == 0) {
        const SensitivityResult r = gaussian::sensitivity_numeric(c);
        return {r.delta_phi, gaussian::kDefaultPhiEval, 0.0};
      }
      const Extremum e = minimize_1d(
          [&](double phi) {
            const SignalMoments m = gaussian::run_chain(c, phi, 0.0);
            return std::sqrt(std::max(0.0, m.variance) + nz.delta_n * nz.delta_n) / std::abs(m.slope);
          },
          1e-3, kPi, opt.phi_tol);
      return {e.f_star, e.x_star, 0.0};
    }
    case Method::TW: {
      const tw::TwResult r = tw::tw_sensitivity(c, nz, opt.tw);
      return {r.result.delta_phi, opt.tw.phi_eval, r.result.std_error};
    }
    case Method::Fock:
      break;
  }
  throw ConfigError(std::string("objective not available for engine ") + to_string(engine));
}

double qfi(const InterferometerConfig& c, Method engine) {
  switch (engine) {
    case Method::Analytic:
      return c.platform == Platform::Spinor3 ? analytic::spinor_qfi(c.theta, canonical_nu(c), c)
                                             : analytic::hybrid_qfi(c.theta, canonical_nu(c), c);
    case Method::Gaussian:
      return gaussian::qfi(c);
    default:
      throw ConfigError(std::string("QFI objective not available for engine ") + to_string(engine));
  }
}

double conventional_delta_phi(const InterferometerConfig& cfg, Method engine, const OptimizeOptions& opt) {
  if (engine == Method::Analytic) {
    if (opt.noise.sigma_varphi > 0) throw ConfigError("phase-difference noise needs the Gaussian engine");
    if (opt.noise.delta_n > 0) return analytic::conventional_detection_noise(cfg.r, opt.noise.delta_n).delta_phi;
    return analytic::conventional_sensitivity(side_population(cfg.r)).delta_phi;
  }
  return delta_phi(at(cfg, 0.0, canonical_nu(cfg)), engine, opt).value;
}

Eval evaluate(const InterferometerConfig& c, Method engine, Objective obj, const OptimizeOptions& opt) {
  if (obj == Objective::QFI) return {qfi(c, engine), 0.0, 0.0};
  Eval e = delta_phi(c, engine, opt);
  if (obj == Objective::Ratio) {
    const double conv = conventional_delta_phi(c, engine, opt);
    e.value /= conv;
    e.std_error /= conv;
  }
  return e;
}

bool in_range(Axis a, double x) {
  switch (a) {
    case Axis::NS:
    case Axis::R:
    case Axis::DeltaN:
    case Axis::SigmaVarphi:
    case Axis::Gamma:
      return x >= 0 && std::isfinite(x);
    case Axis::NF:
      return x > 0 && std::isfinite(x);
    case Axis::Theta:
      return x >= 0 && x <= 0.5 * kPi;
    case Axis::Nu:
      return x >= 0 && x < kTwoPi;
    case Axis::Phi:
      return x > -kTwoPi && x < kTwoPi;
  }
  return false;
}

}  // namespace

const char* to_string(Objective o) {
  switch (o) {
    case Objective::QFI: return "qfi";
    case Objective::DeltaPhiN: return "delta_phi_n";
    case Objective::Ratio: return "ratio";
  }
  return "?";
}

const char* to_string(Axis a) {
  switch (a) {
    case Axis::NS: return "n_s";
    case Axis::R: return "r";
    case Axis::Theta: return "theta";
    case Axis::Nu: return "nu";
    case Axis::Phi: return "phi";
    case Axis::DeltaN: return "delta_n";
    case Axis::SigmaVarphi: return "sigma_varphi";
    case Axis::Gamma: return "gamma";
    case Axis::NF: return "n_f";
  }
  return "?";
}

Objective objective_from_string(const std::string& s) {
  for (Objective o : {Objective::QFI, Objective::DeltaPhiN, Objective::Ratio})
    if (s == to_string(o)) return o;
  throw ConfigError("unknown objective '" + s + "' (qfi, delta_phi_n, ratio)");
}

Axis axis_from_string(const std::string& s) {
  for (Axis a : {Axis::NS, Axis::R, Axis::Theta, Axis::Nu, Axis::Phi, Axis::DeltaN, Axis::SigmaVarphi, Axis::Gamma,
                 Axis::NF})
    if (s == to_string(a)) return a;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

OptimumResult evaluate_objective(const InterferometerConfig& cfg, Method engine, Objective obj,
                                 const OptimizeOptions& opt) {
  validate(cfg);
  validate(opt.noise);
  const Eval e = evaluate(cfg, engine, obj, opt);
  OptimumResult r;
  r.theta_opt = cfg.theta;
  r.nu_opt = canonical_nu(cfg);
  r.phi_opt = e.phi;
  r.value = e.value;
  return r;
}

double conventional_reference(const InterferometerConfig& cfg, Method engine, Objective obj,
                              const OptimizeOptions& opt) {
  validate(cfg);
  if (obj == Objective::QFI) {
    const double ns = side_population(cfg.r);
    return ns * (ns + 2);
  }
  const double conv = conventional_delta_phi(cfg, engine, opt);
  return obj == Objective::Ratio ? 1.0 : conv;
}

OptimumResult optimize_interferometer(const InterferometerConfig& cfg, Method engine, Objective obj,
                                      const OptimizeOptions& opt) {
  validate(cfg);
  validate(opt.noise);
  if (engine != Method::Analytic && engine != Method::Gaussian)
    throw ConfigError("optimization supports the analytic and Gaussian engines; use a sweep for TW");
  const double sign = obj == Objective::QFI ? 1.0 : -1.0;
  // The ratio's denominator does not depend on (theta, nu): optimize delta phi, divide once.
  const Objective inner = obj == Objective::Ratio ? Objective::DeltaPhiN : obj;
  auto score = [&](double theta, double nu) {
    try {
      const double v = evaluate(at(cfg, theta, nu), engine, inner, opt).value;
      return std::isfinite(v) ? sign * v : kNaN;
    } catch (const std::exception&) {
      return kNaN;
    }
  };
  bool multimodal = false;
  auto best_theta = [&](double nu) { return maximize_1d([&](double th) { return score(th, nu); }, 0.0, 0.5 * kPi, opt.theta_tol); };
  const Extremum outer = maximize_1d(
      [&](double nu) {
        const Extremum e = best_theta(nu);
        return e.f_star;
      },
      0.0, kTwoPi, opt.nu_tol);
  if (!std::isfinite(outer.f_star)) throw NumericalError("objective is not finite anywhere on the search domain");
  const double nu = wrap_2pi(outer.x_star);
  const Extremum th = best_theta(nu);
  multimodal = outer.multimodal || th.multimodal;
  const Eval e = evaluate(at(cfg, th.x_star, nu), engine, inner, opt);
  OptimumResult r;
  r.theta_opt = th.x_star;
  r.nu_opt = nu;
  r.phi_opt = e.phi;
  r.value = e.value;
  r.multimodal = multimodal;
  if (obj == Objective::Ratio) r.value /= conventional_delta_phi(cfg, engine, opt);
  return r;
}

void validate(const SweepSpec& s) {
  if (s.values.empty()) throw ConfigError("sweep needs at least one value");
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!in_range(s.axis, s.values[i]))
      throw ConfigError(std::string("sweep value out of range for axis ") + to_string(s.axis));
    if (i > 0 && !(s.values[i] > s.values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
}

std::vector<SweepRow> sweep(const InterferometerConfig& cfg, const SweepSpec& spec, Method engine,
                            const OptimizeOptions& opt) {
  validate(spec);
  std::vector<SweepRow> rows(spec.values.size());
  parallel_for(rows.size(), [&](std::size_t i) {
    SweepRow& row = rows[i];
    row.x = spec.values[i];
    try {
      InterferometerConfig c = cfg;
      OptimizeOptions o = opt;
      bool point = engine == Method::TW;
      switch (spec.axis) {
        case Axis::NS: c.r = r_from_side_population(row.x); break;
        case Axis::R: c.r = row.x; break;
        case Axis::Theta: c.theta = row.x; point = true; break;
        case Axis::Nu: c = with_nu(c, row.x); point = true; break;
        case Axis::Phi: point = true; break;
        case Axis::DeltaN: o.noise.delta_n = row.x; break;
        case Axis::SigmaVarphi: o.noise.sigma_varphi = row.x; break;
        case Axis::Gamma:
          o.noise.gamma = row.x;
          o.noise.gamma_a0 = o.noise.gamma_b0 = row.x;
          break;
        case Axis::NF: c.n_f = row.x; break;
      }
      if (spec.axis == Axis::Phi) {
        if (spec.objective == Objective::QFI) throw ConfigError("the QFI does not depend on the interrogation phase");
        if (engine != Method::Analytic && engine != Method::Gaussian)
          throw ConfigError("phi sweeps need the analytic or Gaussian engine");
        const SignalMoments m = engine == Method::Analytic
                                    ? analytic::number_sum_moments(c.theta, canonical_nu(c), row.x, c)
                                    : gaussian::run_chain(c, row.x, 0.0);
        const double dn = o.noise.delta_n;
        row.value = std::sqrt(std::max(0.0, m.variance) + dn * dn) / std::abs(m.slope);
        row.theta_opt = c.theta;
        row.nu_opt = canonical_nu(c);
        row.phi_opt = row.x;
        row.conventional = conventional_reference(c, engine, Objective::DeltaPhiN, o);
        if (spec.objective == Objective::Ratio) row.value /= row.conventional;
        return;
      }
      OptimumResult r;
      if (point) {
        validate(c);
        const Eval e = evaluate(c, engine, spec.objective, o);
        r.theta_opt = c.theta;
        r.nu_opt = canonical_nu(c);
        r.phi_opt = e.phi;
        r.value = e.value;
        row.std_error = e.std_error;
      } else {
        r = optimize_interferometer(c, engine, spec.objective, o);
      }
      row.value = r.value;
      row.theta_opt = r.theta_opt;
      row.nu_opt = r.nu_opt;
      row.phi_opt = r.phi_opt;
      row.conventional = spec.objective == Objective::Ratio ? conventional_delta_phi(c, engine, o)
                                                             : conventional_reference(c, engine, spec.objective, o);
    } catch (const std::exception& ex) {
      row.value = kNaN;
      row.error = ex.what();
    }
  });
  return rows;
}

}  // namespace su11
