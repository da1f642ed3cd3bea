#include "su11/analytic.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace su11::analytic {

using cd = std::complex<double>;
namespace {

constexpr cd I{0.0, 1.0};

double sq(double x) { return x * x; }

// Undepleted five-stage chain composed into a single Bogoliubov map
// a_out = M a + L a^dag acting on the input (pump coherent, sides vacuum).
template <int n>
struct Bogoliubov {
  using Mat = Eigen::Matrix<cd, n, n>;
  Mat M = Mat::Identity();
  Mat L = Mat::Zero();

  void then(const Mat& Ms, const Mat& Ls) {
    Mat M2 = Ms * M + Ls * L.conjugate();
    Mat L2 = Ms * L + Ls * M.conjugate();
    M = M2;
    L = L2;
  }
};

template <int n>
using Mat = Eigen::Matrix<cd, n, n>;

Mat<3> tritter3(double t, double vt) {
  Mat<3> M = Mat<3>::Zero();
  const double c = std::cos(t), s = std::sin(t);
  M(0, 0) = c;
  M(0, 1) = M(0, 2) = -I * std::exp(I * vt) * s / std::sqrt(2.0);
  const double ch = sq(std::cos(t / 2)), sh = sq(std::sin(t / 2));
  M(1, 1) = M(2, 2) = ch;
  M(1, 2) = M(2, 1) = -sh;
  M(1, 0) = M(2, 0) = -I * std::exp(-I * vt) * s / std::sqrt(2.0);
  return M;
}

Mat<4> beamsplitters4(double t, double vt) {
  Mat<4> M = Mat<4>::Zero();
  const double c = std::cos(t), s = std::sin(t);
  for (int k = 0; k < 2; ++k) {
    const int p = k, q = k + 2;
    M(p, p) = c;
    M(p, q) = -I * std::exp(I * vt) * s;
    M(q, q) = c;
    M(q, p) = -I * std::exp(-I * vt) * s;
  }
  return M;
}

template <int n>
void squeeze(Bogoliubov<n>& b, double r, int i, int j) {
  Mat<n> M = Mat<n>::Identity(), L = Mat<n>::Zero();
  M(i, i) = M(j, j) = std::cosh(r);
  L(i, j) = L(j, i) = -I * std::sinh(r);
  b.then(M, L);
}

template <int n>
void phase(Bogoliubov<n>& b, double phi, int i, int j) {
  Mat<n> M = Mat<n>::Identity();
  M(i, i) = std::exp(-I * phi / 2.0);
  M(j, j) = std::exp(-I * phi / 2.0);
  b.then(M, Mat<n>::Zero());
}

// Mean and variance of n_i + n_j for a_out = M a + L a^dag, input <a> = mu0 and vacuum fluctuations.
template <int n>
std::pair<double, double> side_sum(const Bogoliubov<n>& b, const Eigen::Matrix<cd, n, 1>& mu0, int i0, int j0) {
  const Eigen::Matrix<cd, n, 1> mu = b.M * mu0 + b.L * mu0.conjugate();
  const Mat<n> N = b.L.conjugate() * b.L.transpose();
  const Mat<n> A = b.M * b.L.transpose();
  const int side[2] = {i0, j0};
  double mean = 0;
  cd var = 0;
  for (int i : side) {
    mean += std::norm(mu(i)) + N(i, i).real();
    for (int j : side) {
      const double d = i == j ? 1.0 : 0.0;
      var += std::conj(mu(i)) * std::conj(mu(j)) * A(i, j) + std::conj(mu(i)) * mu(j) * (N(j, i) + d) +
             mu(i) * std::conj(mu(j)) * N(i, j) + mu(i) * mu(j) * std::conj(A(i, j));
      var += std::norm(A(i, j)) + N(i, j) * (N(j, i) + d);
    }
  }
  return {mean, var.real()};
}

double spinor_pump2(const InterferometerConfig& c) { return c.n_total - side_population(c.r); }

void hybrid_pumps(const InterferometerConfig& c, double& a, double& b) {
  const double s2 = sq(std::sinh(c.r));
  const double a2 = hybrid_na0(c.n_total, c.n_f) - s2;
  const double b2 = hybrid_nb0(c.n_total, c.n_f) - s2;
  if (!(a2 > 0) || !(b2 > 0)) throw ConfigError("hybrid pump depleted below zero");
  a = std::sqrt(a2);
  b = std::sqrt(b2);
}

}  // namespace

ConventionalQfi conventional_sensitivity(double n_s) {
  if (!(n_s >= 0)) throw ConfigError("n_s must be nonnegative");
  const double f = n_s * (n_s + 2.0);
  if (n_s == 0) return {0.0, std::numeric_limits<double>::quiet_NaN(), false};
  return {f, 1.0 / std::sqrt(f), true};
}

double spinor_G(double n_s, double nu) { return n_s - std::sqrt(n_s * (n_s + 2)) * std::sin(nu); }

double spinor_qfi(double theta, double nu, const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r);
  const double q = std::sqrt(ns * (ns + 2)), sn = std::sin(nu);
  const double c2 = sq(std::cos(theta)), s2 = sq(std::sin(theta)), s22 = sq(std::sin(2 * theta));
  return N * (1 + (ns - q * sn) * c2) * s2 + 0.5 * ns * (ns + (ns + 4) * c2 + 0.25 * (2 * q * sn - 3 * ns - 1) * s22);
}

double spinor_qfi_main_form(double theta, double nu, const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r);
  const double c2 = sq(std::cos(theta));
  return N * sq(std::sin(theta)) + 0.25 * (N - ns) * spinor_G(ns, nu) * sq(std::sin(2 * theta)) +
         0.5 * ns * (ns + (3 + (ns + 1) * c2) * c2);
}

namespace {

CriticalSet pick(double x_c, double (*f)(double, double, const InterferometerConfig&), double nu,
                 const InterferometerConfig& cfg) {
  CriticalSet cs;
  cs.x_c = x_c;
  cs.theta_c_exists = std::isfinite(x_c) && std::abs(x_c) < 1.0;
  cs.candidates.push_back({0.0, f(0.0, nu, cfg)});
  if (cs.theta_c_exists) {
    const double tc = 0.5 * std::acos(x_c);
    cs.candidates.push_back({tc, f(tc, nu, cfg)});
  }
  cs.candidates.push_back({kPi / 2, f(kPi / 2, nu, cfg)});
  cs.theta_opt = cs.candidates.front().first;
  cs.qfi_opt = cs.candidates.front().second;
  for (const auto& [t, v] : cs.candidates) {
    if (v > cs.qfi_opt + 1e-12 * std::abs(cs.qfi_opt)) {
      cs.theta_opt = t;
      cs.qfi_opt = v;
    }
  }
  return cs;
}

}  // namespace

CriticalSet spinor_qfi_critical(const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r), nu = canonical_nu(cfg);
  const double q = std::sqrt(ns * (ns + 2));
  const double num = ns * (ns + 4) - 2 * N;
  const double den = ns * (2 * N - 3 * ns - 1) - 2 * (N - ns) * q * std::sin(nu);
  return pick(num / den, &spinor_qfi, nu, cfg);
}

double spinor_qfi_opt_leading_coeff(double r) { return std::exp(2 * r) * (1 + 1 / std::tanh(r)) / 8.0; }

double spinor_theta_c_asymptote(double n_s, double nu) {
  return (kPi + 2 * std::asin(1.0 / spinor_G(n_s, nu))) / 4.0;
}

double hybrid_qfi(double theta, double nu, const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r);
  const double na = hybrid_na0(N, cfg.n_f), nb = hybrid_nb0(N, cfg.n_f);
  const double root = std::sqrt(std::max(0.0, ns * (ns + 2) * (2 * na - ns) * (2 * nb - ns)));
  const double c2 = sq(std::cos(theta)), s2 = sq(std::sin(theta));
  return (N - ns) * s2 * s2 + ns * (ns + 2) * c2 * c2 + (N + ns * (N - ns) - root * std::sin(nu)) * c2 * s2;
}

CriticalSet hybrid_qfi_critical(const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r), nu = canonical_nu(cfg);
  const double na = hybrid_na0(N, cfg.n_f), nb = hybrid_nb0(N, cfg.n_f);
  const double root = std::sqrt(std::max(0.0, ns * (ns + 2) * (2 * na - ns) * (2 * nb - ns)));
  const double num = N - ns * (ns + 3);
  const double den = ns * (2 * ns + 1 - N) + root * std::sin(nu);
  return pick(num / den, &hybrid_qfi, nu, cfg);
}

double hybrid_qfi_opt_leading_coeff(double r, double n_f) {
  const double g = std::sqrt(n_f);
  const double top = sq((1 + n_f) * std::cosh(2 * r) + 2 * g * std::sinh(2 * r));
  return top / (8 * (1 + n_f) * (1 + n_f + 2 * g / std::tanh(r)) * sq(std::sinh(r)));
}

SignalMoments spinor_number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg) {
  validate(cfg);
  const double r = cfg.r, a2 = spinor_pump2(cfg);
  if (!(a2 > 0)) throw ConfigError("pump depleted below zero");
  const double s22 = sq(std::sin(2 * theta));
  const double K = 3 + 4 * sq(std::cos(theta)) + sq(std::cos(2 * theta));
  const double sh2 = sq(std::sinh(r)), ch2 = sq(std::cosh(r));
  const double c2r = std::cosh(2 * r), s2r = std::sinh(2 * r);
  const double s4 = std::sin(phi / 4), c4 = std::cos(phi / 4);

  SignalMoments m;
  m.phi = phi;
  m.has_series = true;
  m.slope_phi1 = 0.25 * (0.5 * a2 * s22 * (c2r - std::sin(nu) * s2r) + (2 * K * ch2 + 0.5 * s22) * sh2);
  m.var_phi2 = (a2 * s22 * (c2r - std::sin(nu) * s2r) + s22 * sh2 + 2 * K * sq(s2r)) / 16.0;
  if (phi == 0.0) return m;

  m.mean = a2 * s22 * s4 * s4 * (c2r - std::sin(nu + phi / 2) * s2r) + s4 * s4 * (s22 + 4 * K * c4 * c4 * ch2) * sh2;
  m.slope = 0.5 * a2 * s22 * s4 * (c4 * c2r - std::sin(nu + 0.75 * phi) * s2r) +
            c4 * (2 * K * std::cos(phi / 2) * ch2 + 0.5 * s22) * s4 * sh2;

  Bogoliubov<3> b;
  squeeze(b, r, 1, 2);
  b.then(tritter3(theta, nu / 2), Mat<3>::Zero());
  phase(b, phi, 1, 2);
  b.then(tritter3(-theta, nu / 2), Mat<3>::Zero());
  squeeze(b, -r, 1, 2);
  Eigen::Matrix<cd, 3, 1> mu0(std::sqrt(a2), 0, 0);
  m.variance = side_sum(b, mu0, 1, 2).second;
  return m;
}

SignalMoments hybrid_number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg) {
  validate(cfg);
  if (cfg.platform != Platform::Hybrid4) throw ConfigError("hybrid moments need a Hybrid4 config");
  double a, b;
  hybrid_pumps(cfg, a, b);
  const double r = cfg.r;
  const double c2 = sq(std::cos(theta)), s2 = sq(std::sin(theta)), s22 = sq(std::sin(2 * theta));
  const double sh2 = sq(std::sinh(r)), ch2 = sq(std::cosh(r));
  const double c2r = std::cosh(2 * r), s2r = std::sinh(2 * r);
  const double ab2 = a * a + b * b;

  SignalMoments m;
  m.phi = phi;
  m.has_series = true;
  m.slope_phi1 = c2 * (0.5 * ab2 * s2 * c2r + (s2 + 4 * c2 * ch2) * sh2 - a * b * s2 * std::sin(nu) * s2r);
  m.var_phi2 = c2 * (4 * c2 * std::cosh(4 * r) - 2 * (1 + c2) + 2 * s2 * ((ab2 + 1) * c2r - 2 * a * b * std::sin(nu) * s2r)) / 8.0;
  if (phi == 0.0) return m;

  m.mean = 2 * c2 * c2 * sq(std::sin(phi / 2)) * sq(s2r) +
           s22 * sq(std::sin(phi / 4)) * (ab2 * c2r + 2 * sh2 - 2 * a * b * std::sin(nu + phi / 2) * s2r);
  m.slope = c2 * (ab2 * s2 * std::sin(phi / 2) * c2r + 2 * (s2 * std::sin(phi / 2) + 2 * c2 * std::sin(phi) * ch2) * sh2 -
                  4 * a * b * s2 * std::sin(nu + 0.75 * phi) * std::sin(phi / 4) * s2r);

  Bogoliubov<4> bg;
  squeeze(bg, r, 2, 3);
  bg.then(beamsplitters4(theta, nu / 2), Mat<4>::Zero());
  phase(bg, phi, 2, 3);
  bg.then(beamsplitters4(-theta, nu / 2), Mat<4>::Zero());
  squeeze(bg, -r, 2, 3);
  Eigen::Matrix<cd, 4, 1> mu0(a, b, 0, 0);
  m.variance = side_sum(bg, mu0, 2, 3).second;
  return m;
}

SignalMoments number_sum_moments(double theta, double nu, double phi, const InterferometerConfig& cfg) {
  return cfg.platform == Platform::Spinor3 ? spinor_number_sum_moments(theta, nu, phi, cfg)
                                           : hybrid_number_sum_moments(theta, nu, phi, cfg);
}

double delta_phi_N(double theta, double nu, const InterferometerConfig& cfg) {
  const SignalMoments m = number_sum_moments(theta, nu, 0.0, cfg);
  return sensitivity_from_moments(m, 0.0).delta_phi;
}

double delta_phi_N_leading(double theta, double nu, const InterferometerConfig& cfg) {
  const double e = eta(cfg.platform, cfg.r, nu, cfg.n_f);
  return 2.0 / std::abs(std::sin(2 * theta)) / std::sqrt(e * cfg.n_total);
}

SensitivityResult sensitivity_from_moments(const SignalMoments& m, double delta_n) {
  if (!(delta_n >= 0)) throw ConfigError("delta_n must be nonnegative");
  SensitivityResult res;
  res.method = Method::Analytic;
  res.operating_point.phi = m.phi;
  if (m.phi == 0.0 && m.has_series) {
    if (m.slope_phi1 == 0.0) throw NumericalError("indeterminate sensitivity: zero slope coefficient");
    res.delta_phi = delta_n > 0 ? std::numeric_limits<double>::infinity()
                                : std::sqrt(std::max(0.0, m.var_phi2)) / std::abs(m.slope_phi1);
    return res;
  }
  if (m.slope == 0.0) {
    if (m.variance == 0.0 && delta_n == 0.0) throw NumericalError("indeterminate sensitivity: 0/0");
    res.delta_phi = std::numeric_limits<double>::infinity();
    return res;
  }
  res.delta_phi = std::sqrt(std::max(0.0, m.variance) + delta_n * delta_n) / std::abs(m.slope);
  return res;
}

double conventional_detection_delta_phi(double r, double delta_n, double phi) {
  if (!(r > 0)) throw ConfigError("r must be positive");
  const double cs = 1.0 / std::sinh(2 * r);
  const double sec2 = 1.0 / sq(std::cos(phi / 2));
  const double dn = delta_n == 0.0 ? 0.0 : 8 * delta_n * delta_n / sq(std::sin(phi));
  const double v = 0.125 * sq(cs * cs) * (dn + (std::cosh(8 * r) - 1) * sec2) - 1.0;
  return std::sqrt(v);
}

DetectionOptimum conventional_detection_noise(double r, double delta_n) {
  if (!(r > 0)) throw ConfigError("r must be positive");
  if (!(delta_n >= 0)) throw ConfigError("delta_n must be nonnegative");
  const double dn = delta_n;
  const double inner = std::sqrt(2 * (2 * dn * dn + std::cosh(8 * r) - 1));
  const double phi_opt = 2 * std::asin(std::sqrt(2 * dn / (2 * dn + inner)));
  const double cs = 1.0 / std::sinh(2 * r), ct = 1.0 / std::tanh(2 * r);
  const double val = std::abs(cs) * std::sqrt(1 + 0.5 * dn * (cs * cs * dn + std::sqrt(4 * ct * ct + sq(cs * cs) * dn * dn)));
  return {phi_opt, val};
}

SensitivityResult loschmidt_restricted_sensitivity(double theta, const InterferometerConfig& cfg, double var_n0_initial) {
  const double nu = canonical_nu(cfg);
  const double f = cfg.platform == Platform::Spinor3 ? spinor_qfi(theta, nu, cfg) : hybrid_qfi(theta, nu, cfg);
  const double v = var_n0_initial < 0 ? cfg.n_total : var_n0_initial;
  const double rad = f - v * sq(sq(std::sin(theta)));
  if (!(rad > 0)) throw ConfigError("restricted echo sensitivity undefined: nonpositive radicand");
  SensitivityResult res;
  res.delta_phi = 1.0 / std::sqrt(rad);
  res.method = Method::Analytic;
  res.operating_point = {theta, nu, 0.0};
  return res;
}

double qfi_from_general_moments(const GeneralMoments& m, double theta, double vartheta, Platform platform) {
  const double var_ns = m.mean_ns_sq - sq(m.mean_ns);
  const double var_n0 = m.mean_n0_sq - sq(m.mean_n0);
  const double cov = m.mean_n0_ns - m.mean_n0 * m.mean_ns;
  const double A = 2.0 * (std::exp(-2.0 * I * vartheta) * m.pair_corr).real();
  const double c2 = sq(std::cos(theta)), s2 = sq(std::sin(theta));
  if (platform == Platform::Spinor3) {
    return 0.25 * sq(1 + c2) * var_ns + (var_n0 + 0.25 * (0.5 * m.mean_ns_sq + m.mean_ns)) * s2 * s2 +
           (1 + 2 * c2) * s2 * cov + 0.25 * (m.mean_n0 * (m.mean_ns + 1) + 0.5 * m.mean_ns - A) * sq(std::sin(2 * theta));
  }
  return var_n0 * s2 * s2 + var_ns * c2 * c2 + (m.mean_n0 * (m.mean_ns + 1) + m.mean_ns + 3 * cov - 2 * A) * c2 * s2;
}

double best_vartheta(const GeneralMoments& m) { return wrap_2pi(0.5 * (std::arg(m.pair_corr) - kPi)) ; }

GeneralMoments undepleted_general_moments(const InterferometerConfig& cfg) {
  validate(cfg);
  const double N = cfg.n_total, ns = side_population(cfg.r);
  GeneralMoments m;
  m.mean_n0 = N - ns;
  m.mean_n0_sq = (N - ns) * (N - ns + 1);
  m.mean_ns = ns;
  m.mean_ns_sq = ns * ns + ns * (ns + 2);
  m.mean_n0_ns = (N - ns) * ns;
  const double q = std::sqrt(ns * (ns + 2));
  if (cfg.platform == Platform::Spinor3) {
    m.pair_corr = 0.5 * I * (N - ns) * q * std::exp(I * (2 * cfg.vartheta_pump + cfg.vartheta_sq));
  } else {
    double a, b;
    hybrid_pumps(cfg, a, b);
    m.pair_corr = 0.5 * I * q * a * b * std::exp(I * (cfg.vartheta_pump + cfg.vartheta_sq));
  }
  return m;
}

}  // namespace su11::analytic
