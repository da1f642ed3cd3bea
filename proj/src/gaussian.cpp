#include "su11/gaussian.hpp"

#include <cmath>

#include "su11/search.hpp"

namespace su11::gaussian {

namespace {

constexpr cd I{0.0, 1.0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_mode(int k, int n) {
  if (k < 0 || k >= n) throw ConfigError("stage references a mode outside the state");
}

}  // namespace

LinearMap stage_map(const Stage& s, int n) {
  LinearMap m{Mat::Identity(n, n), Mat::Zero(n, n)};
  std::visit(overloaded{
                 [&](const ParametricAmp& p) {
                   check_mode(p.i, n);
                   check_mode(p.j, n);
                   m.M(p.i, p.i) = m.M(p.j, p.j) = std::cosh(p.r);
                   m.L(p.i, p.j) = m.L(p.j, p.i) = -I * std::exp(I * p.vartheta_sq) * std::sinh(p.r);
                 },
                 [&](const Tritter& t) {
                   if (n < 3) throw ConfigError("tritter needs three modes");
                   const double c = std::cos(t.theta), s = std::sin(t.theta);
                   const cd up = -I * std::exp(I * t.vartheta) * s / std::sqrt(2.0);
                   const cd dn = -I * std::exp(-I * t.vartheta) * s / std::sqrt(2.0);
                   const double ch = std::pow(std::cos(t.theta / 2), 2), sh = std::pow(std::sin(t.theta / 2), 2);
                   m.M(0, 0) = c;
                   m.M(0, 1) = m.M(0, 2) = up;
                   m.M(1, 1) = m.M(2, 2) = ch;
                   m.M(1, 2) = m.M(2, 1) = -sh;
                   m.M(1, 0) = m.M(2, 0) = dn;
                 },
                 [&](const BeamSplitter& b) {
                   check_mode(b.p, n);
                   check_mode(b.q, n);
                   const double c = std::cos(b.theta), s = std::sin(b.theta);
                   m.M(b.p, b.p) = c;
                   m.M(b.q, b.q) = c;
                   m.M(b.p, b.q) = -I * std::exp(I * b.vartheta) * s;
                   m.M(b.q, b.p) = -I * std::exp(-I * b.vartheta) * s;
                 },
                 [&](const Phase& ph) {
                   if (static_cast<int>(ph.phases.size()) != n) throw ConfigError("phase vector length mismatch");
                   for (int k = 0; k < n; ++k) m.M(k, k) = std::exp(-I * ph.phases[k]);
                 },
             },
             s);
  return m;
}

GaussianState vacuum_state(int n) {
  GaussianState st;
  st.n_modes = n;
  st.mean = Vec::Zero(n);
  st.normal_cov = Mat::Zero(n, n);
  st.anomalous = Mat::Zero(n, n);
  return st;
}

GaussianState init_state(const InterferometerConfig& cfg) {
  validate(cfg);
  if (cfg.platform == Platform::Spinor3) {
    GaussianState st = vacuum_state(3);
    st.mean(0) = std::sqrt(cfg.n_total);
    return st;
  }
  GaussianState st = vacuum_state(4);
  st.mean(0) = std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f));
  st.mean(1) = std::sqrt(hybrid_nb0(cfg.n_total, cfg.n_f));
  return st;
}

GaussianState apply_stage(const GaussianState& st, const Stage& s) {
  const int n = st.n_modes;
  const LinearMap lm = stage_map(s, n);
  const Mat& M = lm.M;
  const Mat& L = lm.L;
  const Mat Id = Mat::Identity(n, n);
  const Mat& N = st.normal_cov;
  const Mat& A = st.anomalous;
  GaussianState out;
  out.n_modes = n;
  out.mean = M * st.mean + L * st.mean.conjugate();
  out.anomalous = M * A * M.transpose() + M * (N.transpose() + Id) * L.transpose() + L * N * M.transpose() +
                  L * A.conjugate() * L.transpose();
  out.normal_cov = M.conjugate() * N * M.transpose() + M.conjugate() * A.conjugate() * L.transpose() +
                   L.conjugate() * A * M.transpose() + L.conjugate() * (N.transpose() + Id) * L.transpose();
  if (const auto* p = std::get_if<ParametricAmp>(&s); p && !p->pumps.empty()) {
    const double sh = std::sinh(p->r);
    const double delta = 2.0 * sh * sh / static_cast<double>(p->pumps.size());
    for (int k : p->pumps) {
      check_mode(k, n);
      const double pop = std::norm(out.mean(k)) - (p->r > 0 ? delta : -delta);
      if (pop < 0) throw ConfigError("pump population driven below zero");
      const double mag = std::abs(out.mean(k));
      out.mean(k) = mag > 0 ? out.mean(k) * (std::sqrt(pop) / mag) : cd(std::sqrt(pop), 0.0);
    }
  }
  return out;
}

std::vector<int> side_modes(Platform p) { return p == Platform::Spinor3 ? std::vector<int>{1, 2} : std::vector<int>{2, 3}; }

std::vector<Stage> preparation_stages(const InterferometerConfig& cfg) {
  const double vt = 0.5 * canonical_nu(cfg);
  if (cfg.platform == Platform::Spinor3)
    return {ParametricAmp{cfg.r, 0.0, 1, 2, {0}}, Tritter{cfg.theta, vt}};
  return {ParametricAmp{cfg.r, 0.0, 2, 3, {0, 1}}, BeamSplitter{cfg.theta, vt, 0, 2}, BeamSplitter{cfg.theta, vt, 1, 3}};
}

std::vector<Stage> chain_stages(const InterferometerConfig& cfg, double phi_sum, double phi_diff) {
  std::vector<Stage> st = preparation_stages(cfg);
  const double vt = 0.5 * canonical_nu(cfg);
  const double p1 = 0.5 * (phi_sum + phi_diff), p2 = 0.5 * (phi_sum - phi_diff);
  if (cfg.platform == Platform::Spinor3) {
    st.push_back(Phase{{0.0, p1, p2}});
    st.push_back(Tritter{-cfg.theta, vt});
    st.push_back(ParametricAmp{-cfg.r, 0.0, 1, 2, {0}});
  } else {
    st.push_back(Phase{{0.0, 0.0, p1, p2}});
    st.push_back(BeamSplitter{-cfg.theta, vt, 0, 2});
    st.push_back(BeamSplitter{-cfg.theta, vt, 1, 3});
    st.push_back(ParametricAmp{-cfg.r, 0.0, 2, 3, {0, 1}});
  }
  return st;
}

NumberSum number_sum(const GaussianState& st, const std::vector<int>& modes) {
  const Vec& mu = st.mean;
  const Mat& N = st.normal_cov;
  const Mat& A = st.anomalous;
  double mean = 0;
  cd var = 0;
  for (int i : modes) {
    mean += std::norm(mu(i)) + N(i, i).real();
    for (int j : modes) {
      const double d = i == j ? 1.0 : 0.0;
      var += std::conj(mu(i)) * std::conj(mu(j)) * A(i, j) + std::conj(mu(i)) * mu(j) * (N(j, i) + d) +
             mu(i) * std::conj(mu(j)) * N(i, j) + mu(i) * mu(j) * std::conj(A(i, j));
      var += std::norm(A(i, j)) + N(i, j) * (N(j, i) + d);
    }
  }
  return {mean, var.real()};
}

double total_number(const GaussianState& st) {
  double n = 0;
  for (int k = 0; k < st.n_modes; ++k) n += std::norm(st.mean(k)) + st.normal_cov(k, k).real();
  return n;
}

double min_symplectic_eigenvalue(const GaussianState& st) {
  const int n = st.n_modes;
  // second moments of xi = (a, a^dag)
  Mat G(2 * n, 2 * n);
  G.topLeftCorner(n, n) = st.anomalous;
  G.topRightCorner(n, n) = st.normal_cov.transpose() + Mat::Identity(n, n);
  G.bottomLeftCorner(n, n) = st.normal_cov;
  G.bottomRightCorner(n, n) = st.anomalous.conjugate();
  // R = (x, p) = T xi
  Mat T = Mat::Zero(2 * n, 2 * n);
  const double s = 1.0 / std::sqrt(2.0);
  for (int k = 0; k < n; ++k) {
    T(k, k) = s;
    T(k, n + k) = s;
    T(n + k, k) = -I * s;
    T(n + k, n + k) = I * s;
  }
  const Mat C = T * G * T.transpose();
  const Eigen::MatrixXd V = (0.5 * (C + C.transpose())).real();
  Eigen::MatrixXd Om = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Om.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  Om.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  Eigen::EigenSolver<Eigen::MatrixXd> es(Om * V);
  double mn = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 2 * n; ++k) mn = std::min(mn, std::abs(es.eigenvalues()(k)));
  return mn;
}

bool is_physical(const GaussianState& st, double tol) {
  const Mat& N = st.normal_cov;
  const Mat& A = st.anomalous;
  const double scale = 1.0 + N.cwiseAbs().maxCoeff() + A.cwiseAbs().maxCoeff();
  if ((N - N.adjoint()).cwiseAbs().maxCoeff() > tol * scale) return false;
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > tol * scale) return false;
  for (int k = 0; k < st.n_modes; ++k)
    if (N(k, k).real() < -tol * scale) return false;
  return min_symplectic_eigenvalue(st) >= 0.5 - tol * scale;
}

GaussianState run_stages(GaussianState st, const std::vector<Stage>& stages) {
  for (const Stage& s : stages) st = apply_stage(st, s);
  return st;
}

NumberSum chain_number_sum(const InterferometerConfig& cfg, double phi_sum, double phi_diff) {
  const GaussianState st = run_stages(init_state(cfg), chain_stages(cfg, phi_sum, phi_diff));
  return number_sum(st, side_modes(cfg.platform));
}

namespace {

template <class F>
double richardson_slope(F&& mean_at, double phi, double h) {
  const double d1 = (mean_at(phi + h) - mean_at(phi - h)) / (2 * h);
  const double d2 = (mean_at(phi + h / 2) - mean_at(phi - h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

}  // namespace

SignalMoments run_chain(const InterferometerConfig& cfg, double phi_sum, double phi_diff) {
  const NumberSum ns = chain_number_sum(cfg, phi_sum, phi_diff);
  SignalMoments m;
  m.phi = phi_sum;
  m.mean = ns.mean;
  m.variance = ns.variance;
  m.slope = richardson_slope([&](double p) { return chain_number_sum(cfg, p, phi_diff).mean; }, phi_sum, kSlopeStep);
  return m;
}

SensitivityResult sensitivity_numeric(const InterferometerConfig& cfg, double phi_eval) {
  if (phi_eval == 0.0) throw NumericalError("Gaussian sensitivity is indeterminate at phi = 0; use a small phi_eval");
  const SignalMoments m = run_chain(cfg, phi_eval, 0.0);
  if (m.slope == 0.0) throw NumericalError("zero slope");
  SensitivityResult r;
  r.delta_phi = std::sqrt(std::max(0.0, m.variance)) / std::abs(m.slope);
  r.method = Method::Gaussian;
  r.operating_point = {cfg.theta, canonical_nu(cfg), phi_eval};
  return r;
}

double qfi(const InterferometerConfig& cfg) {
  const GaussianState st = run_stages(init_state(cfg), preparation_stages(cfg));
  return number_sum(st, side_modes(cfg.platform)).variance;
}

void gauss_hermite(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw ConfigError("Gauss-Hermite needs at least one node");
  // Golub-Welsch on the probabilists' Hermite recurrence.
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  x.resize(n);
  w.resize(n);
  for (int k = 0; k < n; ++k) {
    x[k] = es.eigenvalues()(k);
    w[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
  }
}

NumberSum noisy_number_sum(const InterferometerConfig& cfg, double phi_sum, double sigma, int nodes) {
  if (sigma == 0.0) return chain_number_sum(cfg, phi_sum, 0.0);
  std::vector<double> x, w;
  gauss_hermite(nodes, x, w);
  double m1 = 0, m2 = 0, v = 0;
  for (int k = 0; k < nodes; ++k) {
    const NumberSum s = chain_number_sum(cfg, phi_sum, sigma * x[k]);
    m1 += w[k] * s.mean;
    m2 += w[k] * s.mean * s.mean;
    v += w[k] * s.variance;
  }
  return {m1, v + std::max(0.0, m2 - m1 * m1)};
}

double noisy_delta_phi(const InterferometerConfig& cfg, double phi_sum, double sigma, int nodes) {
  const NumberSum s = noisy_number_sum(cfg, phi_sum, sigma, nodes);
  const double slope =
      richardson_slope([&](double p) { return noisy_number_sum(cfg, p, sigma, nodes).mean; }, phi_sum, kSlopeStep);
  return std::sqrt(std::max(0.0, s.variance)) / std::abs(slope);
}

PhaseNoiseResult phase_noise_sensitivity(const InterferometerConfig& cfg, double sigma, int base_nodes) {
  if (!(sigma >= 0)) throw ConfigError("sigma_varphi must be nonnegative");
  validate(cfg);
  PhaseNoiseResult out;
  out.result.method = Method::Gaussian;
  const double lo = kDefaultPhiEval, hi = kPi;
  int nodes = base_nodes;
  for (int attempt = 0; attempt < 5; ++attempt) {
    auto f = [&](double p) { return noisy_delta_phi(cfg, p, sigma, nodes); };
    const Extremum e = minimize_1d(f, lo, hi, 1e-6);
    out.result.delta_phi = e.f_star;
    out.result.operating_point = {cfg.theta, canonical_nu(cfg), e.x_star};
    out.nodes = nodes;
    if (sigma == 0.0) return out;
    const double finer = noisy_delta_phi(cfg, e.x_star, sigma, 2 * nodes - 1);
    if (std::abs(finer - e.f_star) <= 1e-4 * e.f_star) return out;
    nodes = 2 * nodes - 1;
  }
  out.converged = false;
  return out;
}

}  // namespace su11::gaussian
