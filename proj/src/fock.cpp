#include "su11/fock.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <string>

#include "su11/search.hpp"

namespace su11::fock {

namespace {

constexpr cd I{0.0, 1.0};

int spinor_offset(int n, int n0) {
  // number of compositions with first entry < n0
  return n0 * (n + 1) - n0 * (n0 - 1) / 2;
}

void check_cap(const FockSectorState& s, const FockOptions& opt) {
  const SectorBasis& b = *s.basis;
  const int largest = b.platform == Platform::Spinor3 ? b.n_total : std::max(b.na, b.nb);
  if (largest > opt.cap)
    throw ConfigError("Fock sector with " + std::to_string(largest) + " particles exceeds the cap " +
                      std::to_string(opt.cap));
}

int n0_of(const Composition& c, Platform p) { return p == Platform::Spinor3 ? c[0] : c[0] + c[1]; }
int ns_of(const Composition& c, Platform p) { return p == Platform::Spinor3 ? c[1] + c[2] : c[2] + c[3]; }

// psi <- V exp(-i lambda) V^T psi on the listed basis indices.
void apply_tridiagonal_block(std::vector<cd>& amp, const std::vector<int>& idx, const Eigen::VectorXd& diag,
                             const Eigen::VectorXd& sub) {
  const int d = static_cast<int>(idx.size());
  if (d == 1) {
    amp[idx[0]] *= std::exp(-I * diag(0));
    return;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
  const Eigen::MatrixXd& V = es.eigenvectors();
  Eigen::VectorXcd v(d);
  for (int k = 0; k < d; ++k) v(k) = amp[idx[k]];
  Eigen::VectorXcd w = V.transpose().cast<cd>() * v;
  for (int k = 0; k < d; ++k) w(k) *= std::exp(-I * es.eigenvalues()(k));
  v = V.cast<cd>() * w;
  for (int k = 0; k < d; ++k) amp[idx[k]] = v(k);
}

struct Hop {
  int p, q;  // coefficient * a_p^dag a_q
  cd coeff;
};

// exp(-i theta G) psi for G = sum of hops, by Chebyshev expansion:
// exp(-i z x) = J0(z) + 2 sum_k (-i)^k J_k(z) T_k(x) with x = G / norm_bound in [-1, 1].
// norm_bound must bound the spectral radius of G within the sector.
void expmv_hops(FockSectorState& s, const std::vector<Hop>& hops, double theta, double norm_bound) {
  if (theta == 0.0 || norm_bound == 0.0) return;
  const SectorBasis& b = *s.basis;
  const int dim = b.size();
  // Flip the generator for negative angles so the Bessel argument stays positive.
  const double sign = theta < 0 ? -1.0 : 1.0;
  const double z = std::abs(theta) * norm_bound;
  std::vector<int> target, source;
  std::vector<cd> factor;
  for (const Hop& h : hops) {
    for (int i = 0; i < dim; ++i) {
      const Composition& c = b.comps[i];
      if (c[h.q] == 0) continue;
      Composition t = c;
      t[h.q] -= 1;
      t[h.p] += 1;
      const int j = b.index_of(t);
      if (j < 0) continue;
      source.push_back(i);
      target.push_back(j);
      factor.push_back(sign / norm_bound * h.coeff * std::sqrt(static_cast<double>(c[h.q]) * (c[h.p] + 1)));
    }
  }
  auto apply = [&](const std::vector<cd>& in, std::vector<cd>& out) {
    std::fill(out.begin(), out.end(), cd{0, 0});
    for (std::size_t e = 0; e < source.size(); ++e) out[target[e]] += factor[e] * in[source[e]];
  };
  std::vector<cd> t_prev = s.amplitudes, t_cur(dim), t_next(dim), acc(dim);
  const double j0 = std::cyl_bessel_j(0.0, z);
  for (int i = 0; i < dim; ++i) acc[i] = j0 * t_prev[i];
  apply(t_prev, t_cur);
  cd phase = -I;
  for (int k = 1;; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(k), z);
    const cd c = 2.0 * phase * jk;
    for (int i = 0; i < dim; ++i) acc[i] += c * t_cur[i];
    if (k > z && std::abs(jk) < 1e-18) break;
    if (k > 4 * z + 200) throw NumericalError("Chebyshev propagator did not converge");
    apply(t_cur, t_next);
    for (int i = 0; i < dim; ++i) t_next[i] = 2.0 * t_next[i] - t_prev[i];
    std::swap(t_prev, t_cur);
    std::swap(t_cur, t_next);
    phase *= -I;
  }
  s.amplitudes = std::move(acc);
}

void apply_phase(FockSectorState& s, const std::vector<double>& ph) {
  const SectorBasis& b = *s.basis;
  const int modes = b.platform == Platform::Spinor3 ? 3 : 4;
  if (static_cast<int>(ph.size()) != modes) throw ConfigError("phase vector length mismatch");
  for (int i = 0; i < b.size(); ++i) {
    double a = 0;
    for (int k = 0; k < modes; ++k) a += ph[k] * b.comps[i][k];
    s.amplitudes[i] *= std::exp(-I * a);
  }
}

double poisson_pmf(int n, double mean) {
  if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

FockSectorState pump_only(std::shared_ptr<const SectorBasis> b) {
  FockSectorState s{std::move(b), {}};
  s.amplitudes.assign(s.basis->size(), cd{0, 0});
  Composition c{};
  if (s.basis->platform == Platform::Spinor3) {
    c = {s.basis->n_total, 0, 0, 0};
  } else {
    c = {s.basis->na, s.basis->nb, 0, 0};
  }
  s.amplitudes[s.basis->index_of(c)] = 1.0;
  return s;
}

template <class F>
void for_each_sector(CoherentPumpMixture& m, F&& f) {
  parallel_for(m.sectors.size(), [&](std::size_t i) { f(m.sectors[i].state); });
}

void mixing(FockSectorState& s, const InterferometerConfig& cfg, double sign, const FockOptions& opt) {
  const double kt = kappa_t_for(cfg);
  if (cfg.platform == Platform::Spinor3) {
    const double qt = opt.raw_q ? opt.q_t : default_q_t(kt, cfg.n_total);
    evolve_spin_mixing(s, sign * kt, sign * qt, opt);
  } else {
    evolve_fwm(s, sign * kt, opt);
  }
}

double weight_sum(const CoherentPumpMixture& m) {
  double w = 0;
  for (const auto& e : m.sectors) w += e.weight;
  return w;
}

}  // namespace

int SectorBasis::index_of(const Composition& c) const {
  if (platform == Platform::Spinor3) {
    if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[3] != 0 || c[0] + c[1] + c[2] != n_total) return -1;
    return spinor_offset(n_total, c[0]) + c[1];
  }
  if (c[0] < 0 || c[1] < 0 || c[2] < 0 || c[3] < 0 || c[0] + c[2] != na || c[1] + c[3] != nb) return -1;
  // lexicographic in (n_a0, n_b0) with n_a0 running slowest
  return c[0] * (nb + 1) + c[1];
}

std::shared_ptr<const SectorBasis> spinor_basis(int n) {
  if (n < 0) throw ConfigError("negative sector particle number");
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const SectorBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto b = std::make_shared<SectorBasis>();
  b->platform = Platform::Spinor3;
  b->n_total = n;
  b->na = b->nb = 0;
  for (int n0 = 0; n0 <= n; ++n0)
    for (int np = 0; np <= n - n0; ++np) b->comps.push_back({n0, np, n - n0 - np, 0});
  cache.emplace(n, b);
  return b;
}

std::shared_ptr<const SectorBasis> hybrid_basis(int na, int nb) {
  if (na < 0 || nb < 0) throw ConfigError("negative sector particle number");
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const SectorBasis>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find({na, nb});
  if (it != cache.end()) return it->second;
  auto b = std::make_shared<SectorBasis>();
  b->platform = Platform::Hybrid4;
  b->n_total = na + nb;
  b->na = na;
  b->nb = nb;
  for (int a0 = 0; a0 <= na; ++a0)
    for (int b0 = 0; b0 <= nb; ++b0) b->comps.push_back({a0, b0, na - a0, nb - b0});
  cache.emplace(std::make_pair(na, nb), b);
  return b;
}

double FockSectorState::norm2() const {
  double s = 0;
  for (const cd& a : amplitudes) s += std::norm(a);
  return s;
}

CoherentPumpMixture coherent_mixture(const InterferometerConfig& cfg, const FockOptions& opt) {
  validate(cfg);
  CoherentPumpMixture m;
  double total = 0;
  if (cfg.platform == Platform::Spinor3) {
    for (int n = 0; n <= opt.cap; ++n) {
      const double w = poisson_pmf(n, cfg.n_total);
      if (w < opt.weight_floor) continue;
      m.sectors.push_back({w, pump_only(spinor_basis(n))});
      total += w;
    }
  } else {
    const double ma = hybrid_na0(cfg.n_total, cfg.n_f), mb = hybrid_nb0(cfg.n_total, cfg.n_f);
    for (int na = 0; na <= opt.cap; ++na) {
      const double wa = poisson_pmf(na, ma);
      for (int nb = 0; nb <= opt.cap; ++nb) {
        const double w = wa * poisson_pmf(nb, mb);
        if (w < opt.weight_floor) continue;
        m.sectors.push_back({w, pump_only(hybrid_basis(na, nb))});
        total += w;
      }
    }
  }
  m.tail = std::max(0.0, 1.0 - total);
  return m;
}

CoherentPumpMixture two_mode_squeezed_mixture(double r, double tail_tol) {
  if (!(r >= 0)) throw ConfigError("squeezing must be non-negative");
  CoherentPumpMixture m;
  const double t2 = std::pow(std::tanh(r), 2), p0 = 1.0 / std::pow(std::cosh(r), 2);
  double total = 0, w = p0;
  for (int n = 0; n < 100000; ++n) {
    auto b = spinor_basis(2 * n);
    FockSectorState s{b, std::vector<cd>(b->size(), cd{0, 0})};
    s.amplitudes[b->index_of({0, n, n, 0})] = 1.0;
    m.sectors.push_back({w, std::move(s)});
    total += w;
    if (1.0 - total < tail_tol || t2 == 0.0) break;
    w *= t2;
  }
  m.tail = std::max(0.0, 1.0 - total);
  return m;
}

void evolve_spin_mixing(FockSectorState& s, double kappa_t, double q_t, const FockOptions& opt) {
  const SectorBasis& b = *s.basis;
  if (b.platform != Platform::Spinor3) throw ConfigError("spin mixing needs a spinor sector");
  check_cap(s, opt);
  const int n = b.n_total;
  for (int m = -n; m <= n; ++m) {
    const int base_p = std::max(m, 0), base_m = std::max(-m, 0);
    std::vector<int> idx;
    std::vector<double> dg, sb;
    for (int k = 0;; ++k) {
      const int np = k + base_p, nm = k + base_m, n0 = n - np - nm;
      if (n0 < 0) break;
      idx.push_back(b.index_of({n0, np, nm, 0}));
      dg.push_back(kappa_t * (n0 - 0.5) * (np + nm) + q_t * (np + nm));
      if (n0 >= 2) sb.push_back(kappa_t * std::sqrt(double(n0) * (n0 - 1) * (np + 1) * (nm + 1)));
    }
    sb.resize(idx.size() - 1);
    apply_tridiagonal_block(s.amplitudes, idx, Eigen::Map<Eigen::VectorXd>(dg.data(), dg.size()),
                            Eigen::Map<Eigen::VectorXd>(sb.data(), sb.size()));
  }
}

void evolve_fwm(FockSectorState& s, double kappa_t, const FockOptions& opt) {
  const SectorBasis& b = *s.basis;
  if (b.platform != Platform::Hybrid4) throw ConfigError("four-wave mixing needs a hybrid sector");
  check_cap(s, opt);
  for (int m = -b.nb; m <= b.na; ++m) {
    std::vector<int> idx;
    std::vector<double> dg, sb;
    for (int k = 0;; ++k) {
      const int a1 = k + std::max(m, 0), b1 = k + std::max(-m, 0);
      const int a0 = b.na - a1, b0 = b.nb - b1;
      if (a0 < 0 || b0 < 0) break;
      idx.push_back(b.index_of({a0, b0, a1, b1}));
      dg.push_back(0.0);
      sb.push_back(kappa_t * std::sqrt(double(a0) * b0 * (a1 + 1) * (b1 + 1)));
    }
    if (idx.empty()) continue;
    sb.resize(idx.size() - 1);
    apply_tridiagonal_block(s.amplitudes, idx, Eigen::Map<Eigen::VectorXd>(dg.data(), dg.size()),
                            Eigen::Map<Eigen::VectorXd>(sb.data(), sb.size()));
  }
}

void apply_linear_exact(FockSectorState& s, const gaussian::Stage& stage, const FockOptions& opt) {
  check_cap(s, opt);
  const SectorBasis& b = *s.basis;
  if (const auto* t = std::get_if<gaussian::Tritter>(&stage)) {
    if (b.platform != Platform::Spinor3) throw ConfigError("tritter needs a spinor sector");
    const cd up = std::exp(I * t->vartheta) / std::sqrt(2.0);
    const std::vector<Hop> hops{{0, 1, up}, {0, 2, up}, {1, 0, std::conj(up)}, {2, 0, std::conj(up)}};
    expmv_hops(s, hops, t->theta, b.n_total);
  } else if (const auto* bs = std::get_if<gaussian::BeamSplitter>(&stage)) {
    const int modes = b.platform == Platform::Spinor3 ? 3 : 4;
    if (bs->p < 0 || bs->q < 0 || bs->p >= modes || bs->q >= modes || bs->p == bs->q)
      throw ConfigError("beam splitter mode index out of range");
    const cd up = std::exp(I * bs->vartheta);
    const std::vector<Hop> hops{{bs->p, bs->q, up}, {bs->q, bs->p, std::conj(up)}};
    int bound = b.n_total;
    if (b.platform == Platform::Hybrid4 && bs->p % 2 == bs->q % 2) bound = bs->p % 2 == 0 ? b.na : b.nb;
    expmv_hops(s, hops, bs->theta, bound);
  } else if (const auto* ph = std::get_if<gaussian::Phase>(&stage)) {
    apply_phase(s, ph->phases);
  } else {
    throw ConfigError("apply_linear_exact takes Tritter, BeamSplitter or Phase stages");
  }
}

double default_q_t(double kappa_t, double n_total) { return -kappa_t * (n_total - 0.5); }

double kappa_t_for(const InterferometerConfig& cfg) {
  if (cfg.platform == Platform::Spinor3) return cfg.r / cfg.n_total;
  return cfg.r / std::sqrt(hybrid_na0(cfg.n_total, cfg.n_f) * hybrid_nb0(cfg.n_total, cfg.n_f));
}

analytic::GeneralMoments moments_and_correlators(const FockSectorState& s) {
  const SectorBasis& b = *s.basis;
  const Platform p = b.platform;
  analytic::GeneralMoments m;
  for (int i = 0; i < b.size(); ++i) {
    const Composition& c = b.comps[i];
    const double pr = std::norm(s.amplitudes[i]);
    const double n0 = n0_of(c, p), ns = ns_of(c, p);
    m.mean_n0 += pr * n0;
    m.mean_n0_sq += pr * n0 * n0;
    m.mean_ns += pr * ns;
    m.mean_ns_sq += pr * ns * ns;
    m.mean_n0_ns += pr * n0 * ns;
    Composition t = c;
    double f;
    if (p == Platform::Spinor3) {
      if (c[0] < 2) continue;
      t = {c[0] - 2, c[1] + 1, c[2] + 1, 0};
      f = std::sqrt(double(c[0]) * (c[0] - 1) * (c[1] + 1) * (c[2] + 1));
    } else {
      if (c[0] < 1 || c[1] < 1) continue;
      t = {c[0] - 1, c[1] - 1, c[2] + 1, c[3] + 1};
      f = std::sqrt(double(c[0]) * c[1] * (c[2] + 1) * (c[3] + 1));
    }
    m.pair_corr += std::conj(s.amplitudes[b.index_of(t)]) * s.amplitudes[i] * f;
  }
  return m;
}

analytic::GeneralMoments moments_and_correlators(const CoherentPumpMixture& mix) {
  std::vector<analytic::GeneralMoments> per(mix.sectors.size());
  parallel_for(per.size(), [&](std::size_t i) { per[i] = moments_and_correlators(mix.sectors[i].state); });
  analytic::GeneralMoments m;
  const double wsum = weight_sum(mix);
  for (std::size_t i = 0; i < per.size(); ++i) {
    const double w = mix.sectors[i].weight / wsum;
    m.mean_n0 += w * per[i].mean_n0;
    m.mean_n0_sq += w * per[i].mean_n0_sq;
    m.mean_ns += w * per[i].mean_ns;
    m.mean_ns_sq += w * per[i].mean_ns_sq;
    m.mean_n0_ns += w * per[i].mean_n0_ns;
    m.pair_corr += w * per[i].pair_corr;
  }
  return m;
}

NumberSumMoments side_number_sum(const CoherentPumpMixture& mix) {
  const analytic::GeneralMoments g = moments_and_correlators(mix);
  return {g.mean_ns, g.mean_ns_sq};
}

CoherentPumpMixture prepare(CoherentPumpMixture mix, const InterferometerConfig& cfg, const FockOptions& opt) {
  const double vt = 0.5 * canonical_nu(cfg);
  for_each_sector(mix, [&](FockSectorState& s) {
    mixing(s, cfg, 1.0, opt);
    if (cfg.platform == Platform::Spinor3) {
      apply_linear_exact(s, gaussian::Tritter{cfg.theta, vt}, opt);
    } else {
      apply_linear_exact(s, gaussian::BeamSplitter{cfg.theta, vt, 0, 2}, opt);
      apply_linear_exact(s, gaussian::BeamSplitter{cfg.theta, vt, 1, 3}, opt);
    }
  });
  return mix;
}

CoherentPumpMixture close_chain(CoherentPumpMixture mix, const InterferometerConfig& cfg, double phi_sum,
                                double phi_diff, const FockOptions& opt) {
  const double vt = 0.5 * canonical_nu(cfg);
  const double p1 = 0.5 * (phi_sum + phi_diff), p2 = 0.5 * (phi_sum - phi_diff);
  for_each_sector(mix, [&](FockSectorState& s) {
    if (cfg.platform == Platform::Spinor3) {
      apply_linear_exact(s, gaussian::Phase{{0.0, p1, p2}}, opt);
      apply_linear_exact(s, gaussian::Tritter{-cfg.theta, vt}, opt);
    } else {
      apply_linear_exact(s, gaussian::Phase{{0.0, 0.0, p1, p2}}, opt);
      apply_linear_exact(s, gaussian::BeamSplitter{-cfg.theta, vt, 0, 2}, opt);
      apply_linear_exact(s, gaussian::BeamSplitter{-cfg.theta, vt, 1, 3}, opt);
    }
    mixing(s, cfg, -1.0, opt);
  });
  return mix;
}

FockRun full_interferometer(const CoherentPumpMixture& initial, const InterferometerConfig& cfg, double phi,
                            const FockOptions& opt) {
  const CoherentPumpMixture prepared = prepare(initial, cfg, opt);
  auto mean_at = [&](double p) { return side_number_sum(close_chain(prepared, cfg, p, 0.0, opt)).mean; };
  const NumberSumMoments at = side_number_sum(close_chain(prepared, cfg, phi, 0.0, opt));
  constexpr double h = 1e-3;
  const double d1 = (mean_at(phi + h) - mean_at(phi - h)) / (2 * h);
  const double d2 = (mean_at(phi + h / 2) - mean_at(phi - h / 2)) / h;
  FockRun run;
  run.moments.phi = phi;
  run.moments.mean = at.mean;
  run.moments.variance = at.variance();
  run.moments.slope = (4 * d2 - d1) / 3;
  run.tail = initial.tail;
  run.tail_flag = initial.tail > kTailFlag;
  return run;
}

DepletedQfi depleted_qfi(const InterferometerConfig& cfg, const FockOptions& opt) {
  CoherentPumpMixture mix = coherent_mixture(cfg, opt);
  for_each_sector(mix, [&](FockSectorState& s) { mixing(s, cfg, 1.0, opt); });
  DepletedQfi out;
  out.moments = moments_and_correlators(mix);
  out.vartheta = analytic::best_vartheta(out.moments);
  const Extremum e = maximize_1d(
      [&](double th) { return analytic::qfi_from_general_moments(out.moments, th, out.vartheta, cfg.platform); }, 0.0,
      0.5 * kPi, 1e-9);
  out.qfi_opt = e.f_star;
  out.theta_opt = e.x_star;
  return out;
}

void write_dump(std::ostream& os, const CoherentPumpMixture& m) {
  char buf[64];
  auto num = [&](double x) {
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
  };
  for (const auto& e : m.sectors) {
    const SectorBasis& b = *e.state.basis;
    os << "N=" << b.n_total << " weight=" << num(e.weight) << '\n';
    const int modes = b.platform == Platform::Spinor3 ? 3 : 4;
    for (int i = 0; i < b.size(); ++i) {
      for (int k = 0; k < modes; ++k) os << b.comps[i][k] << ' ';
      os << num(e.state.amplitudes[i].real()) << ' ' << num(e.state.amplitudes[i].imag()) << '\n';
    }
  }
}

}  // namespace su11::fock
