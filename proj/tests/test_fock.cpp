#include <cmath>
#include <sstream>

#include "doctest.h"
#include "su11/analytic.hpp"
#include "su11/fock.hpp"
#include "su11/gaussian.hpp"

using namespace su11;
using namespace su11::fock;
using doctest::Approx;

namespace {

InterferometerConfig spinor(double n, double r, double theta = kPi / 4, double nu = 3 * kPi / 2) {
  InterferometerConfig c = with_nu({}, nu);
  c.n_total = n;
  c.r = r;
  c.theta = theta;
  c.allow_depleted = true;
  return c;
}

InterferometerConfig hybrid(double n, double r, double nf, double theta = kPi / 4, double nu = 3 * kPi / 2) {
  InterferometerConfig c = spinor(n, r, theta, nu);
  c.platform = Platform::Hybrid4;
  c.n_f = nf;
  return c;
}

FockSectorState basis_state(std::shared_ptr<const SectorBasis> b, Composition c) {
  FockSectorState s{b, std::vector<cd>(b->size(), cd{0, 0})};
  s.amplitudes[b->index_of(c)] = 1.0;
  return s;
}

double prob(const FockSectorState& s, Composition c) { return std::norm(s.amplitudes[s.basis->index_of(c)]); }

double max_diff(const FockSectorState& a, const FockSectorState& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.amplitudes.size(); ++i) d = std::max(d, std::abs(a.amplitudes[i] - b.amplitudes[i]));
  return d;
}

FockSectorState random_state(std::shared_ptr<const SectorBasis> b, unsigned seed) {
  FockSectorState s{b, std::vector<cd>(b->size())};
  double n = 0;
  for (int i = 0; i < b->size(); ++i) {
    seed = seed * 1103515245u + 12345u;
    const double a = (seed >> 8) * 1e-7;
    s.amplitudes[i] = {std::cos(a) * (1 + i % 3), std::sin(1.7 * a)};
    n += std::norm(s.amplitudes[i]);
  }
  for (auto& a : s.amplitudes) a /= std::sqrt(n);
  return s;
}

}  // namespace

TEST_CASE("sector bases are lexicographic and complete") {
  auto b = spinor_basis(4);
  CHECK(b->size() == 15);
  for (int i = 0; i < b->size(); ++i) {
    const auto& c = b->comps[i];
    CHECK(c[0] + c[1] + c[2] == 4);
    CHECK(b->index_of(c) == i);
    if (i > 0) CHECK(b->comps[i - 1] < c);
  }
  CHECK(b->index_of({5, 0, 0, 0}) == -1);
  auto h = hybrid_basis(3, 2);
  CHECK(h->size() == 12);
  for (int i = 0; i < h->size(); ++i) {
    CHECK(h->index_of(h->comps[i]) == i);
    if (i > 0) CHECK(h->comps[i - 1] < h->comps[i]);
  }
  CHECK(spinor_basis(60)->size() == 61 * 62 / 2);
}

TEST_CASE("spin mixing two-level Rabi oscillation") {
  auto b = spinor_basis(2);
  for (double kt : {1e-3, 0.05, 0.3, 0.9}) {
    FockSectorState s = basis_state(b, {2, 0, 0, 0});
    evolve_spin_mixing(s, kt, kt / 2);  // q cancels the collisional shift of |0,1,1>
    CHECK(prob(s, {0, 1, 1, 0}) == Approx(std::pow(std::sin(std::sqrt(2.0) * kt), 2)).epsilon(1e-12));
    CHECK(s.norm2() == Approx(1.0).epsilon(1e-13));
  }
  FockSectorState s = basis_state(b, {2, 0, 0, 0});
  evolve_spin_mixing(s, 1e-3, 5e-4);
  CHECK(prob(s, {0, 1, 1, 0}) == Approx(2e-6).epsilon(1e-5));
}

TEST_CASE("spin mixing conserves norm and magnetization") {
  for (double kt = 0; kt <= 1.0; kt += 0.125) {
    FockSectorState s = basis_state(spinor_basis(24), {24, 0, 0, 0});
    evolve_spin_mixing(s, kt, default_q_t(kt, 24));
    CHECK(std::abs(s.norm2() - 1) < 1e-10);
    for (int i = 0; i < s.basis->size(); ++i) {
      const auto& c = s.basis->comps[i];
      if (c[1] != c[2]) CHECK(std::abs(s.amplitudes[i]) == 0.0);
    }
  }
  // a generic state keeps its magnetization distribution
  FockSectorState s = random_state(spinor_basis(9), 7);
  std::vector<double> before(19, 0), after(19, 0);
  for (int i = 0; i < s.basis->size(); ++i) before[s.basis->comps[i][1] - s.basis->comps[i][2] + 9] += prob(s, s.basis->comps[i]);
  evolve_spin_mixing(s, 0.37, -0.2);
  for (int i = 0; i < s.basis->size(); ++i) after[s.basis->comps[i][1] - s.basis->comps[i][2] + 9] += prob(s, s.basis->comps[i]);
  for (int m = 0; m < 19; ++m) CHECK(after[m] == Approx(before[m]).epsilon(1e-12));
  // forward then reversed evolution is the identity
  FockSectorState t = random_state(spinor_basis(9), 3), u = t;
  evolve_spin_mixing(u, 0.41, 0.1);
  evolve_spin_mixing(u, -0.41, -0.1);
  CHECK(max_diff(t, u) < 1e-12);
}

TEST_CASE("sector cap is enforced") {
  FockSectorState s = basis_state(spinor_basis(61), {61, 0, 0, 0});
  CHECK_THROWS_AS(evolve_spin_mixing(s, 0.01, 0.0), ConfigError);
  FockOptions wide;
  wide.cap = 70;
  CHECK_NOTHROW(evolve_spin_mixing(s, 0.01, 0.0, wide));
  CHECK_THROWS_AS(apply_linear_exact(s, gaussian::Tritter{0.3, 0.0}), ConfigError);
}

TEST_CASE("four-wave mixing Rabi oscillation and charges") {
  auto b = hybrid_basis(1, 1);
  for (double kt : {0.1, 0.7, kPi / 2, 2.3}) {
    FockSectorState s = basis_state(b, {1, 1, 0, 0});
    evolve_fwm(s, kt);
    CHECK(prob(s, {0, 0, 1, 1}) == Approx(std::pow(std::sin(kt), 2)).epsilon(1e-12));
    CHECK(prob(s, {1, 1, 0, 0}) == Approx(std::pow(std::cos(kt), 2)).epsilon(1e-12));
  }
  FockSectorState s = basis_state(hybrid_basis(12, 7), {12, 7, 0, 0});
  evolve_fwm(s, 0.3);
  CHECK(std::abs(s.norm2() - 1) < 1e-10);
  for (int i = 0; i < s.basis->size(); ++i) {
    const auto& c = s.basis->comps[i];
    if (c[2] != c[3]) CHECK(std::abs(s.amplitudes[i]) == 0.0);
    CHECK(c[0] + c[2] == 12);
    CHECK(c[1] + c[3] == 7);
  }
  CHECK(prob(s, {12, 7, 0, 0}) < 0.99);
}

TEST_CASE("tritter single-particle and many-particle structure") {
  const double th = 0.83, vt = 0.4;
  FockSectorState one = basis_state(spinor_basis(1), {1, 0, 0, 0});
  apply_linear_exact(one, gaussian::Tritter{th, vt});
  CHECK(prob(one, {1, 0, 0, 0}) == Approx(std::pow(std::cos(th), 2)).epsilon(1e-12));
  const cd u0 = std::cos(th), us = -cd(0, 1) * std::exp(cd(0, -vt)) * std::sin(th) / std::sqrt(2.0);
  CHECK(std::abs(one.amplitudes[one.basis->index_of({0, 1, 0, 0})] - us) < 1e-13);

  // N bosons all in the pump evolve as the N-th power of the single-particle amplitudes.
  const int n = 7;
  FockSectorState s = basis_state(spinor_basis(n), {n, 0, 0, 0});
  apply_linear_exact(s, gaussian::Tritter{th, vt});
  double worst = 0;
  for (int i = 0; i < s.basis->size(); ++i) {
    const auto& c = s.basis->comps[i];
    const double multinom = std::exp(std::lgamma(n + 1.0) - std::lgamma(c[0] + 1.0) - std::lgamma(c[1] + 1.0) -
                                     std::lgamma(c[2] + 1.0));
    const cd expect = std::sqrt(multinom) * std::pow(u0, c[0]) * std::pow(us, c[1] + c[2]);
    worst = std::max(worst, std::abs(expect - s.amplitudes[i]));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("linear stages: identity, inverse, and broken magnetization") {
  FockSectorState s = random_state(spinor_basis(12), 11);
  FockSectorState t = s;
  apply_linear_exact(t, gaussian::Tritter{0.0, 0.9});
  CHECK(max_diff(s, t) == 0.0);
  apply_linear_exact(t, gaussian::Tritter{1.1, 0.9});
  CHECK(std::abs(t.norm2() - 1) < 1e-10);
  CHECK(max_diff(s, t) > 0.1);
  apply_linear_exact(t, gaussian::Tritter{-1.1, 0.9});
  CHECK(max_diff(s, t) < 1e-10);

  FockSectorState p = basis_state(spinor_basis(6), {6, 0, 0, 0});
  apply_linear_exact(p, gaussian::Tritter{0.5, 0.0});
  double odd = 0;
  for (int i = 0; i < p.basis->size(); ++i)
    if (p.basis->comps[i][1] != p.basis->comps[i][2]) odd += prob(p, p.basis->comps[i]);
  CHECK(odd > 0.1);

  FockSectorState h = random_state(hybrid_basis(5, 4), 5), g = h;
  apply_linear_exact(g, gaussian::BeamSplitter{0.7, 0.2, 0, 2});
  apply_linear_exact(g, gaussian::BeamSplitter{0.7, 0.2, 1, 3});
  CHECK(max_diff(h, g) > 0.05);
  apply_linear_exact(g, gaussian::BeamSplitter{-0.7, 0.2, 1, 3});
  apply_linear_exact(g, gaussian::BeamSplitter{-0.7, 0.2, 0, 2});
  CHECK(max_diff(h, g) < 1e-10);
  CHECK_THROWS_AS(apply_linear_exact(g, gaussian::ParametricAmp{0.1, 0, 2, 3, {0}}), ConfigError);
}

TEST_CASE("beam splitter number transfer matches the single-mode map") {
  // <n_a1> after BS on |Na, Nb, 0, 0> is Na sin^2 theta
  FockSectorState h = basis_state(hybrid_basis(5, 3), {5, 3, 0, 0});
  apply_linear_exact(h, gaussian::BeamSplitter{0.6, 1.3, 0, 2});
  double na1 = 0;
  for (int i = 0; i < h.basis->size(); ++i) na1 += h.basis->comps[i][2] * prob(h, h.basis->comps[i]);
  CHECK(na1 == Approx(5 * std::pow(std::sin(0.6), 2)).epsilon(1e-12));
}

TEST_CASE("two-mode squeezed vacuum reproduces the conventional QFI") {
  for (double r : {0.5, 1.0}) {
    const CoherentPumpMixture m = two_mode_squeezed_mixture(r);
    CHECK(m.tail < 1e-10);
    const auto g = moments_and_correlators(m);
    const double ns = side_population(r);
    CHECK(g.mean_ns == Approx(ns).epsilon(1e-9));
    const double f = analytic::qfi_from_general_moments(g, 0.0, 0.0, Platform::Spinor3);
    CHECK(f == Approx(ns * (ns + 2)).epsilon(1e-6));
    CHECK(std::abs(g.pair_corr) == 0.0);
  }
}

TEST_CASE("coherent mixtures") {
  FockOptions opt;
  const CoherentPumpMixture m = coherent_mixture(spinor(20, 0.3), opt);
  double w = 0;
  for (const auto& e : m.sectors) {
    w += e.weight;
    CHECK(e.state.norm2() == Approx(1.0));
  }
  CHECK(w == Approx(1.0 - m.tail).epsilon(1e-14));
  CHECK(m.tail < 1e-8);
  const auto g = moments_and_correlators(m);
  CHECK(g.mean_ns == 0.0);
  CHECK(std::abs(g.pair_corr) == 0.0);
  CHECK(g.mean_n0 == Approx(20.0).epsilon(1e-9));
  CHECK(g.mean_n0_sq - g.mean_n0 * g.mean_n0 == Approx(20.0).epsilon(1e-7));

  FockOptions narrow;
  narrow.cap = 20;
  const CoherentPumpMixture wide = coherent_mixture(spinor(12, 0.3), narrow);
  CHECK(wide.tail > kTailFlag);
  const FockRun run = full_interferometer(wide, spinor(12, 0.3), 0.1, narrow);
  CHECK(run.tail_flag);

  const CoherentPumpMixture hm = coherent_mixture(hybrid(6, 0.3, 0.5), opt);
  const auto hg = moments_and_correlators(hm);
  CHECK(hg.mean_n0 == Approx(6.0).epsilon(1e-9));
  CHECK(hm.tail < 1e-8);
}

TEST_CASE("mixing against the undepleted pair-production law") {
  const InterferometerConfig cfg = spinor(20, 0.3);
  CoherentPumpMixture m = coherent_mixture(cfg);
  for (auto& e : m.sectors) evolve_spin_mixing(e.state, kappa_t_for(cfg), default_q_t(kappa_t_for(cfg), 20));
  const auto g = moments_and_correlators(m);
  CHECK(g.mean_ns == Approx(side_population(0.3)).epsilon(0.05));
  // QFI at theta = 0 equals the exact side-mode number variance
  double direct = 0, mean = 0, wsum = 0;
  for (const auto& e : m.sectors) {
    for (int i = 0; i < e.state.basis->size(); ++i) {
      const auto& c = e.state.basis->comps[i];
      const double p = e.weight * std::norm(e.state.amplitudes[i]);
      mean += p * (c[1] + c[2]);
      direct += p * (c[1] + c[2]) * (c[1] + c[2]);
    }
    wsum += e.weight;
  }
  mean /= wsum;
  direct = direct / wsum - mean * mean;
  CHECK(analytic::qfi_from_general_moments(g, 0.0, 1.234, Platform::Spinor3) == Approx(direct).epsilon(1e-8));
  CHECK(analytic::qfi_from_general_moments(g, 0.0, 0.0, Platform::Hybrid4) == Approx(direct).epsilon(1e-8));
}

TEST_CASE("full chain echo and zero-signal limits") {
  for (const InterferometerConfig& cfg : {spinor(12, 0.8, 0.6, 1.0), hybrid(5, 0.5, 0.7, 0.4, 2.0)}) {
    const CoherentPumpMixture m = coherent_mixture(cfg);
    const auto out = side_number_sum(close_chain(prepare(m, cfg), cfg, 0.0, 0.0));
    CHECK(std::abs(out.mean) < 1e-10);
    CHECK(std::abs(out.variance()) < 1e-10);
  }
  InterferometerConfig off = spinor(10, 0.0, 0.0);
  const CoherentPumpMixture m = coherent_mixture(off);
  for (double phi : {0.3, 1.0, 2.5}) {
    const FockRun r = full_interferometer(m, off, phi);
    CHECK(std::abs(r.moments.mean) < 1e-12);
  }
}

TEST_CASE("weakly depleted chain approaches the Gaussian engine") {
  InterferometerConfig cfg = spinor(40, 0.2, 0.5, 3 * kPi / 2);
  FockOptions opt;
  opt.cap = 80;
  const FockRun f = full_interferometer(coherent_mixture(cfg, opt), cfg, 0.4, opt);
  cfg.allow_depleted = false;
  const auto g = gaussian::chain_number_sum(cfg, 0.4, 0.0);
  CHECK(f.moments.mean == Approx(g.mean).epsilon(0.1));
  CHECK(f.moments.variance == Approx(g.variance).epsilon(0.1));
  const SensitivityResult gs = gaussian::sensitivity_numeric(cfg, 0.4);
  const double fd = std::sqrt(f.moments.variance) / std::abs(f.moments.slope);
  CHECK(fd == Approx(gs.delta_phi).epsilon(0.1));
}

TEST_CASE("depletion lowers the optimal QFI") {
  FockOptions opt;
  opt.cap = 80;
  const InterferometerConfig cfg = spinor(30, std::asinh(std::sqrt(0.5 * 0.3 * 30)));
  const DepletedQfi d = depleted_qfi(cfg, opt);
  const auto u = analytic::undepleted_general_moments(cfg);
  const double uv = analytic::best_vartheta(u);
  double undepleted = 0;
  for (int k = 0; k <= 2000; ++k)
    undepleted = std::max(undepleted, analytic::qfi_from_general_moments(u, 0.5 * kPi * k / 2000, uv, Platform::Spinor3));
  CHECK(d.qfi_opt < undepleted);
}

TEST_CASE("sector-parallel reduction is deterministic") {
  const InterferometerConfig cfg = spinor(8, 0.6, 0.7, 1.0);
  set_thread_count(1);
  const FockRun a = full_interferometer(coherent_mixture(cfg), cfg, 0.3);
  set_thread_count(3);
  const FockRun b = full_interferometer(coherent_mixture(cfg), cfg, 0.3);
  set_thread_count(0);
  CHECK(a.moments.mean == b.moments.mean);
  CHECK(a.moments.variance == b.moments.variance);
  CHECK(a.moments.slope == b.moments.slope);
}

TEST_CASE("state dump format") {
  CoherentPumpMixture m;
  m.sectors.push_back({0.25, basis_state(spinor_basis(1), {1, 0, 0, 0})});
  std::ostringstream os;
  write_dump(os, m);
  CHECK(os.str() == "N=1 weight=0.25\n0 0 1 0 0\n0 1 0 0 0\n1 0 0 1 0\n");
}
