#include "su11/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace su11 {

const char* to_string(Platform p) { return p == Platform::Spinor3 ? "spinor" : "hybrid"; }

const char* to_string(Method m) {
  switch (m) {
    case Method::Analytic: return "analytic";
    case Method::Gaussian: return "gaussian";
    case Method::Fock: return "fock";
    case Method::TW: return "tw";
  }
  return "?";
}

Platform platform_from_string(const std::string& s) {
  if (s == "spinor" || s == "spinor3") return Platform::Spinor3;
  if (s == "hybrid" || s == "hybrid4") return Platform::Hybrid4;
  throw ConfigError("unknown platform '" + s + "'");
}

double side_population(double r) {
  const double s = std::sinh(r);
  return 2.0 * s * s;
}

double r_from_side_population(double n_s) {
  if (!(n_s >= 0.0)) throw ConfigError("n_s must be nonnegative");
  return std::asinh(std::sqrt(0.5 * n_s));
}

double wrap_2pi(double x) {
  double y = std::fmod(x, kTwoPi);
  if (y < 0) y += kTwoPi;
  return y;
}

double canonical_nu(const InterferometerConfig& c) {
  if (c.platform == Platform::Spinor3) return wrap_2pi(2.0 * (c.vartheta - c.vartheta_pump) - c.vartheta_sq);
  return wrap_2pi(2.0 * c.vartheta - c.vartheta_pump - c.vartheta_sq);
}

InterferometerConfig with_nu(InterferometerConfig c, double nu) {
  c.vartheta_pump = 0.0;
  c.vartheta_sq = 0.0;
  c.vartheta = 0.5 * nu;
  return c;
}

double eta(Platform p, double r, double nu, double n_f) {
  const double w = p == Platform::Spinor3 ? 1.0 : 2.0 * std::sqrt(n_f) / (1.0 + n_f);
  return std::cosh(2 * r) - w * std::sin(nu) * std::sinh(2 * r);
}

namespace {
bool finite(double x) { return std::isfinite(x); }
}  // namespace

void validate(const InterferometerConfig& c) {
  if (!finite(c.n_total) || !finite(c.r) || !finite(c.theta) || !finite(c.vartheta) ||
      !finite(c.vartheta_pump) || !finite(c.vartheta_sq) || !finite(c.phi) || !finite(c.n_f))
    throw ConfigError("non-finite configuration value");
  if (!(c.n_total > 0)) throw ConfigError("n_total must be positive");
  if (c.r < 0) throw ConfigError("r must be nonnegative");
  if (c.platform == Platform::Hybrid4 && !(c.n_f > 0)) throw ConfigError("n_f must be positive");
  if (!c.allow_depleted && !(side_population(c.r) < c.n_total))
    throw ConfigError("n_s = 2 sinh^2 r must stay below n_total");
}

void validate(const NoiseSpec& n) {
  for (double v : {n.delta_n, n.sigma_varphi, n.gamma, n.gamma_a0, n.gamma_b0})
    if (!finite(v) || v < 0) throw ConfigError("noise parameters must be finite and nonnegative");
}

DerivedParams derive_params(const InterferometerConfig& c) {
  validate(c);
  DerivedParams d;
  d.n_s = side_population(c.r);
  d.nu = canonical_nu(c);
  d.eta = eta(c.platform, c.r, d.nu, c.n_f);
  return d;
}

double hybrid_na0(double n_total, double n_f) { return n_f * n_total / (1.0 + n_f); }
double hybrid_nb0(double n_total, double n_f) { return n_total / (1.0 + n_f); }

namespace {
std::atomic<unsigned> g_threads{0};
}

void set_thread_count(unsigned n) { g_threads = n; }

unsigned thread_count() {
  unsigned n = g_threads.load();
  if (n == 0) {
    if (const char* env = std::getenv("SU11_THREADS")) n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
  }
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t nt = std::min<std::size_t>(thread_count(), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(nt);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace su11
