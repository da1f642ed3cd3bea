#include "su11/search.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "su11/core.hpp"

namespace su11 {

namespace {

constexpr int kScan = 64;
const double kInvPhi = (std::sqrt(5.0) - 1.0) / 2.0;

double clean(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

bool better(double fa, double xa, double fb, double xb) {
  // true if (fa, xa) beats (fb, xb)
  const double scale = std::max(std::abs(fa), std::abs(fb));
  if (std::abs(fa - fb) <= 1e-12 * scale || fa == fb) return xa < xb;
  return fa > fb;
}

}  // namespace

Extremum golden_max(const std::function<double(double)>& f, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = clean(f(c)), fd = clean(f(d));
  while (b - a > tol) {
    if (fc == fd) {
      // equal values bracket the maximum between them (also keeps flat tops centred)
      a = c;
      b = d;
      c = b - kInvPhi * (b - a);
      d = a + kInvPhi * (b - a);
      fc = clean(f(c));
      fd = clean(f(d));
    } else if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = clean(f(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = clean(f(d));
    }
  }
  const double x = 0.5 * (a + b);
  return {x, clean(f(x)), false};
}

Extremum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (!(hi > lo) || !(tol > 0)) throw ConfigError("maximize_1d: need lo < hi and tol > 0");
  std::vector<double> xs(kScan), fs(kScan);
  for (int k = 0; k < kScan; ++k) {
    xs[k] = lo + (hi - lo) * k / (kScan - 1);
    fs[k] = clean(f(xs[k]));
  }
  std::vector<int> peaks;
  for (int k = 0; k < kScan; ++k) {
    const bool left = k == 0 || fs[k] >= fs[k - 1];
    const bool right = k == kScan - 1 || fs[k] > fs[k + 1];
    if (left && right) peaks.push_back(k);
  }
  if (peaks.empty()) peaks.push_back(0);  // constant function

  Extremum best{xs[peaks[0]], fs[peaks[0]], peaks.size() > 1};
  bool have = false;
  for (int k : peaks) {
    const double a = xs[std::max(0, k - 1)], b = xs[std::min(kScan - 1, k + 1)];
    Extremum e = golden_max(f, a, b, tol);
    // the scan point itself may beat the refinement at a boundary
    if (better(fs[k], xs[k], e.f_star, e.x_star) && (k == 0 || k == kScan - 1)) e = {xs[k], fs[k], false};
    if (!have || better(e.f_star, e.x_star, best.f_star, best.x_star)) {
      best.x_star = e.x_star;
      best.f_star = e.f_star;
      have = true;
    }
  }
  best.multimodal = peaks.size() > 1;
  return best;
}

Extremum minimize_1d(const std::function<double(double)>& f, double lo, double hi, double tol) {
  Extremum e = maximize_1d([&](double x) { return -f(x); }, lo, hi, tol);
  e.f_star = -e.f_star;
  return e;
}

}  // namespace su11
