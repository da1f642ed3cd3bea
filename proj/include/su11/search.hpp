#pragma once

#include <functional>

namespace su11 {

struct Extremum {
  double x_star;
  double f_star;
  bool multimodal;  // more than one local maximum in the bracketing scan
};

// 64-point bracketing scan followed by golden-section refinement of every
// local maximum; returns the best refinement, ties (1e-12 relative) broken toward smaller x.
Extremum maximize_1d(const std::function<double(double)>& f, double lo, double hi, double tol);
Extremum minimize_1d(const std::function<double(double)>& f, double lo, double hi, double tol);

// Plain golden-section search for a maximum on [a, b].
Extremum golden_max(const std::function<double(double)>& f, double a, double b, double tol);

}  // namespace su11
