#pragma once

#include <cstddef>

namespace su11::tw::detail {

struct StepParams {
  double kdt;       // kappa dt
  double gdt;       // gamma dt (spinor); gamma_a0 dt (hybrid)
  double gdt_b;     // gamma_b0 dt (hybrid)
  double c_half;    // sqrt(gamma / 2) sqrt(dt / 2): noise scale per normal
  double c_two;     // sqrt(2 gamma) sqrt(dt / 2)
  double c_half_b;  // hybrid b-pump noise scale
  bool noisy;
};

inline constexpr int kSpinorNormals = 10;  // xi_1, xi_2, xi_3, xi_+, xi_-
inline constexpr int kHybridNormals = 4;   // xi_a, xi_b

// One Euler-Maruyama step for trajectories [0, n) of a block. re/im point at
// per-mode arrays, noise at per-slot arrays of standard normals. Returns the
// number of trajectories whose amplitude jumped by more than 10x.
using StepFn = long (*)(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                        const StepParams& p);

long spinor_step_scalar(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                        const StepParams& p);
long hybrid_step_scalar(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                        const StepParams& p);
#ifdef SU11_HAVE_AVX2
long spinor_step_avx2(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                      const StepParams& p);
long hybrid_step_avx2(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                      const StepParams& p);
#endif

}  // namespace su11::tw::detail
