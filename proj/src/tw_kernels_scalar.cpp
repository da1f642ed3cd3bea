#include "tw_kernels.hpp"

namespace {

struct S1 {
  double v;
  static S1 load(const double* p) { return {*p}; }
  static S1 set1(double x) { return {x}; }
  void store(double* p) const { *p = v; }
};
inline S1 operator+(S1 a, S1 b) { return {a.v + b.v}; }
inline S1 operator-(S1 a, S1 b) { return {a.v - b.v}; }
inline S1 operator*(S1 a, S1 b) { return {a.v * b.v}; }
inline S1 vmax(S1 a, S1 b) { return {a.v > b.v ? a.v : b.v}; }
inline long count_gt(S1 a, S1 b) { return a.v > b.v || a.v != a.v ? 1 : 0; }

}  // namespace

#include "tw_kernel_body.hpp"

namespace su11::tw::detail {

long spinor_step_scalar(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                        const StepParams& p) {
  long bad = 0;
  for (std::size_t i = 0; i < n; ++i) bad += spinor_body<S1>(re, im, noise, i, p);
  return bad;
}

long hybrid_step_scalar(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                        const StepParams& p) {
  long bad = 0;
  for (std::size_t i = 0; i < n; ++i) bad += hybrid_body<S1>(re, im, noise, i, p);
  return bad;
}

}  // namespace su11::tw::detail
