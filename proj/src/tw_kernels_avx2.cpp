#include <immintrin.h>

#include "tw_kernels.hpp"

namespace {

struct V4 {
  __m256d v;
  static V4 load(const double* p) { return {_mm256_loadu_pd(p)}; }
  static V4 set1(double x) { return {_mm256_set1_pd(x)}; }
  void store(double* p) const { _mm256_storeu_pd(p, v); }
};
inline V4 operator+(V4 a, V4 b) { return {_mm256_add_pd(a.v, b.v)}; }
inline V4 operator-(V4 a, V4 b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline V4 operator*(V4 a, V4 b) { return {_mm256_mul_pd(a.v, b.v)}; }
// Same selection as the scalar a > b ? a : b.
inline V4 vmax(V4 a, V4 b) { return {_mm256_blendv_pd(b.v, a.v, _mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ))}; }
// Lane bitmask of a > b or a NaN.
inline long count_gt(V4 a, V4 b) {
  return _mm256_movemask_pd(_mm256_or_pd(_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ), _mm256_cmp_pd(a.v, a.v, _CMP_UNORD_Q)));
}

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

long spinor_step_avx2(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                      const StepParams& p) {
  long bad = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) bad += __builtin_popcountl(spinor_body<V4>(re, im, noise, i, p));
  for (; i < n; ++i) bad += spinor_body<S1>(re, im, noise, i, p);
  return bad;
}

long hybrid_step_avx2(double* const* re, double* const* im, const double* const* noise, std::size_t n,
                      const StepParams& p) {
  long bad = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) bad += __builtin_popcountl(hybrid_body<V4>(re, im, noise, i, p));
  for (; i < n; ++i) bad += hybrid_body<S1>(re, im, noise, i, p);
  return bad;
}

}  // namespace su11::tw::detail
