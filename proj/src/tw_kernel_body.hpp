// Kernel bodies shared by the scalar and AVX2 translation units. V is either
// double or a 4-lane vector type with the same operator set; the operation
// order is fixed here so both paths round identically (no FMA contraction).
#pragma once

#include <cstddef>

#include "tw_kernels.hpp"

namespace {

using su11::tw::detail::StepParams;

// Blow-up test: |new|^2 > 100 max(|old|^2, 1).
template <class V>
inline V blow_limit(V old2) {
  return V::set1(100.0) * vmax(old2, V::set1(1.0));
}

template <class V>
long spinor_body(double* const* re, double* const* im, const double* const* nz, std::size_t i, const StepParams& p) {
  const V x0 = V::load(re[0] + i), y0 = V::load(im[0] + i);
  const V xp = V::load(re[1] + i), yp = V::load(im[1] + i);
  const V xm = V::load(re[2] + i), ym = V::load(im[2] + i);
  const V kdt = V::set1(p.kdt), k2 = V::set1(2.0 * p.kdt), half = V::set1(0.5);

  const V n0 = x0 * x0 + y0 * y0, np = xp * xp + yp * yp, nm = xm * xm + ym * ym;

  // a0: -2 i kappa a+ a- a0^* - gamma (|a0|^2 + |a+|^2/2 + |a-|^2/2) a0
  const V pr = xp * xm - yp * ym, pi = xp * ym + yp * xm;
  const V qr = pr * x0 + pi * y0, qi = pi * x0 - pr * y0;
  V d0r = k2 * qi, d0i = V::set1(0.0) - k2 * qr;

  // a+-: -i kappa a0^2 a-+^* - (gamma/2) |a0|^2 a+-
  const V sr = x0 * x0 - y0 * y0, si = V::set1(2.0) * x0 * y0;
  const V tpr = sr * xm + si * ym, tpi = si * xm - sr * ym;
  const V tmr = sr * xp + si * yp, tmi = si * xp - sr * yp;
  V dpr = kdt * tpi, dpi = V::set1(0.0) - kdt * tpr;
  V dmr = kdt * tmi, dmi = V::set1(0.0) - kdt * tmr;

  if (p.noisy) {
    const V gdt = V::set1(p.gdt);
    const V l0 = gdt * (n0 + half * np + half * nm);
    d0r = d0r - l0 * x0;
    d0i = d0i - l0 * y0;
    const V lp = gdt * half * n0;
    dpr = dpr - lp * xp;
    dpi = dpi - lp * yp;
    dmr = dmr - lp * xm;
    dmi = dmi - lp * ym;

    const V ch = V::set1(p.c_half), c2 = V::set1(p.c_two);
    const V u1 = V::load(nz[0] + i), v1 = V::load(nz[1] + i);
    const V u2 = V::load(nz[2] + i), v2 = V::load(nz[3] + i);
    const V u3 = V::load(nz[4] + i), v3 = V::load(nz[5] + i);
    const V u4 = V::load(nz[6] + i), v4 = V::load(nz[7] + i);
    const V u5 = V::load(nz[8] + i), v5 = V::load(nz[9] + i);
    // conj(z) xi = (x u + y v) + i (x v - y u)
    d0r = d0r + ch * (xp * u1 + yp * v1) + ch * (xm * u2 + ym * v2) + c2 * (x0 * u3 + y0 * v3);
    d0i = d0i + ch * (xp * v1 - yp * u1) + ch * (xm * v2 - ym * u2) + c2 * (x0 * v3 - y0 * u3);
    dpr = dpr + ch * (x0 * u4 + y0 * v4);
    dpi = dpi + ch * (x0 * v4 - y0 * u4);
    dmr = dmr + ch * (x0 * u5 + y0 * v5);
    dmi = dmi + ch * (x0 * v5 - y0 * u5);
  }

  const V nx0 = x0 + d0r, ny0 = y0 + d0i;
  const V nxp = xp + dpr, nyp = yp + dpi;
  const V nxm = xm + dmr, nym = ym + dmi;
  nx0.store(re[0] + i);
  ny0.store(im[0] + i);
  nxp.store(re[1] + i);
  nyp.store(im[1] + i);
  nxm.store(re[2] + i);
  nym.store(im[2] + i);

  return count_gt(nx0 * nx0 + ny0 * ny0, blow_limit(n0)) | count_gt(nxp * nxp + nyp * nyp, blow_limit(np)) |
         count_gt(nxm * nxm + nym * nym, blow_limit(nm));
}

template <class V>
long hybrid_body(double* const* re, double* const* im, const double* const* nz, std::size_t i, const StepParams& p) {
  const V x0 = V::load(re[0] + i), y0 = V::load(im[0] + i);  // a0
  const V x1 = V::load(re[1] + i), y1 = V::load(im[1] + i);  // b0
  const V x2 = V::load(re[2] + i), y2 = V::load(im[2] + i);  // a1
  const V x3 = V::load(re[3] + i), y3 = V::load(im[3] + i);  // b1
  const V kdt = V::set1(p.kdt), zero = V::set1(0.0);

  // B = a1 b1, D = a0 b0
  const V br = x2 * x3 - y2 * y3, bi = x2 * y3 + y2 * x3;
  const V dr = x0 * x1 - y0 * y1, di = x0 * y1 + y0 * x1;
  // a0: -i kappa b0^* B ; b0: -i kappa a0^* B
  const V car = x1 * br + y1 * bi, cai = x1 * bi - y1 * br;
  const V cbr = x0 * br + y0 * bi, cbi = x0 * bi - y0 * br;
  // a1: -i kappa D b1^* ; b1: -i kappa D a1^*
  const V ear = dr * x3 + di * y3, eai = di * x3 - dr * y3;
  const V ebr = dr * x2 + di * y2, ebi = di * x2 - dr * y2;

  V da0r = kdt * cai, da0i = zero - kdt * car;
  V db0r = kdt * cbi, db0i = zero - kdt * cbr;
  const V da1r = kdt * eai, da1i = zero - kdt * ear;
  const V db1r = kdt * ebi, db1i = zero - kdt * ebr;

  if (p.noisy) {
    const V ga = V::set1(0.5 * p.gdt), gb = V::set1(0.5 * p.gdt_b);
    const V cha = V::set1(p.c_half), chb = V::set1(p.c_half_b);
    da0r = da0r - ga * x0 + cha * V::load(nz[0] + i);
    da0i = da0i - ga * y0 + cha * V::load(nz[1] + i);
    db0r = db0r - gb * x1 + chb * V::load(nz[2] + i);
    db0i = db0i - gb * y1 + chb * V::load(nz[3] + i);
  }

  const V n0 = x0 * x0 + y0 * y0, n1 = x1 * x1 + y1 * y1, n2 = x2 * x2 + y2 * y2, n3 = x3 * x3 + y3 * y3;
  const V nx0 = x0 + da0r, ny0 = y0 + da0i, nx1 = x1 + db0r, ny1 = y1 + db0i;
  const V nx2 = x2 + da1r, ny2 = y2 + da1i, nx3 = x3 + db1r, ny3 = y3 + db1i;
  nx0.store(re[0] + i);
  ny0.store(im[0] + i);
  nx1.store(re[1] + i);
  ny1.store(im[1] + i);
  nx2.store(re[2] + i);
  ny2.store(im[2] + i);
  nx3.store(re[3] + i);
  ny3.store(im[3] + i);

  return count_gt(nx0 * nx0 + ny0 * ny0, blow_limit(n0)) | count_gt(nx1 * nx1 + ny1 * ny1, blow_limit(n1)) |
         count_gt(nx2 * nx2 + ny2 * ny2, blow_limit(n2)) | count_gt(nx3 * nx3 + ny3 * ny3, blow_limit(n3));
}

}  // namespace
