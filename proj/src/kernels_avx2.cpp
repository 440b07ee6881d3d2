// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma; callers must go through kernels::avx2(), which returns
// nullptr unless the running CPU supports both feature sets.

#include "gasflow/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <algorithm>
#include <cmath>

namespace gasflow::kernels {

namespace {

void k_mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void k_sub_mul3(double* t, const double* w, const double* f, const double* s,
                std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d wf = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(f + i));
    _mm256_storeu_pd(
        t + i, _mm256_fnmadd_pd(wf, _mm256_loadu_pd(s + i), _mm256_loadu_pd(t + i)));
  }
  for (; i < n; ++i) t[i] = std::fma(-(w[i] * f[i]), s[i], t[i]);
}

void k_half_sq_diff(const double* f, const double* s, double* out, std::size_t n) {
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d fv = _mm256_loadu_pd(f + i);
    const __m256d sv = _mm256_loadu_pd(s + i);
    const __m256d diff =
        _mm256_sub_pd(_mm256_mul_pd(fv, fv), _mm256_mul_pd(sv, sv));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(half, diff));
  }
  for (; i < n; ++i) out[i] = 0.5 * (f[i] * f[i] - s[i] * s[i]);
}

void k_sub_scaled(const double* x, double a, const double* g, double* out,
                  std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_fnmadd_pd(av, _mm256_loadu_pd(g + i),
                                               _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) out[i] = std::fma(-a, g[i], x[i]);
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void k_add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void k_sub(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i,
                     _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void k_neg_div(double* v, const double* w, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d neg = _mm256_sub_pd(zero, _mm256_loadu_pd(v + i));
    _mm256_storeu_pd(v + i, _mm256_div_pd(neg, _mm256_loadu_pd(w + i)));
  }
  for (; i < n; ++i) v[i] = -v[i] / w[i];
}

void k_negate(double* v, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(v + i, _mm256_sub_pd(zero, _mm256_loadu_pd(v + i)));
  }
  for (; i < n; ++i) v[i] = -v[i];
}

double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d sum2 = _mm_add_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(sum2, sum2);
  return _mm_cvtsd_f64(_mm_add_sd(sum2, swapped));
}

double k_dot(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double k_nrm2sq(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) r += a[i] * a[i];
  return r;
}

double k_nrm2sq_diff(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

double hmax(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d m2 = _mm_max_pd(lo, hi);
  const __m128d swapped = _mm_unpackhi_pd(m2, m2);
  return _mm_cvtsd_f64(_mm_max_sd(m2, swapped));
}

double k_max_abs(const double* a, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(a + i)));
  }
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

double k_max_abs_diff(const double* a, const double* b, std::size_t n) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_max_pd(acc, _mm256_andnot_pd(sign_mask, d));
  }
  double m = hmax(acc);
  for (; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void k_clamp(const double* v, const double* lo, const double* hi, double* out,
             std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d clipped = _mm256_min_pd(
        _mm256_max_pd(_mm256_loadu_pd(v + i), _mm256_loadu_pd(lo + i)),
        _mm256_loadu_pd(hi + i));
    _mm256_storeu_pd(out + i, clipped);
  }
  for (; i < n; ++i) out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
}

void k_clamp_scalar(const double* v, double lo, double hi, double* out,
                    std::size_t n) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(
        out + i, _mm256_min_pd(_mm256_max_pd(_mm256_loadu_pd(v + i), lov), hiv));
  }
  for (; i < n; ++i) out[i] = std::min(std::max(v[i], lo), hi);
}

// Mirrors the scalar branch logic with compare/blend selects. No FMA so the
// two backends agree bitwise.
void k_project_trapezoid(const double* f, const double* s, double lo, double hi,
                         double* f_out, double* s_out, std::size_t n) {
  const __m256d lov = _mm256_set1_pd(lo);
  const __m256d hiv = _mm256_set1_pd(hi);
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(f + i);
    const __m256d y = _mm256_loadu_pd(s + i);
    const __m256d negx = _mm256_sub_pd(zero, x);

    const __m256d inside = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(y, lov, _CMP_GE_OQ),
                      _mm256_cmp_pd(y, hiv, _CMP_LE_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(x, y, _CMP_LE_OQ),
                      _mm256_cmp_pd(negx, y, _CMP_LE_OQ)));

    // bottom face
    const __m256d c1x = _mm256_min_pd(_mm256_max_pd(x, _mm256_sub_pd(zero, lov)), lov);
    __m256d bx = c1x, by = lov;
    const __m256d d1x = _mm256_sub_pd(x, c1x);
    const __m256d d1y = _mm256_sub_pd(y, lov);
    __m256d bd = _mm256_add_pd(_mm256_mul_pd(d1x, d1x), _mm256_mul_pd(d1y, d1y));

    // top face
    const __m256d c2x = _mm256_min_pd(_mm256_max_pd(x, _mm256_sub_pd(zero, hiv)), hiv);
    const __m256d d2x = _mm256_sub_pd(x, c2x);
    const __m256d d2y = _mm256_sub_pd(y, hiv);
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(d2x, d2x), _mm256_mul_pd(d2y, d2y));
    __m256d better = _mm256_cmp_pd(d2, bd, _CMP_LT_OQ);
    bd = _mm256_blendv_pd(bd, d2, better);
    bx = _mm256_blendv_pd(bx, c2x, better);
    by = _mm256_blendv_pd(by, hiv, better);

    // right face y = x
    const __m256d t3 = _mm256_min_pd(
        _mm256_max_pd(_mm256_mul_pd(half, _mm256_add_pd(x, y)), lov), hiv);
    const __m256d d3x = _mm256_sub_pd(x, t3);
    const __m256d d3y = _mm256_sub_pd(y, t3);
    const __m256d d3 = _mm256_add_pd(_mm256_mul_pd(d3x, d3x), _mm256_mul_pd(d3y, d3y));
    better = _mm256_cmp_pd(d3, bd, _CMP_LT_OQ);
    bd = _mm256_blendv_pd(bd, d3, better);
    bx = _mm256_blendv_pd(bx, t3, better);
    by = _mm256_blendv_pd(by, t3, better);

    // left face y = -x
    const __m256d t4 = _mm256_min_pd(
        _mm256_max_pd(_mm256_mul_pd(half, _mm256_sub_pd(y, x)), lov), hiv);
    const __m256d d4x = _mm256_add_pd(x, t4);
    const __m256d d4y = _mm256_sub_pd(y, t4);
    const __m256d d4 = _mm256_add_pd(_mm256_mul_pd(d4x, d4x), _mm256_mul_pd(d4y, d4y));
    better = _mm256_cmp_pd(d4, bd, _CMP_LT_OQ);
    bx = _mm256_blendv_pd(bx, _mm256_sub_pd(zero, t4), better);
    by = _mm256_blendv_pd(by, t4, better);

    _mm256_storeu_pd(f_out + i, _mm256_blendv_pd(bx, x, inside));
    _mm256_storeu_pd(s_out + i, _mm256_blendv_pd(by, y, inside));
  }
  if (i < n) scalar().project_trapezoid(f + i, s + i, lo, hi, f_out + i, s_out + i, n - i);
}

const Backend g_avx2 = {
    "avx2",         k_mul,     k_sub_mul3, k_half_sq_diff, k_sub_scaled,
    k_axpy,         k_add,     k_sub,      k_neg_div,      k_negate,
    k_dot,          k_nrm2sq,  k_nrm2sq_diff, k_max_abs,   k_max_abs_diff,
    k_clamp,        k_clamp_scalar, k_project_trapezoid,
};

}  // namespace

const Backend* avx2() {
  static const bool supported =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &g_avx2 : nullptr;
}

}  // namespace gasflow::kernels

#else

namespace gasflow::kernels {
const Backend* avx2() { return nullptr; }
}  // namespace gasflow::kernels

#endif
