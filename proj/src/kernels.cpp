#include "gasflow/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace gasflow::kernels {

namespace {

void k_mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void k_sub_mul3(double* t, const double* w, const double* f, const double* s,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) t[i] -= w[i] * f[i] * s[i];
}

void k_half_sq_diff(const double* f, const double* s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (f[i] * f[i] - s[i] * s[i]);
}

void k_sub_scaled(const double* x, double a, const double* g, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - a * g[i];
}

void k_axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void k_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void k_sub(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void k_neg_div(double* v, const double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = -v[i] / w[i];
}

void k_negate(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) v[i] = -v[i];
}

double k_dot(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double k_nrm2sq(const double* a, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * a[i];
  return acc;
}

double k_nrm2sq_diff(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

double k_max_abs(const double* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

double k_max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

void k_clamp(const double* v, const double* lo, const double* hi, double* out,
             std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(std::max(v[i], lo[i]), hi[i]);
}

void k_clamp_scalar(const double* v, double lo, double hi, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::min(std::max(v[i], lo), hi);
}

// Projection onto the trapezoid with vertices (-lo,lo),(lo,lo),(hi,hi),(-hi,hi).
// For an outside point the projection lies on the boundary, so the nearest of
// the four segment projections is exact.
void k_project_trapezoid(const double* f, const double* s, double lo, double hi,
                         double* f_out, double* s_out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double x = f[i];
    const double y = s[i];
    if (y >= lo && y <= hi && x <= y && -x <= y) {
      f_out[i] = x;
      s_out[i] = y;
      continue;
    }
    // bottom face y = lo
    const double c1x = std::min(std::max(x, -lo), lo);
    double bx = c1x, by = lo;
    double bd = (x - c1x) * (x - c1x) + (y - lo) * (y - lo);
    // top face y = hi
    const double c2x = std::min(std::max(x, -hi), hi);
    const double d2 = (x - c2x) * (x - c2x) + (y - hi) * (y - hi);
    if (d2 < bd) { bd = d2; bx = c2x; by = hi; }
    // right face y = x, x in [lo, hi]
    const double t3 = std::min(std::max(0.5 * (x + y), lo), hi);
    const double d3 = (x - t3) * (x - t3) + (y - t3) * (y - t3);
    if (d3 < bd) { bd = d3; bx = t3; by = t3; }
    // left face y = -x, -x in [lo, hi]
    const double t4 = std::min(std::max(0.5 * (y - x), lo), hi);
    const double d4 = (x + t4) * (x + t4) + (y - t4) * (y - t4);
    if (d4 < bd) { bx = -t4; by = t4; }
    f_out[i] = bx;
    s_out[i] = by;
  }
}

const Backend g_scalar = {
    "scalar",       k_mul,     k_sub_mul3, k_half_sq_diff, k_sub_scaled,
    k_axpy,         k_add,     k_sub,      k_neg_div,      k_negate,
    k_dot,          k_nrm2sq,  k_nrm2sq_diff, k_max_abs,   k_max_abs_diff,
    k_clamp,        k_clamp_scalar, k_project_trapezoid,
};

std::atomic<const Backend*> g_active{nullptr};

const Backend* pick_default() {
  if (const Backend* b = avx2()) return b;
  return &g_scalar;
}

}  // namespace

const Backend& scalar() { return g_scalar; }

const Backend& active() {
  const Backend* b = g_active.load(std::memory_order_acquire);
  if (!b) {
    b = pick_default();
    g_active.store(b, std::memory_order_release);
  }
  return *b;
}

bool select(std::string_view name) {
  if (name == "scalar") {
    g_active.store(&g_scalar, std::memory_order_release);
    return true;
  }
  if (name == "avx2") {
    if (const Backend* b = avx2()) {
      g_active.store(b, std::memory_order_release);
      return true;
    }
    return false;
  }
  if (name == "auto") {
    g_active.store(pick_default(), std::memory_order_release);
    return true;
  }
  return false;
}

}  // namespace gasflow::kernels
