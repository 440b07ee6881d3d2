#pragma once

#include <cstddef>
#include <string_view>

// Elementwise kernels behind the operator-evaluation and domain-projection
// inner loops. A scalar reference implementation always exists; on x86-64 an
// AVX2+FMA variant is selected at startup when the CPU supports it. Backends
// are interchangeable and equivalence-tested against the scalar reference.

namespace gasflow::kernels {

struct Backend {
  const char* name;

  // out = a * b
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // t -= w * f * s  (friction term of the pressure block)
  void (*sub_mul3)(double* t, const double* w, const double* f, const double* s,
                   std::size_t n);
  // out = 0.5 * (f^2 - s^2)
  void (*half_sq_diff)(const double* f, const double* s, double* out, std::size_t n);
  // out = x - a * g  (projected-gradient step argument)
  void (*sub_scaled)(const double* x, double a, const double* g, double* out,
                     std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*add)(const double* a, const double* b, double* out, std::size_t n);
  void (*sub)(const double* a, const double* b, double* out, std::size_t n);
  // v = -v / w
  void (*neg_div)(double* v, const double* w, std::size_t n);
  void (*negate)(double* v, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*nrm2sq)(const double* a, std::size_t n);
  double (*nrm2sq_diff)(const double* a, const double* b, std::size_t n);
  double (*max_abs)(const double* a, std::size_t n);
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
  // out = min(max(v, lo), hi), elementwise bounds
  void (*clamp)(const double* v, const double* lo, const double* hi, double* out,
                std::size_t n);
  void (*clamp_scalar)(const double* v, double lo, double hi, double* out,
                       std::size_t n);
  // Exact Euclidean projection of each (f_i, s_i) onto the trapezoid
  // {(x, y): |x| <= y, lo <= y <= hi} with 0 < lo <= hi.
  void (*project_trapezoid)(const double* f, const double* s, double lo, double hi,
                            double* f_out, double* s_out, std::size_t n);
};

// Reference implementation; always available.
const Backend& scalar();

// AVX2+FMA backend, or nullptr when the build target or CPU lacks support.
const Backend* avx2();

// Backend in use by the library, chosen once at startup.
const Backend& active();

// Force a backend by name ("scalar", "avx2", "auto").
// Returns false and leaves the selection unchanged if unknown or unavailable.
bool select(std::string_view name);

}  // namespace gasflow::kernels
