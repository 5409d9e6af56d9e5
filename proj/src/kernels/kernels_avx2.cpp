// Compiled with -mavx2 -mfma. Only reached through the dispatch table after a CPUID check.

#include <immintrin.h>

#include <cmath>

#include "kernels_impl.hpp"

namespace rmsa::kernels::detail {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* w, const double* x, const double* bias, double* y, std::size_t rows,
          std::size_t cols) {
  std::size_t r = 0;
  // Four rows at a time so each load of x feeds four accumulators.
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t c = 0;
    for (; c + 4 <= cols; c += 4) {
      const __m256d xv = _mm256_loadu_pd(x + c);
      a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + c), xv, a0);
      a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + c), xv, a1);
      a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + c), xv, a2);
      a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + c), xv, a3);
    }
    double s0 = hsum(a0), s1 = hsum(a1), s2 = hsum(a2), s3 = hsum(a3);
    for (; c < cols; ++c) {
      s0 += w0[c] * x[c];
      s1 += w1[c] * x[c];
      s2 += w2[c] * x[c];
      s3 += w3[c] * x[c];
    }
    if (bias) {
      s0 += bias[r];
      s1 += bias[r + 1];
      s2 += bias[r + 2];
      s3 += bias[r + 3];
    }
    y[r] = s0;
    y[r + 1] = s1;
    y[r + 2] = s2;
    y[r + 3] = s3;
  }
  for (; r < rows; ++r) {
    const double acc = dot(w + r * cols, x, cols);
    y[r] = bias ? acc + bias[r] : acc;
  }
}

void gemv_t_acc(const double* w, const double* d, double* out, std::size_t rows,
                std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(d[r], w + r * cols, out, cols);
}

void outer_acc(const double* d, const double* x, double* g, std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) axpy(d[r], x, g + r * cols, cols);
}

// No FMA here: keeps every lane bit-identical to the scalar reference.
void adam(double* param, const double* grad, double* m, double* v, std::size_t n, double lr,
          double beta1, double beta2, double eps, double corr1, double corr2) {
  const __m256d b1 = _mm256_set1_pd(beta1), nb1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d b2 = _mm256_set1_pd(beta2), nb2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d c1 = _mm256_set1_pd(corr1), c2 = _mm256_set1_pd(corr2);
  const __m256d vlr = _mm256_set1_pd(lr), veps = _mm256_set1_pd(eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(nb1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(nb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, c1);
    const __m256d v_hat = _mm256_div_pd(vi, c2);
    const __m256d step =
        _mm256_div_pd(_mm256_mul_pd(vlr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), veps));
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (grad[i] * grad[i]);
    const double m_hat = m[i] / corr1;
    const double v_hat = v[i] / corr2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void or_bytes(const std::uint8_t* src, std::uint8_t* acc, std::size_t n) {
  std::size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    const __m256i a = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    const __m256i s = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(acc + i), _mm256_or_si256(a, s));
  }
  for (; i < n; ++i) acc[i] |= src[i];
}

}  // namespace

const KernelTable kAvx2Table{"avx2", dot, axpy, gemv, gemv_t_acc, outer_acc, adam, or_bytes};

}  // namespace rmsa::kernels::detail
