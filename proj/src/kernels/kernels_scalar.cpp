#include <cmath>

#include "kernels_impl.hpp"

namespace rmsa::kernels::detail {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void gemv(const double* w, const double* x, const double* bias, double* y, std::size_t rows,
          std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
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

void adam(double* param, const double* grad, double* m, double* v, std::size_t n, double lr,
          double beta1, double beta2, double eps, double corr1, double corr2) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (grad[i] * grad[i]);
    const double m_hat = m[i] / corr1;
    const double v_hat = v[i] / corr2;
    param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void or_bytes(const std::uint8_t* src, std::uint8_t* acc, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] |= src[i];
}

}  // namespace

const KernelTable kScalarTable{"scalar", dot, axpy, gemv, gemv_t_acc, outer_acc, adam, or_bytes};

}  // namespace rmsa::kernels::detail
