#pragma once

// Data-parallel inner loops used by the network and spectrum code.
//
// Every kernel has a portable scalar reference implementation and, on x86-64,
// an AVX2/FMA variant. The variant is chosen once at startup from CPUID; setting
// RMSA_KERNELS=scalar in the environment forces the reference path. All matrices
// are dense row-major.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace rmsa::kernels {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias; W is rows x cols. bias may be null.
  void (*gemv)(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols);
  // out += W^T d; W is rows x cols, d has rows entries, out has cols entries.
  void (*gemv_t_acc)(const double* w, const double* d, double* out, std::size_t rows,
                     std::size_t cols);
  // G += d x^T; G is rows x cols.
  void (*outer_acc)(const double* d, const double* x, double* g, std::size_t rows,
                    std::size_t cols);
  // Bias-corrected Adam step over n parameters. corr1 = 1 - beta1^t, corr2 = 1 - beta2^t.
  void (*adam)(double* param, const double* grad, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps, double corr1, double corr2);
  // acc[i] |= src[i]
  void (*or_bytes)(const std::uint8_t* src, std::uint8_t* acc, std::size_t n);
};

const KernelTable& scalar();

/// AVX2/FMA table, or nullptr when the CPU or the build lacks support.
const KernelTable* avx2();

/// The table selected for this process.
const KernelTable& active();

}  // namespace rmsa::kernels
