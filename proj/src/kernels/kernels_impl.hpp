#pragma once

#include "rmsa/kernels.hpp"

namespace rmsa::kernels::detail {

extern const KernelTable kScalarTable;
#if defined(RMSA_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

}  // namespace rmsa::kernels::detail
