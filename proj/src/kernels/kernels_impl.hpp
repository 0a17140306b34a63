#pragma once

#include "svmc/kernels.hpp"

namespace svmc::kernels {

namespace scalar {
void matvec(std::size_t rows, std::size_t cols, const double* w, const double* x, const double* b, double* y);
SignedMagnitude pair_product(const double* phi, std::size_t n);
SignedMagnitude gap_product(const double* s, std::size_t n);
}  // namespace scalar

#if defined(SVMC_HAVE_AVX2)
namespace avx2 {
void matvec(std::size_t rows, std::size_t cols, const double* w, const double* x, const double* b, double* y);
SignedMagnitude pair_product(const double* phi, std::size_t n);
SignedMagnitude gap_product(const double* s, std::size_t n);
}  // namespace avx2
#endif

}  // namespace svmc::kernels
