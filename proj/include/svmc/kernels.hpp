#pragma once

// Data-parallel inner loops with a scalar reference implementation and an
// AVX2/FMA variant picked at runtime. Both variants of every kernel are
// reachable directly so tests can compare them.

#include <cstddef>
#include <string_view>

namespace svmc::kernels {

/// sign * exp(logmag); sign 0 means an exact zero.
struct SignedMagnitude {
    int sign = 0;
    double logmag = 0.0;
};

/// y[r] = b[r] + sum_c w[r * cols + c] * x[c]   (b may be null)
using MatvecFn = void (*)(std::size_t rows, std::size_t cols, const double* w, const double* x, const double* b,
                          double* y);

/// prod_{i<j} (phi[i] - phi[j])
using PairProductFn = SignedMagnitude (*)(const double* phi, std::size_t n);

/// For ascending s[0..n), n >= 2: prod_{i<n-1} (s[i+1] - s[i]) * (s[n-1] - s[0]).
using GapProductFn = SignedMagnitude (*)(const double* sorted, std::size_t n);

struct KernelTable {
    std::string_view name;
    MatvecFn matvec;
    PairProductFn pair_product;
    GapProductFn gap_product;
};

const KernelTable& scalar_table() noexcept;

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_table() noexcept;

/// Best table for this CPU, unless SVMC_KERNELS=scalar|avx2 overrides it.
const KernelTable& active() noexcept;

/// Forces a table by name ("scalar" or "avx2"); returns false if unavailable.
bool select(std::string_view name) noexcept;

}  // namespace svmc::kernels
