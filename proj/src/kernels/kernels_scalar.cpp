#include <cmath>

#include "kernels_impl.hpp"

namespace svmc::kernels::scalar {

void matvec(std::size_t rows, std::size_t cols, const double* w, const double* x, const double* b, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        double acc = b != nullptr ? b[r] : 0.0;
        const double* row = w + r * cols;
        for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        y[r] = acc;
    }
}

SignedMagnitude pair_product(const double* phi, std::size_t n) {
    int sign = 1;
    double logmag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = phi[i] - phi[j];
            if (d == 0.0) return {0, 0.0};
            if (d < 0.0) sign = -sign;
            logmag += std::log(std::fabs(d));
        }
    }
    return {sign, logmag};
}

SignedMagnitude gap_product(const double* s, std::size_t n) {
    double logmag = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gap = s[i + 1] - s[i];
        if (gap == 0.0) return {0, 0.0};
        logmag += std::log(gap);
    }
    const double wrap = s[n - 1] - s[0];
    if (wrap == 0.0) return {0, 0.0};
    return {1, logmag + std::log(wrap)};
}

}  // namespace svmc::kernels::scalar
