// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "kernels_impl.hpp"

namespace svmc::kernels::avx2 {
namespace {

// Products are accumulated as mantissa in [1, 2) times 2^exponent per lane so
// that long products neither overflow nor underflow. Factors outside
// [2^-1000, 2^1000] (including zero and NaN) flag the input for the scalar
// path, which handles them exactly.
constexpr double kLowFactor = 0x1p-1000;
constexpr double kHighFactor = 0x1p+1000;

struct Accumulator {
    __m256d mant = _mm256_set1_pd(1.0);
    __m256i expo = _mm256_setzero_si256();
    __m256i negatives = _mm256_setzero_si256();
    __m256d bad = _mm256_setzero_pd();

    // Multiplies |f| into the lanes, counting negative factors.
    inline void push(__m256d f) {
        const __m256d sign_mask = _mm256_set1_pd(-0.0);
        negatives = _mm256_sub_epi64(negatives, _mm256_castpd_si256(_mm256_cmp_pd(f, _mm256_setzero_pd(), _CMP_LT_OQ)));
        const __m256d a = _mm256_andnot_pd(sign_mask, f);
        const __m256d ok = _mm256_and_pd(_mm256_cmp_pd(a, _mm256_set1_pd(kLowFactor), _CMP_GE_OQ),
                                         _mm256_cmp_pd(a, _mm256_set1_pd(kHighFactor), _CMP_LE_OQ));
        bad = _mm256_or_pd(bad, _mm256_xor_pd(ok, _mm256_castsi256_pd(_mm256_set1_epi64x(-1))));
        __m256i bits = _mm256_castpd_si256(_mm256_mul_pd(mant, _mm256_and_pd(a, ok)));
        bits = _mm256_blendv_epi8(_mm256_castpd_si256(mant), bits, _mm256_castpd_si256(ok));
        const __m256i e = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1023));
        expo = _mm256_add_epi64(expo, e);
        bits = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL)),
                               _mm256_set1_epi64x(0x3FF0000000000000LL));
        mant = _mm256_castsi256_pd(bits);
    }

    bool any_bad() const { return _mm256_movemask_pd(bad) != 0; }

    // Collapses lanes plus a scalar remainder (mantissa, exponent, negatives).
    SignedMagnitude finish(double tail_mant, long long tail_exp, long long tail_neg) const {
        alignas(32) double m[4];
        alignas(32) long long e[4];
        alignas(32) long long neg[4];
        _mm256_store_pd(m, mant);
        _mm256_store_si256(reinterpret_cast<__m256i*>(e), expo);
        _mm256_store_si256(reinterpret_cast<__m256i*>(neg), negatives);
        double logmag = std::log(tail_mant);
        long long total_exp = tail_exp;
        long long total_neg = tail_neg;
        for (int l = 0; l < 4; ++l) {
            logmag += std::log(m[l]);
            total_exp += e[l];
            total_neg += neg[l];
        }
        logmag += static_cast<double>(total_exp) * 0.69314718055994530942;
        return {(total_neg & 1) != 0 ? -1 : 1, logmag};
    }
};

struct ScalarTail {
    double mant = 1.0;
    long long expo = 0;
    long long negatives = 0;
    bool bad = false;

    inline void push(double f) {
        if (f < 0.0) ++negatives;
        const double a = std::fabs(f);
        if (!(a >= kLowFactor && a <= kHighFactor)) {
            bad = true;
            return;
        }
        int e = 0;
        mant = std::frexp(mant * a, &e);
        expo += e;
    }
};

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

void matvec(std::size_t rows, std::size_t cols, const double* w, const double* x, const double* b, double* y) {
    for (std::size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        __m256d acc = _mm256_setzero_pd();
        std::size_t c = 0;
        for (; c + 4 <= cols; c += 4) acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x + c), acc);
        double s = hsum(acc);
        for (; c < cols; ++c) s += row[c] * x[c];
        y[r] = (b != nullptr ? b[r] : 0.0) + s;
    }
}

SignedMagnitude pair_product(const double* phi, std::size_t n) {
    Accumulator acc;
    ScalarTail tail;
    for (std::size_t i = 0; i < n; ++i) {
        const __m256d pi = _mm256_set1_pd(phi[i]);
        std::size_t j = i + 1;
        for (; j + 4 <= n; j += 4) acc.push(_mm256_sub_pd(pi, _mm256_loadu_pd(phi + j)));
        for (; j < n; ++j) tail.push(phi[i] - phi[j]);
    }
    if (acc.any_bad() || tail.bad) return scalar::pair_product(phi, n);
    return acc.finish(tail.mant, tail.expo, tail.negatives);
}

SignedMagnitude gap_product(const double* s, std::size_t n) {
    Accumulator acc;
    ScalarTail tail;
    const std::size_t gaps = n - 1;
    std::size_t i = 0;
    for (; i + 4 <= gaps; i += 4) acc.push(_mm256_sub_pd(_mm256_loadu_pd(s + i + 1), _mm256_loadu_pd(s + i)));
    for (; i < gaps; ++i) tail.push(s[i + 1] - s[i]);
    tail.push(s[n - 1] - s[0]);
    if (acc.any_bad() || tail.bad || tail.negatives != 0) return scalar::gap_product(s, n);
    const auto r = acc.finish(tail.mant, tail.expo, 0);
    if (r.sign < 0) return scalar::gap_product(s, n);
    return r;
}

}  // namespace svmc::kernels::avx2
