#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "svmc/autodiff.hpp"

namespace svmc {

/// v = sign * exp(logmag). sign is -1, 0 or +1; logmag is meaningless when
/// sign == 0. The magnitude type T is double or one of the autodiff scalars.
template <class T = double>
struct SignedLog {
    int sign = 0;
    T logmag{};

    static SignedLog zero() { return {0, T(-std::numeric_limits<double>::infinity())}; }
    static SignedLog from_value(double v) {
        if (v == 0.0) return zero();
        return {v > 0.0 ? 1 : -1, T(std::log(std::fabs(v)))};
    }

    bool is_zero() const noexcept { return sign == 0; }
    double value() const { return sign == 0 ? 0.0 : sign * std::exp(ad::value_of(logmag)); }
};

template <class T>
SignedLog<T> operator*(const SignedLog<T>& a, const SignedLog<T>& b) {
    if (a.sign == 0 || b.sign == 0) return SignedLog<T>::zero();
    return {a.sign * b.sign, a.logmag + b.logmag};
}

/// sum_k terms[k] in the signed log domain: shift by the largest magnitude,
/// add signed mantissas, renormalise. An exact cancellation gives sign 0.
/// The shift is a constant for differentiation, so derivatives of the
/// result are exact.
template <class T>
SignedLog<T> signed_log_sum(std::span<const SignedLog<T>> terms) {
    double shift = -std::numeric_limits<double>::infinity();
    for (const auto& t : terms)
        if (t.sign != 0) shift = std::max(shift, ad::value_of(t.logmag));
    if (!std::isfinite(shift)) return SignedLog<T>::zero();
    T acc(0.0);
    for (const auto& t : terms) {
        if (t.sign == 0) continue;
        const T m = ad::exp(t.logmag - shift);
        acc = t.sign > 0 ? acc + m : acc - m;
    }
    const double a = ad::value_of(acc);
    if (a == 0.0) return SignedLog<T>::zero();
    const T mag = a > 0.0 ? acc : -acc;
    return {a > 0.0 ? 1 : -1, ad::log(mag) + shift};
}

template <class T>
SignedLog<T> signed_log_sum(const std::vector<SignedLog<T>>& terms) {
    return signed_log_sum(std::span<const SignedLog<T>>(terms));
}

}  // namespace svmc
