#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "svmc/geometry.hpp"

namespace testing {

inline svmc::SystemSpec atom(int z, int n_up, int n_down) { return {{svmc::Nucleus{{0.0, 0.0, 0.0}, z}}, n_up, n_down}; }
inline svmc::SystemSpec hydrogen() { return atom(1, 1, 0); }
inline svmc::SystemSpec lithium() { return atom(3, 2, 1); }
inline svmc::SystemSpec beryllium() { return atom(4, 2, 2); }
inline svmc::SystemSpec lih() {
    return {{svmc::Nucleus{{0.0, 0.0, 0.0}, 3}, svmc::Nucleus{{3.015, 0.0, 0.0}, 1}}, 2, 2};
}

inline std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = g(rng);
    return v;
}

// Central difference of f along coordinate k with step h.
template <class F>
double central_difference(F&& f, std::vector<double> x, std::size_t k, double h) {
    const double x0 = x[k];
    x[k] = x0 + h;
    const double fp = f(std::span<const double>(x));
    x[k] = x0 - h;
    const double fm = f(std::span<const double>(x));
    return (fp - fm) / (2.0 * h);
}

template <class F>
double second_difference(F&& f, std::vector<double> x, std::size_t k, double h) {
    const double f0 = f(std::span<const double>(x));
    const double x0 = x[k];
    x[k] = x0 + h;
    const double fp = f(std::span<const double>(x));
    x[k] = x0 - h;
    const double fm = f(std::span<const double>(x));
    return (fp - 2.0 * f0 + fm) / (h * h);
}

}  // namespace testing
