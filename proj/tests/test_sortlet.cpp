#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "support.hpp"
#include "svmc/kernels.hpp"
#include "svmc/sortlet.hpp"

using namespace svmc;

namespace {

int brute_force_parity(const std::vector<double>& v) {
    int inv = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
            if (v[i] > v[j]) ++inv;
    return inv % 2 == 0 ? 1 : -1;
}

// Direct product definition in plain floating point.
double sortlet_reference(std::vector<double> v) {
    const int parity = brute_force_parity(v);
    std::sort(v.begin(), v.end());
    double p = 1.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) p *= v[i + 1] - v[i];
    return parity * p * (v.back() - v.front());
}

}  // namespace

TEST_CASE("merge sort parity equals the quadratic count") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(1, 40);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto v = testing::gaussian_vector(rng, static_cast<std::size_t>(len(rng)));
        const auto r = sort_with_parity(v);
        CHECK(r.parity == brute_force_parity(v));
        for (std::size_t p = 0; p + 1 < v.size(); ++p) CHECK(v[r.permutation[p]] <= v[r.permutation[p + 1]]);
    }
}

TEST_CASE("sorting is stable on ties") {
    const std::vector<double> v{2.0, 1.0, 2.0, 1.0};
    const auto r = sort_with_parity(v);
    CHECK(r.permutation == std::vector<int>{1, 3, 0, 2});
    CHECK(r.parity == brute_force_parity(v));
}

TEST_CASE("sortlet value against the product definition") {
    std::mt19937_64 rng(8);
    for (int n = 2; n <= 9; ++n) {
        const auto v = testing::gaussian_vector(rng, static_cast<std::size_t>(n));
        const auto s = sortlet_value(v);
        CHECK(s.value.value() == doctest::Approx(sortlet_reference(v)).epsilon(1e-12));
    }
    CHECK(sortlet_value(std::vector<double>{-0.4}).value.value() == doctest::Approx(-0.4));
}

TEST_CASE("sortlet is antisymmetric and vanishes on ties") {
    std::mt19937_64 rng(9);
    auto v = testing::gaussian_vector(rng, 8);
    const auto base = sortlet_value(v);
    std::swap(v[2], v[5]);
    const auto swapped = sortlet_value(v);
    CHECK(swapped.value.sign == -base.value.sign);
    CHECK(swapped.value.logmag == base.value.logmag);
    v[1] = v[4];
    CHECK(sortlet_value(v).value.is_zero());
}

TEST_CASE("vandermonde value against the product definition") {
    const std::vector<double> phi{0.3, -1.2, 0.8, 2.0, -0.5};
    const std::vector<int> blocks{3, 2};
    const double expect = (0.3 + 1.2) * (0.3 - 0.8) * (-1.2 - 0.8) * (2.0 + 0.5);
    CHECK(vandermonde_value(phi, blocks).value() == doctest::Approx(expect));
    const std::vector<double> tied{0.3, 0.3, 1.0};
    const std::vector<int> one{3};
    CHECK(vandermonde_value(tied, one).is_zero());
}

TEST_CASE("templated sortlet and vandermonde agree with the double kernels") {
    std::mt19937_64 rng(10);
    const auto v = testing::gaussian_vector(rng, 7);
    SortWorkspace ws;
    const auto d = sortlet_log<double>(v, ws);
    const auto j = ad::differentiate_positions(
        [&](auto xs) {
            using S = typename decltype(xs)::value_type;
            SortWorkspace w;
            return sortlet_log<S>(xs, w).logmag;
        },
        v);
    CHECK(j.value == doctest::Approx(d.logmag).epsilon(1e-14));
    // d/dx_k log|prod gaps| is a sum of +-1/gap terms; compare with differences.
    auto f = [](std::span<const double> x) {
        SortWorkspace w;
        return sortlet_log<double>(x, w).logmag;
    };
    for (std::size_t k = 0; k < v.size(); ++k)
        CHECK(j.gradient[k] == doctest::Approx(testing::central_difference(f, v, k, 1e-7)).epsilon(1e-6));

    const std::vector<int> blocks{4, 3};
    const auto vd = vandermonde_log<double>(v, blocks);
    const auto vj = vandermonde_log<ad::Jet<4>>(std::vector<ad::Jet<4>>(v.begin(), v.end()), blocks);
    CHECK(vj.sign == vd.sign);
    CHECK(vj.logmag.v == doctest::Approx(vd.logmag).epsilon(1e-14));
}

TEST_CASE("jastrow is symmetric under same-spin relabelling") {
    std::mt19937_64 rng(11);
    const auto x = testing::gaussian_vector(rng, 12);
    const std::vector<std::int8_t> spins{1, 1, -1, -1};
    std::vector<int> order{0, 1, 2, 3};
    const double j0 = jastrow<double, double>(1.0, 1.0, x, spins, order, 1e-12);
    std::vector<double> y = x;
    for (int d = 0; d < 3; ++d) std::swap(y[d], y[3 + d]);
    std::vector<int> swapped{1, 0, 2, 3};
    CHECK(jastrow<double, double>(1.0, 1.0, y, spins, swapped, 1e-12) == j0);
    // Two electrons at distance r: J = -1/4 b / (b^2 + r) for a same-spin pair.
    const std::vector<double> two{0, 0, 0, 0.6, 0.8, 0};
    const std::vector<std::int8_t> up{1, 1};
    const std::vector<int> o{0, 1};
    CHECK(jastrow<double, double>(2.0, 1.0, two, up, o, 0.0) == doctest::Approx(-0.25 * 2.0 / 5.0));
}

TEST_CASE("scalar and AVX2 kernels agree") {
    const auto& scalar = kernels::scalar_table();
    const auto* avx = kernels::avx2_table();
    if (avx == nullptr) {
        MESSAGE("AVX2 kernels unavailable on this machine; scalar table only");
        return;
    }
    std::mt19937_64 rng(12);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 16u, 31u, 64u, 100u}) {
        const auto w = testing::gaussian_vector(rng, n * (n + 3));
        const auto x = testing::gaussian_vector(rng, n + 3);
        const auto b = testing::gaussian_vector(rng, n);
        std::vector<double> ys(n), ya(n), ys0(n), ya0(n);
        scalar.matvec(n, n + 3, w.data(), x.data(), b.data(), ys.data());
        avx->matvec(n, n + 3, w.data(), x.data(), b.data(), ya.data());
        scalar.matvec(n, n + 3, w.data(), x.data(), nullptr, ys0.data());
        avx->matvec(n, n + 3, w.data(), x.data(), nullptr, ya0.data());
        for (std::size_t r = 0; r < n; ++r) {
            CHECK(ya[r] == doctest::Approx(ys[r]).epsilon(1e-13));
            CHECK(ya0[r] == doctest::Approx(ys0[r]).epsilon(1e-13));
        }

        const auto phi = testing::gaussian_vector(rng, n);
        const auto ps = scalar.pair_product(phi.data(), n);
        const auto pa = avx->pair_product(phi.data(), n);
        CHECK(pa.sign == ps.sign);
        CHECK(pa.logmag == doctest::Approx(ps.logmag).epsilon(1e-12));

        if (n >= 2) {
            auto sorted = phi;
            std::sort(sorted.begin(), sorted.end());
            const auto gs = scalar.gap_product(sorted.data(), n);
            const auto ga = avx->gap_product(sorted.data(), n);
            CHECK(ga.sign == gs.sign);
            CHECK(ga.logmag == doctest::Approx(gs.logmag).epsilon(1e-12));
            sorted[n / 2] = sorted[n / 2 - 1];
            CHECK(scalar.gap_product(sorted.data(), n).sign == 0);
            CHECK(avx->gap_product(sorted.data(), n).sign == 0);
        }
    }
    std::vector<double> tie{1.0, 2.0, 1.0, 3.0, 4.0};
    CHECK(scalar.pair_product(tie.data(), tie.size()).sign == 0);
    CHECK(avx->pair_product(tie.data(), tie.size()).sign == 0);
}

TEST_CASE("kernel selection by name") {
    const std::string before(kernels::active().name);
    CHECK(kernels::select("scalar"));
    CHECK(kernels::active().name == "scalar");
    CHECK_FALSE(kernels::select("neon"));
    CHECK(kernels::select(before));
}
