#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "svmc/hamiltonian.hpp"
#include "svmc/probes.hpp"

using namespace svmc;

TEST_CASE("coulomb terms by hand") {
    const SystemSpec sys{{Nucleus{{0, 0, 0}, 3}, Nucleus{{2, 0, 0}, 1}}, 1, 1};
    ElectronConfiguration c({0, 1, 0, 2, 1, 0}, {1, -1});
    const PotentialTerms v = coulomb_potential(sys, c);
    CHECK(v.ee == doctest::Approx(0.5));
    CHECK(v.en == doctest::Approx(-3.0 - 1.0 / std::sqrt(5.0) - 3.0 / std::sqrt(5.0) - 1.0));
    CHECK(v.nn == doctest::Approx(1.5));
    CHECK(nuclear_repulsion(sys) == doctest::Approx(1.5));
    CHECK(v.total() == doctest::Approx(v.ee + v.en + v.nn));
}

TEST_CASE("hydrogen 1s has zero-variance local energy") {
    const Hydrogen1sOracle psi(testing::hydrogen());
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto c = random_configuration(psi.system(), 1, s);
        const auto e = local_energy(psi, PotentialKind::Coulomb, {}, c);
        REQUIRE(e);
        CHECK(std::fabs(e->total + 0.5) < 1e-12);
        CHECK(e->total == e->kinetic + e->potential_ee + e->potential_en + e->potential_nn);
    }
}

TEST_CASE("hydrogen-like ion scales as Z^2") {
    const SystemSpec he_plus{{Nucleus{{0.1, 0.2, 0.3}, 2}}, 1, 0};
    const Hydrogen1sOracle psi(he_plus);
    const auto c = random_configuration(he_plus, 2, 0);
    CHECK(local_energy(psi, PotentialKind::Coulomb, {}, c)->total == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("harmonic oracle gives 3/2 per electron") {
    const HarmonicOracle psi(testing::atom(2, 1, 1));
    std::mt19937_64 rng(13);
    for (int t = 0; t < 100; ++t) {
        ElectronConfiguration c(testing::gaussian_vector(rng, 6), {1, -1});
        CHECK(local_energy(psi, PotentialKind::Harmonic, {}, c)->total == doctest::Approx(3.0).epsilon(1e-13));
    }
}

TEST_CASE("local energy is empty at a node and at a coalescence") {
    const SortletAnsatz psi(testing::lithium(), ModelOptions{ModelKind::Sortlet, PotentialKind::Coulomb, 2, 8, 1, 2.0});
    const ParamStore theta = psi.initial_params(0);
    auto c = random_configuration(psi.system(), 0, 0);
    c.set_position(1, c.position(0));  // same-spin coincidence: every sortlet ties
    CHECK_FALSE(local_energy(psi, PotentialKind::Coulomb, theta.values(), c));
    const Hydrogen1sOracle h(testing::hydrogen());
    ElectronConfiguration at_nucleus({0, 0, 0}, {1});
    CHECK_FALSE(local_energy(h, PotentialKind::Coulomb, {}, at_nucleus));
}

TEST_CASE("toy potential") {
    const SystemSpec sys = testing::hydrogen();
    ElectronConfiguration c({2.0, 1.0, -1.0}, {1});
    CHECK(potential(PotentialKind::Toy1d, sys, c).total() == doctest::Approx(2.0 + 1.6 + 1.0));
    CHECK(potential(PotentialKind::Harmonic, sys, c).total() == doctest::Approx(3.0));
}
