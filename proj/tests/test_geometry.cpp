#include <doctest.h>

#include <random>
#include <stdexcept>

#include "support.hpp"
#include "svmc/config.hpp"
#include "svmc/geometry.hpp"

using namespace svmc;

TEST_CASE("transpose swaps positions and keeps spins") {
    std::mt19937_64 rng(1);
    const SystemSpec sys = testing::beryllium();
    ElectronConfiguration c(testing::gaussian_vector(rng, 12), {1, 1, -1, -1});
    const auto t = transpose_electrons(c, 0, 1);
    CHECK(t.position(0) == c.position(1));
    CHECK(t.position(1) == c.position(0));
    CHECK(t.position(2) == c.position(2));
    CHECK(std::vector<std::int8_t>(t.spins().begin(), t.spins().end()) ==
          std::vector<std::int8_t>(c.spins().begin(), c.spins().end()));
    CHECK(transpose_electrons(t, 0, 1) == c);
    CHECK(transpose_electrons(c, 2, 2) == c);
}

TEST_CASE("exchange path endpoints and midpoint") {
    std::mt19937_64 rng(2);
    ElectronConfiguration c(testing::gaussian_vector(rng, 9), {1, 1, -1});
    CHECK(exchange_path(c, 0, 1, 0.0) == c);
    CHECK(exchange_path(c, 0, 1, 1.0) == transpose_electrons(c, 0, 1));
    const auto mid = exchange_path(c, 0, 1, 0.5);
    for (int d = 0; d < 3; ++d) CHECK(mid.position(0)[d] == doctest::Approx(mid.position(1)[d]));
    CHECK_THROWS_AS(exchange_path(c, 0, 2, 0.3), std::invalid_argument);
}

TEST_CASE("same-spin pairs") {
    const auto pairs = same_spin_pairs(testing::beryllium());
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0] == std::pair{0, 1});
    CHECK(pairs[1] == std::pair{2, 3});
    CHECK(same_spin_pairs(testing::hydrogen()).empty());
}

TEST_CASE("system validation") {
    CHECK_NOTHROW(testing::lithium().validate());
    CHECK_THROWS_AS((SystemSpec{{}, 1, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((SystemSpec{{Nucleus{{0, 0, 0}, 1}}, 0, 0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((SystemSpec{{Nucleus{{0, 0, 0}, 0}}, 1, 0}).validate(), std::invalid_argument);
    CHECK(atomic_number("Li") == 3);
    CHECK(atomic_number("B") == 5);
    CHECK_THROWS_AS(atomic_number("Xx"), std::invalid_argument);
}

TEST_CASE("H4 rectangle is a square at 90 degrees") {
    const auto n = h4_rectangle(90.0, kDefaultH4Radius);
    REQUIRE(n.size() == 4);
    auto dist = [](const Nucleus& a, const Nucleus& b) {
        double s = 0;
        for (int d = 0; d < 3; ++d) s += (a.position[d] - b.position[d]) * (a.position[d] - b.position[d]);
        return std::sqrt(s);
    };
    for (const auto& x : n) CHECK(dist(x, Nucleus{}) == doctest::Approx(kDefaultH4Radius));
    CHECK(dist(n[0], n[1]) == doctest::Approx(dist(n[1], n[2])));
    CHECK_THROWS_AS(h4_rectangle(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("config parsing") {
    const char* text = R"(
# comment
[system]
nucleus = Li 0 0 0
nucleus = 1 3.015 0 0   # hydrogen by charge
[electrons]
n_up = 2
n_down = 2
[model]
sortlets = 8
[run]
seed = 42
[train]
walkers = 64
single_electron_moves = true
)";
    const RunConfig c = parse_run_config(text);
    CHECK(c.system.nuclei.size() == 2);
    CHECK(c.system.nuclei[1].charge == 1);
    CHECK(c.system.nuclei[1].position[0] == 3.015);
    CHECK(c.system.n_up == 2);
    CHECK(c.model.sortlets == 8);
    CHECK(c.seed == 42);
    CHECK(c.train.walkers == 64);
    CHECK(c.train.single_electron_moves);

    SUBCASE("default spin split is high-spin-first and neutral") {
        const SystemSpec s = load_system("[system]\nnucleus = B 0 0 0\n");
        CHECK(s.n_up == 3);
        CHECK(s.n_down == 2);
    }
    SUBCASE("canonical text round-trips") {
        const RunConfig again = parse_run_config(canonical_text(c));
        CHECK(canonical_text(again) == canonical_text(c));
        CHECK(config_hash(again) == config_hash(c));
    }
    SUBCASE("hash ignores training knobs and seed but not the model") {
        RunConfig other = c;
        other.seed = 1;
        other.train.iterations = 7;
        CHECK(config_hash(other) == config_hash(c));
        other.model.sortlets = 9;
        CHECK(config_hash(other) != config_hash(c));
    }
}

TEST_CASE("config errors name the offending key") {
    auto message = [](const char* text) {
        try {
            parse_run_config(text);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("[system]\nnucleus = H 0 0 0\ncolour = red\n").find("colour") != std::string::npos);
    CHECK(message("[sistem]\n").find("sistem") != std::string::npos);
    CHECK(message("[system]\nnucleus = H 0 0\n").find("nucleus") != std::string::npos);
    CHECK(message("[system]\nnucleus = H 0 0 zero\n").find("zero") != std::string::npos);
    CHECK(message("[system]\nnucleus = H 0 0 0\n[model]\nkind = slater\n").find("slater") != std::string::npos);
    CHECK(!message("[system]\nnucleus = H 0 0 0\n[train]\nlearning_rate = -1\n").empty());
    CHECK(!message("nucleus = H 0 0 0\n").empty());
}
