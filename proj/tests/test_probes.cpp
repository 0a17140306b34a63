#include <doctest.h>

#include <sstream>

#include "support.hpp"
#include "svmc/probes.hpp"

using namespace svmc;

namespace {

ModelOptions tiny(int k) {
    ModelOptions m;
    m.sortlets = k;
    m.hidden = 8;
    m.layers = 1;
    return m;
}

}  // namespace

TEST_CASE("report is line-delimited JSON ending in a summary") {
    const SortletAnsatz psi(testing::lithium(), tiny(1));
    const ProbeReport r = node_suite(psi, 5, 1);
    std::stringstream out;
    r.write(out);
    std::string line, last;
    int lines = 0;
    while (std::getline(out, line)) {
        CHECK_FALSE(nlohmann::json::parse(line, nullptr, false).is_discarded());
        last = line;
        ++lines;
    }
    CHECK(lines == 6);
    const auto s = nlohmann::json::parse(last);
    CHECK(s["pass"] == true);
    CHECK(s["probe"] == "nodes");
}

TEST_CASE("node crossing probe arguments") {
    const SortletAnsatz psi(testing::beryllium(), tiny(1));
    const ParamStore theta = random_params(psi, 2);
    const auto c = random_configuration(psi.system(), 2, 0);
    CHECK_THROWS_AS(node_crossing_probe(psi, theta.values(), c, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(node_crossing_probe(psi, theta.values(), c, 0, 2), std::invalid_argument);
    CHECK_THROWS_AS(node_crossing_probe(psi, theta.values(), c, 0, 1, 50), std::invalid_argument);
    const auto x = node_crossing_probe(psi, theta.values(), c, 0, 1);
    CHECK(x.count % 2 == 1);  // the endpoints carry opposite signs
    for (double t : x.locations) {
        CHECK(t > 0.0);
        CHECK(t < 1.0);
    }
}

TEST_CASE("cycle path endpoints") {
    const auto c = random_configuration(testing::lithium(), 0, 0);
    CHECK(cycle_path(c, 0, 1, 2, 0.0) == c);
    const auto end = cycle_path(c, 0, 1, 2, 1.0);
    CHECK(end.position(0) == c.position(1));
    CHECK(end.position(1) == c.position(2));
    CHECK(end.position(2) == c.position(0));
}

TEST_CASE("variational floor") {
    const ProbeReport r = variational_floor_check(20, 200, 1);
    CHECK(r.pass);
    CHECK(r.summary["violations"] == 0);
}

TEST_CASE("toy quadrature energy respects the variational bound") {
    const Toy1dModel toy(testing::hydrogen());
    const ParamStore t = toy.initial_params(0);
    // Exact ground state of 1/2 x^2 + 0.1 x^4 lies above the bare oscillator's 1/2.
    const double e = toy1d_rayleigh_quotient(t.values());
    CHECK(e > 1.5);
    CHECK(toy1d_rayleigh_quotient(t.values(), 40001, 12.0) == doctest::Approx(e).epsilon(1e-10));
}

TEST_CASE("weighted toy gradient against quadrature differences") {
    const Toy1dModel toy(testing::hydrogen());
    const ParamStore t = toy.initial_params(0);
    const auto w = toy1d_gradient_check(toy, t.values(), "weighted");
    CHECK(w.max_relative_error < 1e-3);
    const auto bad = toy1d_gradient_check(toy, t.values(), "inner-2");
    CHECK(bad.max_relative_error > 1e-2);
    CHECK_THROWS_AS(toy1d_gradient_check(toy, t.values(), "other"), std::invalid_argument);
}

TEST_CASE("vandermonde nodes on lithium") {
    const VandermondeAnsatz psi(testing::lithium(), tiny(1));
    CHECK(node_suite(psi, 10, 3).pass);
}
