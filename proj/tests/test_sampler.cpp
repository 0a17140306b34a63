#include <doctest.h>

#include <omp.h>

#include <cmath>
#include <set>

#include "support.hpp"
#include "svmc/rng.hpp"
#include "svmc/sampler.hpp"
#include "svmc/wavefunction.hpp"

using namespace svmc;

TEST_CASE("counter rng streams are reproducible and independent") {
    CounterRng a(1, 0), b(1, 0), c(1, 1), d(2, 0);
    std::set<std::uint64_t> firsts;
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
    firsts.insert(CounterRng(1, 0).next_u64());
    firsts.insert(c.next_u64());
    firsts.insert(d.next_u64());
    CHECK(firsts.size() == 3);

    CounterRng r(5, 9);
    r.normal();  // leaves a spare cached
    const CounterRng saved = CounterRng::restore(r.key(), r.counter(), r.has_spare(), r.spare());
    CounterRng copy = saved;
    for (int i = 0; i < 5; ++i) CHECK(copy.normal() == r.normal());
}

TEST_CASE("uniform and normal moments") {
    CounterRng r(3, 4);
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    double lo = 1, hi = 0;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        su += u;
        const double g = r.normal();
        sn += g;
        sn2 += g * g;
    }
    CHECK(lo > 0.0);
    CHECK(hi < 1.0);
    CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(std::fabs(sn / n) < 5.0 / std::sqrt(n));
    CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("initial configuration places electrons by nucleus charge") {
    CounterRng r(0, 0);
    const auto c = initial_configuration(testing::lih(), r);
    CHECK(c.size() == 4);
    CHECK(c.all_finite());
    CHECK(c.spin(0) == 1);
    CHECK(c.spin(3) == -1);
}

TEST_CASE("step adaptation") {
    WalkerEnsemble e;
    e.step_size = 1.0;
    e.window_proposed = 100;
    e.window_accepted = 80;
    CHECK(adapt_step(e) == doctest::Approx(1.1));
    CHECK(e.window_proposed == 0);
    e.window_proposed = 100;
    e.window_accepted = 10;
    CHECK(adapt_step(e) == doctest::Approx(1.0));
    e.window_proposed = 100;
    e.window_accepted = 50;
    CHECK(adapt_step(e) == doctest::Approx(1.0));
    e.adapt = false;
    e.window_proposed = 100;
    e.window_accepted = 100;
    CHECK(adapt_step(e) == doctest::Approx(1.0));
}

TEST_CASE("burn-in brings acceptance into the target band") {
    const Hydrogen1sOracle psi(testing::hydrogen());
    WalkerEnsemble e = init_walkers(psi.system(), 256, 4, 0.05);
    refresh(psi, {}, e);
    burn_in(psi, {}, e, 100);
    e.adapt = false;
    std::uint64_t prop = 0, acc = 0;
    for (int i = 0; i < 50; ++i) {
        const auto s = mh_step(psi, {}, e);
        prop += s.proposed;
        acc += s.accepted;
    }
    const double rate = static_cast<double>(acc) / prop;
    CHECK(rate > 0.4);
    CHECK(rate < 0.6);
}

TEST_CASE("sampler output does not depend on the thread count") {
    const SortletAnsatz psi(testing::lithium(), ModelOptions{ModelKind::Sortlet, PotentialKind::Coulomb, 2, 8, 1, 2.0});
    const ParamStore theta = psi.initial_params(0);
    auto run = [&](int threads, bool single) {
        omp_set_num_threads(threads);
        WalkerEnsemble e = init_walkers(psi.system(), 16, 7, 0.3);
        refresh(psi, theta.values(), e);
        burn_in(psi, theta.values(), e, 10, single);
        return e;
    };
    const int saved = omp_get_max_threads();
    for (bool single : {false, true}) {
        const auto a = run(1, single);
        const auto b = run(3, single);
        CHECK(a.step_size == b.step_size);
        for (std::size_t w = 0; w < a.size(); ++w) {
            CHECK(a.walkers[w].config == b.walkers[w].config);
            CHECK(a.walkers[w].rng == b.walkers[w].rng);
        }
    }
    omp_set_num_threads(saved);
}
