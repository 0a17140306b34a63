#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "support.hpp"
#include "svmc/optimizer.hpp"

using namespace svmc;

TEST_CASE("summary statistics") {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    const EnergyStats s = summarize(x);
    CHECK(s.mean == 2.5);
    CHECK(s.variance == doctest::Approx(5.0 / 3.0));
    CHECK(s.stderr_ == doctest::Approx(std::sqrt(5.0 / 12.0)));
    CHECK(s.radius() == doctest::Approx(3.0 * s.stderr_));
    CHECK(s.n_samples == 4);
}

TEST_CASE("parenthesis uncertainty notation") {
    CHECK(format_uncertainty(-7.4772, 0.0083) == "-7.477(8)");
    CHECK(format_uncertainty(-8.07049, 0.00032) == "-8.0705(3)");
    CHECK(format_uncertainty(-0.49995, 0.000096) == "-0.5000(1)");
    CHECK(format_uncertainty(-0.5, 0.0) == "-0.500000(0)");
    CHECK(format_uncertainty(-0.5, 1e-17) == "-0.500000(0)");
    CHECK(format_uncertainty(12.3, 4.2) == "12(4)");
}

TEST_CASE("clipping uses the mean absolute deviation") {
    std::vector<double> e(99, 1.0);
    e.push_back(1000.0);
    const auto c = clip_local_energies(e, 5.0);
    const double mean = std::accumulate(e.begin(), e.end(), 0.0) / e.size();
    double mad = 0.0;
    for (double v : e) mad += std::fabs(v - mean);
    mad /= e.size();
    CHECK(c.back() == doctest::Approx(mean + 5.0 * mad));
    CHECK(c.front() == 1.0);
    CHECK(clip_local_energies(e, 0.0) == e);
}

TEST_CASE("energy gradient is the centred covariance") {
    // Two parameters, four samples, no clipping needed.
    const std::vector<double> e{1.0, 2.0, 3.0, 6.0};
    const std::vector<double> g{1.0, 0.0, 0.0, 1.0, 2.0, 0.5, -1.0, 1.0};
    const auto grad = energy_gradient(e, g, 2, 0.0);
    const double mean = 3.0;
    double g0 = 0, g1 = 0;
    for (int i = 0; i < 4; ++i) {
        g0 += (e[i] - mean) * g[2 * i];
        g1 += (e[i] - mean) * g[2 * i + 1];
    }
    CHECK(grad[0] == doctest::Approx(2.0 * g0 / 4.0));
    CHECK(grad[1] == doctest::Approx(2.0 * g1 / 4.0));

    SUBCASE("uniform weights reproduce the unweighted form") {
        const std::vector<double> w(4, 7.0);
        const auto gw = energy_gradient_weighted(w, e, g, 2);
        CHECK(gw[0] == doctest::Approx(grad[0]));
        CHECK(gw[1] == doctest::Approx(grad[1]));
    }
    SUBCASE("constant energy gives zero gradient") {
        const std::vector<double> flat(4, -0.5);
        const auto z = energy_gradient(flat, g, 2);
        CHECK(z[0] == 0.0);
        CHECK(z[1] == 0.0);
    }
}

TEST_CASE("adam step by hand") {
    AdamState s;
    s.m.assign(1, 0.0);
    s.v.assign(1, 0.0);
    std::vector<double> theta{1.0};
    const std::vector<double> g{0.5};
    adam_update(s, theta, g, 0.1);
    // After one step the bias-corrected ratio is g / |g|.
    CHECK(theta[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8)));
    CHECK(s.t == 1);
    adam_update(s, theta, g, 0.1);
    const double m = 0.9 * 0.05 + 0.1 * 0.5, v = 0.999 * 0.00025 + 0.001 * 0.25;
    const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
    CHECK(theta[0] == doctest::Approx(1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mh / (std::sqrt(vh) + 1e-8)));
}

TEST_CASE("learning rate schedule") {
    TrainOptions o;
    o.learning_rate = 0.01;
    o.lr_decay = 100.0;
    CHECK(scheduled_learning_rate(o, 0) == 0.01);
    CHECK(scheduled_learning_rate(o, 100) == doctest::Approx(0.005));
}

TEST_CASE("window means") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7};
    CHECK(window_means(v, 3) == std::vector<double>{2.0, 5.0});
}

namespace {

RunConfig toy_config() {
    RunConfig c;
    c.system = testing::hydrogen();
    c.model.kind = ModelKind::Toy1d;
    c.model.potential = PotentialKind::Toy1d;
    c.train.walkers = 64;
    c.train.iterations = 6;
    c.train.burn_in = 20;
    c.train.sweeps_per_iteration = 2;
    c.train.learning_rate = 0.02;
    c.seed = 3;
    return c;
}

}  // namespace

TEST_CASE("checkpoint round trip and bitwise resume") {
    const RunConfig config = toy_config();
    const auto psi = make_wavefunction(config.system, config.model);
    TrainState straight = init_training(config, *psi);
    train(config, *psi, straight, nullptr);
    CHECK(straight.iteration == 6);

    RunConfig half = config;
    half.train.iterations = 3;
    TrainState first = init_training(half, *psi);
    train(half, *psi, first, nullptr);
    std::stringstream buf;
    write_checkpoint(buf, first);
    TrainState resumed = read_checkpoint(buf);
    CHECK(resumed.params == first.params);
    CHECK(resumed.adam == first.adam);
    CHECK(resumed.config_hash == config_hash(config));
    train(config, *psi, resumed, nullptr);

    CHECK(resumed.params == straight.params);
    CHECK(resumed.adam == straight.adam);
    CHECK(resumed.ensemble.step_size == straight.ensemble.step_size);
    for (std::size_t w = 0; w < straight.ensemble.size(); ++w) {
        CHECK(resumed.ensemble.walkers[w].config == straight.ensemble.walkers[w].config);
        CHECK(resumed.ensemble.walkers[w].rng == straight.ensemble.walkers[w].rng);
    }
}

TEST_CASE("malformed checkpoints are rejected") {
    std::stringstream bad("svmc-checkpoint 1\nconfig_hash zz\n");
    CHECK_THROWS(read_checkpoint(bad));
    std::stringstream wrong("not a checkpoint\n");
    CHECK_THROWS(read_checkpoint(wrong));
}

TEST_CASE("training lowers the toy energy") {
    RunConfig config = toy_config();
    config.train.iterations = 150;
    config.train.walkers = 256;
    const auto psi = make_wavefunction(config.system, config.model);
    TrainState s = init_training(config, *psi);
    std::vector<double> e;
    train(config, *psi, s, [&](const IterationMetrics& m, const TrainState&) { e.push_back(m.energy); });
    const auto w = window_means(e, 50);
    REQUIRE(w.size() == 3);
    CHECK(w[2] < w[0]);
}
