#include "svmc/sampler.hpp"

#include <cmath>
#include <limits>

namespace svmc {

ElectronConfiguration initial_configuration(const SystemSpec& system, CounterRng& rng) {
    std::vector<std::size_t> slots;
    for (std::size_t I = 0; I < system.nuclei.size(); ++I)
        for (int z = 0; z < system.nuclei[I].charge; ++z) slots.push_back(I);
    ElectronConfiguration c = ElectronConfiguration::zeros(system);
    for (int e = 0; e < system.n_electrons(); ++e) {
        const int rank = e < system.n_up ? 2 * e : 2 * (e - system.n_up) + 1;
        const Vec3& centre = system.nuclei[slots[static_cast<std::size_t>(rank) % slots.size()]].position;
        Vec3 r;
        for (int d = 0; d < 3; ++d) r[d] = centre[d] + rng.normal();
        c.set_position(static_cast<std::size_t>(e), r);
    }
    return c;
}

WalkerEnsemble init_walkers(const SystemSpec& system, std::size_t count, std::uint64_t seed, double step_size) {
    system.validate();
    WalkerEnsemble ens;
    ens.step_size = step_size;
    ens.walkers.reserve(count);
    for (std::size_t w = 0; w < count; ++w) {
        Walker walker;
        walker.rng = CounterRng(seed, w);
        walker.config = initial_configuration(system, walker.rng);
        walker.psi = SignedLog<double>::zero();
        ens.walkers.push_back(std::move(walker));
    }
    return ens;
}

void refresh(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble) {
    const auto m = static_cast<std::ptrdiff_t>(ensemble.walkers.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t w = 0; w < m; ++w) {
        auto& walker = ensemble.walkers[w];
        walker.psi = psi.log_psi(theta, walker.config);
        if (!std::isfinite(walker.psi.logmag)) walker.psi = SignedLog<double>::zero();
    }
}

namespace {

// Returns true when the proposal was accepted.
bool try_move(const Wavefunction& psi, std::span<const double> theta, Walker& walker, ElectronConfiguration& trial,
              bool& failed) {
    const SignedLog<double> next = psi.log_psi(theta, trial);
    // The uniform is drawn for every proposal so streams stay aligned.
    const double log_u = std::log(walker.rng.uniform());
    failed = !std::isfinite(next.logmag) && next.sign != 0;
    if (failed || next.sign == 0 || !trial.all_finite()) return false;
    const double log_ratio =
        walker.psi.sign == 0 ? std::numeric_limits<double>::infinity() : 2.0 * (next.logmag - walker.psi.logmag);
    if (!(log_u < log_ratio)) return false;
    walker.config = trial;
    walker.psi = next;
    return true;
}

}  // namespace

StepStats mh_step(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble,
                  bool single_electron) {
    const auto m = static_cast<std::ptrdiff_t>(ensemble.walkers.size());
    const double step = ensemble.step_size;
    std::uint64_t proposed = 0, accepted = 0, failures = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : proposed, accepted, failures)
    for (std::ptrdiff_t w = 0; w < m; ++w) {
        Walker& walker = ensemble.walkers[w];
        ElectronConfiguration trial = walker.config;
        const std::size_t n = walker.config.size();
        bool failed = false;
        if (single_electron) {
            for (std::size_t e = 0; e < n; ++e) {
                trial = walker.config;
                for (int d = 0; d < 3; ++d) trial.coords()[3 * e + d] += step * walker.rng.normal();
                accepted += try_move(psi, theta, walker, trial, failed) ? 1 : 0;
                failures += failed ? 1 : 0;
                ++proposed;
            }
        } else {
            for (double& x : trial.coords()) x += step * walker.rng.normal();
            accepted += try_move(psi, theta, walker, trial, failed) ? 1 : 0;
            failures += failed ? 1 : 0;
            ++proposed;
        }
    }
    ensemble.window_proposed += proposed;
    ensemble.window_accepted += accepted;
    ensemble.total_proposed += proposed;
    ensemble.total_accepted += accepted;
    ensemble.total_failures += failures;
    return {proposed, accepted, failures};
}

double adapt_step(WalkerEnsemble& ensemble) {
    if (ensemble.adapt && ensemble.window_proposed > 0) {
        const double rate = ensemble.window_acceptance();
        if (rate > 0.55)
            ensemble.step_size *= 1.1;
        else if (rate < 0.45)
            ensemble.step_size /= 1.1;
    }
    ensemble.window_proposed = 0;
    ensemble.window_accepted = 0;
    return ensemble.step_size;
}

void burn_in(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble, int steps,
             bool single_electron) {
    for (int s = 0; s < steps; ++s) {
        mh_step(psi, theta, ensemble, single_electron);
        adapt_step(ensemble);
    }
}

}  // namespace svmc
