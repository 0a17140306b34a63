#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "svmc/geometry.hpp"
#include "svmc/rng.hpp"
#include "svmc/signed_log.hpp"
#include "svmc/wavefunction.hpp"

namespace svmc {

struct Walker {
    ElectronConfiguration config;
    SignedLog<double> psi;  // cached Psi(theta, config)
    CounterRng rng;
};

/// M independent Metropolis-Hastings chains over |Psi|^2 sharing one
/// proposal width.
struct WalkerEnsemble {
    std::vector<Walker> walkers;
    double step_size = 0.2;  // Bohr
    bool adapt = true;

    // Counters since the last adapt_step.
    std::uint64_t window_proposed = 0;
    std::uint64_t window_accepted = 0;
    // Lifetime counters.
    std::uint64_t total_proposed = 0;
    std::uint64_t total_accepted = 0;
    std::uint64_t total_failures = 0;

    std::size_t size() const noexcept { return walkers.size(); }
    double window_acceptance() const noexcept {
        return window_proposed == 0 ? 0.0 : static_cast<double>(window_accepted) / window_proposed;
    }
};

/// Electron e at its nucleus plus unit Gaussian noise. Nuclei are expanded
/// into Z_I consecutive slots; up electrons take the even slots and down
/// electrons the odd ones, wrapping when there are more electrons than charge.
ElectronConfiguration initial_configuration(const SystemSpec& system, CounterRng& rng);

/// Chain w draws its start from initial_configuration with stream (seed, w).
/// The cached Psi values are unset until refresh().
WalkerEnsemble init_walkers(const SystemSpec& system, std::size_t count, std::uint64_t seed, double step_size);

/// Recomputes every cached Psi for theta.
void refresh(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble);

struct StepStats {
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
    std::uint64_t failures = 0;

    double acceptance() const noexcept { return proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed; }
};

/// One sweep on every chain. All-electron Gaussian proposals by default, or
/// one proposal per electron in turn. Proposals with Psi' = 0 or a
/// non-finite evaluation are rejected.
StepStats mh_step(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble,
                  bool single_electron = false);

/// Multiplies the step by 1.1 above 55% windowed acceptance, divides by 1.1
/// below 45%, then opens a new window. No-op while adapt is false.
double adapt_step(WalkerEnsemble& ensemble);

/// mh_step then adapt_step, repeated.
void burn_in(const Wavefunction& psi, std::span<const double> theta, WalkerEnsemble& ensemble, int steps,
             bool single_electron = false);

}  // namespace svmc
