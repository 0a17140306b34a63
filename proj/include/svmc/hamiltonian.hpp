#pragma once

#include <optional>
#include <span>

#include "svmc/config.hpp"
#include "svmc/geometry.hpp"
#include "svmc/wavefunction.hpp"

namespace svmc {

struct PotentialTerms {
    double ee = 0.0;
    double en = 0.0;
    double nn = 0.0;

    double total() const noexcept { return ee + en + nn; }
};

/// Local energy split by term; total == kinetic + ee + en + nn exactly.
struct LocalEnergyBreakdown {
    double kinetic = 0.0;
    double potential_ee = 0.0;
    double potential_en = 0.0;
    double potential_nn = 0.0;
    double total = 0.0;
};

/// Born-Oppenheimer Coulomb potential. Coincident particles give an infinite
/// term, which callers treat as an evaluation failure.
PotentialTerms coulomb_potential(const SystemSpec& system, const ElectronConfiguration& c);

/// Nuclear repulsion only; constant for a system.
double nuclear_repulsion(const SystemSpec& system);

/// Potential for the selected kind. The harmonic and toy overrides report
/// their whole value in the en slot.
///   Harmonic: sum_i |r_i|^2 / 2
///   Toy1d:    x^2 / 2 + 0.1 x^4 + (y^2 + z^2) / 2 per electron
PotentialTerms potential(PotentialKind kind, const SystemSpec& system, const ElectronConfiguration& c);

/// -1/2 (lap log|Psi| + |grad log|Psi||^2) + V. Empty at a node or when any
/// term is non-finite.
std::optional<LocalEnergyBreakdown> local_energy(const Wavefunction& psi, PotentialKind kind,
                                                 std::span<const double> theta, const ElectronConfiguration& c);

/// Same, from already computed position derivatives.
std::optional<LocalEnergyBreakdown> local_energy(const LocalDerivatives& d, PotentialKind kind,
                                                 const SystemSpec& system, const ElectronConfiguration& c);

}  // namespace svmc
