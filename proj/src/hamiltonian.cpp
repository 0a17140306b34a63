#include "svmc/hamiltonian.hpp"

#include <cmath>

namespace svmc {

namespace {
double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}
}  // namespace

double nuclear_repulsion(const SystemSpec& system) {
    double nn = 0.0;
    const auto& nuc = system.nuclei;
    for (std::size_t a = 0; a < nuc.size(); ++a)
        for (std::size_t b = 0; b < a; ++b)
            nn += static_cast<double>(nuc[a].charge * nuc[b].charge) / distance(nuc[a].position, nuc[b].position);
    return nn;
}

PotentialTerms coulomb_potential(const SystemSpec& system, const ElectronConfiguration& c) {
    PotentialTerms v;
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 ri = c.position(i);
        for (std::size_t j = 0; j < i; ++j) v.ee += 1.0 / distance(ri, c.position(j));
        for (const auto& nuc : system.nuclei) v.en -= static_cast<double>(nuc.charge) / distance(ri, nuc.position);
    }
    v.nn = nuclear_repulsion(system);
    return v;
}

PotentialTerms potential(PotentialKind kind, const SystemSpec& system, const ElectronConfiguration& c) {
    if (kind == PotentialKind::Coulomb) return coulomb_potential(system, c);
    PotentialTerms v;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const Vec3 r = c.position(i);
        const double transverse = 0.5 * (r[1] * r[1] + r[2] * r[2]);
        if (kind == PotentialKind::Harmonic) {
            v.en += 0.5 * r[0] * r[0] + transverse;
        } else {
            const double x2 = r[0] * r[0];
            v.en += 0.5 * x2 + 0.1 * x2 * x2 + transverse;
        }
    }
    return v;
}

std::optional<LocalEnergyBreakdown> local_energy(const LocalDerivatives& d, PotentialKind kind,
                                                 const SystemSpec& system, const ElectronConfiguration& c) {
    if (d.value.sign == 0) return std::nullopt;
    double grad_sq = 0.0;
    for (double g : d.grad_log) grad_sq += g * g;
    LocalEnergyBreakdown e;
    e.kinetic = -0.5 * (d.laplacian_log + grad_sq);
    const PotentialTerms v = potential(kind, system, c);
    e.potential_ee = v.ee;
    e.potential_en = v.en;
    e.potential_nn = v.nn;
    e.total = e.kinetic + e.potential_ee + e.potential_en + e.potential_nn;
    if (!std::isfinite(e.total)) return std::nullopt;
    return e;
}

std::optional<LocalEnergyBreakdown> local_energy(const Wavefunction& psi, PotentialKind kind,
                                                 std::span<const double> theta, const ElectronConfiguration& c) {
    return local_energy(psi.position_derivatives(theta, c), kind, psi.system(), c);
}

}  // namespace svmc
