#pragma once

// Executable checks of the ansatz's structural properties. Every probe is
// deterministic given its seed and produces a line-delimited JSON report.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "svmc/config.hpp"
#include "svmc/params.hpp"
#include "svmc/wavefunction.hpp"

namespace svmc {

struct ProbeReport {
    ProbeReport() = default;
    ProbeReport(std::string name, std::uint64_t seed_) : probe(std::move(name)), seed(seed_) {}

    std::string probe;
    std::uint64_t seed = 0;
    bool pass = true;
    std::vector<nlohmann::json> records;  // one per trial or witness
    nlohmann::json summary;

    /// One line per record, then a summary line carrying "pass".
    void write(std::ostream& out) const;
};

/// Initial parameters for seed with N(0, scale^2) noise added to every entry.
ParamStore random_params(const Wavefunction& psi, std::uint64_t seed, double scale = 0.1);

/// Electrons around their nuclei with unit Gaussian noise.
ElectronConfiguration random_configuration(const SystemSpec& system, std::uint64_t seed, std::uint64_t stream);

/// Random (theta, configuration, same-spin transposition) triples: asserts the
/// sign flips and |log|Psi(tc)| - log|Psi(c)|| < tol. Opposite-spin swaps are
/// recorded as a control with no assertion.
ProbeReport antisymmetry_suite(const Wavefunction& psi, int trials, std::uint64_t seed, double tol = 1e-12);

struct NodeCrossings {
    int count = 0;
    std::vector<double> locations;  // path parameter of each sign change
};

/// Psi along the same-spin exchange path from c to t_ij c at resolution + 1
/// evenly spaced points; each sign change is bisected to tolerance in t.
/// Throws std::invalid_argument when i == j, the spins differ, resolution <
/// 100, or an endpoint is a node.
NodeCrossings node_crossing_probe(const Wavefunction& psi, std::span<const double> theta,
                                  const ElectronConfiguration& c, int i, int j, int resolution = 200,
                                  double tolerance = 1e-10);

/// Electrons i -> j -> k -> i moved along straight lines; t = 1 is the 3-cycle.
ElectronConfiguration cycle_path(const ElectronConfiguration& c, int i, int j, int k, double t);

/// Random theta, configuration and same-spin pair per path. With
/// expect_crossing the report passes only when every path crosses a node;
/// otherwise counts are recorded without assertion.
ProbeReport node_suite(const Wavefunction& psi, int paths, std::uint64_t seed, bool expect_crossing = true,
                       int resolution = 200);

/// Exploratory: crossings along random three-electron cycle paths. Always
/// passes; the counts are the result.
ProbeReport triple_exchange_suite(const Wavefunction& psi, int paths, std::uint64_t seed, int resolution = 400);

/// C1 behaviour at score ties of a sortlet ansatz.
///   single tie: on a bent exchange path the first sortlet's scores of the
///     swapped pair are bisected to equality; one-sided second-order finite
///     differences of Psi from both sides (h from 1e-3 down to 1e-6) must agree
///     to single_tol relative.
///   double tie: on a path exchanging an up pair and a down pair together
///     (needs two electrons of each spin) the midpoint ties both pairs; the
///     central difference of Psi there, relative to the largest |Psi| on the
///     path, must stay below double_tol.
///   smooth points: jet gradients against central differences of log|Psi|.
ProbeReport smoothness_probe(const SortletAnsatz& psi, int trials, std::uint64_t seed, double single_tol = 1e-5,
                             double double_tol = 1e-8);

/// Rayleigh quotients of a random symmetric dim x dim matrix never go below
/// its smallest eigenvalue, and the matching eigenvector attains it.
ProbeReport variational_floor_check(int dim, int draws, std::uint64_t seed);

/// Exact one-dimensional energy of the toy model by trapezoidal quadrature:
///   E = int (|f'|^2 / 2 + V) e^{2f} dx / int e^{2f} dx + 1
/// where the final 1 is the exact transverse contribution.
double toy1d_rayleigh_quotient(std::span<const double> theta, int points = 20001, double half_width = 10.0);

struct GradientComparison {
    std::vector<double> reference;  // central differences of the quadrature energy
    std::vector<double> estimate;
    double max_relative_error = 0.0;
};

/// Compares estimates of dE/dtheta on the toy model with central differences
/// (step h) of toy1d_rayleigh_quotient:
///   "weighted":  energy_gradient_weighted on the quadrature grid
///   "sampled":   energy_gradient on n deterministic quantile samples of |Psi|^2
///   "inner-2":   the variant whose baseline term carries an extra factor 2
/// Relative error per component uses max(|ref_k|, 1e-2 max_l |ref_l|).
GradientComparison toy1d_gradient_check(const Toy1dModel& psi, std::span<const double> theta,
                                        const std::string& estimator, double h = 1e-4, int samples = 1000000);

/// The three comparisons above; passes when the first two are within tol.
ProbeReport gradcheck(const Toy1dModel& psi, std::span<const double> theta, std::uint64_t seed, double tol = 1e-3);

}  // namespace svmc
