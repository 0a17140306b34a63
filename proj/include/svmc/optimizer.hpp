#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "svmc/config.hpp"
#include "svmc/params.hpp"
#include "svmc/sampler.hpp"
#include "svmc/wavefunction.hpp"

namespace svmc {

struct EnergyStats {
    double mean = 0.0;
    double variance = 0.0;
    double stderr_ = 0.0;  // sqrt(variance / n)
    std::size_t n_samples = 0;

    /// Reported confidence radius: three standard errors.
    double radius() const noexcept { return 3.0 * stderr_; }
};

/// Sample mean, unbiased variance and standard error.
EnergyStats summarize(std::span<const double> samples);

/// Value with the uncertainty as one significant digit in parentheses on the
/// last printed place: (-7.4772, 0.0083) -> "-7.477(8)".
std::string format_uncertainty(double value, double radius);

struct EnergyEstimate {
    EnergyStats pooled;               // over every local-energy sample
    std::vector<double> batch_means;  // one walker average per measurement
    EnergyStats over_batches;         // statistics of batch_means
};

/// Measures E_loc on every walker n_measurements times, with `thin` MH sweeps
/// before each measurement. Throws std::runtime_error when more than 10% of
/// the evaluations of one measurement fail.
EnergyEstimate estimate_energy(const Wavefunction& psi, PotentialKind kind, std::span<const double> theta,
                               WalkerEnsemble& ensemble, int n_measurements, int thin, bool single_electron = false);

/// Replaces values outside mean +- scale * (mean absolute deviation) by the
/// nearest bound. scale <= 0 leaves the values untouched.
std::vector<double> clip_local_energies(std::span<const double> e_loc, double scale);

/// g = (2/n) sum_i (E_i - mean(E)) d log|Psi|(x_i) / d theta, with E the
/// clipped local energies. grad_log is n rows of n_params.
std::vector<double> energy_gradient(std::span<const double> e_loc, std::span<const double> grad_log,
                                    std::size_t n_params, double clip_scale = 5.0);

/// Weighted form for samples that are not drawn from |Psi|^2:
/// g = 2 sum_i w_i (E_i - Ebar) d log|Psi|(x_i), Ebar = sum_i w_i E_i, with
/// the weights normalised to sum to one. No clipping.
std::vector<double> energy_gradient_weighted(std::span<const double> weights, std::span<const double> e_loc,
                                             std::span<const double> grad_log, std::size_t n_params);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::vector<double> m;
    std::vector<double> v;

    bool operator==(const AdamState&) const = default;
};

/// One bias-corrected Adam update of theta in place.
void adam_update(AdamState& state, std::span<double> theta, std::span<const double> grad, double lr);

/// lr / (1 + t / decay); decay <= 0 keeps lr fixed.
double scheduled_learning_rate(const TrainOptions& options, std::int64_t iteration);

struct IterationMetrics {
    std::int64_t iteration = 0;
    double energy = 0.0;
    double stderr_ = 0.0;
    double variance = 0.0;
    double acceptance = 0.0;
    double step_size = 0.0;
    double grad_norm = 0.0;
    double learning_rate = 0.0;
    std::size_t failures = 0;
};

/// Everything needed to continue a run bit for bit.
struct TrainState {
    ParamStore params;
    AdamState adam;
    WalkerEnsemble ensemble;
    std::int64_t iteration = 0;  // completed iterations
    std::uint64_t config_hash = 0;
};

/// Fresh parameters and walkers from the config seed, followed by burn-in.
TrainState init_training(const RunConfig& config, const Wavefunction& psi);

/// Sweeps, gradient, Adam update. Throws std::runtime_error on non-finite
/// parameters or when more than 10% of the batch fails; parameters, Adam
/// moments and the iteration count are then left unchanged.
IterationMetrics train_step(const RunConfig& config, const Wavefunction& psi, TrainState& state);

using IterationCallback = std::function<void(const IterationMetrics&, const TrainState&)>;

/// Runs until state.iteration reaches config.train.iterations.
void train(const RunConfig& config, const Wavefunction& psi, TrainState& state, const IterationCallback& on_iteration);

/// Text checkpoint: config hash, iteration, parameters, Adam moments and
/// every walker with its random stream.
void write_checkpoint(std::ostream& out, const TrainState& state);
TrainState read_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const TrainState& state);
TrainState load_checkpoint(const std::string& path);

/// Running means over consecutive windows; used to judge smoothed descent.
std::vector<double> window_means(std::span<const double> values, std::size_t window);

}  // namespace svmc
