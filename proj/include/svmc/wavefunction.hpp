#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "svmc/autodiff.hpp"
#include "svmc/backbone.hpp"
#include "svmc/config.hpp"
#include "svmc/geometry.hpp"
#include "svmc/params.hpp"
#include "svmc/signed_log.hpp"
#include "svmc/sortlet.hpp"

namespace svmc {

/// Psi and the derivatives of log|Psi| with respect to electron coordinates.
struct LocalDerivatives {
    SignedLog<double> value;
    std::vector<double> grad_log;  // d log|Psi| / d x, 3N entries
    double laplacian_log = 0.0;    // sum_d d2 log|Psi| / d x_d2
};

/// A parametric wavefunction over the configurations of one system.
class Wavefunction {
  public:
    explicit Wavefunction(SystemSpec system) : system_(std::move(system)) {}
    virtual ~Wavefunction() = default;

    const SystemSpec& system() const noexcept { return system_; }
    const ParamLayout& layout() const noexcept { return layout_; }
    std::size_t n_params() const noexcept { return layout_.total(); }

    virtual std::string name() const = 0;
    virtual ParamStore initial_params(std::uint64_t seed) const;

    virtual SignedLog<double> log_psi(std::span<const double> theta, const ElectronConfiguration& c) const = 0;
    /// value.sign == 0 signals a node; the derivative fields are then unset.
    virtual LocalDerivatives position_derivatives(std::span<const double> theta,
                                                  const ElectronConfiguration& c) const = 0;
    /// Writes d log|Psi| / d theta into grad (n_params entries) and returns Psi.
    virtual SignedLog<double> param_gradient(std::span<const double> theta, const ElectronConfiguration& c,
                                             std::span<double> grad) const = 0;

  protected:
    SystemSpec system_;
    ParamLayout layout_;
};

/// Implements the three evaluation entry points from one templated
///   template <class W, class S>
///   SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
///                         std::span<const std::int8_t> spins) const;
/// instantiated with (double, double), (double, PositionJet) and (Var, Var).
template <class Derived>
class AutodiffWavefunction : public Wavefunction {
  public:
    using Wavefunction::Wavefunction;

    SignedLog<double> log_psi(std::span<const double> theta, const ElectronConfiguration& c) const override;
    LocalDerivatives position_derivatives(std::span<const double> theta, const ElectronConfiguration& c) const override;
    SignedLog<double> param_gradient(std::span<const double> theta, const ElectronConfiguration& c,
                                     std::span<double> grad) const override;

  private:
    const Derived& self() const { return static_cast<const Derived&>(*this); }
};

/// exp(J) * sum_k w_k * sortlet(alpha^k) * exp(-gamma_k * sum_j min_I |r_j - R_I|)
class SortletAnsatz final : public AutodiffWavefunction<SortletAnsatz> {
  public:
    SortletAnsatz(SystemSpec system, const ModelOptions& options);

    std::string name() const override { return "sortlet"; }
    ParamStore initial_params(std::uint64_t seed) const override;

    int sortlets() const noexcept { return backbone_.outputs(); }
    const Backbone& backbone() const noexcept { return backbone_; }

    /// K x N score matrix (row-major) at a configuration.
    std::vector<double> scores(std::span<const double> theta, const ElectronConfiguration& c) const;

    template <class W, class S>
    SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
                          std::span<const std::int8_t> spins) const;

  private:
    Backbone backbone_;
    double envelope_init_;
    std::size_t beta_ = 0, gamma_ = 0, mix_ = 0;
};

/// Pairwise-product comparator: same backbone, prod_{i<j}(phi_i - phi_j)
/// within each spin block in place of the sortlet.
class VandermondeAnsatz final : public AutodiffWavefunction<VandermondeAnsatz> {
  public:
    VandermondeAnsatz(SystemSpec system, const ModelOptions& options);

    std::string name() const override { return "vandermonde"; }
    ParamStore initial_params(std::uint64_t seed) const override;

    template <class W, class S>
    SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
                          std::span<const std::int8_t> spins) const;

  private:
    Backbone backbone_;
    double envelope_init_;
    std::size_t beta_ = 0, gamma_ = 0, mix_ = 0;
};

/// psi = exp(-Z |r - R|) for a one-electron, one-nucleus system; exact
/// eigenfunction with E = -Z^2 / 2.
class Hydrogen1sOracle final : public AutodiffWavefunction<Hydrogen1sOracle> {
  public:
    explicit Hydrogen1sOracle(SystemSpec system);
    std::string name() const override { return "hydrogen_1s"; }

    template <class W, class S>
    SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
                          std::span<const std::int8_t> spins) const;
};

/// psi = exp(-sum_i |r_i|^2 / 2); with the harmonic potential each electron
/// contributes exactly 3/2.
class HarmonicOracle final : public AutodiffWavefunction<HarmonicOracle> {
  public:
    explicit HarmonicOracle(SystemSpec system);
    std::string name() const override { return "harmonic"; }

    template <class W, class S>
    SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
                          std::span<const std::int8_t> spins) const;
};

/// One electron whose x dependence is a small parametric family and whose
/// transverse part is the exact harmonic ground state:
///   log psi = -sp(t0) x^2 - 0.1 sp(t1) x^4 + t2 tanh(t3 x + t4) + t5 x - (y^2 + z^2) / 2
/// with sp = softplus. Paired with PotentialKind::Toy1d.
class Toy1dModel final : public AutodiffWavefunction<Toy1dModel> {
  public:
    static constexpr std::size_t kParams = 6;

    explicit Toy1dModel(SystemSpec system);
    std::string name() const override { return "toy1d"; }
    ParamStore initial_params(std::uint64_t seed) const override;

    /// log psi along x only (the factor the quadrature oracles integrate).
    static double log_psi_x(std::span<const double> theta, double x);

    template <class W, class S>
    SignedLog<S> evaluate(std::span<const W> theta, std::span<const S> coords,
                          std::span<const std::int8_t> spins) const;
};

extern template class AutodiffWavefunction<SortletAnsatz>;
extern template class AutodiffWavefunction<VandermondeAnsatz>;
extern template class AutodiffWavefunction<Hydrogen1sOracle>;
extern template class AutodiffWavefunction<HarmonicOracle>;
extern template class AutodiffWavefunction<Toy1dModel>;

std::unique_ptr<Wavefunction> make_wavefunction(const SystemSpec& system, const ModelOptions& options);

}  // namespace svmc
