#include "svmc/wavefunction.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace svmc {

namespace {

// softplus^{-1}(y) for y > 0
double inverse_softplus(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }

template <class S>
void primal_coords(std::span<const S> coords, std::vector<double>& out) {
    out.resize(coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k) out[k] = ad::value_of(coords[k]);
}

// Per-thread scratch for one scalar type.
template <class S>
struct EvalScratch {
    BackboneWorkspace<S> backbone;
    SortWorkspace sort;
    std::vector<S> alpha;
    std::vector<S> row;
    std::vector<SignedLog<S>> terms;
    std::vector<double> primal;
    std::vector<int> order;
};

template <class S>
EvalScratch<S>& scratch() {
    thread_local EvalScratch<S> s;
    return s;
}

// sum_j min_I |r_j - R_I|, electrons visited in the given order.
template <class S>
S nearest_nucleus_distance(const std::vector<Nucleus>& nuclei, std::span<const S> coords,
                           std::span<const int> order) {
    S total(0.0);
    for (int j : order) {
        S best(0.0);
        double best_v = std::numeric_limits<double>::infinity();
        for (const auto& nuc : nuclei) {
            S sq(0.0);
            for (int d = 0; d < 3; ++d) {
                const S diff = coords[3 * j + d] - nuc.position[d];
                sq = sq + diff * diff;
            }
            const S r = ad::soft_norm(sq, kSoftNormEps);
            if (ad::value_of(r) < best_v) {
                best_v = ad::value_of(r);
                best = r;
            }
        }
        total = total + best;
    }
    return total;
}

// exp(J) * sum_k w_k * inner_k * exp(-gamma_k * D) in the signed-log domain.
template <class W, class S>
SignedLog<S> assemble(const W* p, std::size_t beta, std::size_t gamma, std::size_t mix,
                      std::span<const SignedLog<S>> inner, std::span<const S> coords,
                      std::span<const std::int8_t> spins, std::span<const int> order,
                      const std::vector<Nucleus>& nuclei, std::vector<SignedLog<S>>& terms) {
    const S dist = nearest_nucleus_distance(nuclei, coords, order);
    terms.clear();
    for (std::size_t k = 0; k < inner.size(); ++k) {
        const W& w = p[mix + k];
        const double wv = ad::value_of(w);
        if (inner[k].sign == 0 || wv == 0.0) {
            terms.push_back(SignedLog<S>::zero());
            continue;
        }
        const S log_w = S(ad::log(ad::abs(w)));
        const S rate = S(ad::softplus(p[gamma + k]));
        terms.push_back({(wv > 0.0 ? 1 : -1) * inner[k].sign, log_w + inner[k].logmag - rate * dist});
    }
    SignedLog<S> sum = signed_log_sum(std::span<const SignedLog<S>>(terms));
    if (sum.sign == 0) return sum;
    const W b1 = ad::softplus(p[beta]);
    const W b2 = ad::softplus(p[beta + 1]);
    sum.logmag = sum.logmag + jastrow<W, S>(b1, b2, coords, spins, order, kSoftNormEps);
    return sum;
}

void initialize_head(ParamStore& store, std::size_t beta, std::size_t gamma, std::size_t mix, int k,
                     double envelope_init) {
    auto v = store.values();
    v[beta] = v[beta + 1] = inverse_softplus(1.0);
    for (int i = 0; i < k; ++i) {
        v[gamma + i] = inverse_softplus(envelope_init);
        v[mix + i] = 1.0;
    }
}

}  // namespace

ParamStore Wavefunction::initial_params(std::uint64_t) const { return ParamStore(layout_); }

// ---------------------------------------------------------------------------
// Autodiff plumbing
// ---------------------------------------------------------------------------

template <class Derived>
SignedLog<double> AutodiffWavefunction<Derived>::log_psi(std::span<const double> theta,
                                                         const ElectronConfiguration& c) const {
    return self().template evaluate<double, double>(theta, c.coords(), c.spins());
}

template <class Derived>
LocalDerivatives AutodiffWavefunction<Derived>::position_derivatives(std::span<const double> theta,
                                                                     const ElectronConfiguration& c) const {
    int sign = 0;
    auto f = [&](std::span<const ad::PositionJet> x) {
        const auto r = self().template evaluate<double, ad::PositionJet>(theta, x, c.spins());
        sign = r.sign;
        return sign == 0 ? ad::PositionJet(0.0) : r.logmag;
    };
    auto d = ad::differentiate_positions(f, c.coords());
    LocalDerivatives out;
    if (sign == 0) {
        out.value = SignedLog<double>::zero();
        return out;
    }
    out.value = {sign, d.value};
    out.grad_log = std::move(d.gradient);
    out.laplacian_log = d.laplacian;
    return out;
}

template <class Derived>
SignedLog<double> AutodiffWavefunction<Derived>::param_gradient(std::span<const double> theta,
                                                                const ElectronConfiguration& c,
                                                                std::span<double> grad) const {
    thread_local ad::Tape tape;
    thread_local std::vector<ad::Var> x;
    x.assign(c.coords().begin(), c.coords().end());
    int sign = 0;
    auto f = [&](std::span<const ad::Var> th) {
        const auto r = self().template evaluate<ad::Var, ad::Var>(th, x, c.spins());
        sign = r.sign;
        return sign == 0 ? ad::Var(0.0) : r.logmag;
    };
    const double lm = ad::grad_params(f, theta, grad, tape);
    tape.clear();
    if (sign == 0) {
        std::fill(grad.begin(), grad.end(), 0.0);
        return SignedLog<double>::zero();
    }
    return {sign, lm};
}

// ---------------------------------------------------------------------------
// Sortlet ansatz
// ---------------------------------------------------------------------------

SortletAnsatz::SortletAnsatz(SystemSpec system, const ModelOptions& options)
    : AutodiffWavefunction(std::move(system)),
      backbone_(system_, options.hidden, options.layers, options.sortlets, "backbone."),
      envelope_init_(options.envelope_init) {
    system_.validate();
    backbone_.declare(layout_);
    beta_ = layout_.add("jastrow.beta", 2);
    gamma_ = layout_.add("envelope.gamma", static_cast<std::size_t>(options.sortlets));
    mix_ = layout_.add("mix.w", static_cast<std::size_t>(options.sortlets));
}

ParamStore SortletAnsatz::initial_params(std::uint64_t seed) const {
    ParamStore store(layout_);
    std::mt19937_64 rng(seed);
    backbone_.initialize(store.values(), rng);
    initialize_head(store, beta_, gamma_, mix_, backbone_.outputs(), envelope_init_);
    return store;
}

std::vector<double> SortletAnsatz::scores(std::span<const double> theta, const ElectronConfiguration& c) const {
    auto& s = scratch<double>();
    canonical_order(c.coords(), c.spins(), s.order);
    std::vector<double> out;
    backbone_.alpha<double, double>(theta, c.coords(), c.spins(), s.order, s.backbone, out);
    return out;
}

template <class W, class S>
SignedLog<S> SortletAnsatz::evaluate(std::span<const W> theta, std::span<const S> coords,
                                     std::span<const std::int8_t> spins) const {
    auto& s = scratch<S>();
    primal_coords(coords, s.primal);
    canonical_order(s.primal, spins, s.order);
    backbone_.alpha<W, S>(theta, coords, spins, s.order, s.backbone, s.alpha);

    const std::size_t n = spins.size();
    const std::size_t k_out = static_cast<std::size_t>(backbone_.outputs());
    std::vector<SignedLog<S>> inner(k_out);
    for (std::size_t k = 0; k < k_out; ++k)
        inner[k] = sortlet_log<S>(std::span<const S>(s.alpha.data() + k * n, n), s.sort);
    return assemble<W, S>(theta.data(), beta_, gamma_, mix_, inner, coords, spins, s.order, system_.nuclei,
                          s.terms);
}

// ---------------------------------------------------------------------------
// Vandermonde comparator
// ---------------------------------------------------------------------------

VandermondeAnsatz::VandermondeAnsatz(SystemSpec system, const ModelOptions& options)
    : AutodiffWavefunction(std::move(system)),
      backbone_(system_, options.hidden, options.layers, options.sortlets, "backbone."),
      envelope_init_(options.envelope_init) {
    system_.validate();
    backbone_.declare(layout_);
    beta_ = layout_.add("jastrow.beta", 2);
    gamma_ = layout_.add("envelope.gamma", static_cast<std::size_t>(options.sortlets));
    mix_ = layout_.add("mix.w", static_cast<std::size_t>(options.sortlets));
}

ParamStore VandermondeAnsatz::initial_params(std::uint64_t seed) const {
    ParamStore store(layout_);
    std::mt19937_64 rng(seed);
    backbone_.initialize(store.values(), rng);
    initialize_head(store, beta_, gamma_, mix_, backbone_.outputs(), envelope_init_);
    return store;
}

template <class W, class S>
SignedLog<S> VandermondeAnsatz::evaluate(std::span<const W> theta, std::span<const S> coords,
                                         std::span<const std::int8_t> spins) const {
    auto& s = scratch<S>();
    primal_coords(coords, s.primal);
    canonical_order(s.primal, spins, s.order);
    backbone_.alpha<W, S>(theta, coords, spins, s.order, s.backbone, s.alpha);

    const std::size_t n = spins.size();
    const int blocks[2] = {system_.n_up, system_.n_down};
    const std::size_t k_out = static_cast<std::size_t>(backbone_.outputs());
    std::vector<SignedLog<S>> inner(k_out);
    for (std::size_t k = 0; k < k_out; ++k)
        inner[k] = vandermonde_log<S>(std::span<const S>(s.alpha.data() + k * n, n), blocks);
    return assemble<W, S>(theta.data(), beta_, gamma_, mix_, inner, coords, spins, s.order, system_.nuclei,
                          s.terms);
}

// ---------------------------------------------------------------------------
// Analytic oracles
// ---------------------------------------------------------------------------

Hydrogen1sOracle::Hydrogen1sOracle(SystemSpec system) : AutodiffWavefunction(std::move(system)) {
    system_.validate();
    if (system_.nuclei.size() != 1 || system_.n_electrons() != 1)
        throw std::invalid_argument("hydrogen_1s model needs one nucleus and one electron");
}

template <class W, class S>
SignedLog<S> Hydrogen1sOracle::evaluate(std::span<const W>, std::span<const S> coords,
                                        std::span<const std::int8_t>) const {
    const auto& nuc = system_.nuclei.front();
    S sq(0.0);
    for (int d = 0; d < 3; ++d) {
        const S diff = coords[d] - nuc.position[d];
        sq = sq + diff * diff;
    }
    return {1, -static_cast<double>(nuc.charge) * ad::sqrt(sq)};
}

HarmonicOracle::HarmonicOracle(SystemSpec system) : AutodiffWavefunction(std::move(system)) { system_.validate(); }

template <class W, class S>
SignedLog<S> HarmonicOracle::evaluate(std::span<const W>, std::span<const S> coords,
                                      std::span<const std::int8_t>) const {
    S sq(0.0);
    for (const auto& x : coords) sq = sq + x * x;
    return {1, -0.5 * sq};
}

Toy1dModel::Toy1dModel(SystemSpec system) : AutodiffWavefunction(std::move(system)) {
    system_.validate();
    if (system_.n_electrons() != 1) throw std::invalid_argument("toy1d model needs exactly one electron");
    layout_.add("toy.theta", kParams);
}

ParamStore Toy1dModel::initial_params(std::uint64_t) const {
    ParamStore store(layout_);
    auto v = store.values();
    v[0] = inverse_softplus(0.3);
    v[1] = inverse_softplus(0.5);
    v[2] = 0.2;
    v[3] = 1.0;
    v[4] = 0.1;
    v[5] = 0.1;
    return store;
}

namespace {
template <class W, class S>
S toy_profile(std::span<const W> t, const S& x) {
    const S x2 = x * x;
    return -S(ad::softplus(t[0])) * x2 - 0.1 * S(ad::softplus(t[1])) * (x2 * x2) +
           S(t[2]) * ad::tanh(S(t[3]) * x + S(t[4])) + S(t[5]) * x;
}
}  // namespace

double Toy1dModel::log_psi_x(std::span<const double> theta, double x) { return toy_profile<double, double>(theta, x); }

template <class W, class S>
SignedLog<S> Toy1dModel::evaluate(std::span<const W> theta, std::span<const S> coords,
                                  std::span<const std::int8_t>) const {
    const S f = toy_profile<W, S>(theta, coords[0]);
    return {1, f - 0.5 * (coords[1] * coords[1] + coords[2] * coords[2])};
}

template class AutodiffWavefunction<SortletAnsatz>;
template class AutodiffWavefunction<VandermondeAnsatz>;
template class AutodiffWavefunction<Hydrogen1sOracle>;
template class AutodiffWavefunction<HarmonicOracle>;
template class AutodiffWavefunction<Toy1dModel>;

std::unique_ptr<Wavefunction> make_wavefunction(const SystemSpec& system, const ModelOptions& options) {
    switch (options.kind) {
        case ModelKind::Sortlet: return std::make_unique<SortletAnsatz>(system, options);
        case ModelKind::Vandermonde: return std::make_unique<VandermondeAnsatz>(system, options);
        case ModelKind::Hydrogen1s: return std::make_unique<Hydrogen1sOracle>(system);
        case ModelKind::Harmonic: return std::make_unique<HarmonicOracle>(system);
        case ModelKind::Toy1d: return std::make_unique<Toy1dModel>(system);
    }
    throw std::invalid_argument("unknown model kind");
}

}  // namespace svmc
