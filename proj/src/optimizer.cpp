#include "svmc/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "svmc/hamiltonian.hpp"

namespace svmc {

EnergyStats summarize(std::span<const double> samples) {
    EnergyStats s;
    s.n_samples = samples.size();
    if (samples.empty()) return s;
    double sum = 0.0;
    for (double x : samples) sum += x;
    s.mean = sum / static_cast<double>(samples.size());
    if (samples.size() > 1) {
        double sq = 0.0;
        for (double x : samples) sq += (x - s.mean) * (x - s.mean);
        s.variance = sq / static_cast<double>(samples.size() - 1);
    }
    s.stderr_ = std::sqrt(s.variance / static_cast<double>(samples.size()));
    return s;
}

std::string format_uncertainty(double value, double radius) {
    char buf[64];
    // Radii below 1e-9 are rounding noise on an exact value.
    if (!(radius >= 1e-9) || !std::isfinite(radius)) {
        std::snprintf(buf, sizeof buf, "%.6f(0)", value);
        return buf;
    }
    int decimals = static_cast<int>(-std::floor(std::log10(radius)));
    long digit = std::lround(radius * std::pow(10.0, decimals));
    if (digit >= 10) {
        --decimals;
        digit = std::lround(radius * std::pow(10.0, decimals));
    }
    if (decimals < 0) {
        // Uncertainty above one unit: print it in full.
        std::snprintf(buf, sizeof buf, "%.0f(%.0f)", value, radius);
        return buf;
    }
    std::snprintf(buf, sizeof buf, "%.*f(%ld)", decimals, value, digit);
    return buf;
}

namespace {

struct Measurement {
    std::vector<double> e_loc;
    std::vector<unsigned char> ok;
    std::size_t failures = 0;
};

Measurement measure(const Wavefunction& psi, PotentialKind kind, std::span<const double> theta,
                    const WalkerEnsemble& ensemble, std::vector<double>* grad_rows) {
    const auto m = static_cast<std::ptrdiff_t>(ensemble.size());
    const std::size_t p = psi.n_params();
    Measurement out;
    out.e_loc.assign(ensemble.size(), 0.0);
    out.ok.assign(ensemble.size(), 0);
    if (grad_rows != nullptr) grad_rows->assign(ensemble.size() * p, 0.0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t w = 0; w < m; ++w) {
        const auto& config = ensemble.walkers[w].config;
        const auto e = local_energy(psi, kind, theta, config);
        if (!e) continue;
        if (grad_rows != nullptr) {
            std::span<double> row(grad_rows->data() + static_cast<std::size_t>(w) * p, p);
            const auto v = psi.param_gradient(theta, config, row);
            bool finite = v.sign != 0;
            for (double g : row) finite = finite && std::isfinite(g);
            if (!finite) {
                std::fill(row.begin(), row.end(), 0.0);
                continue;
            }
        }
        out.e_loc[w] = e->total;
        out.ok[w] = 1;
    }
    out.failures = static_cast<std::size_t>(std::count(out.ok.begin(), out.ok.end(), 0));
    return out;
}

void check_failures(std::size_t failures, std::size_t total) {
    if (10 * failures > total) {
        throw std::runtime_error("local energy failed on " + std::to_string(failures) + " of " +
                                 std::to_string(total) + " walkers");
    }
}

}  // namespace

EnergyEstimate estimate_energy(const Wavefunction& psi, PotentialKind kind, std::span<const double> theta,
                               WalkerEnsemble& ensemble, int n_measurements, int thin, bool single_electron) {
    EnergyEstimate est;
    std::vector<double> pooled;
    pooled.reserve(static_cast<std::size_t>(std::max(n_measurements, 0)) * ensemble.size());
    for (int k = 0; k < n_measurements; ++k) {
        for (int s = 0; s < thin; ++s) mh_step(psi, theta, ensemble, single_electron);
        const Measurement m = measure(psi, kind, theta, ensemble, nullptr);
        check_failures(m.failures, ensemble.size());
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t w = 0; w < m.e_loc.size(); ++w) {
            if (!m.ok[w]) continue;
            pooled.push_back(m.e_loc[w]);
            sum += m.e_loc[w];
            ++count;
        }
        est.batch_means.push_back(sum / static_cast<double>(count));
    }
    est.pooled = summarize(pooled);
    est.over_batches = summarize(est.batch_means);
    return est;
}

std::vector<double> clip_local_energies(std::span<const double> e_loc, double scale) {
    std::vector<double> out(e_loc.begin(), e_loc.end());
    if (scale <= 0.0 || out.empty()) return out;
    const double n = static_cast<double>(out.size());
    double mean = 0.0;
    for (double e : out) mean += e;
    mean /= n;
    double mad = 0.0;
    for (double e : out) mad += std::fabs(e - mean);
    mad /= n;
    const double lo = mean - scale * mad, hi = mean + scale * mad;
    for (double& e : out) e = std::clamp(e, lo, hi);
    return out;
}

std::vector<double> energy_gradient(std::span<const double> e_loc, std::span<const double> grad_log,
                                    std::size_t n_params, double clip_scale) {
    if (e_loc.empty()) throw std::invalid_argument("energy_gradient: empty batch");
    if (grad_log.size() != e_loc.size() * n_params) throw std::invalid_argument("energy_gradient: shape mismatch");
    const std::vector<double> e = clip_local_energies(e_loc, clip_scale);
    const double n = static_cast<double>(e.size());
    double mean = 0.0;
    for (double x : e) mean += x;
    mean /= n;
    std::vector<double> g(n_params, 0.0);
    for (std::size_t i = 0; i < e.size(); ++i) {
        const double c = 2.0 * (e[i] - mean) / n;
        const double* row = grad_log.data() + i * n_params;
        for (std::size_t k = 0; k < n_params; ++k) g[k] += c * row[k];
    }
    return g;
}

std::vector<double> energy_gradient_weighted(std::span<const double> weights, std::span<const double> e_loc,
                                             std::span<const double> grad_log, std::size_t n_params) {
    if (e_loc.empty()) throw std::invalid_argument("energy_gradient_weighted: empty batch");
    if (weights.size() != e_loc.size() || grad_log.size() != e_loc.size() * n_params)
        throw std::invalid_argument("energy_gradient_weighted: shape mismatch");
    double total = 0.0;
    for (double w : weights) total += w;
    double mean = 0.0;
    for (std::size_t i = 0; i < e_loc.size(); ++i) mean += weights[i] * e_loc[i];
    mean /= total;
    std::vector<double> g(n_params, 0.0);
    for (std::size_t i = 0; i < e_loc.size(); ++i) {
        const double c = 2.0 * weights[i] / total * (e_loc[i] - mean);
        const double* row = grad_log.data() + i * n_params;
        for (std::size_t k = 0; k < n_params; ++k) g[k] += c * row[k];
    }
    return g;
}

void adam_update(AdamState& s, std::span<double> theta, std::span<const double> grad, double lr) {
    if (s.m.size() != theta.size()) {
        s.m.assign(theta.size(), 0.0);
        s.v.assign(theta.size(), 0.0);
    }
    ++s.t;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
    for (std::size_t k = 0; k < theta.size(); ++k) {
        s.m[k] = s.beta1 * s.m[k] + (1.0 - s.beta1) * grad[k];
        s.v[k] = s.beta2 * s.v[k] + (1.0 - s.beta2) * grad[k] * grad[k];
        theta[k] -= lr * (s.m[k] / c1) / (std::sqrt(s.v[k] / c2) + s.eps);
    }
}

double scheduled_learning_rate(const TrainOptions& options, std::int64_t iteration) {
    if (options.lr_decay <= 0.0) return options.learning_rate;
    return options.learning_rate / (1.0 + static_cast<double>(iteration) / options.lr_decay);
}

TrainState init_training(const RunConfig& config, const Wavefunction& psi) {
    TrainState state;
    state.params = psi.initial_params(config.seed);
    state.config_hash = config_hash(config);
    state.ensemble = init_walkers(psi.system(), static_cast<std::size_t>(config.train.walkers), config.seed,
                                  config.train.step_size);
    refresh(psi, state.params.values(), state.ensemble);
    burn_in(psi, state.params.values(), state.ensemble, config.train.burn_in, config.train.single_electron_moves);
    return state;
}

IterationMetrics train_step(const RunConfig& config, const Wavefunction& psi, TrainState& state) {
    const auto& opt = config.train;
    auto& ens = state.ensemble;
    std::span<const double> theta = state.params.values();

    refresh(psi, theta, ens);
    StepStats sweeps;
    for (int s = 0; s < opt.sweeps_per_iteration; ++s) {
        const StepStats st = mh_step(psi, theta, ens, opt.single_electron_moves);
        sweeps.proposed += st.proposed;
        sweeps.accepted += st.accepted;
    }
    IterationMetrics met;
    met.acceptance = sweeps.acceptance();
    adapt_step(ens);
    met.step_size = ens.step_size;

    const std::size_t p = psi.n_params();
    std::vector<double> rows;
    const Measurement m = measure(psi, config.model.potential, theta, ens, &rows);
    check_failures(m.failures, ens.size());

    std::vector<double> e_ok;
    std::vector<double> rows_ok;
    e_ok.reserve(ens.size());
    rows_ok.reserve(rows.size());
    for (std::size_t w = 0; w < ens.size(); ++w) {
        if (!m.ok[w]) continue;
        e_ok.push_back(m.e_loc[w]);
        rows_ok.insert(rows_ok.end(), rows.begin() + static_cast<std::ptrdiff_t>(w * p),
                       rows.begin() + static_cast<std::ptrdiff_t>((w + 1) * p));
    }
    const EnergyStats stats = summarize(e_ok);
    const std::vector<double> g = energy_gradient(e_ok, rows_ok, p, opt.clip_scale);
    double gn = 0.0;
    for (double x : g) gn += x * x;

    const double lr = scheduled_learning_rate(opt, state.iteration);
    ParamStore next = state.params;
    AdamState adam = state.adam;
    adam_update(adam, next.values(), g, lr);
    for (double x : next.values())
        if (!std::isfinite(x))
            throw std::runtime_error("non-finite parameters at iteration " + std::to_string(state.iteration + 1));
    state.params = std::move(next);
    state.adam = std::move(adam);
    ++state.iteration;

    met.iteration = state.iteration;
    met.energy = stats.mean;
    met.stderr_ = stats.stderr_;
    met.variance = stats.variance;
    met.grad_norm = std::sqrt(gn);
    met.learning_rate = lr;
    met.failures = m.failures;
    return met;
}

void train(const RunConfig& config, const Wavefunction& psi, TrainState& state, const IterationCallback& on_iteration) {
    while (state.iteration < config.train.iterations) {
        const IterationMetrics met = train_step(config, psi, state);
        if (on_iteration) on_iteration(met, state);
    }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

namespace {

void write_vector(std::ostream& out, const char* tag, const std::vector<double>& v) {
    out << tag << ' ' << v.size();
    for (double x : v) out << ' ' << hexfloat(x);
    out << '\n';
}

std::string expect_token(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error(std::string("checkpoint: truncated at ") + what);
    return tok;
}

void expect_tag(std::istream& in, const std::string& tag) {
    const std::string tok = expect_token(in, tag.c_str());
    if (tok != tag) throw std::runtime_error("checkpoint: expected '" + tag + "', found '" + tok + "'");
}

template <class T>
T read_integer(std::istream& in, const char* what) {
    const std::string tok = expect_token(in, what);
    std::size_t used = 0;
    const unsigned long long v = tok[0] == '-' ? static_cast<unsigned long long>(std::stoll(tok, &used))
                                               : std::stoull(tok, &used, 0);
    if (used != tok.size()) throw std::runtime_error(std::string("checkpoint: bad integer for ") + what);
    return static_cast<T>(v);
}

double read_double(std::istream& in, const char* what) { return parse_hexfloat(expect_token(in, what)); }

std::vector<double> read_vector(std::istream& in, const char* tag) {
    expect_tag(in, tag);
    const auto n = read_integer<std::size_t>(in, tag);
    std::vector<double> v(n);
    for (auto& x : v) x = read_double(in, tag);
    return v;
}

constexpr int kCheckpointVersion = 1;

}  // namespace

void write_checkpoint(std::ostream& out, const TrainState& s) {
    out << "svmc-checkpoint " << kCheckpointVersion << '\n';
    out << "config_hash " << hash_hex(s.config_hash) << '\n';
    out << "iteration " << s.iteration << '\n';
    s.params.write(out);
    out << "adam " << hexfloat(s.adam.beta1) << ' ' << hexfloat(s.adam.beta2) << ' ' << hexfloat(s.adam.eps) << ' '
        << s.adam.t << '\n';
    write_vector(out, "adam_m", s.adam.m);
    write_vector(out, "adam_v", s.adam.v);
    const auto& e = s.ensemble;
    out << "ensemble " << hexfloat(e.step_size) << ' ' << (e.adapt ? 1 : 0) << ' ' << e.window_proposed << ' '
        << e.window_accepted << ' ' << e.total_proposed << ' ' << e.total_accepted << ' ' << e.total_failures << ' '
        << e.walkers.size() << ' ' << (e.walkers.empty() ? 0 : e.walkers.front().config.size()) << '\n';
    for (const auto& w : e.walkers) {
        out << "walker " << w.rng.key() << ' ' << w.rng.counter() << ' ' << (w.rng.has_spare() ? 1 : 0) << ' '
            << hexfloat(w.rng.spare()) << ' ' << w.psi.sign << ' ' << hexfloat(w.psi.logmag);
        for (int sp : w.config.spins()) out << ' ' << sp;
        for (double x : w.config.coords()) out << ' ' << hexfloat(x);
        out << '\n';
    }
    out << "end\n";
}

TrainState read_checkpoint(std::istream& in) {
    TrainState s;
    expect_tag(in, "svmc-checkpoint");
    if (read_integer<int>(in, "version") != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version");
    expect_tag(in, "config_hash");
    s.config_hash = std::stoull(expect_token(in, "config_hash"), nullptr, 16);
    expect_tag(in, "iteration");
    s.iteration = read_integer<std::int64_t>(in, "iteration");
    s.params = ParamStore::read(in);
    expect_tag(in, "adam");
    s.adam.beta1 = read_double(in, "adam");
    s.adam.beta2 = read_double(in, "adam");
    s.adam.eps = read_double(in, "adam");
    s.adam.t = read_integer<std::int64_t>(in, "adam");
    s.adam.m = read_vector(in, "adam_m");
    s.adam.v = read_vector(in, "adam_v");
    expect_tag(in, "ensemble");
    auto& e = s.ensemble;
    e.step_size = read_double(in, "ensemble");
    e.adapt = read_integer<int>(in, "ensemble") != 0;
    e.window_proposed = read_integer<std::uint64_t>(in, "ensemble");
    e.window_accepted = read_integer<std::uint64_t>(in, "ensemble");
    e.total_proposed = read_integer<std::uint64_t>(in, "ensemble");
    e.total_accepted = read_integer<std::uint64_t>(in, "ensemble");
    e.total_failures = read_integer<std::uint64_t>(in, "ensemble");
    const auto m = read_integer<std::size_t>(in, "ensemble");
    const auto n = read_integer<std::size_t>(in, "ensemble");
    e.walkers.resize(m);
    for (auto& w : e.walkers) {
        expect_tag(in, "walker");
        const auto key = read_integer<std::uint64_t>(in, "walker");
        const auto counter = read_integer<std::uint64_t>(in, "walker");
        const bool has_spare = read_integer<int>(in, "walker") != 0;
        const double spare = read_double(in, "walker");
        w.rng = CounterRng::restore(key, counter, has_spare, spare);
        w.psi.sign = read_integer<int>(in, "walker");
        w.psi.logmag = read_double(in, "walker");
        std::vector<std::int8_t> spins(n);
        for (auto& sp : spins) sp = static_cast<std::int8_t>(read_integer<int>(in, "walker"));
        std::vector<double> coords(3 * n);
        for (auto& x : coords) x = read_double(in, "walker");
        w.config = ElectronConfiguration(std::move(coords), std::move(spins));
    }
    expect_tag(in, "end");
    return s;
}

void save_checkpoint(const std::string& path, const TrainState& state) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("cannot write checkpoint " + tmp);
        write_checkpoint(out, state);
        if (!out) throw std::runtime_error("error writing checkpoint " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot move checkpoint to " + path);
}

TrainState load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path);
    return read_checkpoint(in);
}

std::vector<double> window_means(std::span<const double> values, std::size_t window) {
    std::vector<double> out;
    if (window == 0) return out;
    for (std::size_t start = 0; start + window <= values.size(); start += window) {
        double s = 0.0;
        for (std::size_t k = start; k < start + window; ++k) s += values[k];
        out.push_back(s / static_cast<double>(window));
    }
    return out;
}

}  // namespace svmc
