// svmc: train, evaluate and probe sortlet wavefunctions.
//
// Output layout under <root>/run/<config-hash>/ (root from --out, else
// $SVMC_OUT_ROOT, else the working directory):
//   config.txt                 canonical form of the resolved config
//   metrics.ndjson             one JSON record per training iteration
//   checkpoints/step-%08d      resumable training state
//   report-<kind>.txt          probe and evaluation reports, one JSON record per line

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "svmc/config.hpp"
#include "svmc/optimizer.hpp"
#include "svmc/probes.hpp"
#include "svmc/sampler.hpp"
#include "svmc/wavefunction.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace svmc;

namespace {

struct Overrides {
    std::optional<int> iters, walkers, sortlets, threads;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr;
    std::string out;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--seed", o.seed, "Random seed");
    cmd->add_option("--threads", o.threads, "Worker threads (default: all cores)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", o.out, "Output root (default: $SVMC_OUT_ROOT or .)");
}

void add_training(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--iters", o.iters, "Training iterations")->check(CLI::NonNegativeNumber);
    cmd->add_option("--walkers", o.walkers, "Number of MCMC walkers")->check(CLI::PositiveNumber);
    cmd->add_option("--sortlets", o.sortlets, "Number of sortlets K")->check(CLI::Range(1, 64));
    cmd->add_option("--lr", o.lr, "Learning rate")->check(CLI::PositiveNumber);
}

RunConfig resolve(const std::string& path, const Overrides& o) {
    RunConfig c = load_run_config_file(path);
    if (o.iters) c.train.iterations = *o.iters;
    if (o.walkers) c.train.walkers = *o.walkers;
    if (o.sortlets) c.model.sortlets = *o.sortlets;
    if (o.seed) c.seed = *o.seed;
    if (o.lr) c.train.learning_rate = *o.lr;
    if (o.threads) omp_set_num_threads(*o.threads);
    return c;
}

fs::path run_dir(const RunConfig& c, const Overrides& o) {
    fs::path root = ".";
    if (!o.out.empty())
        root = o.out;
    else if (const char* env = std::getenv("SVMC_OUT_ROOT"); env != nullptr && *env != '\0')
        root = env;
    const fs::path dir = root / "run" / hash_hex(config_hash(c));
    fs::create_directories(dir / "checkpoints");
    return dir;
}

std::string step_name(std::int64_t iteration) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "step-%08lld", static_cast<long long>(iteration));
    return buf;
}

std::optional<fs::path> latest_checkpoint(const fs::path& dir) {
    std::optional<fs::path> best;
    for (const auto& entry : fs::directory_iterator(dir / "checkpoints")) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("step-", 0) != 0 || name.find('.') != std::string::npos) continue;
        if (!best || name > best->filename().string()) best = entry.path();
    }
    return best;
}

json metrics_record(const IterationMetrics& m, double wall) {
    return {{"iteration", m.iteration},     {"energy", m.energy},     {"stderr", m.stderr_},
            {"variance", m.variance},       {"acceptance", m.acceptance}, {"step_size", m.step_size},
            {"grad_norm", m.grad_norm},     {"learning_rate", m.learning_rate}, {"failures", m.failures},
            {"wall_seconds", wall}};
}

// Keeps only metrics records up to and including iteration `upto`.
void truncate_metrics(const fs::path& file, std::int64_t upto) {
    std::ifstream in(file);
    if (!in) return;
    std::ostringstream kept;
    for (std::string line; std::getline(in, line);) {
        if (line.empty()) continue;
        const json r = json::parse(line, nullptr, false);
        if (!r.is_discarded() && r.value("iteration", std::int64_t{0}) <= upto) kept << line << '\n';
    }
    in.close();
    std::ofstream(file, std::ios::trunc) << kept.str();
}

int cmd_train(const std::string& config_path, const Overrides& o, bool resume, int final_measurements) {
    const RunConfig config = resolve(config_path, o);
    const auto psi = make_wavefunction(config.system, config.model);
    const fs::path dir = run_dir(config, o);
    std::ofstream(dir / "config.txt") << canonical_text(config);
    const fs::path metrics_path = dir / "metrics.ndjson";

    TrainState state;
    if (resume) {
        const auto ckpt = latest_checkpoint(dir);
        if (!ckpt) {
            std::cerr << "error: --resume given but " << (dir / "checkpoints").string() << " has no checkpoint\n";
            return 2;
        }
        state = load_checkpoint(ckpt->string());
        if (state.config_hash != config_hash(config)) {
            std::cerr << "error: checkpoint " << ckpt->string() << " belongs to a different configuration\n";
            return 2;
        }
        truncate_metrics(metrics_path, state.iteration);
        std::cout << "resuming from " << ckpt->string() << " at iteration " << state.iteration << '\n';
    } else {
        std::ofstream(metrics_path, std::ios::trunc);
        state = init_training(config, *psi);
        save_checkpoint((dir / "checkpoints" / step_name(0)).string(), state);
    }

    std::ofstream metrics(metrics_path, std::ios::app);
    std::cout << "run directory " << dir.string() << "\n"
              << psi->name() << " model, " << psi->n_params() << " parameters, " << config.train.walkers
              << " walkers, " << omp_get_max_threads() << " threads\n";
    const auto t0 = std::chrono::steady_clock::now();
    const int every = config.train.checkpoint_every;
    try {
        train(config, *psi, state, [&](const IterationMetrics& m, const TrainState& s) {
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            metrics << metrics_record(m, wall).dump() << '\n';
            if (every > 0 && s.iteration % every == 0) {
                metrics.flush();
                save_checkpoint((dir / "checkpoints" / step_name(s.iteration)).string(), s);
            }
            if (m.iteration % 100 == 0 || m.iteration == config.train.iterations)
                std::cout << "iter " << m.iteration << "  E " << format_uncertainty(m.energy, 3.0 * m.stderr_)
                          << "  acc " << m.acceptance << "  step " << m.step_size << '\n';
        });
    } catch (const std::exception& e) {
        metrics.flush();
        std::cerr << "error: training stopped at iteration " << state.iteration << ": " << e.what()
                  << "\nlast good checkpoint kept in " << (dir / "checkpoints").string() << '\n';
        return 1;
    }
    metrics.flush();
    save_checkpoint((dir / "checkpoints" / step_name(state.iteration)).string(), state);

    state.ensemble.adapt = false;
    const EnergyEstimate est =
        estimate_energy(*psi, config.model.potential, state.params.values(), state.ensemble, final_measurements,
                        config.train.sweeps_per_iteration, config.train.single_electron_moves);
    // Batch means carry the autocorrelation; with a single batch fall back to the pooled samples.
    const EnergyStats& s = est.batch_means.size() >= 2 ? est.over_batches : est.pooled;
    std::cout << "final energy " << format_uncertainty(s.mean, s.radius())
              << " Ha  (" << est.batch_means.size() << " measurements x " << state.ensemble.size()
              << " walkers, 3 sigma)\n";
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& checkpoint_path, const Overrides& o,
                 int n_estimates, int equilibration, int between) {
    const RunConfig config = resolve(config_path, o);
    const TrainState ckpt = load_checkpoint(checkpoint_path);
    if (ckpt.config_hash != config_hash(config)) {
        std::cerr << "error: checkpoint hash " << hash_hex(ckpt.config_hash) << " does not match config hash "
                  << hash_hex(config_hash(config)) << "; refusing to evaluate\n";
        return 2;
    }
    const auto psi = make_wavefunction(config.system, config.model);
    if (ckpt.params.layout() != psi->layout()) {
        std::cerr << "error: checkpoint parameter layout does not match the model\n";
        return 2;
    }
    const std::span<const double> theta = ckpt.params.values();
    WalkerEnsemble ens = init_walkers(config.system, static_cast<std::size_t>(config.train.walkers),
                                      config.seed ^ 0xe7a1u, config.train.step_size);
    refresh(*psi, theta, ens);
    burn_in(*psi, theta, ens, equilibration, config.train.single_electron_moves);
    ens.adapt = false;
    const EnergyEstimate est = estimate_energy(*psi, config.model.potential, theta, ens, n_estimates, between,
                                               config.train.single_electron_moves);
    const EnergyStats& s = est.over_batches;
    std::cout << "energy " << format_uncertainty(s.mean, s.radius()) << " Ha  stderr " << s.stderr_
              << "  estimates " << s.n_samples << "  walkers " << ens.size() << "  step " << ens.step_size << '\n';

    const fs::path dir = run_dir(config, o);
    std::ofstream report(dir / "report-evaluate.txt", std::ios::app);
    report << json{{"probe", "evaluate"},
                   {"checkpoint", checkpoint_path},
                   {"iteration", ckpt.iteration},
                   {"seed", config.seed},
                   {"mean", s.mean},
                   {"variance_of_estimates", s.variance},
                   {"stderr", s.stderr_},
                   {"radius_3sigma", s.radius()},
                   {"estimates", s.n_samples},
                   {"equilibration", equilibration},
                   {"between", between},
                   {"local_energy_variance", est.pooled.variance},
                   {"formatted", format_uncertainty(s.mean, s.radius())}}
                  .dump()
           << '\n';
    return 0;
}

int cmd_probe(const std::string& kind, const std::string& config_path, const Overrides& o, bool single_sortlet,
              int trials, int dim) {
    RunConfig config = resolve(config_path, o);
    if (single_sortlet) config.model.sortlets = 1;
    const std::uint64_t seed = config.seed;
    std::vector<ProbeReport> reports;

    if (kind == "variational") {
        reports.push_back(variational_floor_check(dim, trials > 0 ? trials : 10000, seed));
    } else {
        const auto psi = make_wavefunction(config.system, config.model);
        if (kind == "antisymmetry") {
            reports.push_back(antisymmetry_suite(*psi, trials > 0 ? trials : 1000, seed));
        } else if (kind == "nodes") {
            reports.push_back(node_suite(*psi, trials > 0 ? trials : 100, seed));
            const auto sys = config.system;
            if (sys.n_up >= 3 || sys.n_down >= 3)
                reports.push_back(triple_exchange_suite(*psi, trials > 0 ? trials : 100, seed));
        } else if (kind == "smoothness") {
            const auto* sortlet = dynamic_cast<const SortletAnsatz*>(psi.get());
            if (sortlet == nullptr) throw CLI::ValidationError("smoothness", "needs [model] kind = sortlet");
            reports.push_back(smoothness_probe(*sortlet, trials > 0 ? trials : 50, seed));
        } else if (kind == "gradcheck") {
            const auto* toy = dynamic_cast<const Toy1dModel*>(psi.get());
            if (toy == nullptr) throw CLI::ValidationError("gradcheck", "needs [model] kind = toy1d");
            const ParamStore theta = toy->initial_params(seed);
            reports.push_back(gradcheck(*toy, theta.values(), seed));
        } else {
            throw CLI::ValidationError("kind", "unknown probe '" + kind + "'");
        }
    }

    const fs::path dir = run_dir(config, o);
    std::ofstream out(dir / ("report-" + kind + ".txt"), std::ios::app);
    bool pass = true;
    for (const auto& r : reports) {
        r.write(out);
        pass = pass && r.pass;
        std::cout << r.probe << ": " << (r.pass ? "PASS" : "FAIL") << "  " << r.summary.dump() << '\n';
    }
    std::cout << "report " << (dir / ("report-" + kind + ".txt")).string() << '\n';
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational Monte Carlo with sortlet wavefunctions"};
    app.require_subcommand(1);

    Overrides o;
    std::string config_path, checkpoint_path, kind;
    bool resume = false, single_sortlet = false;
    int final_measurements = 20, n_estimates = 100, equilibration = 500, between = 10, trials = 0, dim = 50;

    auto* train_cmd = app.add_subcommand("train", "Optimise the wavefunction for a config");
    train_cmd->add_option("config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
    add_training(train_cmd, o);
    add_common(train_cmd, o);
    train_cmd->add_flag("--resume", resume, "Continue from the latest checkpoint of this config");
    train_cmd->add_option("--final-measurements", final_measurements, "Measurements in the closing energy estimate")
        ->check(CLI::PositiveNumber);

    auto* eval_cmd = app.add_subcommand("evaluate", "Estimate the energy of a checkpoint with fresh walkers");
    eval_cmd->add_option("config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("checkpoint", checkpoint_path, "Checkpoint file")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--walkers", o.walkers, "Number of MCMC walkers")->check(CLI::PositiveNumber);
    add_common(eval_cmd, o);
    eval_cmd->add_option("--estimates", n_estimates, "Independent energy estimates")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--equilibration", equilibration, "Burn-in sweeps")->check(CLI::NonNegativeNumber);
    eval_cmd->add_option("--between", between, "Sweeps between estimates")->check(CLI::PositiveNumber);

    auto* probe_cmd = app.add_subcommand("probe", "Run a structural probe; exit status 0 iff it passes");
    probe_cmd->add_option("kind", kind, "antisymmetry | nodes | smoothness | variational | gradcheck")
        ->required()
        ->check(CLI::IsMember({"antisymmetry", "nodes", "smoothness", "variational", "gradcheck"}));
    probe_cmd->add_option("config", config_path, "Run config file")->required()->check(CLI::ExistingFile);
    add_common(probe_cmd, o);
    probe_cmd->add_flag("--single-sortlet", single_sortlet, "Use K = 1");
    probe_cmd->add_option("--sortlets", o.sortlets, "Number of sortlets K")->check(CLI::Range(1, 64));
    probe_cmd->add_option("--trials", trials, "Trials or paths (probe default when omitted)");
    probe_cmd->add_option("--dim", dim, "Matrix size for the variational probe")->check(CLI::Range(1, 200));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) return cmd_train(config_path, o, resume, final_measurements);
        if (*eval_cmd) return cmd_evaluate(config_path, checkpoint_path, o, n_estimates, equilibration, between);
        if (*probe_cmd) return cmd_probe(kind, config_path, o, single_sortlet, trials, dim);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
