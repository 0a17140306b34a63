#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "svmc/geometry.hpp"

namespace svmc {

/// Which wavefunction family a run uses. The analytic kinds are exact
/// eigenfunctions kept as oracles for the local-energy chain.
enum class ModelKind { Sortlet, Vandermonde, Hydrogen1s, Harmonic, Toy1d };

/// Which potential the Hamiltonian applies. Anything but Coulomb is a test hook.
enum class PotentialKind { Coulomb, Harmonic, Toy1d };

struct ModelOptions {
    ModelKind kind = ModelKind::Sortlet;
    PotentialKind potential = PotentialKind::Coulomb;
    int sortlets = 16;
    int hidden = 32;
    int layers = 2;
    double envelope_init = 2.0;
};

struct TrainOptions {
    int iterations = 2000;
    int walkers = 512;
    double learning_rate = 1e-3;
    double lr_decay = 10000.0;  // lr_t = lr / (1 + t / lr_decay)
    int sweeps_per_iteration = 10;
    int burn_in = 500;
    double step_size = 0.2;  // Bohr
    double clip_scale = 5.0;  // E_loc clipped to mean +- clip_scale * MAD; 0 disables
    int checkpoint_every = 1000;
    bool single_electron_moves = false;
};

struct RunConfig {
    SystemSpec system;
    ModelOptions model;
    TrainOptions train;
    std::uint64_t seed = 0;
};

/// Parses the documented INI-style run file. Unknown sections or keys,
/// malformed values and invalid systems raise std::invalid_argument with the
/// offending section, key and line.
RunConfig parse_run_config(const std::string& text);

/// Only the [system] / [electrons] part; other sections are still checked.
SystemSpec load_system(const std::string& text);

RunConfig load_run_config_file(const std::string& path);

/// Canonical text form (fixed key order, hexfloat numbers). Two configs that
/// describe the same run render identically.
std::string canonical_text(const RunConfig& config);

/// FNV-1a 64 over the canonical [system], [electrons] and [model] sections:
/// everything that determines the parameter layout and the Hamiltonian.
/// Training knobs and the seed are excluded so overrides keep checkpoints
/// compatible.
std::uint64_t config_hash(const RunConfig& config);
std::string hash_hex(std::uint64_t h);

std::string to_string(ModelKind kind);
std::string to_string(PotentialKind kind);

}  // namespace svmc
