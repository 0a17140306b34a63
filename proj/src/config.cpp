#include "svmc/config.hpp"

#include "svmc/params.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace svmc {
namespace {

struct Entry {
    std::string key;
    std::string value;
    int line = 0;
};

using Sections = std::map<std::string, std::vector<Entry>>;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void fail(const std::string& section, const Entry& e, const std::string& msg) {
    throw std::invalid_argument("[" + section + "] " + e.key + " (line " + std::to_string(e.line) + "): " + msg);
}

Sections tokenize(const std::string& text) {
    static const std::set<std::string> kKnown = {"system", "electrons", "run", "model", "train"};
    Sections out;
    std::string current;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("line " + std::to_string(line_no) + ": malformed section header");
            current = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!kKnown.contains(current))
                throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown section [" + current + "]");
            out[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        if (current.empty())
            throw std::invalid_argument("line " + std::to_string(line_no) + ": key outside of any section");
        out[current].push_back({trim(std::string_view(line).substr(0, eq)), trim(std::string_view(line).substr(eq + 1)),
                                line_no});
    }
    return out;
}

double parse_double(const std::string& section, const Entry& e, const std::string& token) {
    // strtod rather than from_chars: canonical_text writes hexfloats.
    double v = 0.0;
    try {
        v = parse_hexfloat(token);
    } catch (const std::runtime_error&) {
        fail(section, e, "expected a number, got '" + token + "'");
    }
    if (!std::isfinite(v)) fail(section, e, "expected a finite number, got '" + token + "'");
    return v;
}

long long parse_int(const std::string& section, const Entry& e, const std::string& token) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(section, e, "expected an integer, got '" + token + "'");
    return v;
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

void parse_system(const std::vector<Entry>& entries, SystemSpec& system) {
    const std::string sec = "system";
    std::optional<double> h4_angle;
    double h4_radius = kDefaultH4Radius;
    for (const auto& e : entries) {
        if (e.key == "nucleus") {
            const auto w = words(e.value);
            if (w.size() != 4) fail(sec, e, "expected '<element|Z> x y z'");
            Nucleus n;
            if (std::isalpha(static_cast<unsigned char>(w[0][0]))) {
                try {
                    n.charge = atomic_number(w[0]);
                } catch (const std::invalid_argument& ex) {
                    fail(sec, e, ex.what());
                }
            } else {
                const long long z = parse_int(sec, e, w[0]);
                if (z < 1) fail(sec, e, "nuclear charge must be a positive integer");
                n.charge = static_cast<int>(z);
            }
            for (int d = 0; d < 3; ++d) n.position[d] = parse_double(sec, e, w[1 + d]);
            system.nuclei.push_back(n);
        } else if (e.key == "h4_angle") {
            h4_angle = parse_double(sec, e, e.value);
        } else if (e.key == "h4_radius") {
            h4_radius = parse_double(sec, e, e.value);
        } else {
            fail(sec, e, "unknown key");
        }
    }
    if (h4_angle) {
        if (!system.nuclei.empty())
            throw std::invalid_argument("[system] h4_angle cannot be combined with explicit nuclei");
        system.nuclei = h4_rectangle(*h4_angle, h4_radius);
    }
}

ModelKind parse_model_kind(const Entry& e) {
    if (e.value == "sortlet") return ModelKind::Sortlet;
    if (e.value == "vandermonde") return ModelKind::Vandermonde;
    if (e.value == "hydrogen_1s") return ModelKind::Hydrogen1s;
    if (e.value == "harmonic") return ModelKind::Harmonic;
    if (e.value == "toy1d") return ModelKind::Toy1d;
    fail("model", e, "unknown model kind '" + e.value + "'");
}

PotentialKind parse_potential_kind(const Entry& e) {
    if (e.value == "coulomb") return PotentialKind::Coulomb;
    if (e.value == "harmonic") return PotentialKind::Harmonic;
    if (e.value == "toy1d") return PotentialKind::Toy1d;
    fail("model", e, "unknown potential '" + e.value + "'");
}

int positive_int(const std::string& sec, const Entry& e, long long lo = 1) {
    const long long v = parse_int(sec, e, e.value);
    if (v < lo) fail(sec, e, "must be >= " + std::to_string(lo));
    return static_cast<int>(v);
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    const Sections sections = tokenize(text);
    RunConfig cfg;
    if (auto it = sections.find("system"); it != sections.end()) parse_system(it->second, cfg.system);

    std::optional<int> n_up, n_down;
    if (auto it = sections.find("electrons"); it != sections.end()) {
        for (const auto& e : it->second) {
            if (e.key == "n_up")
                n_up = positive_int("electrons", e, 0);
            else if (e.key == "n_down")
                n_down = positive_int("electrons", e, 0);
            else
                fail("electrons", e, "unknown key");
        }
    }
    const int total = cfg.system.total_charge();
    if (n_up && n_down) {
        cfg.system.n_up = *n_up;
        cfg.system.n_down = *n_down;
    } else if (n_up) {
        cfg.system.n_up = *n_up;
        cfg.system.n_down = std::max(0, total - *n_up);
    } else if (n_down) {
        cfg.system.n_down = *n_down;
        cfg.system.n_up = std::max(0, total - *n_down);
    } else {
        cfg.system.n_up = (total + 1) / 2;
        cfg.system.n_down = total / 2;
    }

    if (auto it = sections.find("run"); it != sections.end()) {
        for (const auto& e : it->second) {
            if (e.key == "seed") {
                const long long s = parse_int("run", e, e.value);
                if (s < 0) fail("run", e, "seed must be non-negative");
                cfg.seed = static_cast<std::uint64_t>(s);
            } else {
                fail("run", e, "unknown key");
            }
        }
    }

    if (auto it = sections.find("model"); it != sections.end()) {
        for (const auto& e : it->second) {
            if (e.key == "kind")
                cfg.model.kind = parse_model_kind(e);
            else if (e.key == "potential")
                cfg.model.potential = parse_potential_kind(e);
            else if (e.key == "sortlets")
                cfg.model.sortlets = positive_int("model", e);
            else if (e.key == "hidden")
                cfg.model.hidden = positive_int("model", e);
            else if (e.key == "layers")
                cfg.model.layers = positive_int("model", e, 0);
            else if (e.key == "envelope_init") {
                cfg.model.envelope_init = parse_double("model", e, e.value);
                if (cfg.model.envelope_init <= 0.0) fail("model", e, "must be positive");
            } else
                fail("model", e, "unknown key");
        }
    }

    if (auto it = sections.find("train"); it != sections.end()) {
        auto& t = cfg.train;
        for (const auto& e : it->second) {
            if (e.key == "iterations")
                t.iterations = positive_int("train", e, 0);
            else if (e.key == "walkers")
                t.walkers = positive_int("train", e);
            else if (e.key == "learning_rate")
                t.learning_rate = parse_double("train", e, e.value);
            else if (e.key == "lr_decay")
                t.lr_decay = parse_double("train", e, e.value);
            else if (e.key == "sweeps")
                t.sweeps_per_iteration = positive_int("train", e);
            else if (e.key == "burn_in")
                t.burn_in = positive_int("train", e, 0);
            else if (e.key == "step_size")
                t.step_size = parse_double("train", e, e.value);
            else if (e.key == "clip_scale")
                t.clip_scale = parse_double("train", e, e.value);
            else if (e.key == "checkpoint_every")
                t.checkpoint_every = positive_int("train", e, 0);
            else if (e.key == "single_electron_moves") {
                if (e.value != "true" && e.value != "false") fail("train", e, "expected true or false");
                t.single_electron_moves = e.value == "true";
            } else
                fail("train", e, "unknown key");
        }
        if (t.learning_rate <= 0.0) throw std::invalid_argument("[train] learning_rate must be positive");
        if (t.lr_decay <= 0.0) throw std::invalid_argument("[train] lr_decay must be positive");
        if (t.step_size <= 0.0) throw std::invalid_argument("[train] step_size must be positive");
        if (t.clip_scale < 0.0) throw std::invalid_argument("[train] clip_scale must be non-negative");
    }

    cfg.system.validate();
    if (cfg.model.sortlets > 64) throw std::invalid_argument("[model] sortlets must be <= 64");
    return cfg;
}

SystemSpec load_system(const std::string& text) { return parse_run_config(text).system; }

RunConfig load_run_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Sortlet: return "sortlet";
        case ModelKind::Vandermonde: return "vandermonde";
        case ModelKind::Hydrogen1s: return "hydrogen_1s";
        case ModelKind::Harmonic: return "harmonic";
        case ModelKind::Toy1d: return "toy1d";
    }
    return "?";
}

std::string to_string(PotentialKind kind) {
    switch (kind) {
        case PotentialKind::Coulomb: return "coulomb";
        case PotentialKind::Harmonic: return "harmonic";
        case PotentialKind::Toy1d: return "toy1d";
    }
    return "?";
}

namespace {
void write_wavefunction_sections(std::ostringstream& out, const RunConfig& c) {
    out << "[system]\n";
    for (const auto& n : c.system.nuclei)
        out << "nucleus = " << n.charge << ' ' << hexfloat(n.position[0]) << ' ' << hexfloat(n.position[1]) << ' '
            << hexfloat(n.position[2]) << '\n';
    out << "[electrons]\nn_up = " << c.system.n_up << "\nn_down = " << c.system.n_down << '\n';
    out << "[model]\nkind = " << to_string(c.model.kind) << "\npotential = " << to_string(c.model.potential)
        << "\nsortlets = " << c.model.sortlets << "\nhidden = " << c.model.hidden << "\nlayers = " << c.model.layers
        << "\nenvelope_init = " << hexfloat(c.model.envelope_init) << '\n';
}
}  // namespace

std::string canonical_text(const RunConfig& c) {
    std::ostringstream out;
    write_wavefunction_sections(out, c);
    out << "[run]\nseed = " << c.seed << '\n';
    const auto& t = c.train;
    out << "[train]\niterations = " << t.iterations << "\nwalkers = " << t.walkers
        << "\nlearning_rate = " << hexfloat(t.learning_rate) << "\nlr_decay = " << hexfloat(t.lr_decay)
        << "\nsweeps = " << t.sweeps_per_iteration << "\nburn_in = " << t.burn_in
        << "\nstep_size = " << hexfloat(t.step_size) << "\nclip_scale = " << hexfloat(t.clip_scale)
        << "\ncheckpoint_every = " << t.checkpoint_every
        << "\nsingle_electron_moves = " << (t.single_electron_moves ? "true" : "false") << '\n';
    return out.str();
}

std::uint64_t config_hash(const RunConfig& config) {
    std::ostringstream out;
    write_wavefunction_sections(out, config);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : out.str()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace svmc
