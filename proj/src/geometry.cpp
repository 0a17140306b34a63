#include "svmc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string_view>

namespace svmc {

int SystemSpec::total_charge() const noexcept {
    int z = 0;
    for (const auto& n : nuclei) z += n.charge;
    return z;
}

void SystemSpec::validate() const {
    if (nuclei.empty()) throw std::invalid_argument("system: at least one nucleus is required");
    for (std::size_t a = 0; a < nuclei.size(); ++a) {
        if (nuclei[a].charge < 1)
            throw std::invalid_argument("system: nucleus " + std::to_string(a) + " has charge " +
                                        std::to_string(nuclei[a].charge) + " (must be >= 1)");
        for (double x : nuclei[a].position)
            if (!std::isfinite(x))
                throw std::invalid_argument("system: nucleus " + std::to_string(a) + " has a non-finite coordinate");
        for (std::size_t b = 0; b < a; ++b)
            if (nuclei[a].position == nuclei[b].position)
                throw std::invalid_argument("system: nuclei " + std::to_string(b) + " and " + std::to_string(a) +
                                            " share a position");
    }
    if (n_up < 0 || n_down < 0) throw std::invalid_argument("electrons: negative electron count");
    if (n_up + n_down < 1) throw std::invalid_argument("electrons: at least one electron is required");
}

ElectronConfiguration::ElectronConfiguration(std::vector<double> coords, std::vector<std::int8_t> spins)
    : coords_(std::move(coords)), spins_(std::move(spins)) {
    if (coords_.size() != 3 * spins_.size())
        throw std::invalid_argument("configuration: coordinate count must be 3 x electron count");
    for (auto s : spins_)
        if (s != 1 && s != -1) throw std::invalid_argument("configuration: spin tags must be +1 or -1");
}

ElectronConfiguration ElectronConfiguration::zeros(const SystemSpec& system) {
    const auto n = static_cast<std::size_t>(system.n_electrons());
    std::vector<std::int8_t> spins(n);
    for (std::size_t i = 0; i < n; ++i) spins[i] = static_cast<std::int8_t>(system.spin_of(static_cast<int>(i)));
    return {std::vector<double>(3 * n, 0.0), std::move(spins)};
}

void ElectronConfiguration::set_position(std::size_t i, const Vec3& r) {
    for (int d = 0; d < 3; ++d) coords_[3 * i + d] = r[d];
}

bool ElectronConfiguration::all_finite() const noexcept {
    return std::all_of(coords_.begin(), coords_.end(), [](double x) { return std::isfinite(x); });
}

ElectronConfiguration transpose_electrons(const ElectronConfiguration& c, std::size_t i, std::size_t j) {
    if (i >= c.size() || j >= c.size()) throw std::out_of_range("transpose_electrons: index out of range");
    ElectronConfiguration out = c;
    if (i != j) {
        out.set_position(i, c.position(j));
        out.set_position(j, c.position(i));
    }
    return out;
}

ElectronConfiguration exchange_path(const ElectronConfiguration& c, std::size_t i, std::size_t j, double t) {
    if (i >= c.size() || j >= c.size()) throw std::out_of_range("exchange_path: index out of range");
    if (c.spin(i) != c.spin(j)) throw std::invalid_argument("exchange_path: electrons carry different spins");
    if (t == 0.0) return c;
    if (t == 1.0) return transpose_electrons(c, i, j);
    ElectronConfiguration out = c;
    const Vec3 ri = c.position(i);
    const Vec3 rj = c.position(j);
    // Symmetric form so that (i, j) and (j, i) give bitwise-equal paths.
    Vec3 a{}, b{};
    for (int d = 0; d < 3; ++d) {
        a[d] = (1.0 - t) * ri[d] + t * rj[d];
        b[d] = t * ri[d] + (1.0 - t) * rj[d];
    }
    out.set_position(i, a);
    out.set_position(j, b);
    return out;
}

std::vector<std::pair<int, int>> same_spin_pairs(const SystemSpec& system) {
    std::vector<std::pair<int, int>> pairs;
    const int n = system.n_electrons();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (system.spin_of(i) == system.spin_of(j)) pairs.emplace_back(i, j);
    return pairs;
}

int atomic_number(const std::string& symbol) {
    static constexpr std::array<std::string_view, 18> kSymbols = {"H",  "He", "Li", "Be", "B",  "C",
                                                                   "N",  "O",  "F",  "Ne", "Na", "Mg",
                                                                   "Al", "Si", "P",  "S",  "Cl", "Ar"};
    for (std::size_t z = 0; z < kSymbols.size(); ++z)
        if (kSymbols[z] == symbol) return static_cast<int>(z) + 1;
    throw std::invalid_argument("unknown element symbol '" + symbol + "'");
}

std::vector<Nucleus> h4_rectangle(double angle_deg, double radius) {
    if (!(angle_deg > 0.0 && angle_deg < 180.0)) throw std::invalid_argument("h4 angle must lie in (0, 180) degrees");
    if (!(radius > 0.0)) throw std::invalid_argument("h4 radius must be positive");
    const double half = 0.5 * angle_deg * std::numbers::pi / 180.0;
    const double x = radius * std::cos(half);
    const double y = radius * std::sin(half);
    return {{{x, y, 0.0}, 1}, {{-x, y, 0.0}, 1}, {{-x, -y, 0.0}, 1}, {{x, -y, 0.0}, 1}};
}

}  // namespace svmc
