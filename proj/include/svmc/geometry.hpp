#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace svmc {

using Vec3 = std::array<double, 3>;

struct Nucleus {
    Vec3 position{};  // Bohr
    int charge = 1;

    bool operator==(const Nucleus&) const = default;
};

/// The fixed molecule: clamped nuclei plus the spin split of the electrons.
/// Electrons 0..n_up-1 are spin up, n_up..N-1 spin down.
struct SystemSpec {
    std::vector<Nucleus> nuclei;
    int n_up = 0;
    int n_down = 0;

    int n_electrons() const noexcept { return n_up + n_down; }
    int total_charge() const noexcept;
    int spin_of(int electron) const noexcept { return electron < n_up ? +1 : -1; }

    /// Throws std::invalid_argument describing the first violated invariant.
    void validate() const;

    bool operator==(const SystemSpec&) const = default;
};

/// One point in R^{3N}. Spin tags are fixed per slot; exchanges move
/// positions only.
class ElectronConfiguration {
  public:
    ElectronConfiguration() = default;
    ElectronConfiguration(std::vector<double> coords, std::vector<std::int8_t> spins);
    static ElectronConfiguration zeros(const SystemSpec& system);

    std::size_t size() const noexcept { return spins_.size(); }
    Vec3 position(std::size_t i) const { return {coords_[3 * i], coords_[3 * i + 1], coords_[3 * i + 2]}; }
    void set_position(std::size_t i, const Vec3& r);
    int spin(std::size_t i) const { return spins_[i]; }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }
    std::span<const std::int8_t> spins() const noexcept { return spins_; }

    bool all_finite() const noexcept;
    bool operator==(const ElectronConfiguration&) const = default;

  private:
    std::vector<double> coords_;
    std::vector<std::int8_t> spins_;
};

/// Swaps the positions of electrons i and j.
ElectronConfiguration transpose_electrons(const ElectronConfiguration& c, std::size_t i, std::size_t j);

/// Straight line from c (t = 0) to transpose_electrons(c, i, j) (t = 1).
/// Requires i and j to carry the same spin.
ElectronConfiguration exchange_path(const ElectronConfiguration& c, std::size_t i, std::size_t j, double t);

/// Same-spin electron pairs (i < j).
std::vector<std::pair<int, int>> same_spin_pairs(const SystemSpec& system);

/// Atomic number of an element symbol (H..Ar); throws on unknown symbols.
int atomic_number(const std::string& symbol);

/// Four protons on a circle of the given radius forming a rectangle whose
/// diagonals meet at angle_deg.
std::vector<Nucleus> h4_rectangle(double angle_deg, double radius);

inline constexpr double kDefaultH4Radius = 3.2843;

}  // namespace svmc
