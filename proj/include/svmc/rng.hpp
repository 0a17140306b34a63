#pragma once

// Counter-based random streams. A stream is a key plus a counter; draw k of
// stream (key) is splitmix64(key + k * golden), so any chain can be advanced
// in any thread without shared state and its whole state is two integers
// (plus one cached normal deviate).

#include <cmath>
#include <cstdint>
#include <numbers>

namespace svmc {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

class CounterRng {
  public:
    CounterRng() = default;
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xD1B54A32D192ED03ull))) {}

    std::uint64_t next_u64() noexcept { return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull); }

    /// Uniform in (0, 1): never exactly 0, so log(u) is finite.
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal by Box-Muller; the second deviate of each pair is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }
    bool has_spare() const noexcept { return has_spare_; }
    double spare() const noexcept { return spare_; }

    static CounterRng restore(std::uint64_t key, std::uint64_t counter, bool has_spare, double spare) noexcept {
        CounterRng r;
        r.key_ = key;
        r.counter_ = counter;
        r.has_spare_ = has_spare;
        r.spare_ = spare;
        return r;
    }

    bool operator==(const CounterRng&) const = default;

  private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace svmc
