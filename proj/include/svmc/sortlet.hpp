#pragma once

// Antisymmetrisation primitives: sorting with parity, the sortlet product,
// the pairwise (Vandermonde) product and the Jastrow factor.

#include <cstdint>
#include <span>
#include <type_traits>
#include <vector>

#include "svmc/autodiff.hpp"
#include "svmc/kernels.hpp"
#include "svmc/signed_log.hpp"

namespace svmc {

struct SortResult {
    std::vector<int> permutation;  // permutation[p] = original index of the p-th smallest score
    int parity = 1;                // (-1)^inversions
};

/// Stable merge sort counting inversions, O(N log N). Ties keep the original
/// index order and contribute no inversion.
SortResult sort_with_parity(std::span<const double> scores);

/// Allocation-free form; perm and scratch must hold scores.size() ints.
/// Returns the inversion count.
std::int64_t sort_with_parity(std::span<const double> scores, std::span<int> perm, std::span<int> scratch);

struct SortletEvaluation {
    SignedLog<double> value;
    std::vector<int> permutation;
    int parity = 1;
    std::vector<double> sorted_scores;
};

/// sign(pi) * prod of the N-1 ascending adjacent gaps * (max - min).
/// N = 1 gives the single score itself.
SortletEvaluation sortlet_value(std::span<const double> scores);

/// prod_{i<j} (phi_i - phi_j) within each block, blocks multiplied.
/// block_sizes must sum to phi.size().
SignedLog<double> vandermonde_value(std::span<const double> phi, std::span<const int> block_sizes);

/// Scratch space reused across evaluations of one thread.
struct SortWorkspace {
    std::vector<double> keys;
    std::vector<int> perm;
    std::vector<int> scratch;
    std::vector<double> sorted;

    void resize(std::size_t n) {
        keys.resize(n);
        perm.resize(n);
        scratch.resize(n);
        sorted.resize(n);
    }
};

/// Sortlet value for any scalar type. The sort permutation is taken from the
/// primal values and held fixed, so derivatives flow through the gaps only.
template <class S>
SignedLog<S> sortlet_log(std::span<const S> scores, SortWorkspace& ws) {
    const std::size_t n = scores.size();
    if (n == 1) {
        const double v = ad::value_of(scores[0]);
        if (v == 0.0) return SignedLog<S>::zero();
        return {v > 0.0 ? 1 : -1, ad::log(ad::abs(scores[0]))};
    }
    ws.resize(n);
    for (std::size_t i = 0; i < n; ++i) ws.keys[i] = ad::value_of(scores[i]);
    const std::int64_t inversions =
        sort_with_parity(std::span<const double>(ws.keys.data(), n), std::span<int>(ws.perm.data(), n),
                         std::span<int>(ws.scratch.data(), n));
    const int parity = (inversions & 1) != 0 ? -1 : 1;
    if constexpr (std::is_same_v<S, double>) {
        for (std::size_t p = 0; p < n; ++p) ws.sorted[p] = scores[ws.perm[p]];
        const auto g = kernels::active().gap_product(ws.sorted.data(), n);
        if (g.sign == 0) return SignedLog<S>::zero();
        return {parity, g.logmag};
    } else {
        S logmag(0.0);
        for (std::size_t p = 0; p + 1 < n; ++p) {
            const S gap = scores[ws.perm[p + 1]] - scores[ws.perm[p]];
            if (ad::value_of(gap) == 0.0) return SignedLog<S>::zero();
            logmag = logmag + ad::log(gap);
        }
        const S wrap = scores[ws.perm[n - 1]] - scores[ws.perm[0]];
        if (ad::value_of(wrap) == 0.0) return SignedLog<S>::zero();
        return {parity, logmag + ad::log(wrap)};
    }
}

/// Pairwise product for any scalar type, one block per spin channel.
template <class S>
SignedLog<S> vandermonde_log(std::span<const S> phi, std::span<const int> block_sizes) {
    if constexpr (std::is_same_v<S, double>) {
        return vandermonde_value(phi, block_sizes);
    } else {
        int sign = 1;
        S logmag(0.0);
        std::size_t start = 0;
        for (int size : block_sizes) {
            for (std::size_t i = start; i < start + size; ++i) {
                for (std::size_t j = i + 1; j < start + size; ++j) {
                    const S d = phi[i] - phi[j];
                    const double dv = ad::value_of(d);
                    if (dv == 0.0) return SignedLog<S>::zero();
                    if (dv < 0.0) sign = -sign;
                    logmag = logmag + ad::log(dv < 0.0 ? -d : d);
                }
            }
            start += size;
        }
        return {sign, logmag};
    }
}

/// Jastrow exponent
///   J = sum_{i<j same spin} -1/4 b1/(b1^2 + r_ij) + sum_{i<j opposite} -1/2 b2/(b2^2 + r_ij)
/// over the electrons of coords (3 per electron). Pairs are visited in the
/// given electron order so that relabelling same-spin electrons leaves the
/// floating-point sum unchanged.
template <class W, class S>
S jastrow(const W& beta_same, const W& beta_opposite, std::span<const S> coords, std::span<const std::int8_t> spins,
          std::span<const int> order, double soft_eps) {
    S total(0.0);
    const std::size_t n = spins.size();
    for (std::size_t a = 0; a < n; ++a) {
        const int i = order[a];
        for (std::size_t b = a + 1; b < n; ++b) {
            const int j = order[b];
            S sq(0.0);
            for (int d = 0; d < 3; ++d) {
                const S diff = coords[3 * i + d] - coords[3 * j + d];
                sq = sq + diff * diff;
            }
            const S r = ad::soft_norm(sq, soft_eps);
            if (spins[i] == spins[j])
                total = total + (-0.25) * (beta_same / (beta_same * beta_same + r));
            else
                total = total + (-0.5) * (beta_opposite / (beta_opposite * beta_opposite + r));
        }
    }
    return total;
}

}  // namespace svmc
