#include "svmc/sortlet.hpp"

#include <numeric>
#include <stdexcept>

namespace svmc {
namespace {

constexpr std::size_t kInsertionCutoff = 16;

// Sorts idx[lo, hi) by key; returns inversions among those elements.
std::int64_t insertion_sort(const double* key, int* idx, std::size_t lo, std::size_t hi) {
    std::int64_t inversions = 0;
    for (std::size_t i = lo + 1; i < hi; ++i) {
        const int v = idx[i];
        const double k = key[v];
        std::size_t j = i;
        while (j > lo && key[idx[j - 1]] > k) {
            idx[j] = idx[j - 1];
            --j;
        }
        inversions += static_cast<std::int64_t>(i - j);
        idx[j] = v;
    }
    return inversions;
}

std::int64_t merge_sort(const double* key, int* idx, int* buf, std::size_t lo, std::size_t hi) {
    if (hi - lo <= kInsertionCutoff) return insertion_sort(key, idx, lo, hi);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::int64_t inversions = merge_sort(key, idx, buf, lo, mid) + merge_sort(key, idx, buf, mid, hi);
    if (!(key[idx[mid]] < key[idx[mid - 1]])) return inversions;  // already ordered
    std::size_t i = lo, j = mid, out = lo;
    // Branch-free merge: on random scores the comparison is unpredictable.
    while (i < mid && j < hi) {
        const int a = idx[i], b = idx[j];
        const bool right = key[b] < key[a];
        buf[out++] = right ? b : a;
        inversions += right ? static_cast<std::int64_t>(mid - i) : 0;
        j += right;
        i += !right;
    }
    while (i < mid) buf[out++] = idx[i++];
    while (j < hi) buf[out++] = idx[j++];
    std::copy(buf + lo, buf + hi, idx + lo);
    return inversions;
}

}  // namespace

std::int64_t sort_with_parity(std::span<const double> scores, std::span<int> perm, std::span<int> scratch) {
    const std::size_t n = scores.size();
    if (n == 0) throw std::invalid_argument("sort_with_parity: empty input");
    if (perm.size() < n || scratch.size() < n) throw std::invalid_argument("sort_with_parity: workspace too small");
    std::iota(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n), 0);
    return merge_sort(scores.data(), perm.data(), scratch.data(), 0, n);
}

SortResult sort_with_parity(std::span<const double> scores) {
    SortResult r;
    r.permutation.resize(scores.size());
    std::vector<int> scratch(scores.size());
    const auto inversions = sort_with_parity(scores, r.permutation, scratch);
    r.parity = (inversions & 1) != 0 ? -1 : 1;
    return r;
}

SortletEvaluation sortlet_value(std::span<const double> scores) {
    SortletEvaluation out;
    SortResult s = sort_with_parity(scores);
    out.parity = s.parity;
    out.permutation = std::move(s.permutation);
    out.sorted_scores.resize(scores.size());
    for (std::size_t p = 0; p < scores.size(); ++p) out.sorted_scores[p] = scores[out.permutation[p]];
    if (scores.size() == 1) {
        out.value = SignedLog<double>::from_value(scores[0]);
        return out;
    }
    const auto g = kernels::active().gap_product(out.sorted_scores.data(), scores.size());
    out.value = g.sign == 0 ? SignedLog<double>::zero() : SignedLog<double>{out.parity, g.logmag};
    return out;
}

SignedLog<double> vandermonde_value(std::span<const double> phi, std::span<const int> block_sizes) {
    std::size_t total = 0;
    for (int b : block_sizes) {
        if (b < 0) throw std::invalid_argument("vandermonde_value: negative block size");
        total += static_cast<std::size_t>(b);
    }
    if (total != phi.size()) throw std::invalid_argument("vandermonde_value: block sizes do not cover the scores");
    SignedLog<double> out{1, 0.0};
    std::size_t start = 0;
    for (int b : block_sizes) {
        const auto p = kernels::active().pair_product(phi.data() + start, static_cast<std::size_t>(b));
        if (p.sign == 0) return SignedLog<double>::zero();
        out.sign *= p.sign;
        out.logmag += p.logmag;
        start += static_cast<std::size_t>(b);
    }
    return out;
}

}  // namespace svmc
