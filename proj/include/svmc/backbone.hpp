#pragma once

// Permutation-equivariant score network alpha: R^{N x 3} -> R^{K x N}.
//
// Per electron i the input is built from
//   r_i - R_I, |r_i - R_I| for every nucleus I, the spin tag s_i, and means
//   of (r_i - r_j, |r_i - r_j|) over same-spin and opposite-spin partners.
// Vectors v are rescaled to v log(1 + |v|) / |v| and distances to
// log(1 + |v|). Then
//   h_i = tanh(W_in x_i + b_in)
//   per layer: m_i = sum_j softmax_j(q_i . k_j / sqrt(H)) v_j
//              h_i += tanh(W h_i + U m_i + b)
//   alpha_{k i} = w_k . h_i + c_k s_i + b_k
// Every reduction over electrons runs in a canonical order (spin, then
// position), which makes the output an exact column permutation under any
// same-spin relabelling.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "svmc/autodiff.hpp"
#include "svmc/geometry.hpp"
#include "svmc/kernels.hpp"
#include "svmc/params.hpp"

namespace svmc {

inline constexpr double kSoftNormEps = 1e-12;

struct FeatureSet {
    int n_electrons = 0;
    int n_nuclei = 0;
    /// Row i: for each nucleus (dx, dy, dz, |d|), then the spin tag.
    std::vector<double> one_body;
    /// Entry (i, j): (dx, dy, dz, |d|) for r_i - r_j.
    std::vector<double> pairwise;

    int one_body_width() const noexcept { return 4 * n_nuclei + 1; }
    std::span<const double> one_body_row(int i) const {
        return std::span<const double>(one_body).subspan(static_cast<std::size_t>(i) * one_body_width(),
                                                         one_body_width());
    }
    std::span<const double> pair(int i, int j) const {
        return std::span<const double>(pairwise).subspan(4 * (static_cast<std::size_t>(i) * n_electrons + j), 4);
    }
};

/// Raw one-body and pairwise features with softened distances.
FeatureSet featurize(const SystemSpec& system, const ElectronConfiguration& config);

/// Electron indices sorted by (spin descending, x, y, z, index).
void canonical_order(std::span<const double> coords, std::span<const std::int8_t> spins, std::vector<int>& order);

template <class S>
struct BackboneWorkspace {
    std::vector<S> x, h, q, k, v, m, pre, tmp, logits;
};

class Backbone {
  public:
    Backbone() = default;
    Backbone(const SystemSpec& system, int hidden, int layers, int outputs, std::string prefix);

    /// Registers this network's blocks in the layout and remembers offsets.
    void declare(ParamLayout& layout);
    void initialize(std::span<double> theta, std::mt19937_64& rng) const;

    int outputs() const noexcept { return outputs_; }
    int hidden() const noexcept { return hidden_; }
    int input_width() const noexcept { return 4 * static_cast<int>(nuclei_.size()) + 1 + 8; }

    /// Fills out (outputs x N, row-major) with the scores.
    template <class W, class S>
    void alpha(std::span<const W> theta, std::span<const S> coords, std::span<const std::int8_t> spins,
               std::span<const int> order, BackboneWorkspace<S>& ws, std::vector<S>& out) const;

  private:
    struct LayerOffsets {
        std::size_t q, k, v, w, u, b;
    };

    template <class S>
    void input_features(std::span<const S> coords, std::span<const std::int8_t> spins, std::span<const int> order,
                        std::vector<S>& x) const;

    std::vector<Nucleus> nuclei_;
    int hidden_ = 0;
    int layers_ = 0;
    int outputs_ = 0;
    std::string prefix_;

    std::size_t in_w_ = 0, in_b_ = 0, head_w_ = 0, head_spin_ = 0, head_b_ = 0;
    std::vector<LayerOffsets> layer_offsets_;
};

namespace detail {

// y = W x (+ b), W is rows x cols row-major.
template <class W, class S>
inline void linear(const W* w, const W* b, std::size_t rows, std::size_t cols, const S* x, S* y) {
    if constexpr (std::is_same_v<W, double> && std::is_same_v<S, double>) {
        kernels::active().matvec(rows, cols, w, x, b, y);
    } else {
        for (std::size_t r = 0; r < rows; ++r) y[r] = ad::affine(b != nullptr ? S(b[r]) : S(0.0), w + r * cols, x, cols);
    }
}

// Appends v log(1 + |v|) / |v| (3 entries) and log(1 + |v|).
template <class S>
inline void push_rescaled(const S& dx, const S& dy, const S& dz, S* out) {
    const S norm = ad::soft_norm(dx * dx + dy * dy + dz * dz, kSoftNormEps);
    const S lg = ad::log1p(norm);
    const S scale = lg / norm;
    out[0] = dx * scale;
    out[1] = dy * scale;
    out[2] = dz * scale;
    out[3] = lg;
}

}  // namespace detail

template <class S>
void Backbone::input_features(std::span<const S> coords, std::span<const std::int8_t> spins, std::span<const int> order,
                              std::vector<S>& x) const {
    const std::size_t n = spins.size();
    const std::size_t width = static_cast<std::size_t>(input_width());
    x.assign(n * width, S(0.0));
    for (std::size_t i = 0; i < n; ++i) {
        S* row = x.data() + i * width;
        std::size_t col = 0;
        for (const auto& nuc : nuclei_) {
            detail::push_rescaled(coords[3 * i] - nuc.position[0], coords[3 * i + 1] - nuc.position[1],
                                  coords[3 * i + 2] - nuc.position[2], row + col);
            col += 4;
        }
        row[col++] = S(static_cast<double>(spins[i]));
        S same[4] = {S(0.0), S(0.0), S(0.0), S(0.0)};
        S opp[4] = {S(0.0), S(0.0), S(0.0), S(0.0)};
        int n_same = 0, n_opp = 0;
        for (int j : order) {
            if (static_cast<std::size_t>(j) == i) continue;
            S f[4];
            detail::push_rescaled(coords[3 * i] - coords[3 * j], coords[3 * i + 1] - coords[3 * j + 1],
                                  coords[3 * i + 2] - coords[3 * j + 2], f);
            S* acc = spins[j] == spins[i] ? same : opp;
            for (int d = 0; d < 4; ++d) acc[d] = acc[d] + f[d];
            (spins[j] == spins[i] ? n_same : n_opp) += 1;
        }
        for (int d = 0; d < 4; ++d) row[col + d] = n_same > 0 ? same[d] * (1.0 / n_same) : S(0.0);
        col += 4;
        for (int d = 0; d < 4; ++d) row[col + d] = n_opp > 0 ? opp[d] * (1.0 / n_opp) : S(0.0);
    }
}

template <class W, class S>
void Backbone::alpha(std::span<const W> theta, std::span<const S> coords, std::span<const std::int8_t> spins,
                     std::span<const int> order, BackboneWorkspace<S>& ws, std::vector<S>& out) const {
    const std::size_t n = spins.size();
    const std::size_t hdim = static_cast<std::size_t>(hidden_);
    const std::size_t width = static_cast<std::size_t>(input_width());
    const W* p = theta.data();

    input_features(coords, spins, order, ws.x);

    ws.h.resize(n * hdim);
    for (std::size_t i = 0; i < n; ++i) {
        S* hi = ws.h.data() + i * hdim;
        detail::linear(p + in_w_, p + in_b_, hdim, width, ws.x.data() + i * width, hi);
        for (std::size_t c = 0; c < hdim; ++c) hi[c] = ad::tanh(hi[c]);
    }

    const double inv_sqrt_h = 1.0 / std::sqrt(static_cast<double>(hdim));
    ws.q.resize(n * hdim);
    ws.k.resize(n * hdim);
    ws.v.resize(n * hdim);
    ws.m.resize(n * hdim);
    ws.pre.resize(hdim);
    ws.tmp.resize(hdim);
    ws.logits.resize(n);
    for (const auto& lo : layer_offsets_) {
        for (std::size_t i = 0; i < n; ++i) {
            const S* hi = ws.h.data() + i * hdim;
            detail::linear<W, S>(p + lo.q, nullptr, hdim, hdim, hi, ws.q.data() + i * hdim);
            detail::linear<W, S>(p + lo.k, nullptr, hdim, hdim, hi, ws.k.data() + i * hdim);
            detail::linear<W, S>(p + lo.v, nullptr, hdim, hdim, hi, ws.v.data() + i * hdim);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const S* qi = ws.q.data() + i * hdim;
            double top = -std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j) {
                ws.logits[j] = ad::affine(S(0.0), qi, ws.k.data() + j * hdim, hdim) * inv_sqrt_h;
                top = std::max(top, ad::value_of(ws.logits[j]));
            }
            S z(0.0);
            for (int j : order) {
                ws.logits[j] = ad::exp(ws.logits[j] - top);
                z = z + ws.logits[j];
            }
            S* mi = ws.m.data() + i * hdim;
            for (std::size_t c = 0; c < hdim; ++c) mi[c] = S(0.0);
            for (int j : order) {
                const S a = ws.logits[j] / z;
                const S* vj = ws.v.data() + static_cast<std::size_t>(j) * hdim;
                for (std::size_t c = 0; c < hdim; ++c) mi[c] = mi[c] + a * vj[c];
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            S* hi = ws.h.data() + i * hdim;
            detail::linear(p + lo.w, p + lo.b, hdim, hdim, hi, ws.pre.data());
            detail::linear<W, S>(p + lo.u, nullptr, hdim, hdim, ws.m.data() + i * hdim, ws.tmp.data());
            for (std::size_t c = 0; c < hdim; ++c) hi[c] = hi[c] + ad::tanh(ws.pre[c] + ws.tmp[c]);
        }
    }

    const std::size_t kout = static_cast<std::size_t>(outputs_);
    out.resize(kout * n);
    ws.tmp.resize(std::max(kout, hdim));
    for (std::size_t i = 0; i < n; ++i) {
        detail::linear(p + head_w_, p + head_b_, kout, hdim, ws.h.data() + i * hdim, ws.tmp.data());
        const double s = static_cast<double>(spins[i]);
        for (std::size_t k = 0; k < kout; ++k) out[k * n + i] = ws.tmp[k] + p[head_spin_ + k] * s;
    }
}

}  // namespace svmc
