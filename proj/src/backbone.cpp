#include "svmc/backbone.hpp"

#include <numeric>
#include <stdexcept>

namespace svmc {

FeatureSet featurize(const SystemSpec& system, const ElectronConfiguration& config) {
    FeatureSet f;
    f.n_electrons = static_cast<int>(config.size());
    f.n_nuclei = static_cast<int>(system.nuclei.size());
    const auto n = config.size();
    f.one_body.reserve(n * static_cast<std::size_t>(f.one_body_width()));
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 r = config.position(i);
        for (const auto& nuc : system.nuclei) {
            const Vec3 d{r[0] - nuc.position[0], r[1] - nuc.position[1], r[2] - nuc.position[2]};
            f.one_body.insert(f.one_body.end(), {d[0], d[1], d[2]});
            f.one_body.push_back(ad::soft_norm(d[0] * d[0] + d[1] * d[1] + d[2] * d[2], kSoftNormEps));
        }
        f.one_body.push_back(static_cast<double>(config.spin(i)));
    }
    f.pairwise.resize(4 * n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec3 ri = config.position(i);
        for (std::size_t j = 0; j < n; ++j) {
            const Vec3 rj = config.position(j);
            double* out = f.pairwise.data() + 4 * (i * n + j);
            for (int d = 0; d < 3; ++d) out[d] = ri[d] - rj[d];
            out[3] = ad::soft_norm(out[0] * out[0] + out[1] * out[1] + out[2] * out[2], kSoftNormEps);
        }
    }
    return f;
}

void canonical_order(std::span<const double> coords, std::span<const std::int8_t> spins, std::vector<int>& order) {
    order.resize(spins.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (spins[a] != spins[b]) return spins[a] > spins[b];
        for (int d = 0; d < 3; ++d) {
            const double xa = coords[3 * a + d], xb = coords[3 * b + d];
            if (xa != xb) return xa < xb;
        }
        return a < b;
    });
}

Backbone::Backbone(const SystemSpec& system, int hidden, int layers, int outputs, std::string prefix)
    : nuclei_(system.nuclei), hidden_(hidden), layers_(layers), outputs_(outputs), prefix_(std::move(prefix)) {
    if (hidden < 1 || layers < 0 || outputs < 1) throw std::invalid_argument("Backbone: invalid shape");
}

void Backbone::declare(ParamLayout& layout) {
    const auto h = static_cast<std::size_t>(hidden_);
    const auto k = static_cast<std::size_t>(outputs_);
    in_w_ = layout.add(prefix_ + "input.w", h * static_cast<std::size_t>(input_width()));
    in_b_ = layout.add(prefix_ + "input.b", h);
    layer_offsets_.clear();
    for (int l = 0; l < layers_; ++l) {
        const std::string base = prefix_ + "layer" + std::to_string(l) + ".";
        LayerOffsets lo{};
        lo.q = layout.add(base + "q", h * h);
        lo.k = layout.add(base + "k", h * h);
        lo.v = layout.add(base + "v", h * h);
        lo.w = layout.add(base + "w", h * h);
        lo.u = layout.add(base + "u", h * h);
        lo.b = layout.add(base + "b", h);
        layer_offsets_.push_back(lo);
    }
    head_w_ = layout.add(prefix_ + "head.w", k * h);
    head_spin_ = layout.add(prefix_ + "head.spin", k);
    head_b_ = layout.add(prefix_ + "head.b", k);
}

void Backbone::initialize(std::span<double> theta, std::mt19937_64& rng) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto h = static_cast<std::size_t>(hidden_);
    const auto k = static_cast<std::size_t>(outputs_);
    auto fill = [&](std::size_t offset, std::size_t count, double scale) {
        for (std::size_t i = 0; i < count; ++i) theta[offset + i] = scale * normal(rng);
    };
    const auto width = static_cast<std::size_t>(input_width());
    fill(in_w_, h * width, 1.0 / std::sqrt(static_cast<double>(width)));
    const double s = 1.0 / std::sqrt(static_cast<double>(h));
    for (const auto& lo : layer_offsets_) {
        fill(lo.q, h * h, s);
        fill(lo.k, h * h, s);
        fill(lo.v, h * h, s);
        fill(lo.w, h * h, s);
        fill(lo.u, h * h, s);
    }
    fill(head_w_, k * h, 0.1 * s);
    // Spin-dependent offsets spread over the outputs keep the initial scores
    // of up and down electrons apart.
    for (std::size_t i = 0; i < k; ++i) theta[head_spin_ + i] = 1.0 + 0.5 * static_cast<double>(i) / k;
}

}  // namespace svmc
