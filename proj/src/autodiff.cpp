#include "svmc/autodiff.hpp"

namespace svmc::ad {

Tape*& Tape::active() noexcept {
    thread_local Tape* tape = nullptr;
    return tape;
}

void Tape::clear() {
    nodes_.clear();
    leaves_.clear();
    dot_operands_.clear();
}

Var Tape::leaf(double value) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({Op::Leaf, kNoNode, kNoNode, value});
    leaves_.push_back(id);
    return {value, id};
}

std::uint32_t Tape::ref(const Var& x) {
    if (x.id != kNoNode) return x.id;
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({Op::Const, kNoNode, kNoNode, x.v});
    return id;
}

Var Tape::push(Op op, std::uint32_t a, std::uint32_t b, double value) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({op, a, b, value});
    return {value, id};
}

Var Tape::dot(std::span<const Var> w, std::span<const Var> x) {
    double value = 0.0;
    bool any_recorded = false;
    for (std::size_t k = 0; k < w.size(); ++k) {
        value += w[k].v * x[k].v;
        any_recorded = any_recorded || w[k].id != kNoNode || x[k].id != kNoNode;
    }
    if (!any_recorded) return Var(value);
    const auto first = static_cast<std::uint32_t>(dot_operands_.size());
    for (std::size_t k = 0; k < w.size(); ++k) {
        dot_operands_.push_back(ref(w[k]));
        dot_operands_.push_back(ref(x[k]));
    }
    return push(Op::Dot, first, static_cast<std::uint32_t>(w.size()), value);
}

std::vector<double> Tape::gradient(const Var& output) const {
    std::vector<double> leaf_grad(leaves_.size(), 0.0);
    if (output.id == kNoNode) return leaf_grad;
    std::vector<double> adj(nodes_.size(), 0.0);
    adj[output.id] = 1.0;
    for (std::size_t idx = output.id + 1; idx-- > 0;) {
        const double g = adj[idx];
        if (g == 0.0) continue;
        const Node& n = nodes_[idx];
        switch (n.op) {
            case Op::Leaf:
            case Op::Const: break;
            case Op::Add:
                adj[n.a] += g;
                adj[n.b] += g;
                break;
            case Op::Sub:
                adj[n.a] += g;
                adj[n.b] -= g;
                break;
            case Op::Mul:
                adj[n.a] += g * nodes_[n.b].value;
                adj[n.b] += g * nodes_[n.a].value;
                break;
            case Op::Div: {
                const double inv = 1.0 / nodes_[n.b].value;
                adj[n.a] += g * inv;
                adj[n.b] -= g * n.value * inv;
                break;
            }
            case Op::Neg: adj[n.a] -= g; break;
            case Op::Exp: adj[n.a] += g * n.value; break;
            case Op::Log: adj[n.a] += g / nodes_[n.a].value; break;
            case Op::Log1p: adj[n.a] += g / (1.0 + nodes_[n.a].value); break;
            case Op::Sqrt: adj[n.a] += g * 0.5 / n.value; break;
            case Op::Tanh: adj[n.a] += g * (1.0 - n.value * n.value); break;
            case Op::Atan: {
                const double x = nodes_[n.a].value;
                adj[n.a] += g / (1.0 + x * x);
                break;
            }
            case Op::Abs: {
                const double x = nodes_[n.a].value;
                adj[n.a] += x > 0.0 ? g : (x < 0.0 ? -g : 0.0);
                break;
            }
            case Op::Dot:
                for (std::uint32_t k = 0; k < n.b; ++k) {
                    const auto iw = dot_operands_[n.a + 2 * k];
                    const auto ix = dot_operands_[n.a + 2 * k + 1];
                    adj[iw] += g * nodes_[ix].value;
                    adj[ix] += g * nodes_[iw].value;
                }
                break;
        }
    }
    for (std::size_t k = 0; k < leaves_.size(); ++k) leaf_grad[k] = adj[leaves_[k]];
    return leaf_grad;
}

std::vector<double> Tape::replay(std::span<const double> leaf_values) const {
    if (leaf_values.size() != leaves_.size()) throw std::invalid_argument("Tape::replay: leaf count mismatch");
    std::vector<double> v(nodes_.size());
    std::size_t next_leaf = 0;
    for (std::size_t idx = 0; idx < nodes_.size(); ++idx) {
        const Node& n = nodes_[idx];
        switch (n.op) {
            case Op::Leaf: v[idx] = leaf_values[next_leaf++]; break;
            case Op::Const: v[idx] = n.value; break;
            case Op::Add: v[idx] = v[n.a] + v[n.b]; break;
            case Op::Sub: v[idx] = v[n.a] - v[n.b]; break;
            case Op::Mul: v[idx] = v[n.a] * v[n.b]; break;
            case Op::Div: v[idx] = v[n.a] / v[n.b]; break;
            case Op::Neg: v[idx] = -v[n.a]; break;
            case Op::Exp: v[idx] = std::exp(v[n.a]); break;
            case Op::Log: v[idx] = std::log(v[n.a]); break;
            case Op::Log1p: v[idx] = std::log1p(v[n.a]); break;
            case Op::Sqrt: v[idx] = std::sqrt(v[n.a]); break;
            case Op::Tanh: v[idx] = std::tanh(v[n.a]); break;
            case Op::Atan: v[idx] = std::atan(v[n.a]); break;
            case Op::Abs: v[idx] = std::fabs(v[n.a]); break;
            case Op::Dot: {
                double s = 0.0;
                for (std::uint32_t k = 0; k < n.b; ++k)
                    s += v[dot_operands_[n.a + 2 * k]] * v[dot_operands_[n.a + 2 * k + 1]];
                v[idx] = s;
                break;
            }
        }
    }
    return v;
}

}  // namespace svmc::ad
