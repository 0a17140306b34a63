#pragma once

// Differentiation engine.
//
// Two number types share one vocabulary of operations:
//   Jet<W>  forward mode carrying, for W coordinate directions at once, the
//           first derivative and the pure second derivative along each
//           direction. Summing the second derivatives over all 3N coordinate
//           directions gives the Laplacian.
//   Var     reverse mode; every operation appends an op-coded node to the
//           thread's active Tape, which can be swept backwards for
//           d(output)/d(leaf) or replayed forwards.
// Plain double overloads live here too so model code can call ad::exp(x)
// regardless of the scalar type it is instantiated with.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace svmc::ad {

// ---------------------------------------------------------------------------
// double
// ---------------------------------------------------------------------------

inline double value_of(double x) noexcept { return x; }
inline double exp(double x) { return std::exp(x); }
inline double log(double x) { return std::log(x); }
inline double log1p(double x) { return std::log1p(x); }
inline double sqrt(double x) { return std::sqrt(x); }
inline double tanh(double x) { return std::tanh(x); }
inline double atan(double x) { return std::atan(x); }
inline double abs(double x) { return std::fabs(x); }

// ---------------------------------------------------------------------------
// Forward mode
// ---------------------------------------------------------------------------

template <std::size_t W>
struct Jet {
    double v = 0.0;
    std::array<double, W> d{};   // df/dx_l
    std::array<double, W> dd{};  // d2f/dx_l2

    Jet() = default;
    Jet(double value) : v(value) {}  // NOLINT: constants promote implicitly

    static Jet variable(double value, std::size_t lane) {
        Jet j(value);
        j.d[lane] = 1.0;
        return j;
    }
};

template <std::size_t W>
inline double value_of(const Jet<W>& x) noexcept {
    return x.v;
}

// f(x) given f, f', f'' at x.v
template <std::size_t W>
inline Jet<W> chain(const Jet<W>& x, double f, double df, double d2f) {
    Jet<W> r;
    r.v = f;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = df * x.d[l];
        r.dd[l] = df * x.dd[l] + d2f * x.d[l] * x.d[l];
    }
    return r;
}

template <std::size_t W>
inline Jet<W> operator+(const Jet<W>& a, const Jet<W>& b) {
    Jet<W> r;
    r.v = a.v + b.v;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = a.d[l] + b.d[l];
        r.dd[l] = a.dd[l] + b.dd[l];
    }
    return r;
}
template <std::size_t W>
inline Jet<W> operator+(const Jet<W>& a, double b) {
    Jet<W> r = a;
    r.v += b;
    return r;
}
template <std::size_t W>
inline Jet<W> operator+(double a, const Jet<W>& b) {
    return b + a;
}

template <std::size_t W>
inline Jet<W> operator-(const Jet<W>& a) {
    Jet<W> r;
    r.v = -a.v;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = -a.d[l];
        r.dd[l] = -a.dd[l];
    }
    return r;
}
template <std::size_t W>
inline Jet<W> operator-(const Jet<W>& a, const Jet<W>& b) {
    Jet<W> r;
    r.v = a.v - b.v;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = a.d[l] - b.d[l];
        r.dd[l] = a.dd[l] - b.dd[l];
    }
    return r;
}
template <std::size_t W>
inline Jet<W> operator-(const Jet<W>& a, double b) {
    Jet<W> r = a;
    r.v -= b;
    return r;
}
template <std::size_t W>
inline Jet<W> operator-(double a, const Jet<W>& b) {
    Jet<W> r = -b;
    r.v += a;
    return r;
}

template <std::size_t W>
inline Jet<W> operator*(const Jet<W>& a, const Jet<W>& b) {
    Jet<W> r;
    r.v = a.v * b.v;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = a.d[l] * b.v + a.v * b.d[l];
        r.dd[l] = a.dd[l] * b.v + 2.0 * a.d[l] * b.d[l] + a.v * b.dd[l];
    }
    return r;
}
template <std::size_t W>
inline Jet<W> operator*(const Jet<W>& a, double b) {
    Jet<W> r;
    r.v = a.v * b;
    for (std::size_t l = 0; l < W; ++l) {
        r.d[l] = a.d[l] * b;
        r.dd[l] = a.dd[l] * b;
    }
    return r;
}
template <std::size_t W>
inline Jet<W> operator*(double a, const Jet<W>& b) {
    return b * a;
}

template <std::size_t W>
inline Jet<W> reciprocal(const Jet<W>& b) {
    const double inv = 1.0 / b.v;
    return chain(b, inv, -inv * inv, 2.0 * inv * inv * inv);
}
template <std::size_t W>
inline Jet<W> operator/(const Jet<W>& a, const Jet<W>& b) {
    return a * reciprocal(b);
}
template <std::size_t W>
inline Jet<W> operator/(const Jet<W>& a, double b) {
    return a * (1.0 / b);
}
template <std::size_t W>
inline Jet<W> operator/(double a, const Jet<W>& b) {
    return a * reciprocal(b);
}

template <std::size_t W>
inline Jet<W>& operator+=(Jet<W>& a, const Jet<W>& b) {
    a = a + b;
    return a;
}
template <std::size_t W>
inline Jet<W>& operator-=(Jet<W>& a, const Jet<W>& b) {
    a = a - b;
    return a;
}
template <std::size_t W>
inline Jet<W>& operator*=(Jet<W>& a, const Jet<W>& b) {
    a = a * b;
    return a;
}

template <std::size_t W>
inline Jet<W> exp(const Jet<W>& x) {
    const double e = std::exp(x.v);
    return chain(x, e, e, e);
}
template <std::size_t W>
inline Jet<W> log(const Jet<W>& x) {
    const double inv = 1.0 / x.v;
    return chain(x, std::log(x.v), inv, -inv * inv);
}
template <std::size_t W>
inline Jet<W> log1p(const Jet<W>& x) {
    const double inv = 1.0 / (1.0 + x.v);
    return chain(x, std::log1p(x.v), inv, -inv * inv);
}
template <std::size_t W>
inline Jet<W> sqrt(const Jet<W>& x) {
    const double s = std::sqrt(x.v);
    return chain(x, s, 0.5 / s, -0.25 / (s * x.v));
}
template <std::size_t W>
inline Jet<W> tanh(const Jet<W>& x) {
    const double t = std::tanh(x.v);
    const double dt = 1.0 - t * t;
    return chain(x, t, dt, -2.0 * t * dt);
}
template <std::size_t W>
inline Jet<W> atan(const Jet<W>& x) {
    const double q = 1.0 / (1.0 + x.v * x.v);
    return chain(x, std::atan(x.v), q, -2.0 * x.v * q * q);
}
// Derivative at 0 is taken as 0.
template <std::size_t W>
inline Jet<W> abs(const Jet<W>& x) {
    const double s = x.v > 0.0 ? 1.0 : (x.v < 0.0 ? -1.0 : 0.0);
    return chain(x, std::fabs(x.v), s, 0.0);
}

// ---------------------------------------------------------------------------
// Reverse mode
// ---------------------------------------------------------------------------

enum class Op : std::uint8_t { Leaf, Const, Add, Sub, Mul, Div, Neg, Exp, Log, Log1p, Sqrt, Tanh, Atan, Abs, Dot };

inline constexpr std::uint32_t kNoNode = std::numeric_limits<std::uint32_t>::max();

/// A tape value. id == kNoNode marks a constant that has not been recorded.
struct Var {
    double v = 0.0;
    std::uint32_t id = kNoNode;

    Var() = default;
    Var(double value) : v(value) {}  // NOLINT: constants promote implicitly
    Var(double value, std::uint32_t node) : v(value), id(node) {}
};

inline double value_of(const Var& x) noexcept { return x.v; }

class Tape {
  public:
    struct Node {
        Op op;
        std::uint32_t a;  // operand, or first index into dot_operands_
        std::uint32_t b;  // operand, or pair count
        double value;
    };

    Var leaf(double value);
    /// Records x if it is an unrecorded constant; returns its node id.
    std::uint32_t ref(const Var& x);
    Var push(Op op, std::uint32_t a, std::uint32_t b, double value);
    /// sum_k w[k] * x[k] as one node.
    Var dot(std::span<const Var> w, std::span<const Var> x);

    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t n_leaves() const noexcept { return leaves_.size(); }
    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    void clear();

    /// Adjoint of every leaf (in creation order) for the given output.
    std::vector<double> gradient(const Var& output) const;

    /// Recomputes every node value from new leaf values, in recording order.
    std::vector<double> replay(std::span<const double> leaf_values) const;

    static Tape*& active() noexcept;

  private:
    std::vector<Node> nodes_;
    std::vector<std::uint32_t> leaves_;
    std::vector<std::uint32_t> dot_operands_;  // interleaved (w, x) node ids
};

/// Makes a tape the active one for this thread while in scope.
class TapeScope {
  public:
    explicit TapeScope(Tape& tape) : previous_(Tape::active()) { Tape::active() = &tape; }
    ~TapeScope() { Tape::active() = previous_; }
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

  private:
    Tape* previous_;
};

namespace detail {
inline Tape& tape() {
    Tape* t = Tape::active();
    if (t == nullptr) throw std::logic_error("ad::Var arithmetic without an active Tape");
    return *t;
}
inline bool is_const(const Var& x) noexcept { return x.id == kNoNode; }
inline Var binary(Op op, const Var& a, const Var& b, double value) {
    if (is_const(a) && is_const(b)) return Var(value);
    Tape& t = tape();
    const auto ia = t.ref(a);
    const auto ib = t.ref(b);
    return t.push(op, ia, ib, value);
}
inline Var unary(Op op, const Var& a, double value) {
    if (is_const(a)) return Var(value);
    return tape().push(op, a.id, kNoNode, value);
}
}  // namespace detail

inline Var operator+(const Var& a, const Var& b) { return detail::binary(Op::Add, a, b, a.v + b.v); }
inline Var operator-(const Var& a, const Var& b) { return detail::binary(Op::Sub, a, b, a.v - b.v); }
inline Var operator*(const Var& a, const Var& b) { return detail::binary(Op::Mul, a, b, a.v * b.v); }
inline Var operator/(const Var& a, const Var& b) { return detail::binary(Op::Div, a, b, a.v / b.v); }
inline Var operator-(const Var& a) { return detail::unary(Op::Neg, a, -a.v); }
inline Var operator+(const Var& a, double b) { return a + Var(b); }
inline Var operator+(double a, const Var& b) { return Var(a) + b; }
inline Var operator-(const Var& a, double b) { return a - Var(b); }
inline Var operator-(double a, const Var& b) { return Var(a) - b; }
inline Var operator*(const Var& a, double b) { return a * Var(b); }
inline Var operator*(double a, const Var& b) { return Var(a) * b; }
inline Var operator/(const Var& a, double b) { return a / Var(b); }
inline Var operator/(double a, const Var& b) { return Var(a) / b; }
inline Var& operator+=(Var& a, const Var& b) { return a = a + b; }
inline Var& operator-=(Var& a, const Var& b) { return a = a - b; }
inline Var& operator*=(Var& a, const Var& b) { return a = a * b; }

inline Var exp(const Var& x) { return detail::unary(Op::Exp, x, std::exp(x.v)); }
inline Var log(const Var& x) { return detail::unary(Op::Log, x, std::log(x.v)); }
inline Var log1p(const Var& x) { return detail::unary(Op::Log1p, x, std::log1p(x.v)); }
inline Var sqrt(const Var& x) { return detail::unary(Op::Sqrt, x, std::sqrt(x.v)); }
inline Var tanh(const Var& x) { return detail::unary(Op::Tanh, x, std::tanh(x.v)); }
inline Var atan(const Var& x) { return detail::unary(Op::Atan, x, std::atan(x.v)); }
inline Var abs(const Var& x) { return detail::unary(Op::Abs, x, std::fabs(x.v)); }

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// bias + sum_k w[k] * x[k]
template <class Wt, class S>
inline S affine(const S& bias, const Wt* w, const S* x, std::size_t n) {
    S acc = bias;
    for (std::size_t k = 0; k < n; ++k) acc = acc + w[k] * x[k];
    return acc;
}

template <>
inline Var affine<Var, Var>(const Var& bias, const Var* w, const Var* x, std::size_t n) {
    if (n == 0) return bias;
    return bias + Tape::active()->dot({w, n}, {x, n});
}

/// Numerically stable softplus(x) = log(1 + e^x).
template <class S>
inline S softplus(const S& x) {
    if (value_of(x) > 0.0) return x + log1p(exp(-x));
    return log1p(exp(x));
}

/// sqrt(sq + eps^2): a norm that stays differentiable at coincidence.
template <class S>
inline S soft_norm(const S& sq, double eps) {
    return sqrt(sq + eps * eps);
}

// ---------------------------------------------------------------------------
// Derivative drivers
// ---------------------------------------------------------------------------

inline constexpr std::size_t kJetWidth = 4;
using PositionJet = Jet<kJetWidth>;

struct PositionDerivatives {
    double value = 0.0;
    std::vector<double> gradient;  // df/dx_d
    double laplacian = 0.0;        // sum_d d2f/dx_d2
};

/// f: callable S(std::span<const S>) invoked with S = PositionJet, once per
/// block of kJetWidth coordinate directions.
template <class F>
PositionDerivatives differentiate_positions(F&& f, std::span<const double> x) {
    const std::size_t n = x.size();
    PositionDerivatives out;
    out.gradient.assign(n, 0.0);
    std::vector<PositionJet> xs(n);
    if (n == 0) {
        out.value = value_of(f(std::span<const PositionJet>(xs)));
        return out;
    }
    for (std::size_t start = 0; start < n; start += kJetWidth) {
        for (std::size_t k = 0; k < n; ++k) {
            xs[k] = PositionJet(x[k]);
            if (k >= start && k < start + kJetWidth) xs[k].d[k - start] = 1.0;
        }
        const PositionJet r = f(std::span<const PositionJet>(xs));
        out.value = r.v;
        for (std::size_t l = 0; l < kJetWidth && start + l < n; ++l) {
            out.gradient[start + l] = r.d[l];
            out.laplacian += r.dd[l];
        }
    }
    return out;
}

template <class F>
std::vector<double> grad_positions(F&& f, std::span<const double> x) {
    return differentiate_positions(std::forward<F>(f), x).gradient;
}

template <class F>
double laplacian_positions(F&& f, std::span<const double> x) {
    return differentiate_positions(std::forward<F>(f), x).laplacian;
}

/// f: callable Var(std::span<const Var>) over the parameter vector.
/// Returns f(theta) and fills grad with df/dtheta.
template <class F>
double grad_params(F&& f, std::span<const double> theta, std::span<double> grad, Tape& tape) {
    tape.clear();
    TapeScope scope(tape);
    std::vector<Var> vars;
    vars.reserve(theta.size());
    for (double t : theta) vars.push_back(tape.leaf(t));
    const Var out = f(std::span<const Var>(vars));
    const std::vector<double> g = tape.gradient(out);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = g[k];
    return out.v;
}

template <class F>
std::vector<double> grad_params(F&& f, std::span<const double> theta) {
    Tape tape;
    std::vector<double> g(theta.size());
    grad_params(std::forward<F>(f), theta, g, tape);
    return g;
}

}  // namespace svmc::ad
