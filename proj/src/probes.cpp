#include "svmc/probes.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include <Eigen/Dense>

#include "svmc/hamiltonian.hpp"
#include "svmc/optimizer.hpp"
#include "svmc/rng.hpp"
#include "svmc/sampler.hpp"

namespace svmc {

using nlohmann::json;

void ProbeReport::write(std::ostream& out) const {
    for (const auto& r : records) {
        json line = r;
        line["probe"] = probe;
        line["seed"] = seed;
        out << line.dump() << '\n';
    }
    json s = summary;
    s["probe"] = probe;
    s["seed"] = seed;
    s["pass"] = pass;
    s["record"] = "summary";
    out << s.dump() << '\n';
}

ParamStore random_params(const Wavefunction& psi, std::uint64_t seed, double scale) {
    ParamStore p = psi.initial_params(seed);
    CounterRng rng(seed, 0x70a7a);
    for (double& v : p.values()) v += scale * rng.normal();
    return p;
}

ElectronConfiguration random_configuration(const SystemSpec& system, std::uint64_t seed, std::uint64_t stream) {
    CounterRng rng(seed ^ 0xc0ffee, stream);
    return initial_configuration(system, rng);
}

namespace {

std::uint64_t pick(CounterRng& rng, std::uint64_t n) { return rng.next_u64() % n; }

std::vector<int> spin_block(const SystemSpec& s, int spin) {
    std::vector<int> out;
    for (int e = 0; e < s.n_electrons(); ++e)
        if (s.spin_of(e) == spin) out.push_back(e);
    return out;
}

std::vector<std::pair<int, int>> opposite_spin_pairs(const SystemSpec& s) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < s.n_up; ++i)
        for (int j = s.n_up; j < s.n_electrons(); ++j) out.emplace_back(i, j);
    return out;
}

}  // namespace

ProbeReport antisymmetry_suite(const Wavefunction& psi, int trials, std::uint64_t seed, double tol) {
    ProbeReport rep{"antisymmetry", seed};
    const auto pairs = same_spin_pairs(psi.system());
    if (pairs.empty()) throw std::invalid_argument("antisymmetry_suite: no same-spin pair");
    const auto controls = opposite_spin_pairs(psi.system());
    CounterRng rng(seed, 0xa5);
    int violations = 0, nodes = 0, control_same = 0, control_flip = 0;
    double max_dev = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ParamStore theta = random_params(psi, seed + static_cast<std::uint64_t>(t));
        const ElectronConfiguration c = random_configuration(psi.system(), seed, static_cast<std::uint64_t>(t));
        const auto [i, j] = pairs[pick(rng, pairs.size())];
        const auto a = psi.log_psi(theta.values(), c);
        const auto b = psi.log_psi(theta.values(), transpose_electrons(c, i, j));
        if (a.sign == 0 && b.sign == 0) {
            ++nodes;
            continue;
        }
        const double dev = std::fabs(a.logmag - b.logmag);
        const bool ok = b.sign == -a.sign && a.sign != 0 && dev < tol;
        max_dev = std::max(max_dev, dev);
        if (!ok) {
            ++violations;
            rep.records.push_back({{"trial", t},
                                   {"i", i},
                                   {"j", j},
                                   {"sign", a.sign},
                                   {"sign_swapped", b.sign},
                                   {"logmag", a.logmag},
                                   {"logmag_swapped", b.logmag},
                                   {"coords", std::vector<double>(c.coords().begin(), c.coords().end())}});
        }
        if (!controls.empty()) {
            const auto [k, l] = controls[pick(rng, controls.size())];
            const auto d = psi.log_psi(theta.values(), transpose_electrons(c, k, l));
            if (d.sign == a.sign)
                ++control_same;
            else
                ++control_flip;
        }
    }
    rep.pass = violations == 0;
    rep.summary = {{"trials", trials},
                   {"violations", violations},
                   {"both_nodes", nodes},
                   {"max_logmag_deviation", max_dev},
                   {"tolerance", tol},
                   {"control_opposite_spin_same_sign", control_same},
                   {"control_opposite_spin_flipped_sign", control_flip}};
    return rep;
}

NodeCrossings node_crossing_probe(const Wavefunction& psi, std::span<const double> theta,
                                  const ElectronConfiguration& c, int i, int j, int resolution, double tolerance) {
    if (i == j) throw std::invalid_argument("node_crossing_probe: i == j");
    if (c.spin(i) != c.spin(j)) throw std::invalid_argument("node_crossing_probe: electrons have opposite spin");
    if (resolution < 100) throw std::invalid_argument("node_crossing_probe: resolution below 100");
    auto sign_at = [&](double t) { return psi.log_psi(theta, exchange_path(c, i, j, t)).sign; };
    const int s0 = sign_at(0.0);
    const int s1 = sign_at(1.0);
    if (s0 == 0 || s1 == 0) throw std::invalid_argument("node_crossing_probe: path endpoint is a node");

    NodeCrossings out;
    double t_prev = 0.0;
    int s_prev = s0;
    for (int k = 1; k <= resolution; ++k) {
        const double t = static_cast<double>(k) / resolution;
        const int s = k == resolution ? s1 : sign_at(t);
        if (s == 0) continue;
        if (s != s_prev) {
            double lo = t_prev, hi = t;
            while (hi - lo > tolerance) {
                const double mid = 0.5 * (lo + hi);
                const int sm = sign_at(mid);
                if (sm == 0) {
                    lo = hi = mid;
                    break;
                }
                (sm == s_prev ? lo : hi) = mid;
            }
            out.locations.push_back(0.5 * (lo + hi));
            ++out.count;
        }
        t_prev = t;
        s_prev = s;
    }
    return out;
}

ElectronConfiguration cycle_path(const ElectronConfiguration& c, int i, int j, int k, double t) {
    ElectronConfiguration out = c;
    const Vec3 ri = c.position(i), rj = c.position(j), rk = c.position(k);
    Vec3 a, b, d;
    for (int x = 0; x < 3; ++x) {
        a[x] = (1.0 - t) * ri[x] + t * rj[x];
        b[x] = (1.0 - t) * rj[x] + t * rk[x];
        d[x] = (1.0 - t) * rk[x] + t * ri[x];
    }
    out.set_position(i, a);
    out.set_position(j, b);
    out.set_position(k, d);
    return out;
}

ProbeReport node_suite(const Wavefunction& psi, int paths, std::uint64_t seed, bool expect_crossing, int resolution) {
    ProbeReport rep{"nodes", seed};
    const auto pairs = same_spin_pairs(psi.system());
    if (pairs.empty()) throw std::invalid_argument("node_suite: no same-spin pair");
    CounterRng rng(seed, 0x0de);
    int crossed = 0, skipped = 0;
    for (int p = 0; p < paths; ++p) {
        const ParamStore theta = random_params(psi, seed + static_cast<std::uint64_t>(p));
        const ElectronConfiguration c = random_configuration(psi.system(), seed, static_cast<std::uint64_t>(p));
        const auto [i, j] = pairs[pick(rng, pairs.size())];
        try {
            const NodeCrossings nc = node_crossing_probe(psi, theta.values(), c, i, j, resolution);
            crossed += nc.count > 0 ? 1 : 0;
            rep.records.push_back({{"path", p}, {"i", i}, {"j", j}, {"crossings", nc.count}, {"t", nc.locations}});
        } catch (const std::invalid_argument& e) {
            ++skipped;
            rep.records.push_back({{"path", p}, {"i", i}, {"j", j}, {"error", e.what()}});
        }
    }
    rep.pass = !expect_crossing || crossed == paths;
    rep.summary = {{"paths", paths},
                   {"paths_with_crossing", crossed},
                   {"endpoint_nodes", skipped},
                   {"resolution", resolution},
                   {"asserted", expect_crossing},
                   {"model", psi.name()}};
    return rep;
}

ProbeReport triple_exchange_suite(const Wavefunction& psi, int paths, std::uint64_t seed, int resolution) {
    ProbeReport rep{"triple_exchange", seed};
    std::vector<int> block = spin_block(psi.system(), +1);
    if (block.size() < 3) block = spin_block(psi.system(), -1);
    if (block.size() < 3) throw std::invalid_argument("triple_exchange_suite: needs three same-spin electrons");
    CounterRng rng(seed, 0x3c);
    std::vector<int> histogram;
    for (int p = 0; p < paths; ++p) {
        const ParamStore theta = random_params(psi, seed + static_cast<std::uint64_t>(p));
        const ElectronConfiguration c = random_configuration(psi.system(), seed, static_cast<std::uint64_t>(p));
        std::vector<int> pick3 = block;
        for (std::size_t a = 0; a < 3; ++a) std::swap(pick3[a], pick3[a + pick(rng, pick3.size() - a)]);
        int count = 0;
        int s_prev = psi.log_psi(theta.values(), c).sign;
        for (int k = 1; k <= resolution; ++k) {
            const double t = static_cast<double>(k) / resolution;
            const int s = psi.log_psi(theta.values(), cycle_path(c, pick3[0], pick3[1], pick3[2], t)).sign;
            if (s == 0) continue;
            if (s_prev != 0 && s != s_prev) ++count;
            s_prev = s;
        }
        if (static_cast<std::size_t>(count) >= histogram.size()) histogram.resize(count + 1, 0);
        ++histogram[count];
        rep.records.push_back({{"path", p}, {"electrons", {pick3[0], pick3[1], pick3[2]}}, {"crossings", count}});
    }
    rep.summary = {{"paths", paths}, {"crossing_histogram", histogram}, {"model", psi.name()}};
    return rep;
}

// ---------------------------------------------------------------------------
// Smoothness
// ---------------------------------------------------------------------------

namespace {

// Psi / exp(ref) as a plain number.
double scaled_value(const SignedLog<double>& v, double ref) {
    return v.sign == 0 ? 0.0 : v.sign * std::exp(v.logmag - ref);
}

// Smallest gap between sorted scores of each sortlet, skipping the pair (i, j)
// in sortlet 0.
double min_other_gap(const std::vector<double>& alpha, std::size_t n, std::size_t k_out, int i, int j) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_out; ++k) {
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                if (k == 0 && static_cast<int>(a) == std::min(i, j) && static_cast<int>(b) == std::max(i, j)) continue;
                best = std::min(best, std::fabs(alpha[k * n + a] - alpha[k * n + b]));
            }
    }
    return best;
}

}  // namespace

ProbeReport smoothness_probe(const SortletAnsatz& psi, int trials, std::uint64_t seed, double single_tol,
                             double double_tol) {
    ProbeReport rep{"smoothness", seed};
    const SystemSpec& sys = psi.system();
    const auto pairs = same_spin_pairs(sys);
    if (pairs.empty()) throw std::invalid_argument("smoothness_probe: no same-spin pair");
    const std::size_t n = static_cast<std::size_t>(sys.n_electrons());
    const std::size_t k_out = static_cast<std::size_t>(psi.sortlets());
    const std::vector<double> steps = {1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6};
    CounterRng rng(seed, 0x5300);

    int single_done = 0, single_fail = 0, construction_failed = 0;
    double worst_single = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ParamStore theta = random_params(psi, seed + static_cast<std::uint64_t>(t));
        const ElectronConfiguration c = random_configuration(sys, seed, static_cast<std::uint64_t>(t));
        const auto [i, j] = pairs[pick(rng, pairs.size())];
        Vec3 bend;
        for (double& x : bend) x = 0.5 * rng.normal();
        auto path = [&](double s) {
            ElectronConfiguration p = exchange_path(c, i, j, s);
            Vec3 r = p.position(i);
            for (int d = 0; d < 3; ++d) r[d] += s * (1.0 - s) * bend[d];
            p.set_position(i, r);
            return p;
        };
        auto score_gap = [&](double s) {
            const auto a = psi.scores(theta.values(), path(s));
            return a[i] - a[j];
        };
        double lo = 0.0, hi = 1.0;
        const double f_lo = score_gap(lo);
        if (f_lo == 0.0 || score_gap(hi) == 0.0 || (f_lo > 0.0) == (score_gap(hi) > 0.0)) {
            ++construction_failed;
            rep.records.push_back({{"case", "single"}, {"trial", t}, {"error", "no sign change of the score gap"}});
            continue;
        }
        for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            const double fm = score_gap(mid);
            if (fm == 0.0) {
                lo = hi = mid;
                break;
            }
            ((fm > 0.0) == (f_lo > 0.0) ? lo : hi) = mid;
        }
        const double t_star = 0.5 * (lo + hi);
        const double clearance = min_other_gap(psi.scores(theta.values(), path(t_star)), n, k_out, i, j);
        if (clearance < 1e-3) {
            ++construction_failed;
            rep.records.push_back(
                {{"case", "single"}, {"trial", t}, {"t_star", t_star}, {"error", "another tie nearby"}});
            continue;
        }
        const double ref = psi.log_psi(theta.values(), path(t_star + 1e-2)).logmag;
        auto value = [&](double s) { return scaled_value(psi.log_psi(theta.values(), path(s)), ref); };
        const double v0 = value(t_star);
        double best = std::numeric_limits<double>::infinity();
        double best_h = 0.0, best_left = 0.0, best_right = 0.0;
        for (double h : steps) {
            const double left = (3.0 * v0 - 4.0 * value(t_star - h) + value(t_star - 2.0 * h)) / (2.0 * h);
            const double right = (-3.0 * v0 + 4.0 * value(t_star + h) - value(t_star + 2.0 * h)) / (2.0 * h);
            const double rel = std::fabs(left - right) / std::max(std::fabs(left), std::fabs(right));
            if (rel < best) {
                best = rel;
                best_h = h;
                best_left = left;
                best_right = right;
            }
        }
        ++single_done;
        const bool ok = best < single_tol;
        single_fail += ok ? 0 : 1;
        worst_single = std::max(worst_single, best);
        rep.records.push_back({{"case", "single"},
                               {"trial", t},
                               {"i", i},
                               {"j", j},
                               {"t_star", t_star},
                               {"clearance", clearance},
                               {"h", best_h},
                               {"left", best_left},
                               {"right", best_right},
                               {"relative_difference", best},
                               {"pass", ok}});
    }

    // Double tie: exchange one up pair and one down pair together.
    const auto ups = spin_block(sys, +1), downs = spin_block(sys, -1);
    int double_done = 0, double_fail = 0;
    double worst_double = 0.0;
    if (ups.size() >= 2 && downs.size() >= 2) {
        for (int t = 0; t < trials; ++t) {
            const ParamStore theta = random_params(psi, seed + 7919u + static_cast<std::uint64_t>(t));
            const ElectronConfiguration c = random_configuration(sys, seed ^ 0xd0b1e, static_cast<std::uint64_t>(t));
            const int i = ups[0], j = ups[1], k = downs[0], l = downs[1];
            auto path = [&](double s) { return exchange_path(exchange_path(c, i, j, s), k, l, s); };
            double ref = -std::numeric_limits<double>::infinity();
            for (int q = 0; q <= 20; ++q) {
                const auto v = psi.log_psi(theta.values(), path(q / 20.0));
                if (v.sign != 0) ref = std::max(ref, v.logmag);
            }
            auto value = [&](double s) { return scaled_value(psi.log_psi(theta.values(), path(s)), ref); };
            const double h = 1e-6;
            const double central = std::fabs(value(0.5 + h) - value(0.5 - h)) / (2.0 * h);
            const double h1 = 1e-10;
            const double one_sided = std::fabs(value(0.5 + h1) - value(0.5)) / h1;
            ++double_done;
            const bool ok = central < double_tol;
            double_fail += ok ? 0 : 1;
            worst_double = std::max(worst_double, central);
            rep.records.push_back({{"case", "double"},
                                   {"trial", t},
                                   {"pairs", {{i, j}, {k, l}}},
                                   {"value_at_tie", value(0.5)},
                                   {"central_derivative", central},
                                   {"one_sided_derivative_h1e-10", one_sided},
                                   {"pass", ok}});
        }
    }

    // Away from ties: jet gradients against central differences.
    int smooth_fail = 0;
    double worst_smooth = 0.0;
    for (int t = 0; t < trials; ++t) {
        const ParamStore theta = random_params(psi, seed + 104729u + static_cast<std::uint64_t>(t));
        const ElectronConfiguration c = random_configuration(sys, seed ^ 0x5eed, static_cast<std::uint64_t>(t));
        const LocalDerivatives d = psi.position_derivatives(theta.values(), c);
        if (d.value.sign == 0) continue;
        // Fourth-order central differences; near a node log|Psi| is singular,
        // so the best of a few steps is kept and stencils that change sign
        // are skipped.
        auto shifted = [&](std::size_t x, double dx) {
            ElectronConfiguration q = c;
            q.coords()[x] += dx;
            return psi.log_psi(theta.values(), q);
        };
        double num = 0.0, den = 0.0;
        bool straddles = false;
        for (std::size_t x = 0; x < c.coords().size() && !straddles; ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (double h : {1e-3, 3e-4, 1e-4}) {
                const SignedLog<double> f[4] = {shifted(x, 2 * h), shifted(x, h), shifted(x, -h), shifted(x, -2 * h)};
                for (const auto& v : f) straddles = straddles || v.sign != d.value.sign;
                if (straddles) break;
                const double fd =
                    (-f[0].logmag + 8.0 * f[1].logmag - 8.0 * f[2].logmag + f[3].logmag) / (12.0 * h);
                best = std::min(best, std::fabs(fd - d.grad_log[x]));
            }
            num = std::max(num, best);
            den = std::max(den, std::fabs(d.grad_log[x]));
        }
        if (straddles) continue;
        const double rel = num / den;
        worst_smooth = std::max(worst_smooth, rel);
        smooth_fail += rel < 1e-6 ? 0 : 1;
    }

    rep.pass = single_fail == 0 && double_fail == 0 && smooth_fail == 0 && single_done > 0;
    rep.summary = {{"trials", trials},
                   {"single_tie_checked", single_done},
                   {"single_tie_failed", single_fail},
                   {"single_tie_construction_failed", construction_failed},
                   {"single_tie_worst_relative_difference", worst_single},
                   {"single_tie_tolerance", single_tol},
                   {"double_tie_checked", double_done},
                   {"double_tie_failed", double_fail},
                   {"double_tie_worst_derivative", worst_double},
                   {"double_tie_tolerance", double_tol},
                   {"smooth_points_failed", smooth_fail},
                   {"smooth_points_worst_relative_error", worst_smooth}};
    return rep;
}

// ---------------------------------------------------------------------------
// Variational floor
// ---------------------------------------------------------------------------

ProbeReport variational_floor_check(int dim, int draws, std::uint64_t seed) {
    if (dim < 1 || dim > 200) throw std::invalid_argument("variational_floor_check: dim must be in [1, 200]");
    ProbeReport rep{"variational", seed};
    CounterRng rng(seed, 0xe16);
    Eigen::MatrixXd a(dim, dim);
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) a(r, c) = rng.normal();
    const Eigen::MatrixXd h = 0.5 * (a + a.transpose());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    const double lambda_min = eig.eigenvalues()(0);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());

    auto rayleigh = [&](const Eigen::VectorXd& v) { return v.dot(h * v) / v.squaredNorm(); };
    int violations = 0;
    double min_r = std::numeric_limits<double>::infinity();
    for (int d = 0; d < draws; ++d) {
        Eigen::VectorXd v(dim);
        for (int k = 0; k < dim; ++k) v(k) = rng.normal();
        const double r = rayleigh(v);
        min_r = std::min(min_r, r);
        if (r < lambda_min - 1e-12 * scale) ++violations;
    }
    const double at_min = rayleigh(eig.eigenvectors().col(0));
    const double gap = std::fabs(at_min - lambda_min);
    rep.pass = violations == 0 && gap < 1e-10 * scale;
    rep.summary = {{"dim", dim},
                   {"draws", draws},
                   {"lambda_min", lambda_min},
                   {"min_sampled_quotient", min_r},
                   {"violations", violations},
                   {"quotient_at_eigenvector_minus_lambda_min", gap}};
    return rep;
}

// ---------------------------------------------------------------------------
// Gradient check on the one-dimensional toy
// ---------------------------------------------------------------------------

namespace {

double softplus_d(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// f'(x) of the toy profile, written out by hand.
double toy_slope(std::span<const double> t, double x) {
    const double a = softplus_d(t[0]), b = softplus_d(t[1]);
    const double th = std::tanh(t[3] * x + t[4]);
    return -2.0 * a * x - 0.4 * b * x * x * x + t[2] * t[3] * (1.0 - th * th) + t[5];
}

struct ToyGrid {
    std::vector<double> x;
    std::vector<double> weight;  // trapezoid weight * psi^2, unnormalised
};

ToyGrid toy_grid(std::span<const double> theta, int points, double half_width) {
    ToyGrid g;
    const double dx = 2.0 * half_width / (points - 1);
    g.x.resize(points);
    std::vector<double> f(points);
    double f_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < points; ++k) {
        g.x[k] = -half_width + k * dx;
        f[k] = Toy1dModel::log_psi_x(theta, g.x[k]);
        f_max = std::max(f_max, f[k]);
    }
    g.weight.resize(points);
    for (int k = 0; k < points; ++k) {
        const double end = (k == 0 || k == points - 1) ? 0.5 : 1.0;
        g.weight[k] = end * dx * std::exp(2.0 * (f[k] - f_max));
    }
    return g;
}

}  // namespace

double toy1d_rayleigh_quotient(std::span<const double> theta, int points, double half_width) {
    const ToyGrid g = toy_grid(theta, points, half_width);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.x.size(); ++k) {
        const double x = g.x[k];
        const double s = toy_slope(theta, x);
        num += g.weight[k] * (0.5 * s * s + 0.5 * x * x + 0.1 * x * x * x * x);
        den += g.weight[k];
    }
    return num / den + 1.0;
}

GradientComparison toy1d_gradient_check(const Toy1dModel& psi, std::span<const double> theta,
                                        const std::string& estimator, double h, int samples) {
    const std::size_t p = psi.n_params();
    GradientComparison out;
    out.reference.resize(p);
    std::vector<double> tp(theta.begin(), theta.end());
    for (std::size_t k = 0; k < p; ++k) {
        tp[k] = theta[k] + h;
        const double up = toy1d_rayleigh_quotient(tp);
        tp[k] = theta[k] - h;
        const double down = toy1d_rayleigh_quotient(tp);
        tp[k] = theta[k];
        out.reference[k] = (up - down) / (2.0 * h);
    }

    auto evaluate_at = [&](const std::vector<double>& xs, std::vector<double>& e, std::vector<double>& rows) {
        e.resize(xs.size());
        rows.assign(xs.size() * p, 0.0);
        const auto m = static_cast<std::ptrdiff_t>(xs.size());
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t k = 0; k < m; ++k) {
            const ElectronConfiguration c({xs[k], 0.0, 0.0}, {1});
            const auto le = local_energy(psi, PotentialKind::Toy1d, theta, c);
            e[k] = le ? le->total : std::numeric_limits<double>::quiet_NaN();
            psi.param_gradient(theta, c, std::span<double>(rows.data() + k * p, p));
        }
    };

    std::vector<double> e, rows;
    if (estimator == "weighted") {
        const ToyGrid g = toy_grid(theta, 20001, 10.0);
        evaluate_at(g.x, e, rows);
        out.estimate = energy_gradient_weighted(g.weight, e, rows, p);
    } else if (estimator == "sampled" || estimator == "inner-2") {
        // Deterministic quantiles of |psi|^2 by inverting the trapezoid CDF.
        const ToyGrid g = toy_grid(theta, 20001, 10.0);
        std::vector<double> cdf(g.x.size(), 0.0);
        for (std::size_t k = 1; k < g.x.size(); ++k) {
            const double wl = g.weight[k - 1] / (k - 1 == 0 ? 0.5 : 1.0);
            const double wr = g.weight[k] / (k == g.x.size() - 1 ? 0.5 : 1.0);
            cdf[k] = cdf[k - 1] + 0.5 * (wl + wr);
        }
        std::vector<double> xs(static_cast<std::size_t>(samples));
        std::size_t seg = 1;
        for (int s = 0; s < samples; ++s) {
            const double u = (s + 0.5) / samples * cdf.back();
            while (seg + 1 < cdf.size() && cdf[seg] < u) ++seg;
            const double f = (u - cdf[seg - 1]) / (cdf[seg] - cdf[seg - 1]);
            xs[s] = g.x[seg - 1] + f * (g.x[seg] - g.x[seg - 1]);
        }
        evaluate_at(xs, e, rows);
        if (estimator == "sampled") {
            out.estimate = energy_gradient(e, rows, p, 0.0);
        } else {
            const double n = static_cast<double>(samples);
            double e_mean = 0.0;
            for (double v : e) e_mean += v / n;
            out.estimate.assign(p, 0.0);
            for (std::size_t k = 0; k < p; ++k) {
                double eg = 0.0, gm = 0.0;
                for (int s = 0; s < samples; ++s) {
                    eg += e[s] * rows[s * p + k] / n;
                    gm += rows[s * p + k] / n;
                }
                out.estimate[k] = 2.0 * eg - 2.0 * 2.0 * e_mean * gm;
            }
        }
    } else {
        throw std::invalid_argument("toy1d_gradient_check: unknown estimator '" + estimator + "'");
    }

    double ref_max = 0.0;
    for (double r : out.reference) ref_max = std::max(ref_max, std::fabs(r));
    for (std::size_t k = 0; k < p; ++k) {
        const double denom = std::max(std::fabs(out.reference[k]), 1e-2 * ref_max);
        out.max_relative_error = std::max(out.max_relative_error, std::fabs(out.estimate[k] - out.reference[k]) / denom);
    }
    return out;
}

ProbeReport gradcheck(const Toy1dModel& psi, std::span<const double> theta, std::uint64_t seed, double tol) {
    ProbeReport rep{"gradcheck", seed};
    bool pass = true;
    for (const char* name : {"weighted", "sampled", "inner-2"}) {
        const GradientComparison g = toy1d_gradient_check(psi, theta, name);
        const bool asserted = std::string(name) != "inner-2";
        const bool ok = g.max_relative_error < tol;
        if (asserted) pass = pass && ok;
        rep.records.push_back({{"estimator", name},
                               {"reference", g.reference},
                               {"estimate", g.estimate},
                               {"max_relative_error", g.max_relative_error},
                               {"asserted", asserted},
                               {"within_tolerance", ok}});
    }
    rep.pass = pass;
    rep.summary = {{"tolerance", tol}, {"energy", toy1d_rayleigh_quotient(theta)}};
    return rep;
}

}  // namespace svmc
