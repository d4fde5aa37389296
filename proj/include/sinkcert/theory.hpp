#pragma once

// Theorem-level machinery: explicit convergence bounds, per-block limit
// potentials and the decomposition value of the objective, approximate
// minimizers with certified gap/variation trade-off, the rate function and
// its closed-form upper envelope, a grid check for the scalar infimum lemma,
// and exact rational references for the slow two-block instance.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sinkhorn.hpp"
#include "structure.hpp"

namespace sinkcert {

// ---------------------------------------------------------------------------
// explicit bound curves

/// General-start bound: e_total(k) <= sqrt(2 V1 / (tau k)) for k >= 1.
inline double slow_bound(double v1, double tau, long k) {
    if (k < 1) throw std::invalid_argument("slow_bound: k must be >= 1");
    return std::sqrt(2.0 * std::max(v1, 0.0) / (tau * static_cast<double>(k)));
}

/// Exactly-scalable bound: 4(K - theta) / (tau Delta sqrt(k(k-2))), k >= 3.
inline double warmup_bound(const Constants& c, double delta, double tau, long k) {
    if (k < 3) throw std::invalid_argument("warmup_bound: k must be >= 3");
    const double kk = static_cast<double>(k);
    return 4.0 * (c.K - c.theta) / (tau * delta * std::sqrt(kk * (kk - 2.0)));
}

inline long main_bound_min_k(int ell) {
    return static_cast<long>(std::ceil(2.0 * std::exp(1.0) * ell * ell + 3.0));
}

/// Asymptotically-scalable bound, valid for k >= ceil(2 e ell^2 + 3), ell >= 1:
///   (4 ell / sqrt(k(k-2))) * [ (K - ultheta)(1 + 2(1 + 1/ell)/Delta)/tau
///                              + log((k-2)/(2 ell^2)) ].
inline double main_bound(const Constants& c, double delta, double tau, int ell, long k) {
    if (ell < 1)
        throw std::invalid_argument(
            "main_bound: ell = 0 is the exactly-scalable case; use warmup_bound");
    if (k < main_bound_min_k(ell)) throw std::invalid_argument("main_bound: k below validity");
    const double kk = static_cast<double>(k);
    const double le = static_cast<double>(ell);
    const double bracket = (c.K - c.ul_theta) * (1.0 + 2.0 * (1.0 + 1.0 / le) / delta) / tau +
                           std::log((kk - 2.0) / (2.0 * le * le));
    return 4.0 * le / std::sqrt(kk * (kk - 2.0)) * bracket;
}

struct BoundCurve {
    std::string kind;  // "slow" | "warmup" | "main"
    long valid_from = 1;
    double tau = 1.0;
    double v1 = 0.0;
    Constants consts;
    double delta = 0.0;
    int ell = 0;

    std::optional<double> evaluate(long k) const {
        if (k < valid_from) return std::nullopt;
        if (kind == "slow") return slow_bound(v1, tau, k);
        if (kind == "warmup") return warmup_bound(consts, delta, tau, k);
        return main_bound(consts, delta, tau, ell, k);
    }
};

inline BoundCurve make_slow_curve(double v1, double tau) {
    BoundCurve b;
    b.kind = "slow";
    b.valid_from = 1;
    b.tau = tau;
    b.v1 = v1;
    return b;
}

inline BoundCurve make_warmup_curve(const Constants& c, double delta, double tau) {
    BoundCurve b;
    b.kind = "warmup";
    b.valid_from = 3;
    b.tau = tau;
    b.consts = c;
    b.delta = delta;
    return b;
}

inline BoundCurve make_main_curve(const Constants& c, double delta, double tau, int ell) {
    if (ell < 1)
        throw std::invalid_argument(
            "make_main_curve: ell = 0 is the exactly-scalable case; use the warm-up curve");
    BoundCurve b;
    b.kind = "main";
    b.valid_from = main_bound_min_k(ell);
    b.tau = tau;
    b.consts = c;
    b.delta = delta;
    b.ell = ell;
    return b;
}

// ---------------------------------------------------------------------------
// block minimizers and the decomposition value of Psi

struct BlockSolveConfig {
    double tol = 1e-12;
    long max_iters = 500000;
};

struct BlockSolution {
    long iterations = 0;
    double residual = 0.0;
    double min_psi = 0.0;        // tau log m_p - <mu, f*> - <nu, g*> over the block
    double normalization = 0.0;  // sum over block edges of exp((f*+g*-C)/tau) mu nu
};

struct BlockMinimizers {
    DMDecomposition dm;
    std::vector<BlockSolution> blocks;
    std::vector<double> f_star, g_star;  // full-length assembled potentials
    double inf_psi = 0.0;
    double max_residual = 0.0;
};

/// Solve each block restriction to its limit potentials. Potentials are
/// shifted so that max_j g*_j = 0 within every block and so that the block's
/// partition sum equals its mass; the per-block minimum values assemble into
/// inf Psi = sum_p (min Psi^p - tau log m_p).
inline BlockMinimizers block_minimizers(const Problem& p, const DMDecomposition& dm,
                                        BlockSolveConfig cfg = {}) {
    BlockMinimizers out;
    out.dm = dm;
    out.f_star.assign(p.m(), 0.0);
    out.g_star.assign(p.n(), 0.0);

    for (std::size_t bi = 0; bi < dm.blocks.size(); ++bi) {
        const auto& blk = dm.blocks[bi];
        const Problem sub = restrict_to_block(p, blk);
        std::vector<double> g(sub.n(), 0.0);
        std::vector<double> f = f_of_g(sub, g);
        double resid = marginal_error(sub, coupling(sub, f, g)).e_total;
        long k = 1;
        while (resid > cfg.tol && k < cfg.max_iters) {
            ++k;
            if (k % 2 == 0)
                g = g_of_f(sub, f);
            else
                f = f_of_g(sub, g);
            resid = marginal_error(sub, coupling(sub, f, g)).e_total;
        }
        if (resid > cfg.tol)
            throw std::runtime_error("block_minimizers: tolerance not reached (best residual " +
                                     std::to_string(resid) + " after " + std::to_string(k) +
                                     " iterations)");

        const double log_mass = std::log(to_double(blk.mass));
        double shift = -std::numeric_limits<double>::infinity();
        for (double x : g) shift = std::max(shift, x);
        BlockSolution sol;
        sol.iterations = k;
        sol.residual = resid;
        for (std::size_t i = 0; i < blk.rows.size(); ++i)
            out.f_star[blk.rows[i]] = f[i] + shift - p.tau * log_mass;
        for (std::size_t j = 0; j < blk.cols.size(); ++j)
            out.g_star[blk.cols[j]] = g[j] - shift;

        sol.min_psi = p.tau * log_mass;
        for (int i : blk.rows) sol.min_psi -= p.mu[i] * out.f_star[i];
        for (int j : blk.cols) sol.min_psi -= p.nu[j] * out.g_star[j];

        // partition sum over the block's edges must equal the block mass
        double smax = -std::numeric_limits<double>::infinity();
        std::vector<double> terms;
        for (const auto& e : p.cost.entries) {
            if (dm.block_of_row[e.i] != static_cast<int>(bi)) continue;
            if (dm.block_of_col[e.j] != static_cast<int>(bi)) continue;
            terms.push_back((out.f_star[e.i] + out.g_star[e.j] - e.c) / p.tau +
                            p.log_mu[e.i] + p.log_nu[e.j]);
            smax = std::max(smax, terms.back());
        }
        double acc = 0.0;
        for (double t : terms) acc += std::exp(t - smax);
        sol.normalization = std::exp(smax + std::log(acc));
        if (std::abs(sol.normalization - to_double(blk.mass)) > 1e-8)
            throw std::logic_error("block_minimizers: block partition sum drifted off its mass");

        out.inf_psi += sol.min_psi - p.tau * log_mass;
        out.max_residual = std::max(out.max_residual, sol.residual);
        out.blocks.push_back(sol);
    }
    return out;
}

inline double inf_psi(const Problem& p, const DMDecomposition& dm, BlockSolveConfig cfg = {}) {
    return block_minimizers(p, dm, cfg).inf_psi;
}

// ---------------------------------------------------------------------------
// approximate minimizers

struct ApproxMinimizer {
    std::vector<double> g_hat;
    double eps = 0.0;
    double rho = 0.0;
    double achieved_gap = 0.0;
    double var_norm = 0.0;
    double var_bound = 0.0;
};

namespace detail {

/// Witness with offsets rho * level(block): shared core of the eps-based
/// construction and the rate-function grid (which feeds rho directly to avoid
/// underflowing eps).
inline ApproxMinimizer approx_from_rho(const Problem& p, const BlockMinimizers& bm, double rho) {
    ApproxMinimizer a;
    a.rho = rho;
    a.g_hat = bm.g_star;
    for (int j = 0; j < p.n(); ++j)
        a.g_hat[j] -= rho * static_cast<double>(bm.dm.levels[bm.dm.block_of_col[j]]);
    const std::vector<double> f_hat = f_of_g(p, a.g_hat);
    a.achieved_gap = psi(p, f_hat, a.g_hat) - bm.inf_psi;
    a.var_norm = var_seminorm(a.g_hat);
    return a;
}

}  // namespace detail

/// eps-approximate minimizer of Psi built from the block potentials by
/// shifting each block down by rho * level, rho = tau log(tau/eps)
/// + (K - ultheta)(1 + 2/Delta). Valid for eps in (0, tau e^{(K-ultheta)(1+2/Delta)/tau}].
inline ApproxMinimizer approx_minimizer(const Problem& p, const BlockMinimizers& bm,
                                        const Rational& delta, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("approx_minimizer: eps must be positive");
    const Constants c = compute_constants(p);
    const double d = to_double(delta);
    const double spread = (c.K - c.ul_theta) * (1.0 + 2.0 / d);
    // compare in log space; the raw upper limit tau*exp(spread/tau) may overflow
    if (std::log(eps) > std::log(p.tau) + spread / p.tau + 1e-9)
        throw std::invalid_argument("approx_minimizer: eps above the admissible range");

    const double rho = std::max(0.0, p.tau * std::log(p.tau / eps) + spread);
    ApproxMinimizer a = detail::approx_from_rho(p, bm, rho);
    a.eps = eps;
    const double ell = static_cast<double>(bm.dm.ell);
    a.var_bound = 0.5 * p.tau * ell * std::log(p.tau / eps) +
                  (c.K - c.ul_theta) * (0.5 * ell + (1.0 + ell) / d);
    return a;
}

// ---------------------------------------------------------------------------
// rate function

struct QEstimate {
    double q_hat = 0.0;
    double best_rho = 0.0;
    double best_gap = 0.0;
    double best_var = 0.0;
};

/// Upper estimate of Q(alpha) = inf over g of [Psi(f[g],g) - inf Psi
/// + alpha var(g - g0)^2] with g0 = 0, taken over the zero witness and a
/// geometric eps grid of block-shift witnesses (linear in rho), refined once.
inline QEstimate rate_function_estimate(const Problem& p, const BlockMinimizers& bm,
                                        const Rational& delta, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("rate_function_estimate: alpha must be positive");
    const Constants c = compute_constants(p);
    const double d = to_double(delta);
    const double spread = (c.K - c.ul_theta) * (1.0 + 2.0 / d);

    QEstimate best;
    best.q_hat = std::numeric_limits<double>::infinity();
    auto offer = [&](const ApproxMinimizer& a) {
        const double obj = a.achieved_gap + alpha * a.var_norm * a.var_norm;
        if (obj < best.q_hat) {
            best.q_hat = obj;
            best.best_rho = a.rho;
            best.best_gap = a.achieved_gap;
            best.best_var = a.var_norm;
        }
    };

    {  // zero witness caps the estimate by the cold-start gap
        const std::vector<double> zero(p.n(), 0.0);
        ApproxMinimizer a;
        a.g_hat = zero;
        a.achieved_gap = psi(p, f_of_g(p, zero), zero) - bm.inf_psi;
        a.var_norm = 0.0;
        offer(a);
    }

    const int grid = 600;
    const double rho_cap =
        spread + p.tau * (std::log(1.0 / std::min(alpha, 0.5)) + 50.0);
    for (int t = 0; t <= grid; ++t)
        offer(detail::approx_from_rho(p, bm, rho_cap * t / grid));
    const double center = best.best_rho;
    const double half_span = rho_cap / grid;
    for (int t = 0; t <= grid; ++t) {
        const double rho = std::max(0.0, center - half_span + 2.0 * half_span * t / grid);
        offer(detail::approx_from_rho(p, bm, rho));
    }
    return best;
}

/// Largest alpha the closed-form envelope covers, in log space:
/// log alpha_max = (K-ultheta)(1+2/Delta)/tau - 1 - log(tau ell max{ell/2, (K-ultheta)/(tau Delta)}).
inline double rate_alpha_max_log(const Constants& c, double tau, double delta, int ell) {
    if (ell < 1) throw std::invalid_argument("rate_alpha_max_log: ell must be >= 1");
    const double le = static_cast<double>(ell);
    const double denom = tau * le * std::max(le / 2.0, (c.K - c.ul_theta) / (tau * delta));
    return (c.K - c.ul_theta) * (1.0 + 2.0 / delta) / tau - 1.0 - std::log(denom);
}

/// Closed-form envelope Q(alpha) <= alpha tau^2 ell^2 [2M/(tau ell)
/// + log(2/(alpha tau ell^2))]^2 with M = (K-ultheta)(ell/2 + (1+ell)/Delta).
/// Empty when alpha exceeds the validity threshold.
inline std::optional<double> rate_function_upper(const Constants& c, double tau, double delta,
                                                 int ell, double alpha) {
    if (ell < 1) throw std::invalid_argument("rate_function_upper: ell must be >= 1");
    if (!(alpha > 0.0)) throw std::invalid_argument("rate_function_upper: alpha must be positive");
    if (std::log(alpha) > rate_alpha_max_log(c, tau, delta, ell) + 1e-12) return std::nullopt;
    const double le = static_cast<double>(ell);
    const double M = (c.K - c.ul_theta) * (le / 2.0 + (1.0 + le) / delta);
    const double bracket = 2.0 * M / (tau * le) + std::log(2.0 / (alpha * tau * le * le));
    return alpha * tau * tau * le * le * bracket * bracket;
}

// ---------------------------------------------------------------------------
// scalar infimum lemma check

struct TechnicalCheck {
    double lhs = 0.0;  // grid infimum of x + alpha (b log(1/x) + M)^2 over (0, X]
    double rhs = 0.0;  // 4 alpha b^2 [M/b - log(2 alpha b^2)]^2
    bool holds = false;
};

/// Verify inf_{0 < x <= X} { x + alpha (b log(1/x) + M)^2 } <= 4 alpha b^2
/// [log(e^{M/b} / (2 alpha b^2))]^2 on a 2000-point logarithmic grid, refined
/// once around the best cell. Preconditions: X < e^{M/b} and
/// alpha <= X / (2 e b^2 max{1, log(e^{M/b}/X)}).
inline TechnicalCheck technical_infimum_check(double b, double m_const, double x_cap,
                                              double alpha) {
    if (!(b > 0.0) || !(x_cap > 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("technical_infimum_check: b, X, alpha must be positive");
    if (!(std::log(x_cap) < m_const / b))
        throw std::invalid_argument("technical_infimum_check: requires X < e^(M/b)");
    const double cap = x_cap / (2.0 * std::exp(1.0) * b * b *
                                std::max(1.0, m_const / b - std::log(x_cap)));
    if (alpha > cap * (1.0 + 1e-12))
        throw std::invalid_argument("technical_infimum_check: alpha above validity threshold");

    const auto phi = [&](double x) {
        const double t = b * std::log(1.0 / x) + m_const;
        return x + alpha * t * t;
    };
    const int grid = 2000;
    auto scan = [&](double lo, double hi) {
        const double llo = std::log(lo), lhi = std::log(hi);
        double best = std::numeric_limits<double>::infinity();
        int best_t = 0;
        for (int t = 0; t <= grid; ++t) {
            const double x = std::exp(llo + (lhi - llo) * t / grid);
            const double v = phi(x);
            if (v < best) { best = v; best_t = t; }
        }
        const double step = (lhi - llo) / grid;
        return std::tuple<double, double, double>{
            best, std::exp(llo + step * std::max(0, best_t - 1)),
            std::exp(llo + step * std::min(grid, best_t + 1))};
    };
    const double x_lo = std::min(x_cap * 1e-12, 2.0 * alpha * b * b * 1e-3);
    auto [best, lo2, hi2] = scan(x_lo, x_cap);
    auto [best2, l3, h3] = scan(lo2, hi2);

    TechnicalCheck res;
    res.lhs = std::min(best, best2);
    const double log_term = m_const / b - std::log(2.0 * alpha * b * b);
    res.rhs = 4.0 * alpha * b * b * log_term * log_term;
    res.holds = res.lhs <= res.rhs + 1e-12;
    return res;
}

// ---------------------------------------------------------------------------
// exact references

struct SoulesReference {
    Rational pi00, pi01, pi11;  // the only support entries of the 2x2 instance
    Rational e_total;
};

/// Exact coupling of the two-block slow instance at iterate k. Odd iterates
/// follow the top-left recursion a' = (1-a)/(3-4a) from a_1 = 1/4 (stride 2);
/// even iterates are one exact column update past the previous odd one.
/// Satisfies e_total(k) = 1/(k+1).
inline SoulesReference soules_reference(long k) {
    if (k < 1) throw std::invalid_argument("soules_reference: k must be >= 1");
    Rational a(1, 4);
    const long odd_k = (k % 2 == 1) ? k : k - 1;
    for (long t = 1; t < (odd_k + 1) / 2; ++t) a = (1 - a) / (3 - 4 * a);

    SoulesReference ref;
    const Rational half(1, 2);
    if (k % 2 == 1) {
        ref.pi00 = a;
        ref.pi01 = half - a;
        ref.pi11 = half;
    } else {
        ref.pi00 = half;
        ref.pi01 = (half - a) / (2 * (1 - a));
        ref.pi11 = Rational(1) / (4 * (1 - a));
    }
    const Rational row0 = ref.pi00 + ref.pi01;
    const Rational col0 = ref.pi00;
    const Rational col1 = ref.pi01 + ref.pi11;
    ref.e_total = rat_abs(row0 - half) + rat_abs(ref.pi11 - half) +
                  rat_abs(col0 - half) + rat_abs(col1 - half);
    return ref;
}

/// e_total(1..k_max) for the same instance by direct exact simulation
/// (alternating column/row rescales of the 2x2 coupling).
inline std::vector<Rational> soules_e_sequence(long k_max) {
    std::vector<Rational> out;
    out.reserve(static_cast<std::size_t>(k_max));
    const Rational half(1, 2);
    Rational p00(1, 4), p01(1, 4), p11(1, 2);  // iterate 1
    for (long k = 1; k <= k_max; ++k) {
        if (k > 1 && k % 2 == 0) {  // column rescale
            p00 = half;
            const Rational s = p01 + p11;
            p01 = p01 * half / s;
            p11 = p11 * half / s;
        } else if (k > 1) {  // row rescale
            const Rational s0 = p00 + p01;
            p00 = p00 * half / s0;
            p01 = p01 * half / s0;
            p11 = half;
        }
        out.push_back(rat_abs(p00 + p01 - half) + rat_abs(p11 - half) +
                      rat_abs(p00 - half) + rat_abs(p01 + p11 - half));
    }
    return out;
}

/// Envelope for nonnegative sequences with V_{k+1} <= V_k - A V_k^2:
/// V_k <= 1/(A k) for every k >= 1 (no condition on V_0 beyond existence).
inline double vk_recursion_bound(double v0, double a_const, long k) {
    if (v0 < 0.0 || !(a_const > 0.0) || k < 1)
        throw std::invalid_argument("vk_recursion_bound: bad arguments");
    return 1.0 / (a_const * static_cast<double>(k));
}

}  // namespace sinkcert
