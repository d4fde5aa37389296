#pragma once

// Log-domain numerical kernels. Every reduction is a max-shifted
// log-sum-exp accumulated sequentially in ascending index order, so repeated
// runs are bit-identical.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "problem.hpp"

namespace sinkcert {

/// Row half-update: f[g]_i = -tau * log sum_j exp((g_j - C_ij)/tau) nu_j.
inline std::vector<double> f_of_g(const Problem& p, const std::vector<double>& g) {
    std::vector<double> f(p.m());
    for (int i = 0; i < p.m(); ++i) {
        const auto& adj = p.row_adj[i];
        double smax = -std::numeric_limits<double>::infinity();
        for (const auto& [j, c] : adj) smax = std::max(smax, (g[j] - c) / p.tau + p.log_nu[j]);
        double acc = 0.0;
        for (const auto& [j, c] : adj) acc += std::exp((g[j] - c) / p.tau + p.log_nu[j] - smax);
        f[i] = -p.tau * (smax + std::log(acc));
    }
    return f;
}

/// Column half-update: g[f]_j = -tau * log sum_i exp((f_i - C_ij)/tau) mu_i.
inline std::vector<double> g_of_f(const Problem& p, const std::vector<double>& f) {
    std::vector<double> g(p.n());
    for (int j = 0; j < p.n(); ++j) {
        const auto& adj = p.col_adj[j];
        double smax = -std::numeric_limits<double>::infinity();
        for (const auto& [i, c] : adj) smax = std::max(smax, (f[i] - c) / p.tau + p.log_mu[i]);
        double acc = 0.0;
        for (const auto& [i, c] : adj) acc += std::exp((f[i] - c) / p.tau + p.log_mu[i] - smax);
        g[j] = -p.tau * (smax + std::log(acc));
    }
    return g;
}

namespace detail {

/// log of Z(f,g) = sum_E exp((f_i + g_j - C_ij)/tau) mu_i nu_j.
inline double log_partition(const Problem& p, const std::vector<double>& f,
                            const std::vector<double>& g) {
    double smax = -std::numeric_limits<double>::infinity();
    for (const auto& e : p.cost.entries)
        smax = std::max(smax, (f[e.i] + g[e.j] - e.c) / p.tau + p.log_mu[e.i] + p.log_nu[e.j]);
    double acc = 0.0;
    for (const auto& e : p.cost.entries)
        acc += std::exp((f[e.i] + g[e.j] - e.c) / p.tau + p.log_mu[e.i] + p.log_nu[e.j] - smax);
    return smax + std::log(acc);
}

}  // namespace detail

inline double partition_z(const Problem& p, const std::vector<double>& f,
                          const std::vector<double>& g) {
    return std::exp(detail::log_partition(p, f, g));
}

/// Dual objective Psi(f,g) = tau*log Z(f,g) - <mu,f> - <nu,g>.
inline double psi(const Problem& p, const std::vector<double>& f, const std::vector<double>& g) {
    double lin = 0.0;
    for (int i = 0; i < p.m(); ++i) lin += p.mu[i] * f[i];
    for (int j = 0; j < p.n(); ++j) lin += p.nu[j] * g[j];
    return p.tau * detail::log_partition(p, f, g) - lin;
}

/// Normalized primal coupling, one weight per stored cost entry (same order).
/// Sums to one by construction: weights are divided by their computed total.
inline std::vector<double> coupling(const Problem& p, const std::vector<double>& f,
                                    const std::vector<double>& g) {
    std::vector<double> w(p.edge_count());
    double smax = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < w.size(); ++k) {
        const auto& e = p.cost.entries[k];
        w[k] = (f[e.i] + g[e.j] - e.c) / p.tau + p.log_mu[e.i] + p.log_nu[e.j];
        smax = std::max(smax, w[k]);
    }
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = std::exp(w[k] - smax);
        total += w[k];
    }
    for (auto& x : w) x /= total;
    return w;
}

inline std::vector<double> row_marginal(const Problem& p, const std::vector<double>& pi) {
    std::vector<double> r(p.m(), 0.0);
    for (std::size_t k = 0; k < pi.size(); ++k) r[p.cost.entries[k].i] += pi[k];
    return r;
}

inline std::vector<double> col_marginal(const Problem& p, const std::vector<double>& pi) {
    std::vector<double> c(p.n(), 0.0);
    for (std::size_t k = 0; k < pi.size(); ++k) c[p.cost.entries[k].j] += pi[k];
    return c;
}

struct MarginalError {
    double e_row = 0.0;
    double e_col = 0.0;
    double e_total = 0.0;
};

/// l1 distances of the coupling's marginals to the targets.
inline MarginalError marginal_error(const Problem& p, const std::vector<double>& pi) {
    const std::vector<double> r = row_marginal(p, pi);
    const std::vector<double> c = col_marginal(p, pi);
    MarginalError e;
    for (int i = 0; i < p.m(); ++i) e.e_row += std::abs(r[i] - p.mu[i]);
    for (int j = 0; j < p.n(); ++j) e.e_col += std::abs(c[j] - p.nu[j]);
    e.e_total = e.e_row + e.e_col;
    return e;
}

/// KL(a||b) with the convention 0*log(0/q) = 0; +inf when a charges a point b
/// does not. Clamped at zero: for probability vectors the true value is
/// nonnegative, and roundoff must not leak tiny negatives into the records.
inline double kl_divergence(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        if (b[i] <= 0.0) return std::numeric_limits<double>::infinity();
        acc += a[i] * (std::log(a[i]) - std::log(b[i]));
    }
    return std::max(acc, 0.0);
}

/// Variation seminorm: half the oscillation, (max v - min v) / 2.
inline double var_seminorm(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return (*hi - *lo) / 2.0;
}

/// Gradient of Psi: (X#pi - mu, Y#pi - nu) at the normalized coupling.
inline std::pair<std::vector<double>, std::vector<double>>
psi_gradient(const Problem& p, const std::vector<double>& f, const std::vector<double>& g) {
    const std::vector<double> pi = coupling(p, f, g);
    std::vector<double> df = row_marginal(p, pi);
    std::vector<double> dg = col_marginal(p, pi);
    for (int i = 0; i < p.m(); ++i) df[i] -= p.mu[i];
    for (int j = 0; j < p.n(); ++j) dg[j] -= p.nu[j];
    return {std::move(df), std::move(dg)};
}

}  // namespace sinkcert
