#pragma once

// Alternating log-domain Sinkhorn iteration with a fully-instrumented trace,
// plus the lemma-level identity certification that replays a trace from its
// recorded potentials and checks every exact relation the iteration must
// satisfy.

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kernels.hpp"

namespace sinkcert {

struct RunConfig {
    long max_iters = 1000;
    double tol = 0.0;           // stop once e_total <= tol (0 keeps going to the cap)
    bool record_potentials = true;
    long record_every = 1;      // stride for potential snapshots (iterate 1 and the last always kept)
    std::vector<double> g0;     // empty means zeros
};

struct IterationRecord {
    long k = 0;
    bool row_update = true;     // true: f was refreshed (odd k); false: g was (even k)
    double e_row = 0.0, e_col = 0.0, e_total = 0.0;
    double psi = 0.0;
    double kl_mu_row = 0.0;     // KL(mu || X#pi)
    double kl_nu_col = 0.0;     // KL(nu || Y#pi)
    double kl_row_mu = 0.0;     // KL(X#pi || mu)
    double kl_col_nu = 0.0;     // KL(Y#pi || nu)
    bool has_potentials = false;
    std::vector<double> f, g;
};

struct RunTrace {
    std::vector<IterationRecord> records;
    bool converged = false;
    long iterations = 0;
};

/// Run the alternating iteration from g0 (zeros by default). Iterate k = 1 is
/// the state right after the first row update; odd k refresh f, even k
/// refresh g.
inline RunTrace run(const Problem& p, const RunConfig& cfg) {
    if (cfg.max_iters < 1) throw std::invalid_argument("run: max_iters must be >= 1");
    if (!cfg.g0.empty() && cfg.g0.size() != static_cast<std::size_t>(p.n()))
        throw std::invalid_argument("run: g0 has wrong length");

    std::vector<double> g = cfg.g0.empty() ? std::vector<double>(p.n(), 0.0) : cfg.g0;
    std::vector<double> f;

    RunTrace trace;
    trace.records.reserve(static_cast<std::size_t>(cfg.max_iters));
    for (long k = 1; k <= cfg.max_iters; ++k) {
        if (k % 2 == 1)
            f = f_of_g(p, g);
        else
            g = g_of_f(p, f);

        IterationRecord rec;
        rec.k = k;
        rec.row_update = (k % 2 == 1);
        const std::vector<double> pi = coupling(p, f, g);
        const std::vector<double> rm = row_marginal(p, pi);
        const std::vector<double> cm = col_marginal(p, pi);
        for (int i = 0; i < p.m(); ++i) rec.e_row += std::abs(rm[i] - p.mu[i]);
        for (int j = 0; j < p.n(); ++j) rec.e_col += std::abs(cm[j] - p.nu[j]);
        rec.e_total = rec.e_row + rec.e_col;
        rec.psi = psi(p, f, g);
        rec.kl_mu_row = kl_divergence(p.mu, rm);
        rec.kl_nu_col = kl_divergence(p.nu, cm);
        rec.kl_row_mu = kl_divergence(rm, p.mu);
        rec.kl_col_nu = kl_divergence(cm, p.nu);
        if (cfg.record_potentials &&
            (k == 1 || k == cfg.max_iters || k % cfg.record_every == 0)) {
            rec.has_potentials = true;
            rec.f = f;
            rec.g = g;
        }
        trace.iterations = k;
        const bool done = rec.e_total <= cfg.tol;
        trace.records.push_back(std::move(rec));
        if (done) {
            trace.converged = true;
            if (cfg.record_potentials && !trace.records.back().has_potentials) {
                trace.records.back().has_potentials = true;
                trace.records.back().f = f;
                trace.records.back().g = g;
            }
            break;
        }
    }
    return trace;
}

// ---------------------------------------------------------------------------
// identity certification

struct IdentityCheck {
    std::string name;
    bool pass = true;
    double max_residual = 0.0;
    long worst_k = 0;
    long samples = 0;

    void offer(double residual, long k, double tol) {
        ++samples;
        if (residual > max_residual) {
            max_residual = residual;
            worst_k = k;
        }
        if (residual > tol) pass = false;
    }
};

struct IdentityReport {
    bool all_pass = true;
    std::vector<IdentityCheck> checks;
};

/// Replay a trace (potentials must be present at every iterate) and certify:
///   - matched-side marginals are exact after each half update   (<= 1e-10)
///   - potential increments equal log marginal ratios            (<= 1e-8)
///   - one-step Psi decrease equals tau * (sum of forward KLs)   (<= 1e-8)
///   - the four KL subsequences are monotone along their parity  (1e-12 slack)
///   - the partition function is 1 at every iterate              (<= 1e-10)
inline IdentityReport check_identities(const Problem& p, const RunTrace& t) {
    for (const auto& rec : t.records)
        if (!rec.has_potentials)
            throw std::invalid_argument("check_identities: trace missing potentials at k=" +
                                        std::to_string(rec.k));

    IdentityCheck matched{"alternating_marginals"};
    IdentityCheck increments{"potential_increments"};
    IdentityCheck decrease{"psi_decrease_kl"};
    IdentityCheck monotone{"kl_monotone"};
    IdentityCheck partition{"partition_one"};

    struct State {
        std::vector<double> rm, cm;
        double psi = 0.0;
    };
    std::vector<State> states(t.records.size());
    for (std::size_t s = 0; s < t.records.size(); ++s) {
        const auto& rec = t.records[s];
        const std::vector<double> pi = coupling(p, rec.f, rec.g);
        states[s].rm = row_marginal(p, pi);
        states[s].cm = col_marginal(p, pi);
        states[s].psi = psi(p, rec.f, rec.g);

        // (a) the freshly-updated side matches its target in max norm
        double resid = 0.0;
        if (rec.k % 2 == 1)
            for (int i = 0; i < p.m(); ++i)
                resid = std::max(resid, std::abs(states[s].rm[i] - p.mu[i]));
        else
            for (int j = 0; j < p.n(); ++j)
                resid = std::max(resid, std::abs(states[s].cm[j] - p.nu[j]));
        matched.offer(resid, rec.k, 1e-10);

        // (e) Z(f^k, g^k) = 1
        partition.offer(std::abs(partition_z(p, rec.f, rec.g) - 1.0), rec.k, 1e-10);
    }

    for (std::size_t s = 0; s + 1 < t.records.size(); ++s) {
        const auto& rec = t.records[s];
        const auto& next = t.records[s + 1];
        if (next.k != rec.k + 1) continue;  // only consecutive iterates

        // (b) increment of the refreshed potential is -tau*log(marginal ratio)
        double resid = 0.0;
        if (rec.k % 2 == 0) {
            for (int i = 0; i < p.m(); ++i) {
                const double want = rec.f[i] - p.tau * std::log(states[s].rm[i] / p.mu[i]);
                resid = std::max(resid, std::abs(next.f[i] - want));
            }
        } else {
            for (int j = 0; j < p.n(); ++j) {
                const double want = rec.g[j] - p.tau * std::log(states[s].cm[j] / p.nu[j]);
                resid = std::max(resid, std::abs(next.g[j] - want));
            }
        }
        increments.offer(resid, rec.k, 1e-8);

        // (c) Psi(k) - Psi(k+1) = tau * (KL(mu||X#pi^k) + KL(nu||Y#pi^k))
        const double drop = states[s].psi - states[s + 1].psi;
        const double kl_sum = kl_divergence(p.mu, states[s].rm) +
                              kl_divergence(p.nu, states[s].cm);
        decrease.offer(std::abs(drop - p.tau * kl_sum), rec.k, 1e-8);
    }

    // (d) four KL subsequences, each monotone non-increasing along its parity:
    // X-marginal pair over even k, Y-marginal pair over odd k
    struct Seq {
        double last = 0.0;
        bool seen = false;
    } seq[4];
    for (std::size_t s = 0; s < t.records.size(); ++s) {
        const auto& rec = t.records[s];
        const double vals[4] = {
            kl_divergence(p.mu, states[s].rm), kl_divergence(states[s].rm, p.mu),
            kl_divergence(p.nu, states[s].cm), kl_divergence(states[s].cm, p.nu)};
        const int base = (rec.k % 2 == 0) ? 0 : 2;
        for (int q = base; q < base + 2; ++q) {
            if (seq[q].seen) monotone.offer(vals[q] - seq[q].last, rec.k, 1e-12);
            seq[q].last = vals[q];
            seq[q].seen = true;
        }
    }

    IdentityReport report;
    for (auto& chk : {matched, increments, decrease, monotone, partition}) {
        report.all_pass = report.all_pass && chk.pass;
        report.checks.push_back(chk);
    }
    return report;
}

inline JsonValue identity_report_json(const IdentityReport& r) {
    JsonValue checks = JsonValue::array();
    for (const auto& c : r.checks) {
        JsonValue item = JsonValue::object();
        item.set("name", c.name)
            .set("pass", c.pass)
            .set("max_residual", c.max_residual)
            .set("worst_k", c.worst_k)
            .set("samples", c.samples);
        checks.push_back(std::move(item));
    }
    JsonValue doc = JsonValue::object();
    doc.set("all_pass", r.all_pass).set("checks", std::move(checks));
    return doc;
}

// ---------------------------------------------------------------------------
// trace serialization

inline std::string trace_csv(const RunTrace& t) {
    std::string out = "k,phase,e_row,e_col,e_total,psi,kl_mu_row,kl_nu_col,kl_row_mu,kl_col_nu\n";
    char buf[64];
    auto put = [&](double x, char sep) {
        std::snprintf(buf, sizeof(buf), "%.17g%c", x, sep);
        out += buf;
    };
    for (const auto& rec : t.records) {
        out += std::to_string(rec.k);
        out += rec.row_update ? ",row-update," : ",col-update,";
        put(rec.e_row, ',');
        put(rec.e_col, ',');
        put(rec.e_total, ',');
        put(rec.psi, ',');
        put(rec.kl_mu_row, ',');
        put(rec.kl_nu_col, ',');
        put(rec.kl_row_mu, ',');
        put(rec.kl_col_nu, '\n');
    }
    return out;
}

inline std::string potentials_json(const RunTrace& t) {
    JsonValue arr = JsonValue::array();
    for (const auto& rec : t.records) {
        if (!rec.has_potentials) continue;
        JsonValue f = JsonValue::array(), g = JsonValue::array();
        for (double x : rec.f) f.push_back(x);
        for (double x : rec.g) g.push_back(x);
        JsonValue item = JsonValue::object();
        item.set("k", rec.k).set("f", std::move(f)).set("g", std::move(g));
        arr.push_back(std::move(item));
    }
    return arr.dump();
}

}  // namespace sinkcert
