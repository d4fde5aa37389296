#pragma once

// Entropic optimal transport instance on a sparse extended-real cost matrix.
// Absent entries mean +infinity (hard-forbidden pairings); stored entries are
// finite. Marginals live twice: as the doubles the solver uses and as snapped
// rationals for the exact feasibility/structure machinery.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "json_writer.hpp"
#include "rational.hpp"

namespace sinkcert {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CostEntry {
    int i = 0;
    int j = 0;
    double c = 0.0;
};

struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<CostEntry> entries;  // sorted by (i, j), no duplicates
};

struct Problem {
    double tau = 1.0;
    std::vector<double> mu, nu;
    std::vector<Rational> mu_rat, nu_rat;  // sum to exactly 1 per side
    CostMatrix cost;

    // derived adjacency, fixed ascending order (drives reproducible sums)
    std::vector<std::vector<std::pair<int, double>>> row_adj;  // i -> [(j, c)]
    std::vector<std::vector<std::pair<int, double>>> col_adj;  // j -> [(i, c)]
    std::vector<double> log_mu, log_nu;

    int m() const { return cost.rows; }
    int n() const { return cost.cols; }
    std::size_t edge_count() const { return cost.entries.size(); }
};

namespace detail {

inline void build_adjacency(Problem& p) {
    p.row_adj.assign(p.cost.rows, {});
    p.col_adj.assign(p.cost.cols, {});
    for (const auto& e : p.cost.entries) {
        p.row_adj[e.i].emplace_back(e.j, e.c);
        p.col_adj[e.j].emplace_back(e.i, e.c);
    }
    for (auto& adj : p.row_adj) std::sort(adj.begin(), adj.end());
    for (auto& adj : p.col_adj) std::sort(adj.begin(), adj.end());
    p.log_mu.resize(p.mu.size());
    p.log_nu.resize(p.nu.size());
    for (std::size_t i = 0; i < p.mu.size(); ++i) p.log_mu[i] = std::log(p.mu[i]);
    for (std::size_t j = 0; j < p.nu.size(); ++j) p.log_nu[j] = std::log(p.nu[j]);
}

}  // namespace detail

/// Assemble a Problem from parts. Structural well-formedness (index ranges,
/// finite costs, duplicate edges) is enforced here; semantic validity
/// (positivity, simplex sums, connectivity) is the job of validate().
inline Problem make_problem(double tau, std::vector<double> mu, std::vector<double> nu,
                            CostMatrix cost,
                            std::vector<Rational> mu_rat = {},
                            std::vector<Rational> nu_rat = {}) {
    if (cost.rows <= 0 || cost.cols <= 0)
        throw ParseError("cost matrix dimensions must be positive");
    if (mu.size() != static_cast<std::size_t>(cost.rows) ||
        nu.size() != static_cast<std::size_t>(cost.cols))
        throw ParseError("marginal lengths do not match cost dimensions");
    for (const auto& e : cost.entries) {
        if (e.i < 0 || e.i >= cost.rows || e.j < 0 || e.j >= cost.cols)
            throw ParseError("cost entry index out of range");
        if (!std::isfinite(e.c)) throw ParseError("stored cost entries must be finite");
    }
    std::sort(cost.entries.begin(), cost.entries.end(),
              [](const CostEntry& a, const CostEntry& b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    for (std::size_t k = 1; k < cost.entries.size(); ++k)
        if (cost.entries[k].i == cost.entries[k - 1].i &&
            cost.entries[k].j == cost.entries[k - 1].j)
            throw ParseError("duplicate cost entry");

    Problem p;
    p.tau = tau;
    p.mu = std::move(mu);
    p.nu = std::move(nu);
    p.cost = std::move(cost);
    p.mu_rat = mu_rat.empty() ? snap_marginals(p.mu) : std::move(mu_rat);
    p.nu_rat = nu_rat.empty() ? snap_marginals(p.nu) : std::move(nu_rat);
    if (p.mu_rat.size() != p.mu.size() || p.nu_rat.size() != p.nu.size())
        throw ParseError("rational marginal lengths do not match");
    detail::build_adjacency(p);
    return p;
}

// ---------------------------------------------------------------------------
// document I/O

inline Problem parse_problem(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& ex) {
        throw ParseError(std::string("malformed JSON: ") + ex.what());
    }
    if (!doc.is_object()) throw ParseError("top-level value must be an object");
    for (const char* key : {"tau", "mu", "nu", "cost"})
        if (!doc.contains(key)) throw ParseError(std::string("missing key: ") + key);
    if (!doc["tau"].is_number()) throw ParseError("tau must be a number");
    const double tau = doc["tau"].get<double>();

    auto read_vec = [&](const char* key) {
        if (!doc[key].is_array()) throw ParseError(std::string(key) + " must be an array");
        std::vector<double> v;
        for (const auto& x : doc[key]) {
            if (!x.is_number()) throw ParseError(std::string(key) + " entries must be numbers");
            v.push_back(x.get<double>());
        }
        return v;
    };
    std::vector<double> mu = read_vec("mu"), nu = read_vec("nu");

    const auto& jc = doc["cost"];
    if (!jc.is_object() || !jc.contains("type")) throw ParseError("cost must carry a type");
    CostMatrix cm;
    const std::string type = jc["type"].get<std::string>();
    if (type == "sparse") {
        for (const char* key : {"rows", "cols", "entries"})
            if (!jc.contains(key)) throw ParseError(std::string("cost missing key: ") + key);
        if (!jc["rows"].is_number_integer() || !jc["cols"].is_number_integer())
            throw ParseError("rows/cols must be integers");
        cm.rows = jc["rows"].get<int>();
        cm.cols = jc["cols"].get<int>();
        if (!jc["entries"].is_array()) throw ParseError("entries must be an array");
        for (const auto& je : jc["entries"]) {
            if (!je.is_object() || !je.contains("i") || !je.contains("j") || !je.contains("c"))
                throw ParseError("each entry needs i, j, c");
            if (!je["i"].is_number_integer() || !je["j"].is_number_integer() ||
                !je["c"].is_number())
                throw ParseError("entry fields have wrong types");
            cm.entries.push_back({je["i"].get<int>(), je["j"].get<int>(), je["c"].get<double>()});
        }
    } else if (type == "dense") {
        if (!jc.contains("values") || !jc["values"].is_array())
            throw ParseError("dense cost needs a values array");
        const auto& rows = jc["values"];
        cm.rows = static_cast<int>(rows.size());
        if (cm.rows == 0) throw ParseError("dense cost has no rows");
        cm.cols = static_cast<int>(rows[0].size());
        for (int i = 0; i < cm.rows; ++i) {
            const auto& r = rows[i];
            if (!r.is_array() || static_cast<int>(r.size()) != cm.cols)
                throw ParseError("dense cost rows are ragged");
            for (int j = 0; j < cm.cols; ++j) {
                const auto& x = r[j];
                if (x.is_string()) {
                    if (x.get<std::string>() != "inf")
                        throw ParseError("only the string \"inf\" denotes an absent entry");
                    continue;  // absent
                }
                if (!x.is_number()) throw ParseError("dense cost values must be numbers or \"inf\"");
                cm.entries.push_back({i, j, x.get<double>()});
            }
        }
    } else {
        throw ParseError("unknown cost type: " + type);
    }
    return make_problem(tau, std::move(mu), std::move(nu), std::move(cm));
}

/// Canonical sparse rendering; parse_problem(serialize_problem(p)) == p.
inline std::string serialize_problem(const Problem& p) {
    JsonValue mu = JsonValue::array(), nu = JsonValue::array();
    for (double x : p.mu) mu.push_back(x);
    for (double x : p.nu) nu.push_back(x);
    JsonValue entries = JsonValue::array();
    for (const auto& e : p.cost.entries) {
        JsonValue je = JsonValue::object();
        je.set("i", e.i).set("j", e.j).set("c", e.c);
        entries.push_back(std::move(je));
    }
    JsonValue cost = JsonValue::object();
    cost.set("type", "sparse").set("rows", p.cost.rows).set("cols", p.cost.cols)
        .set("entries", std::move(entries));
    JsonValue doc = JsonValue::object();
    doc.set("tau", p.tau).set("mu", std::move(mu)).set("nu", std::move(nu))
       .set("cost", std::move(cost));
    return doc.dump();
}

// ---------------------------------------------------------------------------
// validation

struct ValidationIssue {
    std::string code;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<ValidationIssue> issues;

    void add(std::string code, std::string message) {
        ok = false;
        issues.push_back({std::move(code), std::move(message)});
    }
};

inline JsonValue validation_report_json(const ValidationReport& r) {
    JsonValue issues = JsonValue::array();
    for (const auto& iss : r.issues) {
        JsonValue item = JsonValue::object();
        item.set("code", iss.code).set("message", iss.message);
        issues.push_back(std::move(item));
    }
    JsonValue doc = JsonValue::object();
    doc.set("valid", r.ok).set("issues", std::move(issues));
    return doc;
}

inline ValidationReport validate(const Problem& p) {
    ValidationReport rep;
    if (!(p.tau > 0.0) || !std::isfinite(p.tau))
        rep.add("tau_not_positive", "tau must be a finite positive number");

    auto check_simplex = [&](const std::vector<double>& v, const char* side) {
        double sum = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!std::isfinite(v[i]) || v[i] <= 0.0)
                rep.add(std::string(side) + "_not_positive",
                        std::string(side) + "[" + std::to_string(i) + "] must be positive");
            else
                sum += v[i];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            rep.add(std::string(side) + "_sum",
                    std::string(side) + " must sum to 1 within 1e-12");
    };
    check_simplex(p.mu, "mu");
    check_simplex(p.nu, "nu");

    if (p.cost.entries.empty()) {
        rep.add("empty_support", "cost matrix has no finite entries");
        return rep;
    }
    for (int i = 0; i < p.m(); ++i)
        if (p.row_adj[i].empty())
            rep.add("isolated_row", "row " + std::to_string(i) + " has no finite cost entry");
    for (int j = 0; j < p.n(); ++j)
        if (p.col_adj[j].empty())
            rep.add("isolated_col", "col " + std::to_string(j) + " has no finite cost entry");

    // connectivity of the bipartite support (rows 0..m-1, cols m..m+n-1)
    const int total = p.m() + p.n();
    std::vector<char> seen(total, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int reached = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        if (v < p.m()) {
            for (const auto& [j, c] : p.row_adj[v])
                if (!seen[p.m() + j]) { seen[p.m() + j] = 1; ++reached; stack.push_back(p.m() + j); }
        } else {
            for (const auto& [i, c] : p.col_adj[v - p.m()])
                if (!seen[i]) { seen[i] = 1; ++reached; stack.push_back(i); }
        }
    }
    if (reached != total)
        rep.add("disconnected_support", "support graph is not connected");
    return rep;
}

// ---------------------------------------------------------------------------
// instance constants

struct Constants {
    double K = 0.0;        // max stored cost - tau*log(max(mu_min, nu_min))
    double theta = 0.0;    // -tau*log sum_E exp(-C/tau) mu nu
    double ul_theta = 0.0; // min stored cost
    double osc = 0.0;      // max - min stored cost
};

inline Constants compute_constants(const Problem& p) {
    double cmax = -std::numeric_limits<double>::infinity();
    double cmin = std::numeric_limits<double>::infinity();
    for (const auto& e : p.cost.entries) {
        cmax = std::max(cmax, e.c);
        cmin = std::min(cmin, e.c);
    }
    const double mu_min = *std::min_element(p.mu.begin(), p.mu.end());
    const double nu_min = *std::min_element(p.nu.begin(), p.nu.end());

    // log-sum-exp over stored entries, fixed entry order, max-shifted
    double smax = -std::numeric_limits<double>::infinity();
    for (const auto& e : p.cost.entries)
        smax = std::max(smax, -e.c / p.tau + p.log_mu[e.i] + p.log_nu[e.j]);
    double acc = 0.0;
    for (const auto& e : p.cost.entries)
        acc += std::exp(-e.c / p.tau + p.log_mu[e.i] + p.log_nu[e.j] - smax);

    Constants c;
    c.K = cmax - p.tau * std::log(std::max(mu_min, nu_min));
    c.theta = -p.tau * (smax + std::log(acc));
    c.ul_theta = cmin;
    c.osc = cmax - cmin;
    return c;
}

// ---------------------------------------------------------------------------
// minimal marginal-mass gap

struct DeltaLimits {
    int max_total = 40;
    int max_side = 20;
};

/// Minimal nonzero |mu(I) - nu(J)| over all subset pairs, computed exactly on
/// the snapped rationals. Subset sums are brought to one common integer
/// denominator, sorted, and merged. Empty when the instance exceeds the
/// enumeration limits.
inline std::optional<Rational> compute_delta(const Problem& p, DeltaLimits lim = {}) {
    const int m = p.m(), n = p.n();
    if (m > lim.max_side || n > lim.max_side || m + n > lim.max_total) return std::nullopt;

    BigInt den(1);
    for (const auto& r : p.mu_rat) den = boost::multiprecision::lcm(den, denominator(r));
    for (const auto& r : p.nu_rat) den = boost::multiprecision::lcm(den, denominator(r));

    auto subset_sums = [&](const std::vector<Rational>& w) {
        std::vector<BigInt> sums{BigInt(0)};
        sums.reserve(std::size_t(1) << w.size());
        for (const auto& r : w) {
            const BigInt a = numerator(r) * (den / denominator(r));
            const std::size_t sz = sums.size();
            for (std::size_t k = 0; k < sz; ++k) sums.push_back(sums[k] + a);
        }
        std::sort(sums.begin(), sums.end());
        sums.erase(std::unique(sums.begin(), sums.end()), sums.end());
        return sums;
    };
    const std::vector<BigInt> a = subset_sums(p.mu_rat);
    const std::vector<BigInt> b = subset_sums(p.nu_rat);

    // single ascending merge; for each value keep the two most recent distinct
    // values of the opposite side, which covers every adjacent cross pair
    std::optional<BigInt> gap;
    auto offer = [&](const BigInt& d) {
        if (d == 0) return;
        const BigInt ad = d < 0 ? BigInt(-d) : d;
        if (!gap || ad < *gap) gap = ad;
    };
    std::size_t ia = 0, ib = 0;
    std::optional<BigInt> last_a, prev_a, last_b, prev_b;
    auto note = [](std::optional<BigInt>& last, std::optional<BigInt>& prev, const BigInt& v) {
        if (last && *last != v) prev = last;
        last = v;
    };
    while (ia < a.size() || ib < b.size()) {
        const bool take_a = ib == b.size() || (ia < a.size() && a[ia] <= b[ib]);
        if (take_a) {
            if (last_b) offer(a[ia] - *last_b);
            if (last_b && *last_b == a[ia] && prev_b) offer(a[ia] - *prev_b);
            note(last_a, prev_a, a[ia]);
            ++ia;
        } else {
            if (last_a) offer(b[ib] - *last_a);
            if (last_a && *last_a == b[ib] && prev_a) offer(b[ib] - *prev_a);
            note(last_b, prev_b, b[ib]);
            ++ib;
        }
    }
    if (!gap) return std::nullopt;  // cannot happen: mu(all) vs nu(empty) is 1
    return Rational(*gap, den);
}

}  // namespace sinkcert
