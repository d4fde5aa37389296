#pragma once

// Seeded instance generator. Marginals are born rational (small denominators)
// so the exact structure machinery never depends on snapping heuristics.
// The staircase kind plants a known block chain whose recovery tests the
// decomposition end to end.

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "problem.hpp"
#include "structure.hpp"

namespace sinkcert {

struct GenSpec {
    std::string kind = "exact";  // positive | exact | asymptotic | soules
    int m = 4;
    int n = 4;
    int depth = 2;  // block-chain length (asymptotic kind)
    std::uint64_t seed = 0;
    double tau = 1.0;
    double cost_scale = 1.0;
};

struct PlantedBlock {
    std::vector<int> rows, cols;
};

struct PlantedStructure {
    std::vector<PlantedBlock> blocks;
    std::vector<std::pair<int, int>> dag_edges;
    int ell = 0;
};

struct GeneratedInstance {
    Problem problem;
    std::optional<PlantedStructure> planted;
};

namespace detail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

private:
    std::mt19937_64 eng_;
};

/// Random connected bipartite support on m x n: a random attachment spanning
/// tree (seeded with one row-col edge, every later vertex hooks onto a random
/// present vertex of the opposite side) plus up to `extras` distinct edges.
inline std::set<std::pair<int, int>> random_support(Rng& rng, int m, int n, int extras) {
    std::set<std::pair<int, int>> edges;
    std::vector<int> rows_in{rng.uniform_int(0, m - 1)};
    std::vector<int> cols_in{rng.uniform_int(0, n - 1)};
    edges.emplace(rows_in[0], cols_in[0]);

    std::vector<int> rest;  // 0..m-1 rows, m..m+n-1 cols
    for (int i = 0; i < m; ++i)
        if (i != rows_in[0]) rest.push_back(i);
    for (int j = 0; j < n; ++j)
        if (j != cols_in[0]) rest.push_back(m + j);
    for (int v = static_cast<int>(rest.size()) - 1; v > 0; --v)
        std::swap(rest[v], rest[rng.uniform_int(0, v)]);

    for (int v : rest) {
        if (v < m) {
            edges.emplace(v, cols_in[rng.uniform_int(0, static_cast<int>(cols_in.size()) - 1)]);
            rows_in.push_back(v);
        } else {
            edges.emplace(rows_in[rng.uniform_int(0, static_cast<int>(rows_in.size()) - 1)], v - m);
            cols_in.push_back(v - m);
        }
    }

    for (int t = 0; t < 4 * extras && extras > 0; ++t) {
        const std::pair<int, int> e{rng.uniform_int(0, m - 1), rng.uniform_int(0, n - 1)};
        if (edges.count(e)) continue;
        edges.insert(e);
        --extras;
    }
    return edges;
}

struct WeightedSupport {
    std::vector<std::pair<int, int>> edges;
    std::vector<Rational> weights;  // strictly positive, sum to the prescribed mass
};

/// Positive rational coupling on a random connected support; its marginals
/// are exactly scalable by construction (the coupling is the witness).
inline WeightedSupport random_coupling(Rng& rng, int m, int n, int extras,
                                       const Rational& mass) {
    WeightedSupport ws;
    for (const auto& e : random_support(rng, m, n, extras)) ws.edges.push_back(e);
    BigInt total(0);
    std::vector<int> raw;
    for (std::size_t k = 0; k < ws.edges.size(); ++k) {
        raw.push_back(1 + rng.uniform_int(0, 999));
        total += raw.back();
    }
    for (std::size_t k = 0; k < ws.edges.size(); ++k)
        ws.weights.push_back(mass * Rational(raw[k], total));
    return ws;
}

}  // namespace detail

inline GeneratedInstance gen_instance_full(const GenSpec& spec) {
    for (int attempt = 0; attempt < 50; ++attempt) {
        detail::Rng rng(spec.seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(attempt));
        GeneratedInstance out;

        if (spec.kind == "soules") {
            CostMatrix cm;
            cm.rows = cm.cols = 2;
            const double c = -spec.tau * std::log(4.0);
            cm.entries = {{0, 0, c}, {0, 1, c}, {1, 1, c}};
            const std::vector<Rational> half{Rational(1, 2), Rational(1, 2)};
            out.problem = make_problem(spec.tau, {0.5, 0.5}, {0.5, 0.5}, std::move(cm),
                                       half, half);
            return out;
        }

        if (spec.kind == "positive") {
            if (spec.m < 1 || spec.n < 1) throw std::invalid_argument("gen: m, n must be >= 1");
            CostMatrix cm;
            cm.rows = spec.m;
            cm.cols = spec.n;
            for (int i = 0; i < spec.m; ++i)
                for (int j = 0; j < spec.n; ++j)
                    cm.entries.push_back({i, j, spec.cost_scale * rng.u01()});
            auto draw_simplex = [&](int len) {
                BigInt total(0);
                std::vector<int> raw;
                for (int i = 0; i < len; ++i) {
                    raw.push_back(1 + rng.uniform_int(0, 999));
                    total += raw.back();
                }
                std::vector<Rational> v;
                std::vector<double> d;
                for (int x : raw) {
                    v.emplace_back(x, total);
                    d.push_back(to_double(v.back()));
                }
                return std::pair{v, d};
            };
            auto [mu_rat, mu] = draw_simplex(spec.m);
            auto [nu_rat, nu] = draw_simplex(spec.n);
            out.problem = make_problem(spec.tau, std::move(mu), std::move(nu), std::move(cm),
                                       std::move(mu_rat), std::move(nu_rat));
            return out;  // full support cannot miss its class
        }

        if (spec.kind == "exact") {
            if (spec.m < 2 || spec.n < 2)
                throw std::invalid_argument("gen: exact kind needs m, n >= 2");
            const int slack = spec.m * spec.n - (spec.m + spec.n - 1) - 1;
            const int extras = slack > 0 ? rng.uniform_int(0, std::min(slack, spec.m + spec.n)) : 0;
            const auto ws = detail::random_coupling(rng, spec.m, spec.n, extras, Rational(1));

            std::vector<Rational> mu_rat(spec.m, Rational(0)), nu_rat(spec.n, Rational(0));
            CostMatrix cm;
            cm.rows = spec.m;
            cm.cols = spec.n;
            for (std::size_t k = 0; k < ws.edges.size(); ++k) {
                mu_rat[ws.edges[k].first] += ws.weights[k];
                nu_rat[ws.edges[k].second] += ws.weights[k];
                cm.entries.push_back(
                    {ws.edges[k].first, ws.edges[k].second, spec.cost_scale * rng.u01()});
            }
            std::vector<double> mu, nu;
            for (const auto& r : mu_rat) mu.push_back(to_double(r));
            for (const auto& r : nu_rat) nu.push_back(to_double(r));
            out.problem = make_problem(spec.tau, std::move(mu), std::move(nu), std::move(cm),
                                       std::move(mu_rat), std::move(nu_rat));
            if (classify(out.problem).cls == ScalClass::exactly_scalable) return out;
            continue;  // full support by luck, or similar; redraw
        }

        if (spec.kind == "asymptotic") {
            if (spec.depth < 2) throw std::invalid_argument("gen: asymptotic kind needs depth >= 2");
            if (spec.m < spec.depth || spec.n < spec.depth)
                throw std::invalid_argument("gen: asymptotic kind needs m, n >= depth");

            // contiguous row/col ranges per block, sizes as even as possible
            PlantedStructure plan;
            std::vector<Rational> mu_rat(spec.m, Rational(0)), nu_rat(spec.n, Rational(0));
            CostMatrix cm;
            cm.rows = spec.m;
            cm.cols = spec.n;
            int row_at = 0, col_at = 0;
            for (int b = 0; b < spec.depth; ++b) {
                PlantedBlock blk;
                const int bm = spec.m / spec.depth + (b < spec.m % spec.depth ? 1 : 0);
                const int bn = spec.n / spec.depth + (b < spec.n % spec.depth ? 1 : 0);
                for (int i = 0; i < bm; ++i) blk.rows.push_back(row_at + i);
                for (int j = 0; j < bn; ++j) blk.cols.push_back(col_at + j);

                const int slack = bm * bn - (bm + bn - 1);
                const int extras = slack > 0 ? rng.uniform_int(0, slack) : 0;
                const auto ws = detail::random_coupling(rng, bm, bn, extras,
                                                        Rational(1, spec.depth));
                for (std::size_t k = 0; k < ws.edges.size(); ++k) {
                    const int gi = row_at + ws.edges[k].first;
                    const int gj = col_at + ws.edges[k].second;
                    mu_rat[gi] += ws.weights[k];
                    nu_rat[gj] += ws.weights[k];
                    cm.entries.push_back({gi, gj, spec.cost_scale * rng.u01()});
                }
                plan.blocks.push_back(std::move(blk));
                row_at += bm;
                col_at += bn;
            }

            // forward-only cross edges: the chain, plus occasional skips
            std::set<std::pair<int, int>> dag;
            auto add_cross = [&](int a, int b) {
                const auto& ra = plan.blocks[a].rows;
                const auto& cb = plan.blocks[b].cols;
                const int i = ra[rng.uniform_int(0, static_cast<int>(ra.size()) - 1)];
                const int j = cb[rng.uniform_int(0, static_cast<int>(cb.size()) - 1)];
                cm.entries.push_back({i, j, spec.cost_scale * rng.u01()});
                dag.emplace(a, b);
            };
            for (int b = 0; b + 1 < spec.depth; ++b) add_cross(b, b + 1);
            for (int a = 0; a + 2 < spec.depth; ++a)
                for (int b = a + 2; b < spec.depth; ++b)
                    if (rng.u01() < 0.25) add_cross(a, b);

            plan.dag_edges.assign(dag.begin(), dag.end());
            plan.ell = spec.depth - 1;
            std::vector<double> mu, nu;
            for (const auto& r : mu_rat) mu.push_back(to_double(r));
            for (const auto& r : nu_rat) nu.push_back(to_double(r));
            try {
                out.problem = make_problem(spec.tau, std::move(mu), std::move(nu), std::move(cm),
                                           std::move(mu_rat), std::move(nu_rat));
            } catch (const ParseError&) {
                continue;  // a cross edge collided with a block edge; redraw
            }
            out.planted = std::move(plan);
            if (classify(out.problem).cls == ScalClass::asymptotically_scalable) return out;
            continue;
        }

        throw std::invalid_argument("gen: unknown kind: " + spec.kind);
    }
    throw std::runtime_error("gen: could not produce a verified instance for this seed");
}

inline Problem gen_instance(const GenSpec& spec) { return gen_instance_full(spec).problem; }

}  // namespace sinkcert
