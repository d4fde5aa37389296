#pragma once

// Scalability structure of an instance, decided exactly. Feasibility is a
// max-flow threshold on the snapped rational marginals; support edges that
// carry zero mass in every feasible coupling are detected through strongly
// connected components of the residual graph; removing them splits the
// instance into blocks that form a DAG.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "problem.hpp"

namespace sinkcert {

enum class ScalClass { positive, exactly_scalable, asymptotically_scalable, not_scalable };

inline const char* to_string(ScalClass c) {
    switch (c) {
        case ScalClass::positive: return "positive";
        case ScalClass::exactly_scalable: return "exactly_scalable";
        case ScalClass::asymptotically_scalable: return "asymptotically_scalable";
        default: return "not_scalable";
    }
}

struct FlowEdge {
    int i = 0;
    int j = 0;
    Rational mass;
};

struct CutCertificate {
    std::vector<int> rows;           // row set I with mu(I) > nu(N(I))
    std::vector<int> neighbor_cols;  // N(I)
    Rational mu_mass, nu_mass;
};

struct ScalabilityResult {
    ScalClass cls = ScalClass::not_scalable;
    bool feasible = false;
    std::vector<FlowEdge> flow;                    // per stored edge, exact mass
    std::optional<CutCertificate> cut;             // infeasible case
    std::vector<std::pair<int, int>> forced_zero;  // sorted (i, j)
};

namespace detail {

/// Residual-capacity max flow with exact arithmetic (BFS augmenting paths).
class RationalMaxFlow {
public:
    explicit RationalMaxFlow(int nodes) : head_(nodes, -1) {}

    int add_edge(int u, int v, Rational cap) {
        const int id = static_cast<int>(to_.size());
        to_.push_back(v); cap_.push_back(std::move(cap)); next_.push_back(head_[u]);
        head_[u] = id;
        to_.push_back(u); cap_.push_back(Rational(0)); next_.push_back(head_[v]);
        head_[v] = id + 1;
        orig_cap_.push_back(cap_[id]);
        return id;
    }

    Rational max_flow(int s, int t) {
        Rational total(0);
        while (true) {
            std::vector<int> via(head_.size(), -1);
            std::vector<char> seen(head_.size(), 0);
            std::queue<int> q;
            q.push(s); seen[s] = 1;
            while (!q.empty() && !seen[t]) {
                const int u = q.front(); q.pop();
                for (int a = head_[u]; a != -1; a = next_[a]) {
                    if (cap_[a] > 0 && !seen[to_[a]]) {
                        seen[to_[a]] = 1;
                        via[to_[a]] = a;
                        q.push(to_[a]);
                    }
                }
            }
            if (!seen[t]) return total;
            Rational bottleneck = cap_[via[t]];
            for (int v = t; v != s; v = to_[via[v] ^ 1])
                bottleneck = std::min(bottleneck, cap_[via[v]]);
            for (int v = t; v != s; v = to_[via[v] ^ 1]) {
                cap_[via[v]] -= bottleneck;
                cap_[via[v] ^ 1] += bottleneck;
            }
            total += bottleneck;
        }
    }

    Rational flow_on(int id) const { return orig_cap_[id / 2] - cap_[id]; }

    std::vector<char> residual_reachable(int s) const {
        std::vector<char> seen(head_.size(), 0);
        std::vector<int> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const int u = stack.back(); stack.pop_back();
            for (int a = head_[u]; a != -1; a = next_[a])
                if (cap_[a] > 0 && !seen[to_[a]]) { seen[to_[a]] = 1; stack.push_back(to_[a]); }
        }
        return seen;
    }

    /// Strongly connected components of the residual graph (Kosaraju).
    std::vector<int> residual_scc() const {
        const int n = static_cast<int>(head_.size());
        std::vector<std::vector<int>> fwd(n), bwd(n);
        for (int u = 0; u < n; ++u)
            for (int a = head_[u]; a != -1; a = next_[a])
                if (cap_[a] > 0) { fwd[u].push_back(to_[a]); bwd[to_[a]].push_back(u); }

        std::vector<int> order;
        order.reserve(n);
        std::vector<char> seen(n, 0);
        for (int start = 0; start < n; ++start) {
            if (seen[start]) continue;
            // iterative DFS recording finish order
            std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
            seen[start] = 1;
            while (!stack.empty()) {
                auto& [u, idx] = stack.back();
                if (idx < fwd[u].size()) {
                    const int v = fwd[u][idx++];
                    if (!seen[v]) { seen[v] = 1; stack.emplace_back(v, 0); }
                } else {
                    order.push_back(u);
                    stack.pop_back();
                }
            }
        }
        std::vector<int> comp(n, -1);
        int label = 0;
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            if (comp[*it] != -1) continue;
            std::vector<int> stack{*it};
            comp[*it] = label;
            while (!stack.empty()) {
                const int u = stack.back(); stack.pop_back();
                for (int v : bwd[u])
                    if (comp[v] == -1) { comp[v] = label; stack.push_back(v); }
            }
            ++label;
        }
        return comp;
    }

private:
    std::vector<int> head_;
    std::vector<int> to_, next_;
    std::vector<Rational> cap_;
    std::vector<Rational> orig_cap_;
};

}  // namespace detail

/// Decide the scalability class. Node layout: 0 source, 1..m rows,
/// m+1..m+n cols, m+n+1 sink; support arcs get capacity 2 (unbounded for a
/// unit of total mass).
inline ScalabilityResult classify(const Problem& p) {
    const int m = p.m(), n = p.n();
    const int src = 0, snk = m + n + 1;
    detail::RationalMaxFlow net(m + n + 2);
    for (int i = 0; i < m; ++i) net.add_edge(src, 1 + i, p.mu_rat[i]);
    std::vector<int> edge_arc(p.edge_count());
    for (std::size_t k = 0; k < p.edge_count(); ++k) {
        const auto& e = p.cost.entries[k];
        edge_arc[k] = net.add_edge(1 + e.i, 1 + m + e.j, Rational(2));
    }
    for (int j = 0; j < n; ++j) net.add_edge(1 + m + j, snk, p.nu_rat[j]);

    ScalabilityResult res;
    const Rational value = net.max_flow(src, snk);
    res.feasible = (value == 1);

    if (!res.feasible) {
        const std::vector<char> reach = net.residual_reachable(src);
        CutCertificate cut;
        std::vector<char> col_hit(n, 0);
        for (int i = 0; i < m; ++i)
            if (reach[1 + i]) {
                cut.rows.push_back(i);
                cut.mu_mass += p.mu_rat[i];
                for (const auto& [j, c] : p.row_adj[i]) col_hit[j] = 1;
            }
        for (int j = 0; j < n; ++j)
            if (col_hit[j]) {
                cut.neighbor_cols.push_back(j);
                cut.nu_mass += p.nu_rat[j];
            }
        res.cut = std::move(cut);
        res.cls = ScalClass::not_scalable;
        return res;
    }

    for (std::size_t k = 0; k < p.edge_count(); ++k) {
        const auto& e = p.cost.entries[k];
        res.flow.push_back({e.i, e.j, net.flow_on(edge_arc[k])});
    }

    // an edge is forced to zero iff it carries no mass in this maximum flow
    // and cannot pick any up along a residual cycle
    const std::vector<int> comp = net.residual_scc();
    for (std::size_t k = 0; k < p.edge_count(); ++k) {
        const auto& e = p.cost.entries[k];
        if (res.flow[k].mass == 0 && comp[1 + e.i] != comp[1 + m + e.j])
            res.forced_zero.emplace_back(e.i, e.j);
    }
    std::sort(res.forced_zero.begin(), res.forced_zero.end());

    if (p.edge_count() == static_cast<std::size_t>(m) * static_cast<std::size_t>(n))
        res.cls = ScalClass::positive;
    else if (res.forced_zero.empty())
        res.cls = ScalClass::exactly_scalable;
    else
        res.cls = ScalClass::asymptotically_scalable;
    if (res.cls == ScalClass::positive && !res.forced_zero.empty())
        throw std::logic_error("classify: full support cannot force edges to zero");
    return res;
}

// ---------------------------------------------------------------------------
// block decomposition

struct DMBlock {
    std::vector<int> rows, cols;
    Rational mass;
};

struct DMDecomposition {
    std::vector<DMBlock> blocks;
    std::vector<int> block_of_row, block_of_col;
    std::vector<std::pair<int, int>> dag_edges;  // block indices, sorted unique
    std::vector<int> levels;                     // longest path (edge count) ending at block
    int ell = 0;                                 // max level
    std::vector<std::pair<int, int>> forced_zero;
};

/// Longest-path levels of a DAG given by edges over nblocks vertices.
inline std::pair<std::vector<int>, int> dag_levels(int nblocks,
                                                   const std::vector<std::pair<int, int>>& edges) {
    std::vector<std::vector<int>> out(nblocks);
    std::vector<int> indeg(nblocks, 0);
    for (const auto& [a, b] : edges) {
        out[a].push_back(b);
        ++indeg[b];
    }
    std::vector<int> levels(nblocks, 0), order;
    order.reserve(nblocks);
    for (int v = 0; v < nblocks; ++v)
        if (indeg[v] == 0) order.push_back(v);
    for (std::size_t h = 0; h < order.size(); ++h) {
        const int u = order[h];
        for (int v : out[u]) {
            levels[v] = std::max(levels[v], levels[u] + 1);
            if (--indeg[v] == 0) order.push_back(v);
        }
    }
    if (order.size() != static_cast<std::size_t>(nblocks))
        throw std::logic_error("dag_levels: block graph has a cycle");
    int ell = 0;
    for (int lv : levels) ell = std::max(ell, lv);
    return {std::move(levels), ell};
}

/// Split a feasible instance into exactly-scalable blocks by removing the
/// forced-zero edges. Verifies block mass balance and acyclicity.
inline DMDecomposition dm_decompose(const Problem& p, const ScalabilityResult& scal) {
    if (!scal.feasible)
        throw std::invalid_argument("dm_decompose: instance is infeasible");
    const int m = p.m(), n = p.n();

    std::vector<int> parent(m + n);
    std::iota(parent.begin(), parent.end(), 0);
    std::vector<int> find_stack;
    auto find = [&](int x) {
        while (parent[x] != x) { find_stack.push_back(x); x = parent[x]; }
        for (int y : find_stack) parent[y] = x;
        find_stack.clear();
        return x;
    };
    auto is_forced = [&](int i, int j) {
        return std::binary_search(scal.forced_zero.begin(), scal.forced_zero.end(),
                                  std::make_pair(i, j));
    };
    for (const auto& e : p.cost.entries)
        if (!is_forced(e.i, e.j)) parent[find(e.i)] = find(m + e.j);

    DMDecomposition dm;
    dm.forced_zero = scal.forced_zero;
    std::map<int, int> root_to_block;  // keyed by root of the smallest row => ordered by row
    dm.block_of_row.assign(m, -1);
    dm.block_of_col.assign(n, -1);
    for (int i = 0; i < m; ++i) {
        const int r = find(i);
        if (!root_to_block.count(r)) {
            root_to_block[r] = static_cast<int>(dm.blocks.size());
            dm.blocks.emplace_back();
        }
        const int b = root_to_block[r];
        dm.block_of_row[i] = b;
        dm.blocks[b].rows.push_back(i);
        dm.blocks[b].mass += p.mu_rat[i];
    }
    for (int j = 0; j < n; ++j) {
        const int r = find(m + j);
        if (!root_to_block.count(r))
            throw std::logic_error("dm_decompose: column block without rows");
        dm.block_of_col[j] = root_to_block[r];
        dm.blocks[root_to_block[r]].cols.push_back(j);
    }
    for (const auto& b : dm.blocks) {
        if (b.rows.empty() || b.cols.empty())
            throw std::logic_error("dm_decompose: degenerate block");
        Rational col_mass(0);
        for (int j : b.cols) col_mass += p.nu_rat[j];
        if (col_mass != b.mass)
            throw std::logic_error("dm_decompose: block masses do not balance");
    }

    for (const auto& [i, j] : scal.forced_zero) {
        const int a = dm.block_of_row[i], b = dm.block_of_col[j];
        if (a == b)
            throw std::logic_error("dm_decompose: forced-zero edge inside a block");
        dm.dag_edges.emplace_back(a, b);
    }
    std::sort(dm.dag_edges.begin(), dm.dag_edges.end());
    dm.dag_edges.erase(std::unique(dm.dag_edges.begin(), dm.dag_edges.end()), dm.dag_edges.end());

    auto [levels, ell] = dag_levels(static_cast<int>(dm.blocks.size()), dm.dag_edges);
    dm.levels = std::move(levels);
    dm.ell = ell;
    return dm;
}

inline DMDecomposition dm_decompose(const Problem& p) { return dm_decompose(p, classify(p)); }

/// Restriction of p to one block, masses rescaled to a probability vector.
inline Problem restrict_to_block(const Problem& p, const DMBlock& blk) {
    std::vector<int> row_index(p.m(), -1), col_index(p.n(), -1);
    for (std::size_t i = 0; i < blk.rows.size(); ++i) row_index[blk.rows[i]] = static_cast<int>(i);
    for (std::size_t j = 0; j < blk.cols.size(); ++j) col_index[blk.cols[j]] = static_cast<int>(j);

    std::vector<Rational> mu_rat, nu_rat;
    std::vector<double> mu, nu;
    for (int i : blk.rows) {
        mu_rat.push_back(p.mu_rat[i] / blk.mass);
        mu.push_back(to_double(mu_rat.back()));
    }
    for (int j : blk.cols) {
        nu_rat.push_back(p.nu_rat[j] / blk.mass);
        nu.push_back(to_double(nu_rat.back()));
    }
    CostMatrix cm;
    cm.rows = static_cast<int>(blk.rows.size());
    cm.cols = static_cast<int>(blk.cols.size());
    for (const auto& e : p.cost.entries)
        if (row_index[e.i] >= 0 && col_index[e.j] >= 0)
            cm.entries.push_back({row_index[e.i], col_index[e.j], e.c});
    return make_problem(p.tau, std::move(mu), std::move(nu), std::move(cm),
                        std::move(mu_rat), std::move(nu_rat));
}

// ---------------------------------------------------------------------------
// report

inline JsonValue classification_report_json(const Problem& p, const ScalabilityResult& scal,
                                            const DMDecomposition* dm) {
    JsonValue doc = JsonValue::object();
    doc.set("class", to_string(scal.cls));
    doc.set("rows", p.m()).set("cols", p.n()).set("edges", p.edge_count());

    JsonValue fz = JsonValue::array();
    for (const auto& [i, j] : scal.forced_zero) {
        JsonValue pair = JsonValue::array();
        pair.push_back(i).push_back(j);
        fz.push_back(std::move(pair));
    }
    doc.set("forced_zero_edges", std::move(fz));

    if (dm != nullptr) {
        JsonValue blocks = JsonValue::array();
        for (const auto& b : dm->blocks) {
            JsonValue rows = JsonValue::array(), cols = JsonValue::array();
            for (int i : b.rows) rows.push_back(i);
            for (int j : b.cols) cols.push_back(j);
            JsonValue jb = JsonValue::object();
            jb.set("rows", std::move(rows)).set("cols", std::move(cols))
              .set("mass", rational_to_string(b.mass));
            blocks.push_back(std::move(jb));
        }
        doc.set("blocks", std::move(blocks));
        JsonValue dag = JsonValue::array();
        for (const auto& [a, b] : dm->dag_edges) {
            JsonValue pair = JsonValue::array();
            pair.push_back(a).push_back(b);
            dag.push_back(std::move(pair));
        }
        doc.set("dag_edges", std::move(dag));
        JsonValue levels = JsonValue::array();
        for (int lv : dm->levels) levels.push_back(lv);
        doc.set("levels", std::move(levels));
        doc.set("ell", dm->ell);
    }

    JsonValue cert = JsonValue::object();
    if (scal.feasible) {
        JsonValue entries = JsonValue::array();
        for (const auto& fe : scal.flow) {
            JsonValue item = JsonValue::object();
            item.set("i", fe.i).set("j", fe.j).set("mass", rational_to_string(fe.mass));
            entries.push_back(std::move(item));
        }
        cert.set("type", "flow").set("entries", std::move(entries));
    } else {
        JsonValue rows = JsonValue::array(), cols = JsonValue::array();
        for (int i : scal.cut->rows) rows.push_back(i);
        for (int j : scal.cut->neighbor_cols) cols.push_back(j);
        cert.set("type", "cut")
            .set("rows", std::move(rows))
            .set("neighbor_cols", std::move(cols))
            .set("mu_mass", rational_to_string(scal.cut->mu_mass))
            .set("nu_mass", rational_to_string(scal.cut->nu_mass));
    }
    doc.set("certificate", std::move(cert));
    return doc;
}

}  // namespace sinkcert
