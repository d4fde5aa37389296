#pragma once

// End-to-end certification of one instance: run the iteration, replay the
// trace through every identity check, and test the marginal-error sequence
// against each applicable theorem envelope. The emitted report carries per-k
// arrays and a violations list whose emptiness is the verdict.

#include <optional>
#include <string>
#include <vector>

#include "generator.hpp"
#include "theory.hpp"

namespace sinkcert {

struct BoundCheckSummary {
    std::string name;     // slow | warmup | main
    std::string verdict;  // pass | fail | not_applicable
    std::string reason;   // set when not applicable
    long valid_from = 0;
    long violations = 0;
    double worst_excess = 0.0;
    long worst_k = 0;
};

struct Violation {
    std::string kind;  // identity | bound
    std::string name;
    long k = 0;
    double value = 0.0;
    double limit = 0.0;
};

struct VerifyOutcome {
    ValidationReport validation;
    ScalabilityResult scal;
    std::optional<DMDecomposition> dm;
    Constants consts;
    std::optional<Rational> delta;
    std::optional<double> inf_psi_value;
    RunTrace trace;
    IdentityReport identities;
    std::vector<BoundCheckSummary> bounds;
    std::vector<Violation> violations;

    bool ok() const { return validation.ok && violations.empty(); }
};

inline VerifyOutcome verify_instance(const Problem& p, long max_iters) {
    VerifyOutcome out;
    out.validation = validate(p);
    if (!out.validation.ok) return out;

    out.scal = classify(p);
    if (out.scal.feasible) out.dm = dm_decompose(p, out.scal);
    out.consts = compute_constants(p);
    out.delta = compute_delta(p);

    RunConfig cfg;
    cfg.max_iters = max_iters;
    cfg.tol = 0.0;
    cfg.record_potentials = true;
    cfg.record_every = 1;
    out.trace = run(p, cfg);

    out.identities = check_identities(p, out.trace);
    for (const auto& chk : out.identities.checks)
        if (!chk.pass)
            out.violations.push_back({"identity", chk.name, chk.worst_k, chk.max_residual, 0.0});

    std::vector<BoundCurve> curves;
    auto skip = [&](const std::string& name, const std::string& why) {
        BoundCheckSummary s;
        s.name = name;
        s.verdict = "not_applicable";
        s.reason = why;
        out.bounds.push_back(std::move(s));
    };

    if (!out.scal.feasible) {
        skip("slow", "instance is infeasible; the objective has no finite infimum");
    } else {
        try {
            out.inf_psi_value = block_minimizers(p, *out.dm).inf_psi;
            curves.push_back(
                make_slow_curve(out.trace.records.front().psi - *out.inf_psi_value, p.tau));
        } catch (const std::runtime_error& ex) {
            skip("slow", std::string("block solve failed: ") + ex.what());
        }
    }

    const bool exactly = out.scal.cls == ScalClass::positive ||
                         out.scal.cls == ScalClass::exactly_scalable;
    if (!out.scal.feasible)
        skip("warmup", "instance is infeasible");
    else if (!exactly)
        skip("warmup", "instance is not exactly scalable");
    else if (!out.delta)
        skip("warmup", "mass gap unavailable at this size");
    else
        curves.push_back(make_warmup_curve(out.consts, to_double(*out.delta), p.tau));

    if (!out.scal.feasible)
        skip("main", "instance is infeasible");
    else if (exactly)
        skip("main", "exactly scalable: the warm-up envelope applies instead");
    else if (!out.delta)
        skip("main", "mass gap unavailable at this size");
    else
        curves.push_back(make_main_curve(out.consts, to_double(*out.delta), p.tau, out.dm->ell));

    for (const auto& curve : curves) {
        BoundCheckSummary s;
        s.name = curve.kind;
        s.valid_from = curve.valid_from;
        for (const auto& rec : out.trace.records) {
            const auto limit = curve.evaluate(rec.k);
            if (!limit) continue;
            const double excess = rec.e_total - *limit;
            if (excess > 1e-12) {
                ++s.violations;
                out.violations.push_back({"bound", curve.kind, rec.k, rec.e_total, *limit});
                if (excess > s.worst_excess) {
                    s.worst_excess = excess;
                    s.worst_k = rec.k;
                }
            }
        }
        s.verdict = s.violations == 0 ? "pass" : "fail";
        out.bounds.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// report rendering

inline JsonValue bound_report_json(const Problem& p, const VerifyOutcome& out) {
    JsonValue doc = JsonValue::object();
    {
        JsonValue inst = JsonValue::object();
        inst.set("rows", p.m()).set("cols", p.n()).set("edges", p.edge_count()).set("tau", p.tau);
        doc.set("instance", std::move(inst));
    }
    doc.set("valid", out.validation.ok);
    if (!out.validation.ok) {
        doc.set("validation", validation_report_json(out.validation));
        return doc;
    }
    doc.set("class", to_string(out.scal.cls));
    {
        JsonValue c = JsonValue::object();
        c.set("K", out.consts.K).set("theta", out.consts.theta)
         .set("ul_theta", out.consts.ul_theta).set("osc", out.consts.osc);
        doc.set("constants", std::move(c));
    }
    doc.set("delta", out.delta ? JsonValue(rational_to_string(*out.delta)) : JsonValue(nullptr));
    doc.set("ell", out.dm ? JsonValue(out.dm->ell) : JsonValue(nullptr));
    doc.set("inf_psi", out.inf_psi_value ? JsonValue(*out.inf_psi_value) : JsonValue(nullptr));
    doc.set("iterations", out.trace.iterations);
    doc.set("converged", out.trace.converged);
    doc.set("identities", identity_report_json(out.identities));

    JsonValue summaries = JsonValue::array();
    JsonValue verdicts = JsonValue::object();
    for (const auto& s : out.bounds) {
        JsonValue item = JsonValue::object();
        item.set("name", s.name).set("verdict", s.verdict);
        if (!s.reason.empty()) item.set("reason", s.reason);
        if (s.verdict != "not_applicable") {
            item.set("valid_from", s.valid_from).set("violations", s.violations);
            if (s.violations > 0)
                item.set("worst_excess", s.worst_excess).set("worst_k", s.worst_k);
        }
        summaries.push_back(std::move(item));
        verdicts.set(s.name, s.verdict);
    }
    doc.set("bounds", std::move(summaries));
    doc.set("verdicts", std::move(verdicts));

    JsonValue ks = JsonValue::array(), es = JsonValue::array();
    for (const auto& rec : out.trace.records) {
        ks.push_back(rec.k);
        es.push_back(rec.e_total);
    }
    doc.set("k", std::move(ks));
    doc.set("e_total", std::move(es));
    for (const auto& s : out.bounds) {
        if (s.verdict == "not_applicable") continue;
        BoundCurve curve;
        if (s.name == "slow")
            curve = make_slow_curve(out.trace.records.front().psi - *out.inf_psi_value, p.tau);
        else if (s.name == "warmup")
            curve = make_warmup_curve(out.consts, to_double(*out.delta), p.tau);
        else
            curve = make_main_curve(out.consts, to_double(*out.delta), p.tau, out.dm->ell);
        JsonValue vals = JsonValue::array();
        for (const auto& rec : out.trace.records) {
            const auto limit = curve.evaluate(rec.k);
            vals.push_back(limit ? JsonValue(*limit) : JsonValue(nullptr));
        }
        doc.set("bound_" + s.name, std::move(vals));
    }

    JsonValue viols = JsonValue::array();
    for (const auto& v : out.violations) {
        JsonValue item = JsonValue::object();
        item.set("kind", v.kind).set("name", v.name).set("k", v.k)
            .set("value", v.value).set("limit", v.limit);
        viols.push_back(std::move(item));
    }
    doc.set("violations", std::move(viols));
    return doc;
}

inline std::string bound_report_csv(const Problem& p, const VerifyOutcome& out) {
    std::vector<const BoundCheckSummary*> active;
    for (const auto& s : out.bounds)
        if (s.verdict != "not_applicable") active.push_back(&s);
    std::vector<BoundCurve> curves;
    for (const auto* s : active) {
        if (s->name == "slow")
            curves.push_back(
                make_slow_curve(out.trace.records.front().psi - *out.inf_psi_value, p.tau));
        else if (s->name == "warmup")
            curves.push_back(make_warmup_curve(out.consts, to_double(*out.delta), p.tau));
        else
            curves.push_back(make_main_curve(out.consts, to_double(*out.delta), p.tau, out.dm->ell));
    }
    std::string csv = "k,e_total";
    for (const auto* s : active) csv += "," + s->name;
    csv += '\n';
    char buf[64];
    for (const auto& rec : out.trace.records) {
        csv += std::to_string(rec.k);
        std::snprintf(buf, sizeof(buf), ",%.17g", rec.e_total);
        csv += buf;
        for (const auto& curve : curves) {
            const auto limit = curve.evaluate(rec.k);
            if (limit) {
                std::snprintf(buf, sizeof(buf), ",%.17g", *limit);
                csv += buf;
            } else {
                csv += ",";
            }
        }
        csv += '\n';
    }
    return csv;
}

/// Render a verification outcome in the requested format ("json" or "csv").
inline std::string emit_report(const Problem& p, const VerifyOutcome& out,
                               const std::string& format = "json") {
    if (format == "json") return bound_report_json(p, out).dump();
    if (format == "csv") return bound_report_csv(p, out);
    throw std::invalid_argument("emit_report: unknown format: " + format);
}

}  // namespace sinkcert
