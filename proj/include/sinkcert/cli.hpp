#pragma once

// Command-line front end. Everything routes through run_command so tests can
// drive the tool in-process; the binary in tools/ is a two-line wrapper.
//
// Exit codes: 0 success (and, for `verify`, zero violations), 1 runtime
// failure or verification violations, 2 malformed or invalid input.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "harness.hpp"

namespace sinkcert {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        if (content.empty() || content.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (content.empty() || content.back() != '\n') out << '\n';
}

inline Problem load_problem(const std::string& path) {
    return parse_problem(read_file(path));
}

/// Load + validate; on failure emit the validation report and signal exit 2.
inline Problem load_valid_problem(const std::string& path, const std::string& out_path) {
    Problem p = load_problem(path);
    const ValidationReport rep = validate(p);
    if (!rep.ok) {
        write_output(out_path, validation_report_json(rep).dump());
        throw ParseError("instance failed validation: " + path);
    }
    return p;
}

}  // namespace detail

namespace cli {

struct GenArgs {
    GenSpec spec;
    std::string out;
};

inline int cmd_gen(const GenArgs& a) {
    const Problem p = gen_instance(a.spec);
    detail::write_output(a.out, serialize_problem(p));
    return 0;
}

inline int cmd_classify(const std::string& input, const std::string& out) {
    const Problem p = detail::load_valid_problem(input, out);
    const ScalabilityResult scal = classify(p);
    if (scal.feasible) {
        const DMDecomposition dm = dm_decompose(p, scal);
        detail::write_output(out, classification_report_json(p, scal, &dm).dump());
    } else {
        detail::write_output(out, classification_report_json(p, scal, nullptr).dump());
    }
    return 0;
}

struct SolveArgs {
    std::string input;
    long max_iters = 1000;
    double tol = 0.0;
    std::string trace_path, potentials_path, out;
    long record_every = 1;
};

inline int cmd_solve(const SolveArgs& a) {
    const Problem p = detail::load_valid_problem(a.input, a.out);
    RunConfig cfg;
    cfg.max_iters = a.max_iters;
    cfg.tol = a.tol;
    cfg.record_every = a.record_every;
    cfg.record_potentials = !a.potentials_path.empty();
    const RunTrace t = run(p, cfg);
    if (!a.trace_path.empty()) detail::write_output(a.trace_path, trace_csv(t));
    if (!a.potentials_path.empty()) detail::write_output(a.potentials_path, potentials_json(t));

    const auto& last = t.records.back();
    JsonValue doc = JsonValue::object();
    doc.set("iterations", t.iterations)
       .set("converged", t.converged)
       .set("e_total", last.e_total)
       .set("psi", last.psi);
    detail::write_output(a.out, doc.dump());
    return 0;
}

struct VerifyArgs {
    std::string input;
    long max_iters = 1000;
    std::string out;
    std::string format = "json";
};

inline int cmd_verify(const VerifyArgs& a) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(a.input)) {
        for (const auto& entry : fs::directory_iterator(a.input))
            if (entry.is_regular_file() && entry.path().extension() == ".json")
                files.push_back(entry.path().string());
        std::sort(files.begin(), files.end());
        if (files.empty()) throw ParseError("no .json instances under " + a.input);
    } else {
        files.push_back(a.input);
    }

    bool any_invalid = false;
    long total_violations = 0;
    if (files.size() == 1 && !fs::is_directory(a.input)) {
        const Problem p = detail::load_problem(files.front());
        const VerifyOutcome out = verify_instance(p, a.max_iters);
        if (!out.validation.ok) {
            detail::write_output(a.out, validation_report_json(out.validation).dump());
            return 2;
        }
        detail::write_output(a.out, emit_report(p, out, a.format));
        return out.violations.empty() ? 0 : 1;
    }

    if (a.format != "json")
        throw ParseError("directory verification only renders json");
    JsonValue doc = JsonValue::object();
    JsonValue reports = JsonValue::array();
    for (const auto& file : files) {
        const Problem p = detail::load_problem(file);
        const VerifyOutcome out = verify_instance(p, a.max_iters);
        JsonValue item = JsonValue::object();
        item.set("file", fs::path(file).filename().string());
        if (!out.validation.ok) {
            any_invalid = true;
            item.set("report", validation_report_json(out.validation));
        } else {
            total_violations += static_cast<long>(out.violations.size());
            item.set("report", bound_report_json(p, out));
        }
        reports.push_back(std::move(item));
    }
    doc.set("instances", static_cast<long>(files.size()));
    doc.set("total_violations", total_violations);
    doc.set("reports", std::move(reports));
    detail::write_output(a.out, doc.dump());
    if (any_invalid) return 2;
    return total_violations == 0 ? 0 : 1;
}

struct RateArgs {
    std::string input;
    std::vector<double> alphas;
    long max_iters = 200000;  // block-solve cap
    std::string out;
};

inline int cmd_rate(const RateArgs& a) {
    const Problem p = detail::load_valid_problem(a.input, a.out);
    const ScalabilityResult scal = classify(p);
    if (!scal.feasible) throw ParseError("rate: instance is infeasible");
    const DMDecomposition dm = dm_decompose(p, scal);
    const auto delta = compute_delta(p);
    if (!delta) throw ParseError("rate: mass gap unavailable at this size");
    BlockSolveConfig bcfg;
    bcfg.max_iters = a.max_iters;
    const BlockMinimizers bm = block_minimizers(p, dm, bcfg);
    const Constants c = compute_constants(p);
    const double d = to_double(*delta);

    JsonValue doc = JsonValue::object();
    doc.set("class", to_string(scal.cls));
    doc.set("ell", dm.ell);
    doc.set("delta", rational_to_string(*delta));
    doc.set("inf_psi", bm.inf_psi);
    JsonValue results = JsonValue::array();
    for (double alpha : a.alphas) {
        const QEstimate q = rate_function_estimate(p, bm, *delta, alpha);
        JsonValue item = JsonValue::object();
        item.set("alpha", alpha).set("q_hat", q.q_hat);
        JsonValue witness = JsonValue::object();
        witness.set("rho", q.best_rho).set("gap", q.best_gap).set("var", q.best_var);
        item.set("witness", std::move(witness));
        if (dm.ell >= 1) {
            const auto upper = rate_function_upper(c, p.tau, d, dm.ell, alpha);
            item.set("upper", upper ? JsonValue(*upper) : JsonValue(nullptr));
            item.set("in_range", upper.has_value());
        } else {
            item.set("upper", nullptr).set("in_range", false);
        }
        results.push_back(std::move(item));
    }
    doc.set("results", std::move(results));
    detail::write_output(a.out, doc.dump());
    return 0;
}

struct InfPsiArgs {
    std::string input;
    long max_iters = 500000;
    long check_iters = 20000;  // long-run cross-check horizon
    std::string out;
};

inline int cmd_infpsi(const InfPsiArgs& a) {
    const Problem p = detail::load_valid_problem(a.input, a.out);
    const ScalabilityResult scal = classify(p);
    if (!scal.feasible) throw ParseError("infpsi: instance is infeasible");
    const DMDecomposition dm = dm_decompose(p, scal);
    BlockSolveConfig bcfg;
    bcfg.max_iters = a.max_iters;
    const BlockMinimizers bm = block_minimizers(p, dm, bcfg);

    JsonValue doc = JsonValue::object();
    doc.set("class", to_string(scal.cls));
    doc.set("inf_psi", bm.inf_psi);
    doc.set("max_residual", bm.max_residual);
    if (a.check_iters > 0) {
        RunConfig rcfg;
        rcfg.max_iters = a.check_iters;
        rcfg.record_potentials = false;
        const RunTrace t = run(p, rcfg);
        double min_psi = std::numeric_limits<double>::infinity();
        for (const auto& rec : t.records) min_psi = std::min(min_psi, rec.psi);
        JsonValue cross = JsonValue::object();
        cross.set("iterations", t.iterations)
             .set("min_psi", min_psi)
             .set("difference", min_psi - bm.inf_psi);
        doc.set("long_run", std::move(cross));
    }
    JsonValue blocks = JsonValue::array();
    for (std::size_t bi = 0; bi < bm.blocks.size(); ++bi) {
        const auto& blk = dm.blocks[bi];
        const auto& sol = bm.blocks[bi];
        JsonValue item = JsonValue::object();
        JsonValue rows = JsonValue::array(), cols = JsonValue::array();
        for (int i : blk.rows) rows.push_back(i);
        for (int j : blk.cols) cols.push_back(j);
        item.set("rows", std::move(rows)).set("cols", std::move(cols))
            .set("mass", rational_to_string(blk.mass))
            .set("min_psi", sol.min_psi)
            .set("iterations", sol.iterations)
            .set("residual", sol.residual);
        blocks.push_back(std::move(item));
    }
    doc.set("blocks", std::move(blocks));
    detail::write_output(a.out, doc.dump());
    return 0;
}

}  // namespace cli

/// Parse and dispatch one invocation; args exclude the program name.
inline int run_command(std::vector<std::string> args) {
    CLI::App app{"certification toolkit for entropic transport scaling"};
    app.name("sinkcert");
    app.require_subcommand(1);

    cli::GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "generate an instance with planted structure");
    gen->add_option("--kind", gen_args.spec.kind, "positive | exact | asymptotic | soules")
        ->check(CLI::IsMember({"positive", "exact", "asymptotic", "soules"}))
        ->capture_default_str();
    gen->add_option("--m", gen_args.spec.m, "rows")->capture_default_str();
    gen->add_option("--n", gen_args.spec.n, "cols")->capture_default_str();
    gen->add_option("--depth", gen_args.spec.depth, "chain length for asymptotic instances")
        ->capture_default_str();
    gen->add_option("--seed", gen_args.spec.seed, "rng seed")->capture_default_str();
    gen->add_option("--tau", gen_args.spec.tau, "regularization strength")->capture_default_str();
    gen->add_option("--cost-scale", gen_args.spec.cost_scale, "cost magnitude")
        ->capture_default_str();
    gen->add_option("--out", gen_args.out, "output path (default stdout)");

    std::string classify_input, classify_out;
    auto* cls = app.add_subcommand("classify", "scalability class, blocks, and certificate");
    cls->add_option("input", classify_input, "instance json")->required();
    cls->add_option("--out", classify_out, "output path (default stdout)");

    cli::SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "run the alternating iteration");
    solve->add_option("input", solve_args.input, "instance json")->required();
    solve->add_option("--max-iters", solve_args.max_iters)->capture_default_str();
    solve->add_option("--tol", solve_args.tol, "stop once e_total falls below this")
        ->capture_default_str();
    solve->add_option("--trace", solve_args.trace_path, "write per-iteration csv here");
    solve->add_option("--potentials", solve_args.potentials_path, "write recorded potentials here");
    solve->add_option("--record-every", solve_args.record_every,
                      "potential recording stride")->capture_default_str();
    solve->add_option("--out", solve_args.out, "summary path (default stdout)");

    cli::VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "certify identities and convergence envelopes");
    verify->add_option("input", verify_args.input, "instance json or directory")->required();
    verify->add_option("--max-iters", verify_args.max_iters)->capture_default_str();
    verify->add_option("--out", verify_args.out, "report path (default stdout)");
    verify->add_option("--format", verify_args.format, "json | csv")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();

    cli::RateArgs rate_args;
    auto* rate = app.add_subcommand("rate", "rate-function estimates at given alphas");
    rate->add_option("input", rate_args.input, "instance json")->required();
    rate->add_option("--alphas", rate_args.alphas, "comma-separated list")
        ->required()
        ->delimiter(',');
    rate->add_option("--max-iters", rate_args.max_iters, "block solve cap")
        ->capture_default_str();
    rate->add_option("--out", rate_args.out, "output path (default stdout)");

    cli::InfPsiArgs infpsi_args;
    auto* infpsi = app.add_subcommand("infpsi", "block minimizers and the objective infimum");
    infpsi->add_option("input", infpsi_args.input, "instance json")->required();
    infpsi->add_option("--max-iters", infpsi_args.max_iters, "block solve cap")
        ->capture_default_str();
    infpsi->add_option("--check-iters", infpsi_args.check_iters,
                       "long-run cross-check horizon (0 disables)")->capture_default_str();
    infpsi->add_option("--out", infpsi_args.out, "output path (default stdout)");

    try {
        std::reverse(args.begin(), args.end());  // CLI11's vector parse pops from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (gen->parsed()) return cli::cmd_gen(gen_args);
        if (cls->parsed()) return cli::cmd_classify(classify_input, classify_out);
        if (solve->parsed()) return cli::cmd_solve(solve_args);
        if (verify->parsed()) return cli::cmd_verify(verify_args);
        if (rate->parsed()) return cli::cmd_rate(rate_args);
        if (infpsi->parsed()) return cli::cmd_infpsi(infpsi_args);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;  // unreachable: require_subcommand(1)
}

}  // namespace sinkcert
