// Command-line driver: point counts, bad primes, character enumeration,
// matching, the exterior-square verification, the twist relation, and the
// full report.
#include "k3hecke/pipeline.hpp"
#include "k3hecke/hecke.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

using namespace k3hecke;

int main(int argc, char** argv) {
    CLI::App app{"k3hecke: point counts and Hecke quasi-character matching for a fixed "
                 "family of CM K3 surfaces and genus-3 curves"};
    app.require_subcommand(1);

    pipeline::Config cfg;
    long prime_bound = 0;
    app.add_option("--data", cfg.fields_path, "field data file");
    app.add_option("--geometry", cfg.geometry_path, "surface/curve data file");
    app.add_option("--prime-bound", prime_bound, "override the comparison prime bound");
    app.add_option("--precision", cfg.digits, "working precision in decimal digits");
    app.add_option("--budget", cfg.budget.max_p_m12, "surface counting budget (max p for m <= 2)");
    app.add_flag("--timings", cfg.timings, "include timings in the machine report");

    int idx = 0;
    long p = 0;
    int m = 1;

    auto* bad = app.add_subcommand("bad-primes", "bad primes of a surface");
    bad->add_option("i", idx)->required();

    auto* cs = app.add_subcommand("count-surface", "surface point count over F_{p^m}");
    cs->add_option("i", idx)->required();
    cs->add_option("--p", p)->required();
    cs->add_option("--m", m);

    auto* cc = app.add_subcommand("count-curve", "curve point count over F_{p^m}");
    cc->add_option("i", idx)->required();
    cc->add_option("--p", p)->required();
    cc->add_option("--m", m);

    std::string which = "X";
    auto* en = app.add_subcommand("enumerate", "enumerate candidate characters");
    en->add_option("--case", which, "X, A or psi-prime");
    en->add_option("i", idx)->required();

    auto* match = app.add_subcommand("match", "eliminate candidates against counts");
    std::string kind;
    match->add_option("kind", kind, "surface or curve")->required();
    match->add_option("i", idx)->required();

    auto* vc = app.add_subcommand("verify-c", "exterior-square decomposition");
    vc->add_option("i", idx)->required();

    auto* vs = app.add_subcommand("verify-sigma", "order-3 twist relation");
    vs->add_option("i", idx)->required();

    std::string out_path;
    auto* rp = app.add_subcommand("report", "full machine + text report");
    rp->add_option("--out", out_path, "write the JSON report to this path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (prime_bound > 0) {
            cfg.surface_prime_bound = prime_bound;
            cfg.curve_prime_bound = prime_bound;
        }
        pipeline::Engine engine(cfg);

        if (bad->parsed()) {
            auto set = engine.surface_bad(idx);
            std::cout << "bad primes:";
            for (long q : set) std::cout << " " << q;
            std::cout << "\n";
            return 0;
        }
        if (cs->parsed()) {
            auto c = counting::count_surface(engine.geometry().surfaces[idx - 1], p, m,
                                             engine.config().budget);
            std::cout << counting::count_record(p, m, c) << "\n";
            return 0;
        }
        if (cc->parsed()) {
            long long n = counting::count_curve(engine.geometry().curves[idx - 1], p, m,
                                                engine.config().budget);
            long long q = 1;
            for (int t = 0; t < m; ++t) q *= p;
            std::cout << "p=" << p << " m=" << m << " N=" << n << " t=" << (q + 1 - n) << "\n";
            return 0;
        }
        if (en->parsed()) {
            int fid = which == "X" ? idx : engine.geometry().curves[idx - 1].field_id;
            hecke::EvalCtx& ctx = engine.ctx(fid);
            std::array<std::pair<int, int>, 3> ms;
            std::set<long> badset;
            if (which == "X") {
                ms = {{{0, 2}, {1, 1}, {1, 1}}};
                badset = engine.surface_bad(idx);
            } else if (which == "A") {
                ms = {{{0, 1}, {0, 1}, {0, 1}}};
                badset = engine.curve_bad(idx);
            } else {
                ms = {{{0, 2}, {0, 2}, {1, 1}}};
                badset = engine.curve_bad(idx);
            }
            auto orbits = hecke::enumerate_hecke(ctx, ms, badset);
            std::cout << orbits.size() << " Galois orbit(s)\n";
            for (auto& orb : orbits)
                std::cout << "  conductor norm " << orb[0].cond.norm.get_str() << "  orbit size "
                          << orb.size() << "\n";
            return 0;
        }
        if (match->parsed()) {
            pipeline::MatchReport r =
                kind == "surface" ? engine.match_surface(idx) : engine.match_curve(idx);
            for (auto& l : r.log) std::cout << "  " << l << "\n";
            std::cout << "verdict: " << r.verdict << "\n";
            if (r.verdict == "proved-match") {
                std::cout << "conductor norm: " << r.cond_norm.get_str() << "\n";
                std::cout << "L_" << r.table_prime << " = " << r.table_factor.str() << "\n";
            }
            return r.verdict == "proved-match" ? 0 : 1;
        }
        if (vc->parsed()) {
            pipeline::MatchReport r = engine.verify_part_c(idx);
            for (auto& l : r.log) std::cout << "  " << l << "\n";
            std::cout << "verdict: " << r.verdict << "\n";
            if (r.verdict == "proved-match") {
                std::cout << "conductor norm: " << r.cond_norm.get_str() << "\n";
                std::cout << "L_" << r.table_prime << " = " << r.table_factor.str() << "\n";
            }
            return r.verdict == "proved-match" ? 0 : 1;
        }
        if (vs->parsed()) {
            pipeline::SigmaReport r = engine.verify_sigma_relation(idx);
            for (auto& l : r.log) std::cout << "  " << l << "\n";
            std::cout << (r.verified ? "verified" : "FAILED") << "\n";
            return r.verified ? 0 : 1;
        }
        if (rp->parsed()) {
            auto bundle = engine.emit_report({});
            std::cout << bundle.text;
            if (!out_path.empty()) {
                std::ofstream out(out_path);
                out << bundle.json;
                std::cout << "\nreport written to " << out_path << "\n";
            } else {
                std::cout << "\n" << bundle.json;
            }
            return bundle.all_verified ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
