// Acceptance suite: one pass/fail line per criterion, exit 0 only when all
// criteria pass.
#include "golden.hpp"

#include "k3hecke/pipeline.hpp"
#include "k3hecke/ffarith.hpp"

#include <chrono>
#include <iostream>
#include <random>

using namespace k3hecke;
using namespace k3hecke::pipeline;

namespace {

int failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name;
    if (!detail.empty()) std::cout << "  (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Config accept_config() {
    Config cfg;
    cfg.fields_path = std::string(TEST_DATA_DIR) + "/fields.dat";
    cfg.geometry_path = std::string(TEST_DATA_DIR) + "/geometry.dat";
    return cfg;
}

} // namespace

int main() {
    Engine engine(accept_config());

    // criterion 1: weight-2 transcendental rows for i = 1, 2, 3
    {
        const long want_cond[3] = {64, 3136, 23104};
        for (int i = 1; i <= 3; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            bool ok = false;
            std::string detail;
            try {
                MatchReport r = engine.match_surface(i);
                ok = r.verdict == "proved-match" && r.cond_norm == want_cond[i - 1] &&
                     r.table_factor == golden::to_factor(golden::table_X()[i - 1]);
                detail = "verdict=" + r.verdict + " cond=" + r.cond_norm.get_str() + " " +
                         std::to_string(seconds_since(t0)) + "s";
                ok = ok && seconds_since(t0) < 300;
            } catch (const std::exception& e) {
                detail = e.what();
            }
            report("criterion 1: surface match i=" + std::to_string(i), ok, detail);
        }
    }

    // criterion 2: weight-1 curve rows for i = 1..4
    {
        const long want_cond[4] = {4096, 25088, 184832, 3936256};
        for (int i = 1; i <= 4; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            bool ok = false;
            std::string detail;
            try {
                MatchReport r = engine.match_curve(i);
                ok = r.verdict == "proved-match" && r.cond_norm == want_cond[i - 1] &&
                     r.table_factor == golden::to_factor(golden::table_A()[i - 1]);
                detail = "verdict=" + r.verdict + " cond=" + r.cond_norm.get_str() + " " +
                         std::to_string(seconds_since(t0)) + "s";
                ok = ok && seconds_since(t0) < 120;
            } catch (const std::exception& e) {
                detail = e.what();
            }
            report("criterion 2: curve match i=" + std::to_string(i), ok, detail);
        }
    }

    // criterion 3: complementary weight-2 rows with conductor (1)
    {
        for (int i = 1; i <= 4; ++i) {
            auto t0 = std::chrono::steady_clock::now();
            bool ok = false;
            std::string detail;
            try {
                MatchReport r = engine.verify_part_c(i);
                ok = r.verdict == "proved-match" && r.cond_norm == 1 &&
                     r.table_factor == golden::to_factor(golden::table_psi_prime()[i - 1]);
                detail = "verdict=" + r.verdict + " " + std::to_string(seconds_since(t0)) + "s";
                ok = ok && seconds_since(t0) < 300;
            } catch (const std::exception& e) {
                detail = e.what();
            }
            report("criterion 3: psi-prime i=" + std::to_string(i), ok, detail);
        }
    }

    // criterion 4: bad-prime sets
    {
        bool ok = false;
        std::string detail;
        try {
            ok = engine.surface_bad(1) == std::set<long>{2, 3} &&
                 engine.surface_bad(2) == std::set<long>{2, 7} &&
                 engine.surface_bad(3) == std::set<long>{2, 7, 11, 19};
        } catch (const std::exception& e) {
            detail = e.what();
        }
        report("criterion 4: bad prime sets", ok, detail);
    }

    // criterion 5: exact trace cross-validation
    {
        auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        std::string detail;
        try {
            for (int i = 1; i <= 3 && ok; ++i) {
                MatchReport r = engine.match_surface(i);
                if (r.verdict != "proved-match") {
                    ok = false;
                    break;
                }
                hecke::EvalCtx& ctx = engine.ctx(i);
                for (long p = 3; p <= 60 && ok; ++p) {
                    if (!ffarith::is_prime_u64(p) || engine.surface_bad(i).count(p)) continue;
                    counting::EulerFactor f =
                        hecke::euler_factor_Q(ctx, r.survivor_orbit[0], p);
                    int mmax = p <= 20 ? 3 : 2;
                    auto s = f.power_sums(mmax);
                    for (int m = 1; m <= mmax && ok; ++m)
                        if (s[m - 1] != mpz_class(static_cast<long>(engine.surface_trace(i, p, m)))) {
                            ok = false;
                            detail = "surface " + std::to_string(i) + " p=" + std::to_string(p) +
                                     " m=" + std::to_string(m);
                        }
                }
            }
            for (int i = 1; i <= 4 && ok; ++i) {
                MatchReport r = engine.match_curve(i);
                if (r.verdict != "proved-match") {
                    ok = false;
                    break;
                }
                hecke::EvalCtx& ctx = engine.ctx(engine.geometry().curves[i - 1].field_id);
                std::set<long> bad = engine.curve_bad(i);
                for (long p = 3; p <= 60 && ok; ++p) {
                    if (!ffarith::is_prime_u64(p) || bad.count(p)) continue;
                    counting::EulerFactor f =
                        hecke::euler_factor_Q(ctx, r.survivor_orbit[0], p);
                    auto s = f.power_sums(3);
                    for (int m = 1; m <= 3 && ok; ++m)
                        if (s[m - 1] != mpz_class(static_cast<long>(engine.curve_trace(i, p, m)))) {
                            ok = false;
                            detail = "curve " + std::to_string(i) + " p=" + std::to_string(p) +
                                     " m=" + std::to_string(m);
                        }
                }
            }
            double el = seconds_since(t0);
            detail += (detail.empty() ? "" : "; ") + std::to_string(el) + "s";
            ok = ok && el < 900;
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report("criterion 5: trace cross-validation", ok, detail);
    }

    // criterion 6: exterior-square decomposition with exact division
    {
        bool ok = true;
        std::string detail;
        try {
            for (int i = 1; i <= 4 && ok; ++i) {
                MatchReport rc = engine.verify_part_c(i);
                if (rc.verdict != "proved-match") {
                    ok = false;
                    detail = "case " + std::to_string(i) + " " + rc.verdict;
                    break;
                }
                // re-run the division at every good prime up to 60
                hecke::EvalCtx& ctx = engine.ctx(engine.geometry().curves[i - 1].field_id);
                const numfield::FieldData& K = ctx.field();
                std::set<long> bad = engine.curve_bad(i);
                for (long p = 3; p <= 60 && ok; ++p) {
                    if (!ffarith::is_prime_u64(p) || bad.count(p)) continue;
                    counting::TraceData td{p, counting::TraceChannel::CurveH1, {}};
                    for (int m = 1; m <= 3; ++m)
                        td.traces.emplace_back(m, engine.curve_trace(i, p, m));
                    counting::EulerFactor h1 = counting::weil_from_traces(td, 1, 1);
                    counting::EulerFactor wedge = counting::exterior_square(h1);
                    counting::EulerFactor alg = counting::algebraic_part_factor(
                        numfield::cubic_subfield_split(K, p), p);
                    counting::EulerFactor fx =
                        i <= 3 ? hecke::euler_factor_Q(ctx, engine.match_surface(i).survivor_orbit[0], p)
                               : rc.x_slot_factor.p == p
                                     ? rc.x_slot_factor
                                     : hecke::euler_factor_Q(
                                           ctx,
                                           engine.verify_part_c(i).survivor_orbit[0], p);
                    // for i = 4 the x-slot factor at other primes requires the
                    // x-slot character itself; re-derive by dividing
                    zx::Poly q1, q2;
                    if (!zx::div_exact_unit(wedge.coeffs, alg.coeffs, q1)) {
                        ok = false;
                        detail = "cubic division failed at p=" + std::to_string(p);
                        break;
                    }
                    if (i <= 3) {
                        if (!zx::div_exact_unit(q1, fx.coeffs, q2)) {
                            ok = false;
                            detail = "x-slot division failed at p=" + std::to_string(p);
                            break;
                        }
                        counting::EulerFactor fp =
                            hecke::euler_factor_Q(ctx, rc.survivor_orbit[0], p);
                        if (!zx::equal(q2, fp.coeffs)) {
                            ok = false;
                            detail = "quotient mismatch at p=" + std::to_string(p);
                        }
                    } else {
                        // i = 4: psi-prime factor must divide, and the
                        // remaining quotient is the x-slot factor
                        counting::EulerFactor fp =
                            hecke::euler_factor_Q(ctx, rc.survivor_orbit[0], p);
                        if (!zx::div_exact_unit(q1, fp.coeffs, q2)) {
                            ok = false;
                            detail = "psi-prime division failed at p=" + std::to_string(p);
                        }
                    }
                }
            }
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report("criterion 6: exterior-square decomposition", ok, detail);
    }

    // criterion 7: twist relation
    {
        for (int i = 1; i <= 3; ++i) {
            bool ok = false;
            std::string detail;
            try {
                SigmaReport r = engine.verify_sigma_relation(i);
                ok = r.verified && r.primes_checked >= 50 && r.max_residual < 1e-30;
                detail = std::to_string(r.primes_checked) + " primes, max residual " +
                         std::to_string(r.max_residual);
            } catch (const std::exception& e) {
                detail = e.what();
            }
            report("criterion 7: twist relation i=" + std::to_string(i), ok, detail);
        }
    }

    // criterion 8: always-on property suites
    {
        bool ok = true;
        std::string detail;
        try {
            // quadratic character multiplicativity and zero sum
            std::mt19937_64 rng(71);
            for (auto [p, m] : {std::pair<long, int>{13, 2}, {17, 1}}) {
                auto fctx = ffarith::ff_context(p, m);
                long sum = 0;
                for (uint64_t idx = 0; idx < fctx.q(); ++idx)
                    sum += ffarith::quadratic_character(fctx.from_index(idx));
                if (sum != 0) ok = false;
                for (int t = 0; t < 100; ++t) {
                    auto a = fctx.from_index(1 + rng() % (fctx.q() - 1));
                    auto b = fctx.from_index(1 + rng() % (fctx.q() - 1));
                    if (ffarith::quadratic_character(a * b) !=
                        ffarith::quadratic_character(a) * ffarith::quadratic_character(b))
                        ok = false;
                }
            }
            if (!ok) detail = "quadratic character";

            // factorization resubstitution
            for (int t = 0; t < 40 && ok; ++t) {
                ffarith::FpPoly f(1 + rng() % 8);
                for (auto& c : f) c = rng() % 13;
                f = ffarith::fp_trim(std::move(f));
                if (f.size() < 2) continue;
                auto fac = ffarith::factor_fp_poly(f, 13);
                ffarith::FpPoly prod{f.back()};
                for (auto& [poly, mult] : fac)
                    for (int r = 0; r < mult; ++r) prod = ffarith::fp_mul(prod, poly, 13);
                if (prod != f) {
                    ok = false;
                    detail = "factor resubstitution";
                }
            }

            // norm multiplicativity and split-prime identity
            const numfield::FieldData& K = engine.ctx(1).field();
            for (int t = 0; t < 20 && ok; ++t) {
                numfield::NFElement a, b;
                for (int k = 0; k < 6; ++k) {
                    a.c[k] = static_cast<long>(rng() % 7) - 3;
                    b.c[k] = static_cast<long>(rng() % 7) - 3;
                }
                if (K.norm(K.mul(a, b)) != K.norm(a) * K.norm(b)) {
                    ok = false;
                    detail = "norm multiplicativity";
                }
            }
            for (long p : {13L, 17L, 37L}) {
                mpz_class prod = 1;
                for (auto& P : split_prime(K, p)) {
                    mpz_class n = P.norm();
                    for (int e = 0; e < P.e; ++e) prod *= n;
                }
                mpz_class p6;
                mpz_ui_pow_ui(p6.get_mpz_t(), p, 6);
                if (prod != p6) {
                    ok = false;
                    detail = "split norm product";
                }
            }

            // generator independence over 5 unit multiples
            {
                MatchReport r = engine.match_surface(1);
                hecke::EvalCtx& ctx = engine.ctx(1);
                auto P = split_prime(K, 29)[0];
                const numfield::NFElement& alpha = ctx.generator(P);
                const hecke::HeckeCharacter& psi = r.survivor_orbit[0];
                Cplx base = eval_at_prime(ctx, psi, P);
                for (int t = 0; t < 5 && ok; ++t) {
                    numfield::NFElement u = K.one();
                    for (int reps = 0; reps <= t; ++reps)
                        u = K.mul(u, (t + reps) % 2 ? K.unit1 : K.unit2);
                    numfield::NFElement ua = K.mul(u, alpha);
                    Cplx v = unit_root(psi.chi.value_frac(ua), digits_to_bits(120)) *
                             hecke::infinity_eval(K, psi.type, ua, 120);
                    if ((v - base).abs().to_double() > 1e-30) {
                        ok = false;
                        detail = "generator independence";
                    }
                }
            }

            // Weil bounds on every reported factor
            for (auto& row : {golden::table_X(), golden::table_A(), golden::table_psi_prime()})
                for (auto& r : row)
                    if (!golden::to_factor(r).check_weil()) {
                        ok = false;
                        detail = "weil bound";
                    }

            // Galois-twist L-invariance for p <= 50
            {
                MatchReport r = engine.match_curve(1);
                hecke::EvalCtx& ctx = engine.ctx(1);
                hecke::HeckeCharacter tw = hecke::galois_twist(ctx, r.survivor_orbit[0], 1);
                for (long p = 3; p <= 50 && ok; ++p) {
                    if (!ffarith::is_prime_u64(p) || engine.curve_bad(1).count(p)) continue;
                    if (!(hecke::euler_factor_Q(ctx, r.survivor_orbit[0], p) ==
                          hecke::euler_factor_Q(ctx, tw, p))) {
                        ok = false;
                        detail = "twist invariance p=" + std::to_string(p);
                    }
                }
            }

            // discrete log round trips (1000 samples)
            {
                auto P = split_prime(K, 17)[0];
                auto p2 = split_prime(K, 2)[0];
                auto G = resring::unit_group(K, resring::make_modulus(K, {{p2, 3}, {P, 1}}));
                const resring::ResidueRing& R = G->ring();
                int done = 0;
                while (done < 1000 && ok) {
                    std::vector<mpz_class> c(6);
                    for (auto& x : c) x = static_cast<long>(rng() % 500) - 250;
                    resring::Res rr = R.reduce(c);
                    if (!R.is_coprime(rr)) continue;
                    auto v = G->dlog(rr);
                    resring::Res back = R.one();
                    for (size_t j = 0; j < G->rank(); ++j)
                        back = R.mul(back, R.pow(G->gens()[j], v[j]));
                    if (back != rr) {
                        ok = false;
                        detail = "dlog round trip";
                    }
                    ++done;
                }
            }

            // byte-identical repeated reports
            {
                auto b1 = engine.emit_report({"surface"});
                auto b2 = engine.emit_report({"surface"});
                if (b1.json != b2.json || b1.text != b2.text) {
                    ok = false;
                    detail = "report stability";
                }
            }
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        report("criterion 8: property suites", ok, detail);
    }

    std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: " + std::to_string(failures))
              << std::endl;
    return failures == 0 ? 0 : 1;
}
