#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "golden.hpp"

#include "k3hecke/counting.hpp"
#include "k3hecke/ffarith.hpp"
#include "k3hecke/bigfloat.hpp"

#include <cstdlib>

using namespace k3hecke;
using namespace k3hecke::counting;
using k3hecke::ffarith::FFContext;
using k3hecke::ffarith::FFElement;

static GeometryData& geo() {
    static GeometryData gd = load_geometry(std::string(TEST_DATA_DIR) + "/geometry.dat");
    return gd;
}

// ---- independent oracles ----

// count points on y^2 = f7(x) over F_q by scanning (x, y) pairs
static long long oracle_curve_count(const CurveSpec& c, long p, int m) {
    FFContext ctx = ffarith::ff_context(p, m);
    long long n = 1;   // the point at infinity
    for (uint64_t xi = 0; xi < ctx.q(); ++xi) {
        FFElement x = ctx.from_index(xi);
        FFElement val = ctx.zero();
        for (int k = 7; k >= 0; --k) {
            mpz_class r = c.f7[k] % static_cast<long>(p);
            if (r < 0) r += static_cast<long>(p);
            val = val * x + ctx.from_int(r.get_si());
        }
        for (uint64_t yi = 0; yi < ctx.q(); ++yi) {
            FFElement y = ctx.from_index(yi);
            if (y * y == val) ++n;
        }
    }
    return n;
}

static FFElement eval_sextic(const SurfaceSpec& s, const FFContext& ctx,
                             const FFElement& x, const FFElement& y, const FFElement& z) {
    auto cf = [&](int i) {
        mpz_class r = s.g[i] % static_cast<long>(ctx.p());
        if (r < 0) r += static_cast<long>(ctx.p());
        return ctx.from_int(r.get_si());
    };
    FFElement g = cf(0) * (x * x * x) + cf(1) * (x * x * y) + cf(2) * (x * x * z)
                + cf(3) * (x * y * y) + cf(4) * (x * y * z) + cf(5) * (x * z * z)
                + cf(6) * (y * y * y) + cf(7) * (y * y * z) + cf(8) * (y * z * z)
                + cf(9) * (z * z * z);
    return x * y * z * g;
}

// character sum over P^2 with the x-first chart convention (different from
// the implementation's z-first convention)
static long long oracle_surface_S(const SurfaceSpec& s, long p, int m) {
    FFContext ctx = ffarith::ff_context(p, m);
    long long S = 0;
    FFElement one = ctx.one(), zero = ctx.zero();
    for (uint64_t yi = 0; yi < ctx.q(); ++yi)
        for (uint64_t zi = 0; zi < ctx.q(); ++zi)
            S += quadratic_character(eval_sextic(s, ctx, one, ctx.from_index(yi), ctx.from_index(zi)));
    for (uint64_t zi = 0; zi < ctx.q(); ++zi)
        S += quadratic_character(eval_sextic(s, ctx, zero, one, ctx.from_index(zi)));
    S += quadratic_character(eval_sextic(s, ctx, zero, zero, one));
    return S;
}

// partial derivative of f = xyz*g along variable `var`, via dual numbers
static FFElement sextic_partial(const SurfaceSpec& s, const FFContext& ctx, int var,
                                const FFElement& x, const FFElement& y, const FFElement& z) {
    struct Dual { FFElement a, b; };
    auto mulD = [&](const Dual& u, const Dual& v) {
        return Dual{u.a * v.a, u.a * v.b + u.b * v.a};
    };
    auto addD = [&](const Dual& u, const Dual& v) { return Dual{u.a + v.a, u.b + v.b}; };
    auto cf = [&](int i) {
        mpz_class r = s.g[i] % static_cast<long>(ctx.p());
        if (r < 0) r += static_cast<long>(ctx.p());
        return ctx.from_int(r.get_si());
    };
    Dual X{x, var == 0 ? ctx.one() : ctx.zero()};
    Dual Y{y, var == 1 ? ctx.one() : ctx.zero()};
    Dual Z{z, var == 2 ? ctx.one() : ctx.zero()};
    auto mono = [&](const Dual& a, const Dual& b, const Dual& c) { return mulD(mulD(a, b), c); };
    Dual terms[10] = {
        mono(X, X, X), mono(X, X, Y), mono(X, X, Z), mono(X, Y, Y), mono(X, Y, Z),
        mono(X, Z, Z), mono(Y, Y, Y), mono(Y, Y, Z), mono(Y, Z, Z), mono(Z, Z, Z)};
    Dual G{ctx.zero(), ctx.zero()};
    for (int i = 0; i < 10; ++i) G = addD(G, Dual{cf(i) * terms[i].a, cf(i) * terms[i].b});
    Dual F = mulD(mulD(mulD(X, Y), Z), G);
    return F.b;
}

// rational nodes by brute projective scan: f and all partials vanish
static long long oracle_nodes(const SurfaceSpec& s, long p, int m) {
    FFContext ctx = ffarith::ff_context(p, m);
    long long nodes = 0;
    auto consider = [&](const FFElement& x, const FFElement& y, const FFElement& z) {
        if (!eval_sextic(s, ctx, x, y, z).is_zero()) return;
        for (int var = 0; var < 3; ++var)
            if (!sextic_partial(s, ctx, var, x, y, z).is_zero()) return;
        ++nodes;
    };
    FFElement one = ctx.one(), zero = ctx.zero();
    for (uint64_t xi = 0; xi < ctx.q(); ++xi)
        for (uint64_t yi = 0; yi < ctx.q(); ++yi)
            consider(ctx.from_index(xi), ctx.from_index(yi), one);
    for (uint64_t xi = 0; xi < ctx.q(); ++xi)
        consider(ctx.from_index(xi), one, zero);
    consider(one, zero, zero);
    return nodes;
}

TEST_CASE("geometry data loads and verifies") {
    GeometryData& gd = geo();
    REQUIRE(gd.surfaces.size() == 3);
    REQUIRE(gd.curves.size() == 4);
    CHECK(gd.curves[0].field_id == 1);
    CHECK(gd.curves[3].field_id == 4);
}

TEST_CASE("curve counts against enumeration oracle") {
    GeometryData& gd = geo();
    // (C1, 17, 1): N = 12, t1 = 6
    long long n = count_curve(gd.curves[0], 17, 1);
    CHECK(n == 12);
    CHECK(oracle_curve_count(gd.curves[0], 17, 1) == 12);
    CHECK(17 + 1 - n == 6);

    // (C2, 13, 1): t1 = -4
    long long n2 = count_curve(gd.curves[1], 13, 1);
    CHECK(13 + 1 - n2 == -4);
    CHECK(oracle_curve_count(gd.curves[1], 13, 1) == n2);

    for (int ci : {0, 1, 2, 3})
        for (long p : {11L, 19L}) {
            const CurveSpec& c = gd.curves[ci];
            mpz_class d = 2 * c.disc();
            if (mpz_divisible_ui_p(d.get_mpz_t(), p)) continue;
            CHECK(count_curve(c, p, 1) == oracle_curve_count(c, p, 1));
            CHECK(count_curve(c, p, 2) == oracle_curve_count(c, p, 2));
        }
}

TEST_CASE("curve fiber over a root of f7 has exactly one point") {
    GeometryData& gd = geo();
    CHECK(zx::eval(gd.curves[0].f7, 0) == 0);
    // chi(0) = 0, so the fiber contributes the single point y = 0
    FFContext ctx = ffarith::ff_context(17, 1);
    CHECK(quadratic_character(ctx.zero()) == 0);
}

TEST_CASE("curve errors") {
    GeometryData& gd = geo();
    CHECK_THROWS(count_curve(gd.curves[0], 3, 1));   // 3 | disc for C1
    CHECK_THROWS(count_curve(gd.curves[0], 2, 1));
    CHECK_THROWS(count_curve(gd.curves[0], 5, 4));
    WorkBudget tight;
    tight.max_p_curve = 10;
    CHECK_THROWS(count_curve(gd.curves[0], 17, 1, tight));
}

TEST_CASE("surface counts against enumeration oracle") {
    GeometryData& gd = geo();
    SurfaceCount c1 = count_surface(gd.surfaces[0], 17, 1);
    CHECK(c1.S == 6);   // matches the first certified row's T-coefficient
    CHECK(oracle_surface_S(gd.surfaces[0], 17, 1) == 6);
    CHECK(oracle_nodes(gd.surfaces[0], 17, 1) == c1.nodes);
    CHECK(c1.N == 17LL * 17 + 17 + 1 + c1.S + 17 * c1.nodes);

    SurfaceCount c2 = count_surface(gd.surfaces[1], 13, 1);
    CHECK(c2.S == 2);
    CHECK(oracle_surface_S(gd.surfaces[1], 13, 1) == 2);

    for (int si : {0, 1, 2}) {
        const SurfaceSpec& s = gd.surfaces[si];
        for (long p : {5L, 13L, 17L, 23L}) {
            if (surface_is_bad_at(s, p)) continue;
            SurfaceCount c = count_surface(s, p, 1);
            CHECK(c.S == oracle_surface_S(s, p, 1));
            CHECK(c.nodes == oracle_nodes(s, p, 1));
            CHECK(std::llabs(c.S) <= 6 * p);   // Weil bound
        }
    }
    SurfaceCount cm2 = count_surface(gd.surfaces[0], 5, 2);
    CHECK(cm2.S == oracle_surface_S(gd.surfaces[0], 5, 2));
    CHECK(cm2.nodes == oracle_nodes(gd.surfaces[0], 5, 2));
}

TEST_CASE("surface char sum splits over ranges") {
    GeometryData& gd = geo();
    long long whole = surface_char_sum_range(gd.surfaces[0], 17, 1, 1, 17);
    long long a = surface_char_sum_range(gd.surfaces[0], 17, 1, 1, 9);
    long long b = surface_char_sum_range(gd.surfaces[0], 17, 1, 9, 17);
    CHECK(whole == a + b);
}

TEST_CASE("general position gives 15 nodes and NS trace 16q") {
    GeometryData& gd = geo();
    bool found = false;
    for (long p = 5; p <= 60 && !found; p += 2) {
        if (!ffarith::is_prime_u64(p)) continue;
        if (surface_is_bad_at(gd.surfaces[0], p)) continue;
        for (int m = 1; m <= 2 && !found; ++m) {
            SurfaceCount c = count_surface(gd.surfaces[0], p, m);
            if (c.nodes == 15) {
                found = true;
                long long q = 1;
                for (int i = 0; i < m; ++i) q *= p;
                // NS trace = q*(1 + 15) = 16q
                CHECK(c.N - (q * q + 1) - c.S == 16 * q);
            }
        }
    }
    CHECK(found);
}

TEST_CASE("surface bad primes reproduce the published sets") {
    GeometryData& gd = geo();
    CHECK(surface_bad_primes(gd.surfaces[0]) == std::set<long>{2, 3});
    CHECK(surface_bad_primes(gd.surfaces[1]) == std::set<long>{2, 7});
    CHECK(surface_bad_primes(gd.surfaces[2]) == std::set<long>{2, 7, 11, 19});
}

TEST_CASE("bad prime sets stable under raising the search bound") {
    GeometryData& gd = geo();
    for (int si : {0, 1, 2}) {
        auto bad = surface_bad_primes(gd.surfaces[si]);
        for (long p = 3; p <= 300; p += 2) {
            if (!ffarith::is_prime_u64(p)) continue;
            CHECK(surface_is_bad_at(gd.surfaces[si], p) == (bad.count(p) > 0));
        }
    }
}

TEST_CASE("surface errors") {
    GeometryData& gd = geo();
    CHECK_THROWS(count_surface(gd.surfaces[0], 3, 1));   // bad prime
    CHECK_THROWS(count_surface(gd.surfaces[0], 2, 1));
    WorkBudget tight;
    tight.max_p_m3 = 5;
    CHECK_THROWS(count_surface(gd.surfaces[0], 7, 3, tight));
}

TEST_CASE("weil_from_traces") {
    // zero traces, weight 1, sign +: Newton forces c1 = c2 = c3 = 0
    TraceData t0{5, TraceChannel::CurveH1, {{1, 0}, {2, 0}, {3, 0}}};
    EulerFactor z = weil_from_traces(t0, 1, 1);
    CHECK(z.coeffs == zx::Poly{1, 0, 0, 0, 0, 0, 125});
    CHECK(z.check_weil());
    CHECK(z.self_dual_sign() == 1);

    // C1 at p = 17 reproduces the certified row
    GeometryData& gd = geo();
    TraceData tc{17, TraceChannel::CurveH1, {}};
    for (int m = 1; m <= 3; ++m) {
        long long q = 1;
        for (int i = 0; i < m; ++i) q *= 17;
        tc.traces.emplace_back(m, q + 1 - count_curve(gd.curves[0], 17, m));
    }
    EulerFactor f = weil_from_traces(tc, 1, 1);
    CHECK(f == golden::to_factor(golden::table_A()[0]));

    // round trip through the printed weight-2 row at p = 37
    EulerFactor x3 = golden::to_factor(golden::table_X()[2]);
    auto s = x3.power_sums(3);
    TraceData tx{37, TraceChannel::TranscendentalK3,
                 {{1, s[0].get_si()}, {2, s[1].get_si()}, {3, s[2].get_si()}}};
    EulerFactor back = weil_from_traces(tx, 2, 1);
    CHECK(back == x3);
}

TEST_CASE("trace weil bounds") {
    TraceData bad{5, TraceChannel::CurveH1, {{1, 100}}};
    CHECK_THROWS(bad.check_weil_bounds());
}

TEST_CASE("exterior square small cases") {
    EulerFactor p2{6, 1, {1, -5, 6}};           // (1-2T)(1-3T)
    CHECK(exterior_square(p2).coeffs == zx::Poly{1, -6});

    EulerFactor p3{6, 1, {1, -6, 11, -6}};      // (1-T)(1-2T)(1-3T)
    CHECK(exterior_square(p3).coeffs == zx::Poly{1, -11, 36, -36});
}

TEST_CASE("exterior square of the A1 row at 17 factors as certified") {
    EulerFactor a1 = golden::to_factor(golden::table_A()[0]);
    EulerFactor wedge = exterior_square(a1);
    CHECK(wedge.degree() == 15);
    CHECK(wedge.weight == 2);

    zx::Poly q1, q2, q3;
    zx::Poly lin{1, -17};
    zx::Poly alg = zx::mul(zx::mul(lin, lin), lin);   // 17 splits in the cubic field
    REQUIRE(zx::div_exact_unit(wedge.coeffs, alg, q1));
    REQUIRE(zx::div_exact_unit(q1, golden::to_factor(golden::table_X()[0]).coeffs, q2));
    REQUIRE(zx::div_exact_unit(q2, golden::to_factor(golden::table_psi_prime()[0]).coeffs, q3));
    CHECK(q3 == zx::Poly{1});
}

TEST_CASE("exterior square floating cross-check") {
    // against prod_{i<j} (1 - a_i a_j T) at 60 digits
    EulerFactor a1 = golden::to_factor(golden::table_A()[0]);
    EulerFactor wedge = exterior_square(a1);
    long prec = digits_to_bits(60);
    auto roots = complex_roots(a1.coeffs, prec);
    std::vector<Cplx> alphas;
    for (auto& r : roots) alphas.push_back(r.inverse());
    std::vector<Cplx> poly{Cplx(prec)};
    poly[0].re = Real::from(1L, prec);
    for (size_t i = 0; i < alphas.size(); ++i)
        for (size_t j = i + 1; j < alphas.size(); ++j) {
            Cplx c = alphas[i] * alphas[j];
            std::vector<Cplx> next(poly.size() + 1, Cplx(prec));
            for (size_t k = 0; k < poly.size(); ++k) {
                next[k] = next[k] + poly[k];
                next[k + 1] = next[k + 1] - poly[k] * c;
            }
            poly = std::move(next);
        }
    REQUIRE(poly.size() == wedge.coeffs.size());
    for (size_t k = 0; k < poly.size(); ++k) {
        Real diff = (poly[k].re - Real::from(wedge.coeffs[k], prec)).abs() + poly[k].im.abs();
        double scale = std::abs(wedge.coeffs[k].get_d()) + 1.0;
        CHECK(diff.to_double() / scale < 1e-20);
    }
}

TEST_CASE("algebraic part factor") {
    EulerFactor split = algebraic_part_factor({{1, 1}, {1, 1}, {1, 1}}, 17);
    zx::Poly lin{1, -17};
    CHECK(split.coeffs == zx::mul(zx::mul(lin, lin), lin));

    EulerFactor inert = algebraic_part_factor({{1, 3}}, 5);
    CHECK(inert.coeffs == zx::Poly{1, 0, 0, -125});

    EulerFactor mixed = algebraic_part_factor({{1, 1}, {1, 2}}, 5);
    CHECK(mixed.coeffs == zx::mul(zx::Poly{1, -5}, zx::Poly{1, 0, -25}));

    CHECK_THROWS(algebraic_part_factor({{3, 1}}, 7));   // ramified
}

TEST_CASE("count record format") {
    SurfaceCount c{6, 15, 500};
    CHECK(count_record(17, 1, c) == "p=17 m=1 S=6 nodes=15 N=500 t=6");
}
