#include "k3hecke/counting.hpp"
#include "k3hecke/ffarith.hpp"
#include "k3hecke/bigfloat.hpp"
#include "k3hecke/zmatrix.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <algorithm>
#include <map>

namespace k3hecke {
namespace counting {

using ffarith::FFContext;
using ffarith::FFElement;

// ---------------------------------------------------------------- Euler factors

bool EulerFactor::check_weil(double rel_tol) const {
    if (coeffs.empty() || coeffs[0] != 1) return false;
    auto roots = complex_roots(zx::squarefree_part(coeffs), 160);
    long wp = 192;
    Real target = Real::from(static_cast<long>(p), wp);
    // |root| = p^{-w/2}: compare |root|^2 * p^w against 1
    for (auto& r : roots) {
        Real t = r.norm() * target.pow_si(weight);
        double err = std::abs(t.to_double() - 1.0);
        if (err > rel_tol) return false;
    }
    return true;
}

int EulerFactor::self_dual_sign() const {
    int d = degree();
    if (d < 0) return 0;
    mpz_class pz(p);
    for (int sign : {1, -1}) {
        bool ok = true;
        for (int k = 0; k <= d && ok; ++k) {
            long e = static_cast<long>(weight) * (d - 2 * k) / 2;
            if (2 * e != static_cast<long>(weight) * (d - 2 * k)) { ok = false; break; }
            mpz_class lhs = coeffs[d - k];
            mpz_class rhs = coeffs[k] * sign;
            if (e >= 0) {
                mpz_class pe;
                mpz_pow_ui(pe.get_mpz_t(), pz.get_mpz_t(), e);
                rhs *= pe;
            } else {
                mpz_class pe;
                mpz_pow_ui(pe.get_mpz_t(), pz.get_mpz_t(), -e);
                lhs *= pe;
            }
            if (lhs != rhs) ok = false;
        }
        if (ok) return sign;
    }
    return 0;
}

std::string EulerFactor::str() const {
    std::ostringstream os;
    bool first = true;
    for (size_t k = 0; k < coeffs.size(); ++k) {
        if (coeffs[k] == 0) continue;
        if (!first) os << (coeffs[k] > 0 ? " + " : " - ");
        else if (coeffs[k] < 0) os << "-";
        mpz_class a = abs(coeffs[k]);
        if (a != 1 || k == 0) os << a.get_str();
        if (k >= 1) {
            if (a != 1) os << "*";
            os << "T";
            if (k > 1) os << "^" << k;
        }
        first = false;
    }
    if (first) os << "0";
    return os.str();
}

long long TraceData::get(int m) const {
    for (auto& [mm, t] : traces)
        if (mm == m) return t;
    throw std::out_of_range("TraceData: missing level");
}

void TraceData::check_weil_bounds() const {
    int w = channel == TraceChannel::TranscendentalK3 ? 2 : 1;
    for (auto& [m, t] : traces) {
        mpz_class q;
        mpz_ui_pow_ui(q.get_mpz_t(), p, m);
        // |t| <= 6 q^{w/2}  <=>  t^2 <= 36 q^w
        mpz_class lhs = mpz_class(static_cast<long>(t)) * mpz_class(static_cast<long>(t));
        mpz_class rhs = 36;
        for (int i = 0; i < w; ++i) rhs *= q;
        if (lhs > rhs) throw std::runtime_error("TraceData: Weil bound violated");
    }
}

// ---------------------------------------------------------------- specs

static const int SURF_VERIFY_PRIMES[] = {1000003, 1000033, 1000037};

void SurfaceSpec::verify() const {
    if (picard != 16) throw std::runtime_error("SurfaceSpec: expected Picard number 16");
    for (int p : SURF_VERIFY_PRIMES)
        if (surface_is_bad_at(*this, p))
            throw std::runtime_error("SurfaceSpec: lines degenerate over Q-bar (bad at a verification prime)");
}

mpz_class CurveSpec::disc() const { return zx::discriminant(f7); }

void CurveSpec::verify() const {
    if (zx::degree(f7) != 7 || f7[7] != 1)
        throw std::runtime_error("CurveSpec: f7 must be monic of degree 7");
    for (int k = 0; k <= 6; k += 2)
        if (f7[k] != 0) throw std::runtime_error("CurveSpec: f7 must be odd");
    if (disc() == 0) throw std::runtime_error("CurveSpec: zero discriminant");
}

// ---------------------------------------------------------------- fast kernels

namespace {

struct KernelCtx {
    uint64_t p;
    int m;
    uint64_t q;
    uint64_t mod[6];           // lower coefficients of the monic modulus
    std::vector<int8_t> chi;   // quadratic character by element index
};

template <int M>
struct El {
    uint64_t c[M];
};

template <int M>
inline El<M> mul(const KernelCtx& k, const El<M>& a, const El<M>& b) {
    unsigned __int128 acc[2 * M - 1] = {};
    for (int i = 0; i < M; ++i)
        for (int j = 0; j < M; ++j)
            acc[i + j] += static_cast<unsigned __int128>(a.c[i]) * b.c[j];
    for (int t = 2 * M - 2; t >= M; --t) {
        uint64_t v = static_cast<uint64_t>(acc[t] % k.p);
        if (v == 0) continue;
        for (int j = 0; j < M; ++j)
            acc[t - M + j] += static_cast<unsigned __int128>(v) * (k.p - k.mod[j]);
    }
    El<M> r;
    for (int i = 0; i < M; ++i) r.c[i] = static_cast<uint64_t>(acc[i] % k.p);
    return r;
}

template <int M>
inline El<M> add(const KernelCtx& k, const El<M>& a, const El<M>& b) {
    El<M> r;
    for (int i = 0; i < M; ++i) {
        uint64_t s = a.c[i] + b.c[i];
        r.c[i] = s >= k.p ? s - k.p : s;
    }
    return r;
}

template <int M>
inline El<M> scalar_mul(const KernelCtx& k, uint64_t s, const El<M>& a) {
    El<M> r;
    for (int i = 0; i < M; ++i)
        r.c[i] = static_cast<uint64_t>((static_cast<unsigned __int128>(s) * a.c[i]) % k.p);
    return r;
}

template <int M>
inline uint64_t index_of(const KernelCtx& k, const El<M>& a) {
    uint64_t idx = 0;
    for (int i = M; i-- > 0;) idx = idx * k.p + a.c[i];
    return idx;
}

template <int M>
inline El<M> from_index(const KernelCtx& k, uint64_t idx) {
    El<M> r;
    for (int i = 0; i < M; ++i) { r.c[i] = idx % k.p; idx /= k.p; }
    return r;
}

// odometer step through field elements in index order
template <int M>
inline void advance(const KernelCtx& k, El<M>& a) {
    for (int i = 0; i < M; ++i) {
        if (++a.c[i] < k.p) return;
        a.c[i] = 0;
    }
}

KernelCtx make_kernel_ctx(long p, int m) {
    FFContext ctx = ffarith::ff_context(static_cast<uint64_t>(p), m);
    KernelCtx k;
    k.p = ctx.p();
    k.m = m;
    k.q = ctx.q();
    for (int i = 0; i < m; ++i) k.mod[i] = i < static_cast<int>(ctx.modulus().size()) ? ctx.modulus()[i] : 0;
    return k;
}

template <int M>
void build_chi(KernelCtx& k) {
    k.chi.assign(k.q, -1);
    k.chi[0] = 0;
    El<M> x = from_index<M>(k, 1);
    for (uint64_t i = 1; i < k.q; ++i) {
        k.chi[index_of<M>(k, mul<M>(k, x, x))] = 1;
        advance<M>(k, x);
    }
}

template <int M>
long long curve_sum_impl(const CurveSpec& spec, KernelCtx& k, uint64_t xlo, uint64_t xhi) {
    uint64_t c[8];
    for (int i = 0; i <= 7; ++i) {
        mpz_class r = spec.f7[i] % static_cast<long>(k.p);
        if (r < 0) r += static_cast<long>(k.p);
        c[i] = r.get_ui();
    }
    long long s = 0;
    El<M> x = from_index<M>(k, xlo);
    for (uint64_t i = xlo; i < xhi; ++i) {
        El<M> acc{};
        acc.c[0] = c[7];
        for (int d = 6; d >= 0; --d) {
            acc = mul<M>(k, acc, x);
            uint64_t v = acc.c[0] + c[d];
            acc.c[0] = v >= k.p ? v - k.p : v;
        }
        s += k.chi[index_of<M>(k, acc)];
        advance<M>(k, x);
    }
    return s;
}

// g(x,y,1) = A(x) + B(x) y + C(x) y^2 + D y^3 in the fixed monomial order
template <int M>
long long surface_sum_impl(const SurfaceSpec& spec, KernelCtx& k, uint64_t xlo, uint64_t xhi) {
    uint64_t gc[10];
    for (int i = 0; i < 10; ++i) {
        mpz_class r = spec.g[i] % static_cast<long>(k.p);
        if (r < 0) r += static_cast<long>(k.p);
        gc[i] = r.get_ui();
    }
    long long s = 0;
    if (xlo < 1) xlo = 1;
    El<M> x = from_index<M>(k, xlo);
    for (uint64_t i = xlo; i < xhi; ++i) {
        El<M> x2 = mul<M>(k, x, x);
        El<M> x3 = mul<M>(k, x2, x);
        El<M> A = add<M>(k, add<M>(k, scalar_mul<M>(k, gc[0], x3), scalar_mul<M>(k, gc[2], x2)),
                         add<M>(k, scalar_mul<M>(k, gc[5], x), from_index<M>(k, 0)));
        A.c[0] = (A.c[0] + gc[9]) % k.p;
        El<M> B = add<M>(k, scalar_mul<M>(k, gc[1], x2), scalar_mul<M>(k, gc[4], x));
        B.c[0] = (B.c[0] + gc[8]) % k.p;
        El<M> C = scalar_mul<M>(k, gc[3], x);
        C.c[0] = (C.c[0] + gc[7]) % k.p;
        El<M> D{};
        D.c[0] = gc[6];

        El<M> y = from_index<M>(k, 1);
        for (uint64_t j = 1; j < k.q; ++j) {
            // value = x*y*(A + y(B + y(C + yD)))
            El<M> h = add<M>(k, C, mul<M>(k, y, D));
            h = add<M>(k, B, mul<M>(k, y, h));
            h = add<M>(k, A, mul<M>(k, y, h));
            h = mul<M>(k, h, mul<M>(k, x, y));
            s += k.chi[index_of<M>(k, h)];
            advance<M>(k, y);
        }
        advance<M>(k, x);
    }
    return s;
}

template <int M>
long long dispatch_curve(const CurveSpec& spec, long p, uint64_t xlo, uint64_t xhi) {
    KernelCtx k = make_kernel_ctx(p, M);
    build_chi<M>(k);
    if (xhi > k.q) xhi = k.q;
    return curve_sum_impl<M>(spec, k, xlo, xhi);
}

template <int M>
long long dispatch_surface(const SurfaceSpec& spec, long p, uint64_t xlo, uint64_t xhi) {
    KernelCtx k = make_kernel_ctx(p, M);
    build_chi<M>(k);
    if (xhi > k.q) xhi = k.q;
    return surface_sum_impl<M>(spec, k, xlo, xhi);
}

} // namespace

long long curve_char_sum_range(const CurveSpec& spec, long p, int m, uint64_t xlo, uint64_t xhi) {
    switch (m) {
        case 1: return dispatch_curve<1>(spec, p, xlo, xhi);
        case 2: return dispatch_curve<2>(spec, p, xlo, xhi);
        case 3: return dispatch_curve<3>(spec, p, xlo, xhi);
        default: throw std::invalid_argument("curve counting: m must be 1..3");
    }
}

long long surface_char_sum_range(const SurfaceSpec& spec, long p, int m, uint64_t xlo, uint64_t xhi) {
    switch (m) {
        case 1: return dispatch_surface<1>(spec, p, xlo, xhi);
        case 2: return dispatch_surface<2>(spec, p, xlo, xhi);
        case 3: return dispatch_surface<3>(spec, p, xlo, xhi);
        default: throw std::invalid_argument("surface counting: m must be 1..3");
    }
}

long long count_curve(const CurveSpec& spec, long p, int m, const WorkBudget& budget) {
    if (p == 2) throw std::invalid_argument("count_curve: p = 2 is always bad");
    if (m < 1 || m > 3) throw std::invalid_argument("count_curve: m must be 1..3");
    if (p > budget.max_p_curve) throw std::runtime_error("count_curve: work budget exceeded");
    mpz_class d = spec.disc() * 2;
    if (mpz_divisible_ui_p(d.get_mpz_t(), p))
        throw std::runtime_error("count_curve: bad reduction");
    mpz_class q;
    mpz_ui_pow_ui(q.get_mpz_t(), p, m);
    long long sum = curve_char_sum_range(spec, p, m, 0, q.get_ui());
    // one rational point at infinity (deg = 7); affine: sum of 1 + chi(f(x))
    return 1 + q.get_si() + sum;
}

// ---------------------------------------------------------------- node counting

namespace {

// expand a cubic form along a coordinate line into the 4 coefficients of the
// restricted binary cubic; sel = which variable is set to zero
std::array<mpz_class, 4> restrict_cubic(const std::array<mpz_class, 10>& g, int zero_var) {
    // order: x^3, x^2y, x^2z, xy^2, xyz, xz^2, y^3, y^2z, yz^2, z^3
    switch (zero_var) {
        case 0: return {g[6], g[7], g[8], g[9]};   // g(0,y,z): y^3, y^2z, yz^2, z^3
        case 1: return {g[0], g[2], g[5], g[9]};   // g(x,0,z): x^3, x^2z, xz^2, z^3
        case 2: return {g[0], g[1], g[3], g[6]};   // g(x,y,0): x^3, x^2y, xy^2, y^3
        default: throw std::logic_error("restrict_cubic");
    }
}

mpz_class binary_cubic_disc(const std::array<mpz_class, 4>& c) {
    const mpz_class &a = c[0], &b = c[1], &cc = c[2], &d = c[3];
    return 18 * a * b * cc * d - 4 * b * b * b * d + b * b * cc * cc
         - 4 * a * cc * cc * cc - 27 * a * a * d * d;
}

// partial derivatives of g as coefficient arrays in the same monomial order
// but as quadratic forms: order x^2, xy, xz, y^2, yz, z^2
std::array<std::array<mpz_class, 6>, 3> cubic_partials(const std::array<mpz_class, 10>& g) {
    std::array<std::array<mpz_class, 6>, 3> d{};
    // monomials: 0:x^3 1:x^2y 2:x^2z 3:xy^2 4:xyz 5:xz^2 6:y^3 7:y^2z 8:yz^2 9:z^3
    // d/dx
    d[0][0] = 3 * g[0]; d[0][1] = 2 * g[1]; d[0][2] = 2 * g[2];
    d[0][3] = g[3];     d[0][4] = g[4];     d[0][5] = g[5];
    // d/dy
    d[1][0] = g[1]; d[1][1] = 2 * g[3]; d[1][2] = g[4];
    d[1][3] = 3 * g[6]; d[1][4] = 2 * g[7]; d[1][5] = g[8];
    // d/dz
    d[2][0] = g[2]; d[2][1] = g[4]; d[2][2] = 2 * g[5];
    d[2][3] = g[7]; d[2][4] = 2 * g[8]; d[2][5] = 3 * g[9];
    return d;
}

// 6x3 matrix of the second partials (rows: xx, xy, xz, yy, yz, zz; each a linear form)
ZMat second_partials_matrix(const std::array<mpz_class, 10>& g) {
    ZMat M(6, 3);
    auto set = [&](int row, mpz_class cx, mpz_class cy, mpz_class cz) {
        M.at(row, 0) = cx; M.at(row, 1) = cy; M.at(row, 2) = cz;
    };
    set(0, 6 * g[0], 2 * g[1], 2 * g[2]);        // g_xx
    set(1, 2 * g[1], 2 * g[3], g[4]);            // g_xy
    set(2, 2 * g[2], g[4], 2 * g[5]);            // g_xz
    set(3, 2 * g[3], 6 * g[6], 2 * g[7]);        // g_yy
    set(4, g[4], 2 * g[7], 2 * g[8]);            // g_yz
    set(5, 2 * g[5], 2 * g[8], 6 * g[9]);        // g_zz
    return M;
}

// FFElement polynomial helpers (coefficients ascending)
using FPoly = std::vector<FFElement>;

FPoly fpoly_trim(FPoly f) {
    while (!f.empty() && f.back().is_zero()) f.pop_back();
    return f;
}

FFElement fpoly_eval(const FPoly& f, const FFElement& x, const FFContext& ctx) {
    FFElement acc = ctx.zero();
    for (size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
    return acc;
}

FPoly fpoly_mul(const FPoly& a, const FPoly& b, const FFContext& ctx) {
    if (a.empty() || b.empty()) return {};
    FPoly r(a.size() + b.size() - 1, ctx.zero());
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t j = 0; j < b.size(); ++j)
            r[i + j] = r[i + j] + a[i] * b[j];
    return fpoly_trim(std::move(r));
}

FPoly fpoly_sub(const FPoly& a, const FPoly& b, const FFContext& ctx) {
    FPoly r(std::max(a.size(), b.size()), ctx.zero());
    for (size_t i = 0; i < r.size(); ++i) {
        if (i < a.size()) r[i] = r[i] + a[i];
        if (i < b.size()) r[i] = r[i] - b[i];
    }
    return fpoly_trim(std::move(r));
}

FPoly fpoly_mod(FPoly a, const FPoly& m, const FFContext& ctx) {
    a = fpoly_trim(std::move(a));
    FPoly mm = fpoly_trim(m);
    FFElement lcinv = mm.back().inverse();
    while (a.size() >= mm.size()) {
        FFElement c = a.back() * lcinv;
        size_t shift = a.size() - mm.size();
        for (size_t i = 0; i < mm.size(); ++i) a[shift + i] = a[shift + i] - c * mm[i];
        a = fpoly_trim(std::move(a));
    }
    return a;
}

FPoly fpoly_gcd(FPoly a, FPoly b, const FFContext& ctx) {
    a = fpoly_trim(std::move(a));
    b = fpoly_trim(std::move(b));
    while (!b.empty()) {
        FPoly r = fpoly_mod(a, b, ctx);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

struct QuadInX {
    // quadratic in x with coefficients polynomials in y (ascending in y)
    FPoly a0, a1, a2;
};

// evaluate a quadratic form (order x^2,xy,xz,y^2,yz,z^2) at z=1 as QuadInX
QuadInX quad_at_z1(const std::array<mpz_class, 6>& qf, const FFContext& ctx) {
    auto sc = [&](const mpz_class& c) {
        mpz_class r = c % static_cast<long>(ctx.p());
        if (r < 0) r += static_cast<long>(ctx.p());
        return ctx.from_int(r.get_si());
    };
    QuadInX q;
    q.a2 = {sc(qf[0])};                                  // x^2
    q.a1 = {sc(qf[2]), sc(qf[1])};                       // xz + xy*y
    q.a0 = {sc(qf[5]), sc(qf[4]), sc(qf[3])};            // z^2 + yz*y + y^2*y^2
    return q;
}

// Res_x of two quadratics with polynomial coefficients:
// (a2 b0 - a0 b2)^2 - (a2 b1 - a1 b2)(a1 b0 - a0 b1)
FPoly quad_resultant(const QuadInX& A, const QuadInX& B, const FFContext& ctx) {
    FPoly t1 = fpoly_sub(fpoly_mul(A.a2, B.a0, ctx), fpoly_mul(A.a0, B.a2, ctx), ctx);
    FPoly t2 = fpoly_sub(fpoly_mul(A.a2, B.a1, ctx), fpoly_mul(A.a1, B.a2, ctx), ctx);
    FPoly t3 = fpoly_sub(fpoly_mul(A.a1, B.a0, ctx), fpoly_mul(A.a0, B.a1, ctx), ctx);
    return fpoly_sub(fpoly_mul(t1, t1, ctx), fpoly_mul(t2, t3, ctx), ctx);
}

long long count_rational_nodes(const SurfaceSpec& spec, const FFContext& ctx) {
    uint64_t q = ctx.q();
    long long nodes = 3;   // the three coordinate vertices

    // intersections of the cubic's lines with the coordinate lines
    for (int var = 0; var < 3; ++var) {
        auto bc = restrict_cubic(spec.g, var);
        FPoly c;
        for (int i = 3; i >= 0; --i) {
            mpz_class r = bc[i] % static_cast<long>(ctx.p());
            if (r < 0) r += static_cast<long>(ctx.p());
            c.push_back(ctx.from_int(r.get_si()));   // ascending in the second coord
        }
        c = fpoly_trim(std::move(c));
        // roots with both projective coordinates nonzero
        for (uint64_t i = 1; i < q; ++i) {
            FFElement t = ctx.from_index(i);
            if (fpoly_eval(c, t, ctx).is_zero()) ++nodes;
        }
    }

    // singular points of {g = 0}; at good primes these avoid the coordinate
    // lines, so the affine chart z=1 with x,y != 0 sees all of them
    auto parts = cubic_partials(spec.g);
    QuadInX qx = quad_at_z1(parts[0], ctx);
    QuadInX qy = quad_at_z1(parts[1], ctx);
    QuadInX qz = quad_at_z1(parts[2], ctx);

    FPoly r = quad_resultant(qx, qy, ctx);
    if (r.empty()) r = quad_resultant(qx, qz, ctx);
    if (r.empty()) r = quad_resultant(qy, qz, ctx);
    if (r.empty()) throw std::runtime_error("count_surface: degenerate partials eliminant");

    auto eval_quad = [&](const QuadInX& Q, const FFElement& x, const FFElement& y) {
        return (fpoly_eval(Q.a2, y, ctx) * x + fpoly_eval(Q.a1, y, ctx)) * x + fpoly_eval(Q.a0, y, ctx);
    };
    auto gc = [&](int i) {
        mpz_class v = spec.g[i] % static_cast<long>(ctx.p());
        if (v < 0) v += static_cast<long>(ctx.p());
        return ctx.from_int(v.get_si());
    };
    auto eval_g = [&](const FFElement& x, const FFElement& y) {
        FFElement one = ctx.one();
        FFElement terms[10] = {
            x * x * x, x * x * y, x * x, x * y * y, x * y, x,
            y * y * y, y * y, y, one,
        };
        FFElement acc = ctx.zero();
        for (int i = 0; i < 10; ++i) acc = acc + gc(i) * terms[i];
        return acc;
    };

    std::set<std::pair<uint64_t, uint64_t>> found;
    for (uint64_t yi = 1; yi < q; ++yi) {
        FFElement y = ctx.from_index(yi);
        if (!fpoly_eval(r, y, ctx).is_zero()) continue;
        // common x-roots of qx, qy at this y
        FPoly u = fpoly_trim({fpoly_eval(qx.a0, y, ctx), fpoly_eval(qx.a1, y, ctx), fpoly_eval(qx.a2, y, ctx)});
        FPoly v = fpoly_trim({fpoly_eval(qy.a0, y, ctx), fpoly_eval(qy.a1, y, ctx), fpoly_eval(qy.a2, y, ctx)});
        FPoly g = fpoly_gcd(u, v, ctx);
        std::vector<uint64_t> xs;
        if (g.empty()) {
            // both partials vanish identically at this y: every x is a candidate
            for (uint64_t xi = 1; xi < q; ++xi) xs.push_back(xi);
        } else if (g.size() >= 2) {
            for (uint64_t xi = 1; xi < q; ++xi) {
                FFElement x = ctx.from_index(xi);
                if (fpoly_eval(g, x, ctx).is_zero()) xs.push_back(xi);
            }
        }
        for (uint64_t xi : xs) {
            FFElement x = ctx.from_index(xi);
            if (!eval_quad(qx, x, y).is_zero()) continue;
            if (!eval_quad(qy, x, y).is_zero()) continue;
            if (!eval_quad(qz, x, y).is_zero()) continue;
            if (!eval_g(x, y).is_zero()) continue;
            found.insert({xi, yi});
        }
    }
    return nodes + static_cast<long long>(found.size());
}

} // namespace

SurfaceCount count_surface(const SurfaceSpec& spec, long p, int m, const WorkBudget& budget) {
    if (p == 2) throw std::invalid_argument("count_surface: p = 2 is always bad");
    if (m < 1 || m > 3) throw std::invalid_argument("count_surface: m must be 1..3");
    if ((m <= 2 && p > budget.max_p_m12) || (m == 3 && p > budget.max_p_m3))
        throw std::runtime_error("count_surface: work budget exceeded");
    if (surface_is_bad_at(spec, p)) throw std::runtime_error("count_surface: bad prime");

    mpz_class qz;
    mpz_ui_pow_ui(qz.get_mpz_t(), p, m);
    uint64_t q = qz.get_ui();

    SurfaceCount out;
    out.S = surface_char_sum_range(spec, p, m, 1, q);
    FFContext ctx = ffarith::ff_context(static_cast<uint64_t>(p), m);
    out.nodes = count_rational_nodes(spec, ctx);
    out.N = static_cast<long long>(q) * q + q + 1 + out.S + static_cast<long long>(q) * out.nodes;
    return out;
}

// ---------------------------------------------------------------- bad primes

namespace {

void factor_into(std::set<mpz_class>& primes, mpz_class n);

mpz_class pollard_rho(const mpz_class& n) {
    // Brent's variant; n odd composite
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(42);
    while (true) {
        mpz_class y = rng.get_z_range(n - 2) + 1;
        mpz_class c = rng.get_z_range(n - 2) + 1;
        mpz_class x, d = 1, q = 1, ys;
        unsigned long r = 1;
        const unsigned long step = 128;
        while (d == 1) {
            x = y;
            for (unsigned long i = 0; i < r; ++i) y = (y * y + c) % n;
            for (unsigned long k = 0; k < r && d == 1; k += step) {
                ys = y;
                unsigned long lim = std::min(step, r - k);
                for (unsigned long i = 0; i < lim; ++i) {
                    y = (y * y + c) % n;
                    mpz_class t = x - y;
                    if (t < 0) t = -t;
                    q = q * t % n;
                }
                mpz_gcd(d.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
            }
            r *= 2;
        }
        if (d == n) {
            // backtrack
            do {
                ys = (ys * ys + c) % n;
                mpz_class t = x - ys;
                if (t < 0) t = -t;
                mpz_gcd(d.get_mpz_t(), t.get_mpz_t(), n.get_mpz_t());
            } while (d == 1);
        }
        if (d != n) return d;
    }
}

void factor_into(std::set<mpz_class>& primes, mpz_class n) {
    if (n < 0) n = -n;
    for (long p = 2; p < 1000000 && n > 1; p += (p == 2 ? 1 : 2)) {
        if (!mpz_divisible_ui_p(n.get_mpz_t(), p)) continue;
        primes.insert(mpz_class(p));
        while (mpz_divisible_ui_p(n.get_mpz_t(), p))
            mpz_divexact_ui(n.get_mpz_t(), n.get_mpz_t(), p);
    }
    if (n == 1) return;
    if (mpz_probab_prime_p(n.get_mpz_t(), 40)) { primes.insert(n); return; }
    mpz_class d = pollard_rho(n);
    factor_into(primes, d);
    factor_into(primes, n / d);
}

int matrix_rank_mod_p(const ZMat& M, const mpz_class& p) {
    size_t rows = M.rows(), cols = M.cols();
    std::vector<std::vector<mpz_class>> a(rows, std::vector<mpz_class>(cols));
    for (size_t i = 0; i < rows; ++i)
        for (size_t j = 0; j < cols; ++j) {
            a[i][j] = M.at(i, j) % p;
            if (a[i][j] < 0) a[i][j] += p;
        }
    int rank = 0;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < rows; ++col) {
        size_t piv = row;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[row]);
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), a[row][col].get_mpz_t(), p.get_mpz_t());
        for (size_t j = col; j < cols; ++j) a[row][j] = a[row][j] * inv % p;
        for (size_t i = 0; i < rows; ++i) {
            if (i == row || a[i][col] == 0) continue;
            mpz_class f = a[i][col];
            for (size_t j = col; j < cols; ++j) {
                a[i][j] = (a[i][j] - f * a[row][j]) % p;
                if (a[i][j] < 0) a[i][j] += p;
            }
        }
        ++row;
        ++rank;
    }
    return rank;
}

} // namespace

bool surface_is_bad_at(const SurfaceSpec& spec, const mpz_class& p) {
    auto modp = [&](const mpz_class& v) {
        mpz_class r = v % p;
        if (r < 0) r += p;
        return r;
    };
    // (1) a cubic line through a coordinate vertex
    if (modp(spec.g[0]) == 0 || modp(spec.g[6]) == 0 || modp(spec.g[9]) == 0) return true;
    // (2) collision on a coordinate line
    for (int var = 0; var < 3; ++var)
        if (modp(binary_cubic_disc(restrict_cubic(spec.g, var))) == 0) return true;
    // (3) a point of multiplicity >= 3 (concurrent or repeated cubic lines)
    if (matrix_rank_mod_p(second_partials_matrix(spec.g), p) <= 2) return true;
    return false;
}

std::set<long> surface_bad_primes(const SurfaceSpec& spec) {
    mpz_class D = spec.g[0] * spec.g[6] * spec.g[9];
    for (int var = 0; var < 3; ++var) D *= binary_cubic_disc(restrict_cubic(spec.g, var));
    // all 3x3 minors of the 6x3 second-partials matrix
    ZMat M = second_partials_matrix(spec.g);
    mpz_class minor_gcd = 0;
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
            for (int c = b + 1; c < 6; ++c) {
                ZMat sub(3, 3);
                int rows[3] = {a, b, c};
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) sub.at(i, j) = M.at(rows[i], j);
                mpz_class d = sub.det_bareiss();
                mpz_gcd(minor_gcd.get_mpz_t(), minor_gcd.get_mpz_t(), d.get_mpz_t());
            }
    if (minor_gcd == 0) throw std::runtime_error("surface_bad_primes: degenerate over Q");
    D *= minor_gcd;
    if (D == 0) throw std::runtime_error("surface_bad_primes: degenerate over Q");

    std::set<mpz_class> cand;
    factor_into(cand, D);
    std::set<long> bad{2};
    for (auto& p : cand) {
        if (p == 2) continue;
        if (surface_is_bad_at(spec, p)) bad.insert(p.get_si());
    }
    return bad;
}

std::set<long> curve_bad_primes(const CurveSpec& spec) {
    std::set<mpz_class> primes;
    factor_into(primes, 2 * spec.disc());
    std::set<long> out;
    for (auto& p : primes) out.insert(p.get_si());
    return out;
}

// ---------------------------------------------------------------- polynomial builders

EulerFactor weil_from_traces(const TraceData& traces, int weight, int sign) {
    traces.check_weil_bounds();
    mpz_class s1(static_cast<long>(traces.get(1))), s2(static_cast<long>(traces.get(2))), s3(static_cast<long>(traces.get(3)));
    mpz_class c1 = -s1;
    mpz_class n2 = -(s2 + c1 * s1);
    if (!mpz_divisible_ui_p(n2.get_mpz_t(), 2))
        throw std::runtime_error("weil_from_traces: traces inconsistent (c2 non-integral)");
    mpz_class c2 = n2 / 2;
    mpz_class n3 = -(s3 + c1 * s2 + c2 * s1);
    if (!mpz_divisible_ui_p(n3.get_mpz_t(), 3))
        throw std::runtime_error("weil_from_traces: traces inconsistent (c3 non-integral)");
    mpz_class c3 = n3 / 3;
    mpz_class pw, p2w, p3w, pz(traces.p);
    mpz_pow_ui(pw.get_mpz_t(), pz.get_mpz_t(), weight);
    p2w = pw * pw;
    p3w = p2w * pw;
    EulerFactor f;
    f.p = traces.p;
    f.weight = weight;
    f.coeffs = {1, c1, c2, c3, pw * c2, p2w * c1, sign * p3w};
    f.coeffs = zx::trim(std::move(f.coeffs));
    if (!f.check_weil())
        throw std::runtime_error("weil_from_traces: sign yields no Weil polynomial");
    return f;
}

EulerFactor exterior_square(const EulerFactor& P) {
    int d = P.degree();
    if (d < 2) throw std::invalid_argument("exterior_square: degree < 2");
    if (P.coeffs[0] != 1) throw std::invalid_argument("exterior_square: constant term must be 1");
    // companion matrix of the reversal x^d + c1 x^{d-1} + ... + cd
    ZMat C(d, d);
    for (int i = 0; i + 1 < d; ++i) C.at(i + 1, i) = 1;
    for (int i = 0; i < d; ++i) C.at(i, d - 1) = -P.coeffs[d - i];
    // exterior square on e_i ^ e_j, i < j, lexicographic
    int D = d * (d - 1) / 2;
    std::vector<std::pair<int, int>> basis;
    basis.reserve(D);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) basis.emplace_back(i, j);
    ZMat W(D, D);
    for (int r = 0; r < D; ++r) {
        auto [i, j] = basis[r];
        for (int s = 0; s < D; ++s) {
            auto [k, l] = basis[s];
            W.at(r, s) = C.at(i, k) * C.at(j, l) - C.at(i, l) * C.at(j, k);
        }
    }
    std::vector<mpz_class> cp = W.charpoly();   // ascending, monic
    EulerFactor out;
    out.p = P.p;
    out.weight = 2 * P.weight;
    out.coeffs.resize(D + 1);
    for (int k = 0; k <= D; ++k) out.coeffs[k] = cp[D - k];
    out.coeffs = zx::trim(std::move(out.coeffs));
    return out;
}

EulerFactor algebraic_part_factor(const std::vector<std::pair<int, int>>& ef_list, long p) {
    int total = 0;
    zx::Poly acc{1};
    for (auto& [e, f] : ef_list) {
        if (e != 1) throw std::invalid_argument("algebraic_part_factor: ramified prime");
        total += f;
        mpz_class pf;
        mpz_ui_pow_ui(pf.get_mpz_t(), p, f);
        zx::Poly term(f + 1);
        term[0] = 1;
        term[f] = -pf;
        acc = zx::mul(acc, term);
    }
    if (total != 3) throw std::invalid_argument("algebraic_part_factor: splitting degrees must sum to 3");
    EulerFactor out;
    out.p = p;
    out.weight = 2;
    out.coeffs = std::move(acc);
    return out;
}

// ---------------------------------------------------------------- data file

namespace {

std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

} // namespace

GeometryData load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open geometry file: " + path);
    GeometryData gd;
    std::string line;
    bool version_seen = false;
    SurfaceSpec* cur_s = nullptr;
    CurveSpec* cur_c = nullptr;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tk = tokens(line);
        if (tk.empty()) continue;
        if (tk[0] == "format:") {
            if (tk.size() < 3 || tk[1] != "k3hecke-geometry" || tk[2] != "v1")
                throw std::runtime_error("geometry file: unsupported format");
            version_seen = true;
        } else if (tk[0] == "[surface") {
            gd.surfaces.emplace_back();
            cur_s = &gd.surfaces.back();
            cur_c = nullptr;
            cur_s->id = std::stoi(tk[1]);
        } else if (tk[0] == "[curve") {
            gd.curves.emplace_back();
            cur_c = &gd.curves.back();
            cur_s = nullptr;
            cur_c->id = std::stoi(tk[1]);
        } else if (tk[0] == "g:" && cur_s) {
            if (tk.size() != 11) throw std::runtime_error("geometry file: g needs 10 coefficients");
            for (int i = 0; i < 10; ++i) cur_s->g[i] = mpz_class(tk[i + 1]);
        } else if (tk[0] == "f7:" && cur_c) {
            if (tk.size() != 9) throw std::runtime_error("geometry file: f7 needs 8 coefficients");
            cur_c->f7.clear();
            for (int i = 0; i < 8; ++i) cur_c->f7.push_back(mpz_class(tk[i + 1]));
        } else if (tk[0] == "field:" && cur_c) {
            cur_c->field_id = std::stoi(tk[1]);
        } else {
            throw std::runtime_error("geometry file: unrecognized line: " + line);
        }
    }
    if (!version_seen) throw std::runtime_error("geometry file: missing format line");
    for (auto& s : gd.surfaces) s.verify();
    for (auto& c : gd.curves) c.verify();
    return gd;
}

std::string count_record(long p, int m, const SurfaceCount& c) {
    std::ostringstream os;
    os << "p=" << p << " m=" << m << " S=" << c.S << " nodes=" << c.nodes
       << " N=" << c.N << " t=" << c.S;
    return os.str();
}

} // namespace counting
} // namespace k3hecke
