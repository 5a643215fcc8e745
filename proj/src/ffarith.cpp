#include "k3hecke/ffarith.hpp"

#include <stdexcept>
#include <algorithm>

namespace k3hecke {
namespace ffarith {

namespace {

uint64_t mulmod_u64(uint64_t a, uint64_t b, uint64_t m) {
    return static_cast<uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

uint64_t powmod_u64(uint64_t a, uint64_t e, uint64_t m) {
    uint64_t r = 1 % m;
    a %= m;
    while (e) {
        if (e & 1) r = mulmod_u64(r, a, m);
        a = mulmod_u64(a, a, m);
        e >>= 1;
    }
    return r;
}

uint64_t inv_mod(uint64_t a, uint64_t p) { return powmod_u64(a % p, p - 2, p); }

struct Xorshift64 {
    uint64_t s;
    explicit Xorshift64(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
};

} // namespace

bool is_prime_u64(uint64_t n) {
    if (n < 2) return false;
    for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) { d >>= 1; ++r; }
    for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        uint64_t x = powmod_u64(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < r - 1; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { composite = false; break; }
        }
        if (composite) return false;
    }
    return true;
}

FpPoly fp_trim(FpPoly f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
    return f;
}

FpPoly fp_mul(const FpPoly& a, const FpPoly& b, uint64_t p) {
    if (a.empty() || b.empty()) return {};
    std::vector<unsigned __int128> acc(a.size() + b.size() - 1, 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j)
            acc[i + j] += static_cast<unsigned __int128>(a[i]) * b[j];
    }
    FpPoly r(acc.size());
    for (size_t i = 0; i < acc.size(); ++i) r[i] = static_cast<uint64_t>(acc[i] % p);
    return fp_trim(std::move(r));
}

FpPoly fp_mod(FpPoly a, const FpPoly& m, uint64_t p) {
    a = fp_trim(std::move(a));
    FpPoly mm = fp_trim(m);
    if (mm.empty()) throw std::invalid_argument("fp_mod: zero modulus");
    uint64_t lcinv = inv_mod(mm.back(), p);
    while (a.size() >= mm.size()) {
        uint64_t c = mulmod_u64(a.back(), lcinv, p);
        size_t shift = a.size() - mm.size();
        if (c != 0)
            for (size_t i = 0; i < mm.size(); ++i) {
                uint64_t t = mulmod_u64(c, mm[i], p);
                uint64_t& dst = a[shift + i];
                dst = (dst + p - t) % p;
            }
        a.pop_back();
        while (!a.empty() && a.back() == 0) a.pop_back();
    }
    return a;
}

FpPoly fp_gcd(FpPoly a, FpPoly b, uint64_t p) {
    a = fp_trim(std::move(a));
    b = fp_trim(std::move(b));
    while (!b.empty()) {
        FpPoly r = fp_mod(a, b, p);
        a = std::move(b);
        b = std::move(r);
    }
    return fp_monic(std::move(a), p);
}

FpPoly fp_monic(FpPoly f, uint64_t p) {
    f = fp_trim(std::move(f));
    if (f.empty() || f.back() == 1) return f;
    uint64_t inv = inv_mod(f.back(), p);
    for (auto& c : f) c = mulmod_u64(c, inv, p);
    return f;
}

FpPoly fp_powmod(const FpPoly& base, mpz_class e, const FpPoly& m, uint64_t p) {
    FpPoly r{1};
    FpPoly b = fp_mod(base, m, p);
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = fp_mod(fp_mul(r, b, p), m, p);
        e >>= 1;
        if (e > 0) b = fp_mod(fp_mul(b, b, p), m, p);
    }
    return r;
}

uint64_t fp_eval(const FpPoly& f, uint64_t x, uint64_t p) {
    uint64_t acc = 0;
    for (size_t i = f.size(); i-- > 0;) acc = (mulmod_u64(acc, x, p) + f[i]) % p;
    return acc;
}

FpPoly fp_derivative(const FpPoly& f, uint64_t p) {
    if (f.size() < 2) return {};
    FpPoly r(f.size() - 1);
    for (size_t i = 1; i < f.size(); ++i)
        r[i - 1] = mulmod_u64(f[i], i % p, p);
    return fp_trim(std::move(r));
}

namespace {

FpPoly fp_divexact(const FpPoly& a, const FpPoly& b, uint64_t p) {
    FpPoly num = fp_trim(a), den = fp_trim(b);
    if (den.empty()) throw std::invalid_argument("fp_divexact: zero divisor");
    if (num.empty()) return {};
    FpPoly q(num.size() - den.size() + 1, 0);
    uint64_t lcinv = inv_mod(den.back(), p);
    while (num.size() >= den.size()) {
        uint64_t c = mulmod_u64(num.back(), lcinv, p);
        size_t shift = num.size() - den.size();
        q[shift] = c;
        for (size_t i = 0; i < den.size(); ++i) {
            uint64_t t = mulmod_u64(c, den[i], p);
            num[shift + i] = (num[shift + i] + p - t) % p;
        }
        while (!num.empty() && num.back() == 0) num.pop_back();
        if (num.size() < den.size()) break;
    }
    if (!num.empty()) throw std::logic_error("fp_divexact: nonzero remainder");
    return fp_trim(std::move(q));
}

bool fp_is_one(const FpPoly& f) { return f.size() == 1 && f[0] == 1; }

} // namespace

bool fp_poly_irreducible(const FpPoly& fin, uint64_t p) {
    FpPoly f = fp_trim(fin);
    int m = static_cast<int>(f.size()) - 1;
    if (m < 1) return false;
    FpPoly x{0, 1};
    // gcd(x^{p^k} - x, f) = 1 for k < m and x^{p^m} = x mod f
    FpPoly h = fp_mod(x, f, p);
    for (int k = 1; k <= m; ++k) {
        h = fp_powmod(h, mpz_class(static_cast<unsigned long>(p)), f, p);
        if (k < m) {
            FpPoly d = h;
            // d - x
            if (d.size() < 2) d.resize(2, 0);
            d[1] = (d[1] + p - 1) % p;
            d = fp_trim(std::move(d));
            FpPoly g = fp_gcd(d, f, p);
            if (!fp_is_one(g) && !g.empty()) return false;
        } else {
            FpPoly d = h;
            if (d.size() < 2) d.resize(2, 0);
            d[1] = (d[1] + p - 1) % p;
            if (!fp_trim(std::move(d)).empty()) return false;
        }
    }
    return true;
}

FFElement::FFElement(const FFContext* ctx, std::vector<uint64_t> coeffs)
    : ctx_(ctx), c_(std::move(coeffs)) {
    for (auto& x : c_) x %= ctx->p();
    if (c_.size() > static_cast<size_t>(ctx->m()))
        c_ = fp_mod(std::move(c_), ctx->modulus(), ctx->p());
    c_.resize(ctx->m());
}

bool FFElement::is_zero() const {
    for (auto x : c_)
        if (x) return false;
    return true;
}

FFElement FFElement::operator+(const FFElement& o) const {
    std::vector<uint64_t> r(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) r[i] = (c_[i] + o.c_[i]) % ctx_->p();
    return FFElement(ctx_, std::move(r));
}

FFElement FFElement::operator-(const FFElement& o) const {
    std::vector<uint64_t> r(c_.size());
    for (size_t i = 0; i < c_.size(); ++i) r[i] = (c_[i] + ctx_->p() - o.c_[i]) % ctx_->p();
    return FFElement(ctx_, std::move(r));
}

FFElement FFElement::operator*(const FFElement& o) const {
    FpPoly prod = fp_mul(c_, o.c_, ctx_->p());
    prod = fp_mod(std::move(prod), ctx_->modulus(), ctx_->p());
    prod.resize(ctx_->m());
    return FFElement(ctx_, std::move(prod));
}

FFElement FFElement::pow(uint64_t e) const {
    FFElement r = ctx_->one();
    FFElement b = *this;
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

FFElement FFElement::inverse() const {
    if (is_zero()) throw std::domain_error("FFElement: inverse of zero");
    return pow(ctx_->q() - 2);
}

bool FFElement::operator==(const FFElement& o) const { return c_ == o.c_; }

FFElement FFContext::zero() const { return FFElement(this, std::vector<uint64_t>(m_, 0)); }
FFElement FFContext::one() const { return from_int(1); }

FFElement FFContext::from_int(int64_t v) const {
    int64_t r = v % static_cast<int64_t>(p_);
    if (r < 0) r += p_;
    std::vector<uint64_t> c(m_, 0);
    c[0] = static_cast<uint64_t>(r);
    return FFElement(this, std::move(c));
}

FFElement FFContext::from_coeffs(std::vector<uint64_t> c) const { return FFElement(this, std::move(c)); }

FFElement FFContext::gen() const {
    std::vector<uint64_t> c(m_, 0);
    if (m_ > 1) c[1] = 1;
    return FFElement(this, std::move(c));
}

FFElement FFContext::from_index(uint64_t i) const {
    std::vector<uint64_t> c(m_);
    for (int k = 0; k < m_; ++k) { c[k] = i % p_; i /= p_; }
    return FFElement(this, std::move(c));
}

uint64_t FFContext::to_index(const FFElement& x) const {
    uint64_t i = 0;
    for (int k = m_; k-- > 0;) i = i * p_ + x.coeffs()[k];
    return i;
}

FFContext ff_context(uint64_t p, int m) {
    if (!is_prime_u64(p)) throw std::invalid_argument("ff_context: p not prime");
    if (p == 2) throw std::invalid_argument("ff_context: characteristic 2 rejected");
    if (m < 1 || m > 6) throw std::invalid_argument("ff_context: need 1 <= m <= 6");
    if (p >= (1ull << 31)) throw std::invalid_argument("ff_context: p too large");
    double qd = 1;
    for (int i = 0; i < m; ++i) qd *= static_cast<double>(p);
    if (qd >= 4.6e18) throw std::invalid_argument("ff_context: q too large");

    FFContext ctx;
    ctx.p_ = p;
    ctx.m_ = m;
    ctx.q_ = 1;
    for (int i = 0; i < m; ++i) ctx.q_ *= p;

    if (m == 1) {
        ctx.modulus_ = FpPoly{0, 1};   // trivial modulus x
        return ctx;
    }
    // scan monic degree-m polynomials in lexicographic coefficient order,
    // highest coefficient most significant
    std::vector<uint64_t> c(m, 0);
    while (true) {
        FpPoly f(c.begin(), c.end());
        f.push_back(1);
        if (fp_poly_irreducible(f, p)) { ctx.modulus_ = f; return ctx; }
        // increment the (c[m-1], ..., c[0]) counter, c[m-1] most significant
        int k = 0;
        while (k < m && ++c[k] == p) { c[k] = 0; ++k; }
        if (k == m) throw std::logic_error("ff_context: no irreducible modulus found");
    }
}

int quadratic_character(const FFElement& x) {
    const FFContext& ctx = x.context();
    if (ctx.p() == 2) throw std::domain_error("quadratic_character: characteristic 2");
    if (x.is_zero()) return 0;
    FFElement y = x.pow((ctx.q() - 1) / 2);
    if (y == ctx.one()) return 1;
    return -1;
}

namespace {

// char-p squarefree decomposition: list of (monic squarefree poly, multiplicity)
void squarefree_decompose(FpPoly f, uint64_t p, uint64_t mult,
                          std::vector<std::pair<FpPoly, uint64_t>>& out) {
    f = fp_monic(std::move(f), p);
    if (f.size() <= 1) return;
    FpPoly fp = fp_derivative(f, p);
    if (fp.empty()) {
        // f = g(x^p); p-th root over F_p is coefficient extraction
        FpPoly g((f.size() - 1) / p + 1);
        for (size_t i = 0; i < g.size(); ++i) g[i] = f[i * p];
        squarefree_decompose(std::move(g), p, mult * p, out);
        return;
    }
    FpPoly g = fp_gcd(f, fp, p);
    FpPoly w = fp_divexact(f, g, p);
    uint64_t i = 1;
    while (!fp_is_one(w)) {
        FpPoly y = fp_gcd(w, g, p);
        FpPoly z = fp_divexact(w, y, p);
        if (!fp_is_one(z)) out.emplace_back(z, mult * i);
        w = std::move(y);
        g = fp_divexact(g, w, p);
        ++i;
    }
    if (!fp_is_one(g)) squarefree_decompose(std::move(g), p, mult, out);
}

uint64_t poly_hash(const FpPoly& f, uint64_t p) {
    uint64_t h = 1469598103934665603ull;
    h = (h ^ p) * 1099511628211ull;
    h = (h ^ f.size()) * 1099511628211ull;
    for (auto c : f) h = (h ^ c) * 1099511628211ull;
    return h;
}

void equal_degree_split(const FpPoly& f, int d, uint64_t p, Xorshift64& rng,
                        std::vector<FpPoly>& out) {
    int deg = static_cast<int>(f.size()) - 1;
    if (deg == d) { out.push_back(f); return; }
    mpz_class qd;
    mpz_ui_pow_ui(qd.get_mpz_t(), p, d);
    mpz_class e = (qd - 1) / 2;
    while (true) {
        FpPoly r(deg);
        for (auto& c : r) c = rng.next() % p;
        r = fp_trim(std::move(r));
        if (r.size() < 1) continue;
        FpPoly s = fp_powmod(r, e, f, p);
        if (s.empty()) continue;
        s[0] = (s[0] + p - 1) % p;   // s - 1
        FpPoly g = fp_gcd(fp_trim(std::move(s)), f, p);
        if (g.empty() || fp_is_one(g) || g.size() == f.size()) continue;
        equal_degree_split(g, d, p, rng, out);
        equal_degree_split(fp_divexact(f, g, p), d, p, rng, out);
        return;
    }
}

} // namespace

std::vector<FpFactor> factor_fp_poly(FpPoly f, uint64_t p) {
    if (p == 2) throw std::invalid_argument("factor_fp_poly: characteristic 2 rejected");
    f = fp_trim(std::move(f));
    if (f.empty()) throw std::invalid_argument("factor_fp_poly: zero polynomial mod p");
    Xorshift64 rng(poly_hash(f, p));

    std::vector<std::pair<FpPoly, uint64_t>> sqf;
    squarefree_decompose(f, p, 1, sqf);

    std::vector<FpFactor> factors;
    for (auto& [g0, mult] : sqf) {
        // distinct degree
        FpPoly g = g0;
        FpPoly x{0, 1};
        FpPoly h = fp_mod(x, g, p);
        int d = 0;
        while (static_cast<int>(g.size()) - 1 > 0) {
            ++d;
            if (2 * d > static_cast<int>(g.size()) - 1) {
                factors.push_back({g, static_cast<int>(mult)});
                break;
            }
            h = fp_powmod(h, mpz_class(static_cast<unsigned long>(p)), g, p);
            FpPoly hx = h;
            if (hx.size() < 2) hx.resize(2, 0);
            hx[1] = (hx[1] + p - 1) % p;
            FpPoly gd = fp_gcd(fp_trim(std::move(hx)), g, p);
            if (!fp_is_one(gd) && !gd.empty()) {
                std::vector<FpPoly> eq;
                equal_degree_split(gd, d, p, rng, eq);
                for (auto& irr : eq) factors.push_back({irr, static_cast<int>(mult)});
                g = fp_divexact(g, gd, p);
                h = fp_mod(h, g, p);
            }
        }
    }
    std::sort(factors.begin(), factors.end(), [](const FpFactor& a, const FpFactor& b) {
        if (a.poly.size() != b.poly.size()) return a.poly.size() < b.poly.size();
        return a.poly < b.poly;
    });
    return factors;
}

std::vector<FpFactor> factor_poly_mod_p(const std::vector<mpz_class>& f, uint64_t p) {
    FpPoly fp;
    fp.reserve(f.size());
    for (auto& c : f) {
        mpz_class r = c % static_cast<long>(p);
        if (r < 0) r += static_cast<long>(p);
        fp.push_back(r.get_ui());
    }
    return factor_fp_poly(fp_trim(std::move(fp)), p);
}

} // namespace ffarith
} // namespace k3hecke
