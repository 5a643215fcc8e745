#include "k3hecke/zpoly.hpp"
#include "k3hecke/zmatrix.hpp"

#include <stdexcept>

namespace k3hecke {
namespace zx {

Poly trim(Poly f) {
    while (!f.empty() && f.back() == 0) f.pop_back();
    return f;
}

int degree(const Poly& f) { return static_cast<int>(f.size()) - 1; }

Poly add(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < r.size(); ++i) {
        if (i < a.size()) r[i] += a[i];
        if (i < b.size()) r[i] += b[i];
    }
    return trim(std::move(r));
}

Poly sub(const Poly& a, const Poly& b) {
    Poly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < r.size(); ++i) {
        if (i < a.size()) r[i] += a[i];
        if (i < b.size()) r[i] -= b[i];
    }
    return trim(std::move(r));
}

Poly mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return trim(std::move(r));
}

Poly neg(Poly a) {
    for (auto& c : a) c = -c;
    return a;
}

Poly scalar_mul(const Poly& a, const mpz_class& c) {
    if (c == 0) return {};
    Poly r = a;
    for (auto& x : r) x *= c;
    return r;
}

Poly derivative(const Poly& f) {
    if (f.size() < 2) return {};
    Poly r(f.size() - 1);
    for (size_t i = 1; i < f.size(); ++i) r[i - 1] = f[i] * static_cast<long>(i);
    return trim(std::move(r));
}

mpz_class content(const Poly& f) {
    mpz_class g = 0;
    for (auto& c : f) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
    return g;
}

mpz_class eval(const Poly& f, const mpz_class& x) {
    mpz_class acc = 0;
    for (size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
    return acc;
}

mpq_class eval_q(const Poly& f, const mpq_class& x) {
    mpq_class acc = 0;
    for (size_t i = f.size(); i-- > 0;) acc = acc * x + f[i];
    return acc;
}

bool equal(const Poly& a, const Poly& b) { return trim(a) == trim(b); }

bool div_exact_unit(const Poly& dividend, const Poly& divisor, Poly& quotient) {
    if (divisor.empty() || (divisor[0] != 1 && divisor[0] != -1))
        throw std::invalid_argument("div_exact_unit: divisor constant term must be a unit");
    if (dividend.empty()) { quotient.clear(); return true; }
    int dq = degree(dividend) - degree(divisor);
    if (dq < 0) return false;
    Poly q(dq + 1);
    Poly rem = dividend;
    for (int k = 0; k <= dq; ++k) {
        mpz_class c = rem[k] * divisor[0];   // divisor[0] = +-1 so this is division
        q[k] = c;
        if (c == 0) continue;
        for (size_t j = 0; j < divisor.size(); ++j)
            rem[k + j] -= c * divisor[j];
    }
    for (auto& c : rem)
        if (c != 0) return false;
    quotient = trim(std::move(q));
    return true;
}

mpz_class resultant(const Poly& fin, const Poly& gin) {
    Poly f = trim(fin), g = trim(gin);
    int m = degree(f), n = degree(g);
    if (m < 0 || n < 0) return 0;
    if (m == 0) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), f[0].get_mpz_t(), n);
        return r;
    }
    if (n == 0) {
        mpz_class r;
        mpz_pow_ui(r.get_mpz_t(), g[0].get_mpz_t(), m);
        return r;
    }
    ZMat S(m + n, m + n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= m; ++j)
            S.at(i, i + j) = f[m - j];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j <= n; ++j)
            S.at(n + i, i + j) = g[n - j];
    return S.det_bareiss();
}

mpz_class discriminant(const Poly& fin) {
    Poly f = trim(fin);
    int n = degree(f);
    if (n < 1) throw std::invalid_argument("discriminant: degree < 1");
    mpz_class r = resultant(f, derivative(f));
    mpz_class q;
    if (!mpz_divisible_p(r.get_mpz_t(), f[n].get_mpz_t()))
        throw std::logic_error("discriminant: lc does not divide resultant");
    mpz_divexact(q.get_mpz_t(), r.get_mpz_t(), f[n].get_mpz_t());
    if ((n % 4 == 2) || (n % 4 == 3)) q = -q;   // (-1)^{n(n-1)/2}
    return q;
}

namespace {

// monic gcd over Q, coefficients ascending
std::vector<mpq_class> q_gcd(std::vector<mpq_class> a, std::vector<mpq_class> b) {
    auto trim_q = [](std::vector<mpq_class>& f) {
        while (!f.empty() && f.back() == 0) f.pop_back();
    };
    trim_q(a);
    trim_q(b);
    while (!b.empty()) {
        // a mod b
        std::vector<mpq_class> r = a;
        while (r.size() >= b.size()) {
            mpq_class c = r.back() / b.back();
            size_t shift = r.size() - b.size();
            for (size_t i = 0; i < b.size(); ++i) r[shift + i] -= c * b[i];
            trim_q(r);
            if (r.empty()) break;
        }
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        mpq_class lc = a.back();
        for (auto& c : a) c /= lc;
    }
    return a;
}

} // namespace

Poly squarefree_part(const Poly& fin) {
    Poly f = trim(fin);
    if (degree(f) < 1) return f;
    std::vector<mpq_class> fq(f.begin(), f.end());
    Poly df = derivative(f);
    std::vector<mpq_class> dq(df.begin(), df.end());
    std::vector<mpq_class> g = q_gcd(fq, dq);
    if (g.size() <= 1) return f;
    // divide f by g over Q
    std::vector<mpq_class> r(f.begin(), f.end()), q(f.size() - g.size() + 1);
    while (r.size() >= g.size()) {
        mpq_class c = r.back() / g.back();
        size_t shift = r.size() - g.size();
        q[shift] = c;
        for (size_t i = 0; i < g.size(); ++i) r[shift + i] -= c * g[i];
        while (!r.empty() && r.back() == 0) r.pop_back();
        if (r.empty()) break;
    }
    // scale to primitive integer coefficients
    mpz_class den = 1;
    for (auto& c : q) {
        mpz_class d = c.get_den();
        mpz_class gg;
        mpz_gcd(gg.get_mpz_t(), den.get_mpz_t(), d.get_mpz_t());
        den = den / gg * d;
    }
    Poly out;
    for (auto& c : q) {
        mpq_class v = c * den;
        out.push_back(v.get_num());
    }
    out = trim(std::move(out));
    mpz_class cont = content(out);
    if (cont > 1)
        for (auto& c : out) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), cont.get_mpz_t());
    return out;
}

std::vector<mpz_class> power_sums(const Poly& p, int smax) {
    if (p.empty() || p[0] != 1)
        throw std::invalid_argument("power_sums: constant term must be 1");
    std::vector<mpz_class> s(smax + 1);
    for (int m = 1; m <= smax; ++m) {
        mpz_class acc = 0;
        if (m < static_cast<int>(p.size())) acc = mpz_class(m) * p[m];
        for (int j = 1; j < m; ++j)
            if (j < static_cast<int>(p.size())) acc += p[j] * s[m - j];
        s[m] = -acc;
    }
    s.erase(s.begin());
    return s;
}

Poly from_power_sums(const std::vector<mpz_class>& s, int deg) {
    if (static_cast<int>(s.size()) < deg)
        throw std::invalid_argument("from_power_sums: not enough power sums");
    Poly c(deg + 1);
    c[0] = 1;
    for (int m = 1; m <= deg; ++m) {
        mpz_class acc = s[m - 1];              // s_m * c_0
        for (int j = 1; j < m; ++j) acc += c[j] * s[m - j - 1];
        mpz_class mm(m);
        if (!mpz_divisible_p(acc.get_mpz_t(), mm.get_mpz_t()))
            throw std::runtime_error("from_power_sums: non-integral coefficient");
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), acc.get_mpz_t(), mm.get_mpz_t());
        c[m] = -q;
    }
    return c;
}

} // namespace zx
} // namespace k3hecke
