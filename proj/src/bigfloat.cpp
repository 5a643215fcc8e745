#include "k3hecke/bigfloat.hpp"

#include <stdexcept>
#include <cmath>

namespace k3hecke {

long digits_to_bits(long decimal_digits) {
    // log2(10) = 3.3219..., plus guard bits
    return static_cast<long>(decimal_digits * 3.3220) + 64;
}

Real Real::from(long x, long prec) { Real r(prec); mpfr_set_si(r.v, x, MPFR_RNDN); return r; }
Real Real::from(const mpz_class& x, long prec) { Real r(prec); mpfr_set_z(r.v, x.get_mpz_t(), MPFR_RNDN); return r; }
Real Real::from(const mpq_class& x, long prec) { Real r(prec); mpfr_set_q(r.v, x.get_mpq_t(), MPFR_RNDN); return r; }
Real Real::from(double x, long prec) { Real r(prec); mpfr_set_d(r.v, x, MPFR_RNDN); return r; }

mpz_class Real::round_to_mpz() const {
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), v, MPFR_RNDN);
    return z;
}

Real Real::operator-() const { Real r(prec()); mpfr_neg(r.v, v, MPFR_RNDN); return r; }
Real Real::operator+(const Real& o) const { Real r(std::max(prec(), o.prec())); mpfr_add(r.v, v, o.v, MPFR_RNDN); return r; }
Real Real::operator-(const Real& o) const { Real r(std::max(prec(), o.prec())); mpfr_sub(r.v, v, o.v, MPFR_RNDN); return r; }
Real Real::operator*(const Real& o) const { Real r(std::max(prec(), o.prec())); mpfr_mul(r.v, v, o.v, MPFR_RNDN); return r; }
Real Real::operator/(const Real& o) const { Real r(std::max(prec(), o.prec())); mpfr_div(r.v, v, o.v, MPFR_RNDN); return r; }

Real Real::abs() const { Real r(prec()); mpfr_abs(r.v, v, MPFR_RNDN); return r; }
Real Real::sqrt() const { Real r(prec()); mpfr_sqrt(r.v, v, MPFR_RNDN); return r; }
Real Real::pow_si(long e) const { Real r(prec()); mpfr_pow_si(r.v, v, e, MPFR_RNDN); return r; }
Real Real::pow2(long e, long prec) { Real r(prec); mpfr_set_si(r.v, 1, MPFR_RNDN); mpfr_mul_2si(r.v, r.v, e, MPFR_RNDN); return r; }
Real Real::pi(long prec) { Real r(prec); mpfr_const_pi(r.v, MPFR_RNDN); return r; }

std::string Real::str(size_t ndigits) const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%%.%zuRg", ndigits);
    char* s = nullptr;
    if (mpfr_asprintf(&s, buf, v) < 0) return "?";
    std::string out(s);
    mpfr_free_str(s);
    return out;
}

Real cos(const Real& x) { Real r(x.prec()); mpfr_cos(r.v, x.v, MPFR_RNDN); return r; }
Real sin(const Real& x) { Real r(x.prec()); mpfr_sin(r.v, x.v, MPFR_RNDN); return r; }
Real atan2(const Real& y, const Real& x) { Real r(std::max(y.prec(), x.prec())); mpfr_atan2(r.v, y.v, x.v, MPFR_RNDN); return r; }
Real exp(const Real& x) { Real r(x.prec()); mpfr_exp(r.v, x.v, MPFR_RNDN); return r; }
Real log(const Real& x) { Real r(x.prec()); mpfr_log(r.v, x.v, MPFR_RNDN); return r; }

Cplx Cplx::operator*(const Cplx& o) const {
    return {re * o.re - im * o.im, re * o.im + im * o.re};
}

Cplx Cplx::inverse() const {
    Real n = norm();
    return {re / n, -(im / n)};
}

Cplx Cplx::operator/(const Cplx& o) const { return *this * o.inverse(); }

Cplx Cplx::pow_ui(unsigned long e) const {
    Cplx acc(prec());
    acc.re = Real::from(1L, prec());
    Cplx b = *this;
    while (e) {
        if (e & 1) acc = acc * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return acc;
}

Cplx Cplx::nth_root(unsigned long n) const {
    long p = prec();
    Real r = abs();
    Real theta = atan2(im, re);
    Real rn(p);
    mpfr_rootn_ui(rn.v, r.v, n, MPFR_RNDN);
    Real tn = theta / Real::from(static_cast<long>(n), p);
    return {rn * cos(tn), rn * sin(tn)};
}

std::string Cplx::str(size_t ndigits) const {
    return re.str(ndigits) + (im.sign() < 0 ? " - " : " + ") + im.abs().str(ndigits) + "*i";
}

Cplx unit_root(const mpq_class& t, long prec) {
    Real angle = Real::pi(prec) * Real::from(2L, prec) * Real::from(t, prec);
    return {cos(angle), sin(angle)};
}

std::vector<Cplx> complex_roots(const std::vector<mpz_class>& coeffs, long prec) {
    size_t n = coeffs.size();
    while (n > 0 && coeffs[n - 1] == 0) --n;
    if (n < 2) throw std::invalid_argument("complex_roots: degree < 1");
    size_t deg = n - 1;
    long wp = prec + 64;

    // monic normalization in floating point
    Real lead = Real::from(coeffs[deg], wp);
    std::vector<Cplx> c(deg);   // c[k] = a_k/a_deg
    for (size_t k = 0; k < deg; ++k) {
        c[k] = Cplx(wp);
        c[k].re = Real::from(coeffs[k], wp) / lead;
    }

    // Cauchy-style root bound: 1 + max |c_k|
    Real bound = Real::from(1L, wp);
    for (auto& ck : c) {
        Real a = ck.abs();
        if (bound < a) bound = a;
    }
    bound += Real::from(1L, wp);

    auto eval_monic = [&](const Cplx& z) {
        Cplx acc(wp);
        acc.re = Real::from(1L, wp);
        for (size_t k = deg; k-- > 0;) acc = acc * z + c[k];
        return acc;
    };

    // starting points: bound * r^j with r = 0.4+0.9i (not a root of unity)
    std::vector<Cplx> z(deg, Cplx(wp));
    {
        Cplx r(Real::from(0.4, wp), Real::from(0.9, wp));
        Cplx cur(Real::from(0.6, wp) * bound, Real::from(0.2, wp) * bound);
        for (size_t j = 0; j < deg; ++j) { z[j] = cur; cur = cur * r; }
    }

    Real eps = Real::pow2(-(prec + 16), wp);
    size_t max_iter = 200 + 8 * static_cast<size_t>(prec);
    for (size_t iter = 0; iter < max_iter; ++iter) {
        Real worst = Real::from(0L, wp);
        for (size_t j = 0; j < deg; ++j) {
            Cplx num = eval_monic(z[j]);
            Cplx den(wp);
            den.re = Real::from(1L, wp);
            for (size_t k = 0; k < deg; ++k)
                if (k != j) den = den * (z[j] - z[k]);
            Cplx w = num / den;
            z[j] = z[j] - w;
            Real wa = w.abs();
            if (worst < wa) worst = wa;
        }
        if (worst < eps * bound) break;
    }

    // Weierstrass inclusion disks: radius_j = deg * |p(z_j)| / |prod_{k!=j}(z_j - z_k)|.
    // Require the disks to be pairwise disjoint and small.
    std::vector<Real> rad;
    rad.reserve(deg);
    for (size_t j = 0; j < deg; ++j) {
        Cplx num = eval_monic(z[j]);
        Cplx den(wp);
        den.re = Real::from(1L, wp);
        for (size_t k = 0; k < deg; ++k)
            if (k != j) den = den * (z[j] - z[k]);
        rad.push_back(Real::from((long)deg, wp) * num.abs() / den.abs());
    }
    Real tol = Real::pow2(-prec, wp) * bound;
    for (size_t j = 0; j < deg; ++j) {
        if (tol < rad[j])
            throw std::runtime_error("complex_roots: inclusion radius too large, raise precision");
        for (size_t k = j + 1; k < deg; ++k) {
            Real d = (z[j] - z[k]).abs();
            if (d <= rad[j] + rad[k])
                throw std::runtime_error("complex_roots: inclusion disks overlap, raise precision");
        }
    }
    return z;
}

} // namespace k3hecke
