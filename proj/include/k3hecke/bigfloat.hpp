// Thin RAII wrapper around MPFR reals plus a complex type on top.
// Precision is explicit everywhere: these values appear only in the
// embedding / character-evaluation layer, where results are certified
// by recomputation at doubled precision.
#ifndef K3HECKE_BIGFLOAT_HPP
#define K3HECKE_BIGFLOAT_HPP

#include <mpfr.h>
#include <gmpxx.h>
#include <string>
#include <vector>

namespace k3hecke {

long digits_to_bits(long decimal_digits);

class Real {
public:
    explicit Real(long prec_bits = 128) { mpfr_init2(v, prec_bits); mpfr_set_zero(v, 1); }
    Real(const Real& o) { mpfr_init2(v, mpfr_get_prec(o.v)); mpfr_set(v, o.v, MPFR_RNDN); }
    Real(Real&& o) noexcept { mpfr_init2(v, mpfr_get_prec(o.v)); mpfr_swap(v, o.v); }
    Real& operator=(const Real& o) {
        if (this != &o) { mpfr_set_prec(v, mpfr_get_prec(o.v)); mpfr_set(v, o.v, MPFR_RNDN); }
        return *this;
    }
    Real& operator=(Real&& o) noexcept { mpfr_swap(v, o.v); return *this; }
    ~Real() { mpfr_clear(v); }

    static Real from(long x, long prec);
    static Real from(const mpz_class& x, long prec);
    static Real from(const mpq_class& x, long prec);
    static Real from(double x, long prec);

    long prec() const { return mpfr_get_prec(v); }
    double to_double() const { return mpfr_get_d(v, MPFR_RNDN); }
    bool is_zero() const { return mpfr_zero_p(v); }
    int sign() const { return mpfr_sgn(v); }
    mpz_class round_to_mpz() const;

    Real operator-() const;
    Real operator+(const Real& o) const;
    Real operator-(const Real& o) const;
    Real operator*(const Real& o) const;
    Real operator/(const Real& o) const;
    Real& operator+=(const Real& o) { mpfr_add(v, v, o.v, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(v, v, o.v, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(v, v, o.v, MPFR_RNDN); return *this; }

    bool operator<(const Real& o) const { return mpfr_less_p(v, o.v); }
    bool operator>(const Real& o) const { return mpfr_greater_p(v, o.v); }
    bool operator<=(const Real& o) const { return mpfr_lessequal_p(v, o.v); }

    Real abs() const;
    Real sqrt() const;
    Real pow_si(long e) const;
    // 2^e as a Real at this value's precision
    static Real pow2(long e, long prec);
    static Real pi(long prec);

    std::string str(size_t ndigits = 20) const;

    mpfr_t v;
};

Real cos(const Real& x);
Real sin(const Real& x);
Real atan2(const Real& y, const Real& x);
Real exp(const Real& x);
Real log(const Real& x);

struct Cplx {
    Real re, im;

    explicit Cplx(long prec_bits = 128) : re(prec_bits), im(prec_bits) {}
    Cplx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

    long prec() const { return re.prec(); }

    Cplx operator+(const Cplx& o) const { return {re + o.re, im + o.im}; }
    Cplx operator-(const Cplx& o) const { return {re - o.re, im - o.im}; }
    Cplx operator*(const Cplx& o) const;
    Cplx operator/(const Cplx& o) const;
    Cplx operator-() const { return {-re, -im}; }

    Cplx conj() const { return {re, -im}; }
    Real norm() const { return re * re + im * im; }   // |z|^2
    Real abs() const { return norm().sqrt(); }
    Cplx pow_ui(unsigned long e) const;
    Cplx inverse() const;
    // principal n-th root (argument in (-pi, pi])
    Cplx nth_root(unsigned long n) const;

    std::string str(size_t ndigits = 20) const;
};

// exp(2*pi*i*t) for rational t, at prec bits
Cplx unit_root(const mpq_class& t, long prec);

// All complex roots of an integer polynomial (coefficients ascending,
// nonzero leading coefficient, squarefree). Durand–Kerner iteration with
// a posteriori Weierstrass inclusion radii; throws if the disks fail to
// separate at the requested precision.
std::vector<Cplx> complex_roots(const std::vector<mpz_class>& coeffs, long prec);

} // namespace k3hecke

#endif
