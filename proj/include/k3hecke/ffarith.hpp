// Exact arithmetic in F_p and F_{p^m} (m <= 6), quadratic characters,
// univariate factorization over F_p. Characteristic 2 is rejected across
// the board: 2 is a bad prime for every surface and curve in the dataset
// and the w^2 = f model breaks there.
#ifndef K3HECKE_FFARITH_HPP
#define K3HECKE_FFARITH_HPP

#include <gmpxx.h>
#include <cstdint>
#include <vector>

namespace k3hecke {
namespace ffarith {

bool is_prime_u64(uint64_t n);

// polynomials over F_p: coefficients ascending in [0, p)
using FpPoly = std::vector<uint64_t>;

FpPoly fp_trim(FpPoly f);
FpPoly fp_mul(const FpPoly& a, const FpPoly& b, uint64_t p);
FpPoly fp_mod(FpPoly a, const FpPoly& m, uint64_t p);
FpPoly fp_gcd(FpPoly a, FpPoly b, uint64_t p);
FpPoly fp_monic(FpPoly f, uint64_t p);
FpPoly fp_powmod(const FpPoly& base, mpz_class e, const FpPoly& m, uint64_t p);
uint64_t fp_eval(const FpPoly& f, uint64_t x, uint64_t p);
FpPoly fp_derivative(const FpPoly& f, uint64_t p);

class FFContext;

class FFElement {
public:
    FFElement() : ctx_(nullptr) {}
    FFElement(const FFContext* ctx, std::vector<uint64_t> coeffs);

    const FFContext& context() const { return *ctx_; }
    const std::vector<uint64_t>& coeffs() const { return c_; }
    bool is_zero() const;

    FFElement operator+(const FFElement& o) const;
    FFElement operator-(const FFElement& o) const;
    FFElement operator*(const FFElement& o) const;
    FFElement pow(uint64_t e) const;
    FFElement inverse() const;   // throws on zero
    bool operator==(const FFElement& o) const;

private:
    const FFContext* ctx_;
    std::vector<uint64_t> c_;
};

class FFContext {
public:
    uint64_t p() const { return p_; }
    int m() const { return m_; }
    uint64_t q() const { return q_; }  // p^m
    const FpPoly& modulus() const { return modulus_; }

    FFElement zero() const;
    FFElement one() const;
    FFElement from_int(int64_t v) const;
    FFElement from_coeffs(std::vector<uint64_t> c) const;
    FFElement gen() const;  // class of x (zero when m = 1)

    // element with index i under the base-p coefficient encoding
    FFElement from_index(uint64_t i) const;
    uint64_t to_index(const FFElement& x) const;

    friend FFContext ff_context(uint64_t p, int m);

private:
    uint64_t p_ = 0;
    int m_ = 0;
    uint64_t q_ = 0;
    FpPoly modulus_;
};

// Deterministic context: the modulus is the first irreducible monic
// degree-m polynomial in the fixed lexicographic coefficient order
// (highest coefficient most significant). m = 1 uses the trivial modulus x.
FFContext ff_context(uint64_t p, int m);

bool fp_poly_irreducible(const FpPoly& f, uint64_t p);

// 0 on zero, 1 on nonzero squares, -1 otherwise; computed as x^((q-1)/2)
int quadratic_character(const FFElement& x);

struct FpFactor {
    FpPoly poly;   // monic irreducible
    int mult;
};

// Full factorization of f mod p (f integer polynomial, nonzero mod p).
// Distinct-degree then equal-degree splitting; the equal-degree stage uses
// a PRNG seeded from (p, deg f, coefficient hash) so runs are reproducible.
// Factors are sorted by (degree, coefficient vector).
std::vector<FpFactor> factor_poly_mod_p(const std::vector<mpz_class>& f, uint64_t p);
std::vector<FpFactor> factor_fp_poly(FpPoly f, uint64_t p);

} // namespace ffarith
} // namespace k3hecke

#endif
