// Univariate integer polynomial helpers. Coefficients ascending, no
// leading zeros (the zero polynomial is the empty vector).
#ifndef K3HECKE_ZPOLY_HPP
#define K3HECKE_ZPOLY_HPP

#include <gmpxx.h>
#include <vector>

namespace k3hecke {
namespace zx {

using Poly = std::vector<mpz_class>;

Poly trim(Poly f);
int degree(const Poly& f);           // -1 for zero
Poly add(const Poly& a, const Poly& b);
Poly sub(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b);
Poly neg(Poly a);
Poly scalar_mul(const Poly& a, const mpz_class& c);
Poly derivative(const Poly& f);
mpz_class content(const Poly& f);
mpz_class eval(const Poly& f, const mpz_class& x);
mpq_class eval_q(const Poly& f, const mpq_class& x);

bool equal(const Poly& a, const Poly& b);

// Exact division when the divisor has constant term ±1; returns false if
// the division leaves a remainder.
bool div_exact_unit(const Poly& dividend, const Poly& divisor, Poly& quotient);

// Resultant of f and g (Sylvester determinant, fraction-free).
mpz_class resultant(const Poly& f, const Poly& g);

// Discriminant of f: (-1)^(n(n-1)/2) * Res(f, f') / lc(f).
mpz_class discriminant(const Poly& f);

// Primitive squarefree part f / gcd(f, f') over Q, scaled to integer
// coefficients with positive content-free leading sign.
Poly squarefree_part(const Poly& f);

// Power sums s_1..s_max of the reciprocal roots of P with P(0)=1:
// P(T) = prod (1 - a_i T), s_m = sum a_i^m.
std::vector<mpz_class> power_sums(const Poly& p_const1, int smax);

// Inverse of power_sums: degree-d polynomial with constant 1 from s_1..s_d.
// Throws if the Newton recurrences do not produce integers.
Poly from_power_sums(const std::vector<mpz_class>& s, int deg);

} // namespace zx
} // namespace k3hecke

#endif
