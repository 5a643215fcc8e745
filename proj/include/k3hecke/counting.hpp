// Point counting for the double-cover K3 surfaces w^2 = xyz*g(x,y,z) and
// the genus-3 curves y^2 = f7(x); Frobenius traces, Weil polynomials,
// exterior squares, bad-prime detection.
#ifndef K3HECKE_COUNTING_HPP
#define K3HECKE_COUNTING_HPP

#include "k3hecke/zpoly.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace k3hecke {
namespace counting {

// Monomial order for cubic forms g(x,y,z):
// x^3, x^2 y, x^2 z, x y^2, x y z, x z^2, y^3, y^2 z, y z^2, z^3
struct SurfaceSpec {
    int id = 0;
    std::array<mpz_class, 10> g;
    int picard = 16;
    std::set<long> bad_primes;   // filled by surface_bad_primes

    // the six lines stay in general position over Q-bar; checked mod a few
    // large primes at load
    void verify() const;
};

struct CurveSpec {
    int id = 0;
    zx::Poly f7;       // degree 7, monic, odd
    int field_id = 0;  // CM field of the Jacobian

    mpz_class disc() const;
    void verify() const;
};

struct EulerFactor {
    long p = 0;
    int weight = 0;
    zx::Poly coeffs;   // ascending, constant term 1

    int degree() const { return zx::degree(coeffs); }
    std::vector<mpz_class> power_sums(int smax) const { return zx::power_sums(coeffs, smax); }

    // all reciprocal roots on |alpha| = p^{w/2} within rel_tol
    bool check_weil(double rel_tol = 1e-6) const;
    // a_{d-k} = sign * p^{w(d-2k)/2} a_k; returns 0 if neither sign works
    int self_dual_sign() const;

    bool operator==(const EulerFactor& o) const {
        return p == o.p && weight == o.weight && zx::equal(coeffs, o.coeffs);
    }
    std::string str() const;
};

enum class TraceChannel { TranscendentalK3, CurveH1 };

struct TraceData {
    long p = 0;
    TraceChannel channel = TraceChannel::CurveH1;
    std::vector<std::pair<int, long long>> traces;   // (m, t_m)

    long long get(int m) const;
    void check_weil_bounds() const;   // |t_m| <= 6 q^{mw/2}
};

struct WorkBudget {
    long max_p_m12 = 500;   // surface counting, m = 1, 2
    long max_p_m3 = 25;     // surface counting, m = 3
    long max_p_curve = 400; // curve counting, any m <= 3
};

struct SurfaceCount {
    long long S = 0;      // transcendental character sum
    long long nodes = 0;  // F_q-rational nodes of the branch sextic
    long long N = 0;      // resolved point count q^2 + q + 1 + S + q*nodes
};

// N over F_{p^m}; one point at infinity plus the chi-weighted affine count.
long long count_curve(const CurveSpec& spec, long p, int m,
                      const WorkBudget& budget = WorkBudget());

SurfaceCount count_surface(const SurfaceSpec& spec, long p, int m,
                           const WorkBudget& budget = WorkBudget());

// Partial character sum over x-indices [xlo, xhi) of the affine chart z=1;
// partial sums over disjoint ranges add up to the full S.
long long surface_char_sum_range(const SurfaceSpec& spec, long p, int m,
                                 uint64_t xlo, uint64_t xhi);
long long curve_char_sum_range(const CurveSpec& spec, long p, int m,
                               uint64_t xlo, uint64_t xhi);

// {2} plus every odd p where the six lines degenerate mod p. Candidates come
// from three integer invariants (vertex coefficients, boundary binary-cubic
// discriminants, the gcd of the 3x3 minors of the second-partials matrix);
// every candidate is then confirmed by the direct check mod p.
std::set<long> surface_bad_primes(const SurfaceSpec& spec);

// direct geometric check mod an odd prime
bool surface_is_bad_at(const SurfaceSpec& spec, const mpz_class& p);

std::set<long> curve_bad_primes(const CurveSpec& spec);

// Degree-6 factor from t1, t2, t3 and the functional equation
// 1 + c1 T + c2 T^2 + c3 T^3 + p^w c2 T^4 + p^{2w} c1 T^5 + sign p^{3w} T^6.
EulerFactor weil_from_traces(const TraceData& traces, int weight, int sign);

// Characteristic polynomial of the exterior square of the companion matrix
// of the reversal of P; exact integer linear algebra. deg d -> deg d(d-1)/2.
EulerFactor exterior_square(const EulerFactor& P);

// prod over primes of the cubic field above p of (1 - p^f T^f), weight 2
EulerFactor algebraic_part_factor(const std::vector<std::pair<int, int>>& ef_list, long p);

// ---- geometry data file ----
struct GeometryData {
    std::vector<SurfaceSpec> surfaces;
    std::vector<CurveSpec> curves;
};
GeometryData load_geometry(const std::string& path);

std::string count_record(long p, int m, const SurfaceCount& c);

} // namespace counting
} // namespace k3hecke

#endif
