// Algebraic Hecke quasi-characters over the fixed CM fields: infinity types,
// unit compatibility, enumeration under the value-field bound, evaluation at
// primes, Euler factors over Q, and Galois twisting.
#ifndef K3HECKE_HECKE_HPP
#define K3HECKE_HECKE_HPP

#include "k3hecke/resring.hpp"
#include "k3hecke/counting.hpp"

#include <array>
#include <set>

namespace k3hecke {
namespace hecke {

using counting::EulerFactor;
using numfield::FieldData;
using numfield::IdealHNF;
using numfield::NFElement;
using numfield::PrimeIdeal;
using resring::FiniteCharacter;
using resring::Modulus;
using resring::ModulusCtx;

// exponent pairs (a_j, b_j) on the three canonical embedding pairs
struct InfinityType {
    std::array<std::pair<int, int>, 3> ab;

    int weight() const;   // a_j + b_j, constant across slots
    bool operator==(const InfinityType& o) const { return ab == o.ab; }
    std::string key() const;
};

// all ordered slot assignments realizing the multiset (and its conjugate)
std::vector<InfinityType> type_assignments(const std::array<std::pair<int, int>, 3>& multiset);

// value on a class-group generator: an exact h_j-th root choice
struct ClassValue {
    // psi(gen)^order = chi(princ) * psi_inf(princ); the chosen root is
    // recorded through root_index: psi(gen) = base^(1/order) * e^(2 pi i k/order)
    long root_index = 0;
};

struct HeckeCharacter {
    const FieldData* K = nullptr;
    Modulus cond;              // conductor (the character is primitive)
    FiniteCharacter chi;       // on the conductor's unit group
    InfinityType type;
    std::vector<ClassValue> class_values;   // aligned with K->class_gens

    std::string key() const;
    bool operator==(const HeckeCharacter& o) const { return key() == o.key(); }
};

struct ValueFieldBound {
    std::string assumption;        // "M = K"
    std::set<long> admissible;     // {n : zeta_n in K} = divisors of w_K
};

// admissible character orders under the value-field assumption M = K
ValueFieldBound max_char_order(const FieldData& K);

// evaluation context: caches prime splittings, generators, embeddings and
// class-group decompositions per field
class EvalCtx {
public:
    EvalCtx(const FieldData& K, long digits = 120);

    const FieldData& field() const { return *K_; }
    long digits() const { return digits_; }
    ModulusCtx& modctx() { return mctx_; }

    // generator of a prime ideal (cached)
    const NFElement& generator(const PrimeIdeal& P);

    // decomposition of [P] on the class generators: exponents a_j and beta
    // with P * prod gen_j^(order_j - a_j) = (beta)
    struct ClassDecomp {
        std::vector<long> exps;
        NFElement beta;
    };
    const ClassDecomp& class_decompose(const PrimeIdeal& P);

    // certified complex value of prod phi_j(x)^{a_j} conj(phi_j(x))^{b_j}
    Cplx infinity_eval(const InfinityType& T, const NFElement& x);

    // cached discrete log of an integral element in a unit group
    const std::vector<mpz_class>& dlog_cached(const resring::UnitGroup& G, const NFElement& x);
    // cached embedding pair values of an integral element
    const std::array<Cplx, 3>& embed_cached(const NFElement& x, long digits);

private:
    const FieldData* K_;
    long digits_;
    ModulusCtx mctx_;
    std::map<std::string, NFElement> gen_cache_;
    std::map<std::string, ClassDecomp> class_cache_;
    std::map<std::string, std::vector<mpz_class>> dlog_cache_;
    std::map<std::string, std::array<Cplx, 3>> emb_cache_;

public:
    // transport data for chi -> chi o sigma^k: the sigma^{-k}-image modulus and
    // the dlogs (in the source group) of the sigma^k-images of its generators
    struct TwistMap {
        Modulus m2;
        std::shared_ptr<const resring::UnitGroup> G2;
        std::vector<std::vector<mpz_class>> gen_dlogs;
    };
    const TwistMap& twist_map(const Modulus& m, std::shared_ptr<const resring::UnitGroup> G, int k);

private:
    std::map<std::string, TwistMap> twist_cache_;
};

Cplx infinity_eval(const FieldData& K, const InfinityType& T, const NFElement& x, long digits);

// chi(u) * psi_inf(u) = 1 on the torsion generator, the fundamental units and
// the extra unit when present; the infinity part is snapped to a w_K-th root
// of unity with certified error
bool unit_compatible(EvalCtx& ctx, const FiniteCharacter& chi, const InfinityType& T);

// exponent bound: smallest e* such that every admissible-order character of
// (O/P^{e*+1})^x is trivial on the top layer, stable for two more increments
int bound_exponents(ModulusCtx& ctx, const PrimeIdeal& P, long n_max);

// the full list of primitive characters with the given infinity-type multiset
// and conductor supported on the primes above bad_primes, grouped into Galois
// orbits (each inner vector is one orbit)
std::vector<std::vector<HeckeCharacter>> enumerate_hecke(
    EvalCtx& ctx, const std::array<std::pair<int, int>, 3>& type_multiset,
    const std::set<long>& bad_primes);

// certified complex value at a prime coprime to the conductor
Cplx eval_at_prime(EvalCtx& ctx, const HeckeCharacter& psi, const PrimeIdeal& P);

// prod over primes above p of (1 - psi(P) T^{f_P}), coefficients certified
// integers
EulerFactor euler_factor_Q(EvalCtx& ctx, const HeckeCharacter& psi, long p);

// power sums s_1..s_m of the induced factor, as certified complex numbers
// (cheap elimination-side comparison without integer certification)
std::vector<Cplx> char_power_sums(EvalCtx& ctx, const HeckeCharacter& psi, long p, int smax);

HeckeCharacter galois_twist(EvalCtx& ctx, const HeckeCharacter& psi, int k);

} // namespace hecke
} // namespace k3hecke

#endif
