// Unit groups of O_K modulo prime-power-supported ideals, their characters,
// conductors, and character enumeration.
#ifndef K3HECKE_RESRING_HPP
#define K3HECKE_RESRING_HPP

#include "k3hecke/numfield.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace k3hecke {
namespace resring {

using numfield::FieldData;
using numfield::IdealHNF;
using numfield::NFElement;
using numfield::PrimeIdeal;

// residue coordinates in the HNF fundamental box
using Res = std::vector<mpz_class>;

struct Modulus {
    std::vector<std::pair<PrimeIdeal, int>> parts;   // distinct primes, e >= 1
    IdealHNF hnf;
    mpz_class norm;

    std::string key() const;   // canonical: sorted (p, index, e)
    bool is_one() const { return parts.empty(); }
};

Modulus make_modulus(const FieldData& K, std::vector<std::pair<PrimeIdeal, int>> parts);

// O_K / I with canonical representatives
class ResidueRing {
public:
    ResidueRing(const FieldData& K, IdealHNF I);

    const FieldData& field() const { return *K_; }
    const IdealHNF& ideal() const { return I_; }

    Res reduce(const std::vector<mpz_class>& coords) const;
    Res reduce(const NFElement& x) const;
    Res one() const;
    Res mul(const Res& a, const Res& b) const;
    Res pow(const Res& a, mpz_class e) const;   // negative e uses the inverse
    Res inverse(const Res& a) const;            // throws if not coprime
    bool is_coprime(const Res& a) const;
    bool is_one_elem(const Res& a) const;

private:
    const FieldData* K_;
    IdealHNF I_;
};

class UnitGroup {
public:
    const FieldData& field() const { return *K_; }
    const Modulus& modulus() const { return m_; }
    const ResidueRing& ring() const { return *ring_; }

    size_t rank() const { return orders_.size(); }
    const std::vector<mpz_class>& orders() const { return orders_; }   // d1 | d2 | ...
    const std::vector<Res>& gens() const { return gens_; }
    const mpz_class& order() const { return order_; }

    // exponent vector of a residue coprime to the modulus
    std::vector<mpz_class> dlog(const Res& x) const;
    std::vector<mpz_class> dlog(const NFElement& x) const;

    friend std::shared_ptr<const UnitGroup> unit_group(const FieldData&, const Modulus&,
                                                       const mpz_class&);

private:
    const FieldData* K_ = nullptr;
    Modulus m_;
    std::shared_ptr<ResidueRing> ring_;
    std::vector<Res> gens_;
    std::vector<mpz_class> orders_;
    mpz_class order_ = 1;
    std::function<std::vector<mpz_class>(const Res&)> dlog_;
};

// structure of (O_K/m)^x; throws when the modulus norm exceeds the budget
std::shared_ptr<const UnitGroup> unit_group(const FieldData& K, const Modulus& m,
                                            const mpz_class& budget = mpz_class(10000000));

std::vector<mpz_class> discrete_log(const UnitGroup& G, const Res& x);

struct FiniteCharacter {
    std::shared_ptr<const UnitGroup> G;
    std::vector<mpz_class> exps;   // a_j mod d_j

    mpz_class order() const;
    // value as an exact element of Q/Z, in [0, 1)
    mpq_class value_frac(const Res& x) const;
    mpq_class value_frac(const NFElement& x) const;
    mpq_class value_on_exponents(const std::vector<mpz_class>& v) const;
    bool is_trivial() const;
    std::string key() const;   // modulus key plus exponents
};

// cache of unit groups and conductor-descent data, shared per field
class ModulusCtx {
public:
    explicit ModulusCtx(const FieldData& K, mpz_class budget = mpz_class(10000000))
        : K_(&K), budget_(std::move(budget)) {}

    const FieldData& field() const { return *K_; }
    const mpz_class& budget() const { return budget_; }
    std::shared_ptr<const UnitGroup> group(const Modulus& m);

    // smallest divisor of the modulus through which chi factors, with the
    // induced primitive character
    std::pair<Modulus, FiniteCharacter> conductor(const FiniteCharacter& chi);

private:
    const FieldData* K_;
    mpz_class budget_;
    std::map<std::string, std::shared_ptr<const UnitGroup>> groups_;

    // static data of the reduction map G(m) -> G(m2)
    struct DescentData {
        std::shared_ptr<const UnitGroup> G2;
        std::vector<Res> lifts;                          // coprime lifts of G2 gens
        std::vector<std::vector<mpz_class>> lift_dlogs;  // dlogs in G(m)
        std::vector<std::vector<mpz_class>> kernel;      // exponent-lattice basis
    };
    std::map<std::string, DescentData> descents_;

    const DescentData& descent_data(const Modulus& m, std::shared_ptr<const UnitGroup> G,
                                    const Modulus& m2);
    std::optional<FiniteCharacter> try_descend(const FiniteCharacter& chi, const Modulus& m2);
};

Modulus char_conductor(ModulusCtx& ctx, const FiniteCharacter& chi);

// characters whose order divides n_max, in a fixed odometer order
std::vector<FiniteCharacter> enumerate_chars(std::shared_ptr<const UnitGroup> G, long n_max);

} // namespace resring
} // namespace k3hecke

#endif
