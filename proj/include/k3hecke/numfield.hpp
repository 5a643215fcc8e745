// Exact arithmetic in the four fixed cyclic sextic CM fields and their
// cubic subfields: elements on a verified integral basis, ideals in HNF,
// prime splitting, principal generators via lattice reduction, the Galois
// action, and certified complex embeddings.
#ifndef K3HECKE_NUMFIELD_HPP
#define K3HECKE_NUMFIELD_HPP

#include "k3hecke/zmatrix.hpp"
#include "k3hecke/zpoly.hpp"
#include "k3hecke/bigfloat.hpp"

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace k3hecke {
namespace numfield {

inline constexpr int DEG = 6;

// coordinates on the integral basis
struct NFElement {
    std::vector<mpq_class> c;   // length 6

    NFElement() : c(DEG) {}
    explicit NFElement(std::vector<mpq_class> v) : c(std::move(v)) {}

    bool is_integral() const;
    bool is_zero() const;
    bool operator==(const NFElement& o) const { return c == o.c; }
    // integer coordinates (throws when not integral)
    std::vector<mpz_class> int_coords() const;
    std::string str() const;
};

struct IdealHNF {
    ZMat H;            // 6x6 upper triangular, columns = lattice basis
    mpz_class norm;    // det H

    bool operator==(const IdealHNF& o) const { return H == o.H; }
    bool contains(const std::vector<mpz_class>& coords) const { return hnf_member(H, coords); }
    bool contains(const IdealHNF& other) const;
};

class FieldData;

struct PrimeIdeal {
    long p = 0;
    int e = 1;
    int f = 1;
    std::vector<mpz_class> gen2;   // second generator, integer coords
    int index = 0;                 // canonical index among the primes above p
    IdealHNF hnf;

    mpz_class norm() const { return hnf.norm; }
    bool operator==(const PrimeIdeal& o) const { return p == o.p && hnf == o.hnf; }
};

struct ClassGenerator {
    PrimeIdeal gen;
    long order = 1;       // order of [gen] in the class group
    NFElement princ;      // gen^order = (princ)
};

class NonPrincipalError : public std::runtime_error {
public:
    explicit NonPrincipalError(const std::string& m) : std::runtime_error(m) {}
};
class BoundExhaustedError : public std::runtime_error {
public:
    explicit BoundExhaustedError(const std::string& m) : std::runtime_error(m) {}
};

class FieldData {
public:
    int id = 0;
    std::string label;          // data-file provenance tag
    mpz_class absdisc;
    zx::Poly poly;              // monic degree 6
    QMat basis;                 // column j = power-basis coords of basis element j
    std::vector<mpq_class> sigma_theta;   // sigma(theta) in power-basis coords
    NFElement zeta;             // torsion generator
    int torsion_order = 0;      // w_K
    NFElement unit1, unit2;     // fundamental units
    std::optional<NFElement> hasse_unit;  // extra unit when [O_K^x : W <u1,u2>] = 2
    long class_number = 1;
    std::vector<ClassGenerator> class_gens;

    zx::Poly cubic_poly;        // monic degree 3 for the cubic subfield F
    QMat cubic_basis;           // 3x3, columns = v-power coords of the O_F basis
    NFElement cubic_embed;      // v inside K

    std::map<long, std::vector<PrimeIdeal>> stored_splits;           // index primes of K
    std::map<long, std::vector<std::pair<int, int>>> cubic_stored;   // index primes of F

    // ---- element arithmetic ----
    NFElement zero() const { return NFElement(); }
    NFElement one() const;
    NFElement from_int(long v) const;
    NFElement theta() const;    // the root of poly as an element
    NFElement add(const NFElement& a, const NFElement& b) const;
    NFElement sub(const NFElement& a, const NFElement& b) const;
    NFElement neg(const NFElement& a) const;
    NFElement mul(const NFElement& a, const NFElement& b) const;
    NFElement mul_int(const NFElement& a, const mpz_class& s) const;
    NFElement pow(const NFElement& a, unsigned long e) const;
    NFElement inverse(const NFElement& a) const;
    mpq_class norm(const NFElement& a) const;
    mpq_class trace(const NFElement& a) const;
    ZMat mult_matrix_int(const std::vector<mpz_class>& coords) const;

    std::vector<mpq_class> to_power_basis(const NFElement& a) const;
    NFElement from_power_basis(const std::vector<mpq_class>& pc) const;

    // multiplication table entry: basis_i * basis_j = sum_k table(i,j,k) basis_k
    const mpz_class& mtab(int i, int j, int k) const { return mult_table_[(i * DEG + j) * DEG + k]; }

    // ---- ideals ----
    IdealHNF ideal_from_columns(const ZMat& cols) const;
    IdealHNF ideal_principal(const NFElement& a) const;
    IdealHNF ideal_two_gen(long p, const std::vector<mpz_class>& gen2) const;
    IdealHNF ideal_mul(const IdealHNF& a, const IdealHNF& b) const;
    IdealHNF ideal_pow(const IdealHNF& a, unsigned long e) const;
    IdealHNF ideal_one() const;

    // ---- Galois ----
    const ZMat& sigma_matrix(int k) const { return sigma_mats_[((k % 6) + 6) % 6]; }
    NFElement galois_apply(int k, const NFElement& a) const;
    PrimeIdeal galois_apply(int k, const PrimeIdeal& P) const;

    // ---- embeddings ----
    // 6 certified values ordered (pair0 +Im, pair0 -Im, pair1 +, pair1 -, ...)
    std::vector<Cplx> embed(const NFElement& a, long digits) const;
    // only the positive-imaginary representative of each pair
    std::array<Cplx, 3> embed_pairs(const NFElement& a, long digits) const;
    // roots of the defining polynomial in canonical pair order, at >= digits
    const std::vector<Cplx>& roots(long digits) const;
    // permutation of the 6 canonical embedding slots induced by sigma:
    // phi_s(sigma(x)) = phi_{perm[s]}(x)
    const std::array<int, 6>& sigma_embedding_perm() const { return sigma_perm_; }

    // enumeration radius helper: T2 bound for a generator of an ideal of
    // this norm, derived from the unit-lattice covering radius
    double generator_t2_bound(const mpz_class& ideal_norm) const;

    // split_prime with a per-field cache
    const std::vector<PrimeIdeal>& split_cached(long p) const;

    void run_load_checks();   // throws on any failed invariant

    // internal setup (called by the loader / generator tool)
    void finalize();

private:
    std::vector<mpz_class> mult_table_;   // 6*6*6
    std::array<ZMat, 6> sigma_mats_;
    QMat basis_inv_;
    std::array<int, 6> sigma_perm_{};
    double unit_log_cover_ = 0;   // sup-norm covering radius bound of the log-unit lattice
    mutable std::map<long, std::vector<Cplx>> root_cache_;   // keyed by digits
    mutable std::map<long, std::vector<PrimeIdeal>> split_cache_;

    std::vector<mpq_class> power_mul(const std::vector<mpq_class>& a,
                                     const std::vector<mpq_class>& b) const;
};

// ---- module operations ----

FieldData load_field(int i, const std::string& path);

std::vector<PrimeIdeal> split_prime(const FieldData& K, long p);

// alpha with (alpha) = I; deterministic first hit of a Fincke-Pohst
// enumeration of the reduced ideal lattice
NFElement principal_generator(const IdealHNF& I, const FieldData& K);

// all elements of the lattice I with |N| = target_norm and T2 <= t2_bound
// (up to max_hits); used for unit saturation scans
std::vector<NFElement> enumerate_norm_elements(const IdealHNF& I, const FieldData& K,
                                               const mpz_class& target_norm,
                                               double t2_bound, size_t max_hits);

// generator of a prime ideal: inert and Gaussian-split cases are read off
// structurally, everything else falls back to principal_generator
NFElement prime_generator(const FieldData& K, const PrimeIdeal& P);

std::vector<std::pair<int, int>> cubic_subfield_split(const FieldData& K, long p);

// primes of K dividing the index [O_K : Z[theta]] (support of stored_splits)
std::set<long> index_primes(const FieldData& K);

std::string default_field_data_path();

} // namespace numfield
} // namespace k3hecke

#endif
