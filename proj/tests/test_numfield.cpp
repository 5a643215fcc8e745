#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "k3hecke/numfield.hpp"
#include "k3hecke/ffarith.hpp"

#include <random>

using namespace k3hecke;
using namespace k3hecke::numfield;

static const FieldData& field(int i) {
    static std::map<int, FieldData> cache;
    auto it = cache.find(i);
    if (it == cache.end())
        it = cache.emplace(i, load_field(i, std::string(TEST_DATA_DIR) + "/fields.dat")).first;
    return it->second;
}

TEST_CASE("all four fields load with verified invariants") {
    CHECK(field(1).absdisc == 419904);
    CHECK(field(2).absdisc == 153664);
    CHECK(field(3).absdisc == 8340544);
    CHECK(field(4).absdisc == 59105344);
    CHECK(field(4).class_number > 1);
    for (int i = 1; i <= 4; ++i) {
        CHECK(field(i).torsion_order == 4);
        // sigma^6 = id is load-checked; spot check sigma order via matrices
        CHECK(field(i).sigma_matrix(6 % 6) == ZMat::identity(6));
    }
}

TEST_CASE("element arithmetic") {
    const FieldData& K = field(1);
    NFElement th = K.theta();
    // theta satisfies its defining polynomial
    NFElement acc = K.zero();
    for (int k = 6; k >= 0; --k) {
        acc = K.mul(acc, th);
        acc = K.add(acc, K.mul_int(K.one(), K.poly[k]));
    }
    CHECK(acc.is_zero());
    // inverse
    NFElement x = K.add(th, K.from_int(3));
    CHECK(K.mul(x, K.inverse(x)) == K.one());
}

TEST_CASE("norm multiplicativity on random integral pairs") {
    std::mt19937_64 rng(5);
    for (int i = 1; i <= 4; ++i) {
        const FieldData& K = field(i);
        for (int t = 0; t < 25; ++t) {
            NFElement a, b;
            for (int k = 0; k < DEG; ++k) {
                a.c[k] = static_cast<long>(rng() % 7) - 3;
                b.c[k] = static_cast<long>(rng() % 7) - 3;
            }
            CHECK(K.norm(K.mul(a, b)) == K.norm(a) * K.norm(b));
        }
    }
}

TEST_CASE("split_prime: fundamental identities") {
    for (int i = 1; i <= 4; ++i) {
        const FieldData& K = field(i);
        for (long p : {5L, 13L, 17L, 29L, 37L}) {
            auto primes = split_prime(K, p);
            int sum = 0;
            mpz_class prod = 1;
            for (auto& P : primes) {
                sum += P.e * P.f;
                mpz_class n = P.norm();
                for (int e = 0; e < P.e; ++e) prod *= n;
            }
            CHECK(sum == 6);
            mpz_class p6;
            mpz_ui_pow_ui(p6.get_mpz_t(), p, 6);
            CHECK(prod == p6);
        }
    }
}

TEST_CASE("splitting of 17 in the first field matches the factorization oracle") {
    const FieldData& K = field(1);
    // oracle: count roots of the defining polynomial in F_{17^k}, k = 1..3
    auto count_roots = [&](int k) {
        auto ctx = ffarith::ff_context(17, k);
        long roots = 0;
        for (uint64_t idx = 0; idx < ctx.q(); ++idx) {
            auto x = ctx.from_index(idx);
            auto acc = ctx.zero();
            for (int d = 6; d >= 0; --d) {
                mpz_class r = K.poly[d] % 17;
                if (r < 0) r += 17;
                acc = acc * x + ctx.from_int(r.get_si());
            }
            if (acc.is_zero()) ++roots;
        }
        return roots;
    };
    auto primes = split_prime(K, 17);
    long a1 = 0, a2 = 0, a3 = 0;
    for (auto& P : primes) {
        if (P.f == 1) ++a1;
        if (P.f == 2) ++a2;
        if (P.f == 3) ++a3;
        CHECK(P.e == 1);   // 17 unramified
    }
    CHECK(count_roots(1) == a1);
    CHECK(count_roots(2) == a1 + 2 * a2);
    CHECK(count_roots(3) == a1 + 3 * a3);
    // 17 = 1 mod 4 splits in Q(i) and is split in the conductor-9 cubic,
    // so it splits completely here; the identifying prime needs 6 degree-1 primes
    CHECK(primes.size() == 6);
}

TEST_CASE("2 and 3 ramify in the first field") {
    const FieldData& K = field(1);
    bool ram2 = false, ram3 = false;
    for (auto& P : split_prime(K, 2))
        if (P.e > 1) ram2 = true;
    for (auto& P : split_prime(K, 3))
        if (P.e > 1) ram3 = true;
    CHECK(ram2);
    CHECK(ram3);   // 419904 = 2^6 3^8
}

TEST_CASE("sigma orbit covers the primes above p") {
    for (int i : {1, 3}) {
        const FieldData& K = field(i);
        for (long p : {13L, 17L}) {
            auto primes = split_prime(K, p);
            std::set<int> seen;
            const PrimeIdeal& P0 = primes[0];
            for (int k = 0; k < 6; ++k) seen.insert(K.galois_apply(k, P0).index);
            // transitivity: the orbit covers everything
            CHECK(seen.size() == primes.size());
        }
    }
}

TEST_CASE("galois action fixes splitting type and has order 6") {
    const FieldData& K = field(2);
    auto primes = split_prime(K, 13);
    for (auto& P : primes) {
        PrimeIdeal Q = K.galois_apply(2, P);
        CHECK(Q.f == P.f);
        CHECK(Q.e == P.e);
    }
    NFElement th = K.theta();
    CHECK(K.galois_apply(0, th) == th);
    NFElement acc = th;
    for (int k = 0; k < 6; ++k) acc = K.galois_apply(1, acc);
    CHECK(acc == th);
}

TEST_CASE("principal generators") {
    const FieldData& K = field(1);
    // (p) has a generator of norm p^6
    IdealHNF I = K.ideal_principal(K.from_int(7));
    NFElement g = principal_generator(I, K);
    mpq_class n = K.norm(g);
    CHECK((n == mpq_class(7) * 7 * 7 * 7 * 7 * 7 || n == mpq_class(-7) * 7 * 7 * 7 * 7 * 7));
    CHECK(K.ideal_principal(g) == I);

    // degree-1 prime above split 17
    auto primes = split_prime(K, 17);
    NFElement a = principal_generator(primes[0].hnf, K);
    mpq_class na = K.norm(a);
    CHECK((na == 17 || na == -17));
    CHECK(K.ideal_principal(a) == primes[0].hnf);

    // unit for the full ring
    NFElement u = principal_generator(K.ideal_one(), K);
    mpq_class nu = K.norm(u);
    CHECK((nu == 1 || nu == -1));
}

TEST_CASE("generator ambiguity is exactly the unit group") {
    const FieldData& K = field(2);
    auto primes = split_prime(K, 13);
    NFElement a = principal_generator(primes[0].hnf, K);
    for (const NFElement* u : {&K.unit1, &K.unit2, &K.zeta}) {
        NFElement ua = K.mul(*u, a);
        CHECK(K.ideal_principal(ua) == primes[0].hnf);
    }
}

TEST_CASE("embeddings") {
    const FieldData& K = field(1);
    // x = 1: all six values are 1
    auto v1 = K.embed(K.one(), 40);
    for (auto& z : v1) {
        CHECK(std::abs(z.re.to_double() - 1.0) < 1e-35);
        CHECK(z.im.abs().to_double() < 1e-35);
    }
    // x = theta: the six roots of the defining polynomial
    auto vt = K.embed(K.theta(), 40);
    long prec = digits_to_bits(45);
    for (auto& z : vt) {
        Cplx acc(prec);
        for (int k = 6; k >= 0; --k) {
            acc = acc * z;
            acc.re = acc.re + Real::from(K.poly[k], prec);
        }
        CHECK(acc.abs().to_double() < 1e-30);
    }
    // norm identity: product over embeddings = N(x)
    std::mt19937_64 rng(17);
    for (int t = 0; t < 5; ++t) {
        NFElement x;
        for (int k = 0; k < DEG; ++k) x.c[k] = static_cast<long>(rng() % 9) - 4;
        auto vals = K.embed(x, 50);
        Cplx prod(digits_to_bits(50));
        prod.re = Real::from(1L, digits_to_bits(50));
        for (auto& z : vals) prod = prod * z;
        mpq_class n = K.norm(x);
        CHECK(std::abs(prod.re.to_double() - mpq_get_d(n.get_mpq_t())) <
              1e-38 * (1 + std::abs(mpq_get_d(n.get_mpq_t()))));
        CHECK(prod.im.abs().to_double() < 1e-30 * (1 + std::abs(mpq_get_d(n.get_mpq_t()))));
    }
}

TEST_CASE("embed of galois image permutes the embedding values") {
    const FieldData& K = field(3);
    NFElement x;
    x.c = {mpq_class(1), mpq_class(2), mpq_class(-1), mpq_class(0), mpq_class(1), mpq_class(3)};
    auto base = K.embed(x, 45);
    auto img = K.embed(K.galois_apply(1, x), 45);
    const auto& perm = K.sigma_embedding_perm();
    for (int s = 0; s < 6; ++s) {
        // phi_s(sigma x) = phi_{perm[s]}(x)
        Real d = (img[s] - base[perm[s]]).abs();
        CHECK(d.to_double() < 1e-35);
    }
}

TEST_CASE("sigma^3 is complex conjugation on elements") {
    const FieldData& K = field(2);
    NFElement x;
    x.c = {mpq_class(2), mpq_class(-1), mpq_class(3), mpq_class(1), mpq_class(0), mpq_class(-2)};
    auto a = K.embed(x, 45);
    auto b = K.embed(K.galois_apply(3, x), 45);
    // slotwise: value at pair j gets conjugated
    for (int pr = 0; pr < 3; ++pr) {
        CHECK((b[2 * pr] - a[2 * pr].conj()).abs().to_double() < 1e-35);
        CHECK((b[2 * pr + 1] - a[2 * pr + 1].conj()).abs().to_double() < 1e-35);
    }
}

TEST_CASE("cubic subfield splitting") {
    for (int i = 1; i <= 4; ++i) {
        const FieldData& K = field(i);
        for (long p : {5L, 13L, 17L, 37L}) {
            auto ef = cubic_subfield_split(K, p);
            int total = 0;
            for (auto& [e, f] : ef) total += e * f;
            CHECK(total == 3);
        }
    }
    // p split completely in K implies split completely in F
    const FieldData& K1 = field(1);
    auto primes = split_prime(K1, 17);
    bool split_completely = primes.size() == 6;
    CHECK(split_completely);
    auto ef = cubic_subfield_split(K1, 17);
    CHECK(ef.size() == 3);
    for (auto& [e, f] : ef) {
        CHECK(e == 1);
        CHECK(f == 1);
    }
}

TEST_CASE("torsion is exactly 4: short-vector oracle") {
    // every root of unity has all embeddings on the unit circle, so T2 = 6;
    // enumerate norm-1 elements with T2 <= 6 + eps and count the torsion ones
    for (int i : {1, 4}) {
        const FieldData& K = field(i);
        auto units = enumerate_norm_elements(K.ideal_one(), K, 1, 6.5, 100);
        int torsion = 0;
        for (auto& u : units) {
            // u is torsion iff u^8 == 1 here (order divides w_K = 4 or is 8+: 8th
            // roots would need a degree-4 subfield)
            NFElement p = K.pow(u, 8);
            if (p == K.one()) ++torsion;
        }
        CHECK(torsion == 4);   // +-1, +-zeta
    }
}

TEST_CASE("field data file errors") {
    CHECK_THROWS(load_field(9, std::string(TEST_DATA_DIR) + "/fields.dat"));
    CHECK_THROWS(load_field(1, "/nonexistent/fields.dat"));
}
