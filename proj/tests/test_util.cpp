#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "k3hecke/zmatrix.hpp"
#include "k3hecke/zpoly.hpp"
#include "k3hecke/bigfloat.hpp"

using namespace k3hecke;

TEST_CASE("bareiss determinant") {
    ZMat m(3, 3);
    long v[9] = {2, -1, 0, -1, 2, -1, 0, -1, 2};
    for (int i = 0; i < 9; ++i) m.at(i / 3, i % 3) = v[i];
    CHECK(m.det_bareiss() == 4);

    ZMat s(2, 2);
    s.at(0, 0) = 1; s.at(0, 1) = 2; s.at(1, 0) = 2; s.at(1, 1) = 4;
    CHECK(s.det_bareiss() == 0);
}

TEST_CASE("charpoly") {
    ZMat m(2, 2);
    m.at(0, 0) = 2; m.at(0, 1) = 1; m.at(1, 1) = 3;
    auto c = m.charpoly();
    REQUIRE(c.size() == 3);
    CHECK(c[0] == 6);
    CHECK(c[1] == -5);
    CHECK(c[2] == 1);

    ZMat id = ZMat::identity(4);
    auto ci = id.charpoly();
    CHECK(ci[0] == 1);   // (x-1)^4 constant term
    CHECK(ci[1] == -4);
    CHECK(ci[2] == 6);
}

TEST_CASE("hnf") {
    ZMat m(2, 3);
    m.at(0, 0) = 4; m.at(0, 1) = 6; m.at(0, 2) = 1;
    m.at(1, 0) = 0; m.at(1, 1) = 2; m.at(1, 2) = 0;
    ZMat h = hnf_cols(m);
    // lattice is all of Z^2: gcd of row0 with row1 zeroed = 1
    CHECK(h.at(0, 0) == 1);
    CHECK(h.at(1, 1) == 2);
    CHECK(h.at(1, 0) == 0);

    ZMat H, U;
    hnf_cols_transform(m, H, U);
    CHECK(H == h);
    // M*U == H
    ZMat MU = m * U;
    CHECK(MU == H);

    std::vector<mpz_class> v{5, 4};
    CHECK(hnf_member(h, v));
    auto r = hnf_reduce(h, v);
    CHECK(r[0] == 0);
    CHECK(r[1] == 0);
    std::vector<mpz_class> odd{0, 1};
    CHECK(!hnf_member(h, odd));
}

TEST_CASE("smith form") {
    ZMat m(2, 2);
    m.at(0, 0) = 2; m.at(1, 1) = 3;
    auto sf = smith_form(m);
    CHECK(sf.diag[0] == 1);
    CHECK(sf.diag[1] == 6);
    ZMat prod = sf.U * sf.Uinv;
    CHECK(prod == ZMat::identity(2));

    ZMat m2(2, 2);
    m2.at(0, 0) = 4; m2.at(1, 1) = 6;
    auto sf2 = smith_form(m2);
    CHECK(sf2.diag[0] == 2);
    CHECK(sf2.diag[1] == 12);
}

TEST_CASE("zpoly basics") {
    using namespace zx;
    Poly a{1, 1};        // 1 + T
    Poly b{1, 2, 0, 5};  // 1 + 2T + 5T^3
    Poly prod = mul(a, b);
    Poly q;
    REQUIRE(div_exact_unit(prod, a, q));
    CHECK(equal(q, b));
    Poly bad{1, 1, 1};
    CHECK(!div_exact_unit(bad, Poly{1, 2}, q));

    CHECK(resultant(Poly{-1, 0, 1}, Poly{-4, 0, 1}) == 9);
    CHECK(discriminant(Poly{1, 3, 1}) == 5);
    CHECK(discriminant(Poly{1, -3, 0, 1}) == 81);
}

TEST_CASE("power sums round trip") {
    using namespace zx;
    Poly p{1, -5, 6};   // (1-2T)(1-3T)
    auto s = power_sums(p, 4);
    CHECK(s[0] == 5);
    CHECK(s[1] == 13);
    CHECK(s[2] == 35);
    CHECK(s[3] == 97);
    Poly back = from_power_sums(s, 2);
    CHECK(equal(back, p));
}

TEST_CASE("qmat inverse") {
    QMat m(2, 2);
    m.at(0, 0) = 1; m.at(0, 1) = mpq_class(1, 2);
    m.at(1, 0) = 0; m.at(1, 1) = mpq_class(3);
    QMat inv = m.inverse();
    QMat prod = m * inv;
    CHECK(prod.at(0, 0) == 1);
    CHECK(prod.at(0, 1) == 0);
    CHECK(prod.at(1, 1) == 1);
    CHECK(m.det() == 3);
}

TEST_CASE("complex roots") {
    long prec = digits_to_bits(40);
    auto roots = complex_roots({1, 0, 1}, prec);   // x^2 + 1
    REQUIRE(roots.size() == 2);
    for (auto& r : roots) {
        CHECK(r.re.abs().to_double() < 1e-30);
        CHECK(std::abs(r.im.abs().to_double() - 1.0) < 1e-30);
    }

    auto r3 = complex_roots({1, -3, 0, 1}, prec);  // x^3 - 3x + 1, all real
    REQUIRE(r3.size() == 3);
    double sum = 0;
    for (auto& r : r3) {
        CHECK(r.im.abs().to_double() < 1e-30);
        sum += r.re.to_double();
    }
    CHECK(std::abs(sum) < 1e-25);
}

TEST_CASE("unit roots") {
    long prec = digits_to_bits(40);
    Cplx i4 = unit_root(mpq_class(1, 4), prec);
    CHECK(i4.re.abs().to_double() < 1e-35);
    CHECK(std::abs(i4.im.to_double() - 1.0) < 1e-35);
    Cplx one = unit_root(mpq_class(0), prec);
    CHECK(std::abs(one.re.to_double() - 1.0) < 1e-35);
}
