// Exact integer and rational matrices: Hermite/Smith normal forms,
// fraction-free determinants, characteristic polynomials.
#ifndef K3HECKE_ZMATRIX_HPP
#define K3HECKE_ZMATRIX_HPP

#include <gmpxx.h>
#include <vector>
#include <cstddef>

namespace k3hecke {

class ZMat {
public:
    ZMat() : r_(0), c_(0) {}
    ZMat(size_t r, size_t c) : r_(r), c_(c), a_(r * c) {}

    size_t rows() const { return r_; }
    size_t cols() const { return c_; }
    mpz_class& at(size_t i, size_t j) { return a_[i * c_ + j]; }
    const mpz_class& at(size_t i, size_t j) const { return a_[i * c_ + j]; }

    static ZMat identity(size_t n);
    ZMat operator*(const ZMat& o) const;
    ZMat operator+(const ZMat& o) const;
    ZMat operator-(const ZMat& o) const;
    bool operator==(const ZMat& o) const { return r_ == o.r_ && c_ == o.c_ && a_ == o.a_; }
    mpz_class trace() const;

    // fraction-free Gaussian elimination
    mpz_class det_bareiss() const;

    // coefficients of det(x*I - A), ascending: res[0] + res[1] x + ... + x^n
    std::vector<mpz_class> charpoly() const;

private:
    size_t r_, c_;
    std::vector<mpz_class> a_;
};

// Column-style upper-triangular Hermite normal form of the lattice spanned
// by the columns of M (n x k, k >= n, full rank n required).
// Returns H (n x n): H(i,j) = 0 for i > j, H(i,i) > 0, 0 <= H(i,j) < H(i,i) for j > i.
ZMat hnf_cols(const ZMat& M);

// As hnf_cols but also produces an integer matrix U (k x n) with M*U = H.
void hnf_cols_transform(const ZMat& M, ZMat& H, ZMat& U);

// Basis of the integer kernel lattice {x : M x = 0} of an n x k matrix M
// with full row rank n <= k; returns k x (k - n).
ZMat hnf_cols_kernel(const ZMat& M);

// v reduced into the fundamental box of the column lattice H (upper triangular).
std::vector<mpz_class> hnf_reduce(const ZMat& H, std::vector<mpz_class> v);

// is v in the column span of H?
bool hnf_member(const ZMat& H, std::vector<mpz_class> v);

// solve H*x = v exactly over Z (H upper triangular nonsingular); false if no integer solution
bool hnf_solve(const ZMat& H, std::vector<mpz_class> v, std::vector<mpz_class>& x);

// Smith normal form of R (m x n): U*R*V = D with D diagonal, d1 | d2 | ...
// Only U and Uinv are tracked (V is not needed by callers).
struct SmithForm {
    std::vector<mpz_class> diag;   // length min(m,n), may include 0s at the end
    ZMat U;     // m x m unimodular
    ZMat Uinv;  // m x m
};
SmithForm smith_form(const ZMat& R);

// Rational matrices: just enough for basis-change computations.
class QMat {
public:
    QMat() : r_(0), c_(0) {}
    QMat(size_t r, size_t c) : r_(r), c_(c), a_(r * c) {}
    size_t rows() const { return r_; }
    size_t cols() const { return c_; }
    mpq_class& at(size_t i, size_t j) { return a_[i * c_ + j]; }
    const mpq_class& at(size_t i, size_t j) const { return a_[i * c_ + j]; }

    static QMat identity(size_t n);
    QMat operator*(const QMat& o) const;
    std::vector<mpq_class> apply(const std::vector<mpq_class>& v) const;
    QMat inverse() const;  // throws if singular
    mpq_class det() const;

private:
    size_t r_, c_;
    std::vector<mpq_class> a_;
};

} // namespace k3hecke

#endif
