#include "k3hecke/zmatrix.hpp"

#include <stdexcept>
#include <algorithm>

namespace k3hecke {

ZMat ZMat::identity(size_t n) {
    ZMat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

ZMat ZMat::operator*(const ZMat& o) const {
    if (c_ != o.r_) throw std::invalid_argument("ZMat: size mismatch");
    ZMat m(r_, o.c_);
    for (size_t i = 0; i < r_; ++i)
        for (size_t k = 0; k < c_; ++k) {
            const mpz_class& aik = at(i, k);
            if (aik == 0) continue;
            for (size_t j = 0; j < o.c_; ++j)
                m.at(i, j) += aik * o.at(k, j);
        }
    return m;
}

ZMat ZMat::operator+(const ZMat& o) const {
    ZMat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] + o.a_[i];
    return m;
}

ZMat ZMat::operator-(const ZMat& o) const {
    ZMat m(r_, c_);
    for (size_t i = 0; i < a_.size(); ++i) m.a_[i] = a_[i] - o.a_[i];
    return m;
}

mpz_class ZMat::trace() const {
    mpz_class t = 0;
    for (size_t i = 0; i < std::min(r_, c_); ++i) t += at(i, i);
    return t;
}

mpz_class ZMat::det_bareiss() const {
    if (r_ != c_) throw std::invalid_argument("det: not square");
    size_t n = r_;
    if (n == 0) return 1;
    ZMat m = *this;
    mpz_class prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (m.at(k, k) == 0) {
            size_t piv = k + 1;
            while (piv < n && m.at(piv, k) == 0) ++piv;
            if (piv == n) return 0;
            for (size_t j = 0; j < n; ++j) std::swap(m.at(k, j), m.at(piv, j));
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j) {
                mpz_class t = m.at(i, j) * m.at(k, k) - m.at(i, k) * m.at(k, j);
                mpz_class q;
                mpz_divexact(q.get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
                m.at(i, j) = q;
            }
        prev = m.at(k, k);
    }
    return sign > 0 ? m.at(n - 1, n - 1) : mpz_class(-m.at(n - 1, n - 1));
}

std::vector<mpz_class> ZMat::charpoly() const {
    // Faddeev–LeVerrier; all divisions are exact for integer matrices.
    if (r_ != c_) throw std::invalid_argument("charpoly: not square");
    size_t n = r_;
    std::vector<mpz_class> c(n + 1);
    c[n] = 1;
    ZMat N = *this;          // N_1 = A
    mpz_class ck = -N.trace();
    if (n >= 1) c[n - 1] = ck;
    for (size_t k = 2; k <= n; ++k) {
        ZMat M = N;
        for (size_t i = 0; i < n; ++i) M.at(i, i) += ck;
        N = (*this) * M;
        mpz_class t = N.trace();
        mpz_class q;
        mpz_class kk(static_cast<unsigned long>(k));
        mpz_class num = -t;
        if (!mpz_divisible_p(num.get_mpz_t(), kk.get_mpz_t()))
            throw std::logic_error("charpoly: non-exact division");
        mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), kk.get_mpz_t());
        ck = q;
        c[n - k] = ck;
    }
    return c;
}

namespace {

// One in-place column HNF pass. cols is a list of column vectors (size n).
// If U != nullptr, the same column operations are applied to U's columns.
void hnf_engine(size_t n, std::vector<std::vector<mpz_class>>& cols,
                std::vector<std::vector<mpz_class>>* ucols) {
    size_t k = cols.size();
    auto colop_sub = [&](size_t dst, size_t src, const mpz_class& q) {
        for (size_t i = 0; i < n; ++i) cols[dst][i] -= q * cols[src][i];
        if (ucols) {
            auto& U = *ucols;
            for (size_t i = 0; i < U[dst].size(); ++i) U[dst][i] -= q * U[src][i];
        }
    };
    auto colswap = [&](size_t a, size_t b) {
        std::swap(cols[a], cols[b]);
        if (ucols) std::swap((*ucols)[a], (*ucols)[b]);
    };
    auto colneg = [&](size_t a) {
        for (size_t i = 0; i < n; ++i) cols[a][i] = -cols[a][i];
        if (ucols) for (auto& x : (*ucols)[a]) x = -x;
    };

    // pivot for row r lives in column index r among the first (r+1) columns;
    // process rows bottom-up so every column's lowest nonzero entry is its pivot.
    if (k < n) throw std::invalid_argument("hnf: too few columns");
    size_t active = k;   // columns [0, active) still unassigned
    for (size_t r = n; r-- > 0;) {
        // Euclidean gcd of row-r entries of columns [0, active)
        while (true) {
            size_t nz = active;
            for (size_t j = 0; j < active; ++j)
                if (cols[j][r] != 0) { nz = j; break; }
            if (nz == active) throw std::invalid_argument("hnf: rank deficient");
            // find column with smallest nonzero |entry|
            size_t best = nz;
            for (size_t j = nz + 1; j < active; ++j)
                if (cols[j][r] != 0 &&
                    cmp(abs(cols[j][r]), abs(cols[best][r])) < 0) best = j;
            colswap(best, active - 1);
            bool done = true;
            for (size_t j = 0; j + 1 < active; ++j) {
                if (cols[j][r] == 0) continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), cols[j][r].get_mpz_t(), cols[active - 1][r].get_mpz_t());
                colop_sub(j, active - 1, q);
                if (cols[j][r] != 0) done = false;
            }
            if (done) break;
        }
        if (cols[active - 1][r] < 0) colneg(active - 1);
        --active;
    }
    // row r's pivot column ended at index (k - n) + r. Reduce the off-diagonal
    // entries; descending rows so earlier reductions are not disturbed
    // (column r only has support on rows <= r).
    size_t base = k - n;
    for (size_t r = n; r-- > 0;) {
        for (size_t j = r + 1; j < n; ++j) {
            mpz_class q;
            mpz_fdiv_q(q.get_mpz_t(), cols[base + j][r].get_mpz_t(), cols[base + r][r].get_mpz_t());
            if (q != 0) colop_sub(base + j, base + r, q);
        }
    }
}

} // namespace

ZMat hnf_cols(const ZMat& M) {
    size_t n = M.rows(), k = M.cols();
    std::vector<std::vector<mpz_class>> cols(k, std::vector<mpz_class>(n));
    for (size_t j = 0; j < k; ++j)
        for (size_t i = 0; i < n; ++i) cols[j][i] = M.at(i, j);
    hnf_engine(n, cols, nullptr);
    ZMat H(n, n);
    size_t base = k - n;
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < n; ++i) H.at(i, j) = cols[base + j][i];
    return H;
}

void hnf_cols_transform(const ZMat& M, ZMat& H, ZMat& U) {
    size_t n = M.rows(), k = M.cols();
    std::vector<std::vector<mpz_class>> cols(k, std::vector<mpz_class>(n));
    std::vector<std::vector<mpz_class>> ucols(k, std::vector<mpz_class>(k));
    for (size_t j = 0; j < k; ++j) {
        ucols[j][j] = 1;
        for (size_t i = 0; i < n; ++i) cols[j][i] = M.at(i, j);
    }
    hnf_engine(n, cols, &ucols);
    H = ZMat(n, n);
    U = ZMat(k, n);
    size_t base = k - n;
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < n; ++i) H.at(i, j) = cols[base + j][i];
    for (size_t j = 0; j < n; ++j)
        for (size_t i = 0; i < k; ++i) U.at(i, j) = ucols[base + j][i];
}

ZMat hnf_cols_kernel(const ZMat& M) {
    size_t n = M.rows(), k = M.cols();
    std::vector<std::vector<mpz_class>> cols(k, std::vector<mpz_class>(n));
    std::vector<std::vector<mpz_class>> ucols(k, std::vector<mpz_class>(k));
    for (size_t j = 0; j < k; ++j) {
        ucols[j][j] = 1;
        for (size_t i = 0; i < n; ++i) cols[j][i] = M.at(i, j);
    }
    hnf_engine(n, cols, &ucols);
    // the first k - n columns were zeroed by unimodular operations; their
    // transform columns span the kernel lattice exactly
    ZMat Kr(k, k - n);
    for (size_t j = 0; j + n < k; ++j) {
        for (size_t i = 0; i < n; ++i)
            if (cols[j][i] != 0) throw std::logic_error("hnf_cols_kernel: nonzero residual column");
        for (size_t i = 0; i < k; ++i) Kr.at(i, j) = ucols[j][i];
    }
    return Kr;
}

std::vector<mpz_class> hnf_reduce(const ZMat& H, std::vector<mpz_class> v) {
    size_t n = H.rows();
    for (size_t i = n; i-- > 0;) {
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), v[i].get_mpz_t(), H.at(i, i).get_mpz_t());
        if (q != 0)
            for (size_t r = 0; r <= i; ++r) v[r] -= q * H.at(r, i);
    }
    return v;
}

bool hnf_member(const ZMat& H, std::vector<mpz_class> v) {
    size_t n = H.rows();
    for (size_t i = n; i-- > 0;) {
        if (!mpz_divisible_p(v[i].get_mpz_t(), H.at(i, i).get_mpz_t())) return false;
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), v[i].get_mpz_t(), H.at(i, i).get_mpz_t());
        for (size_t r = 0; r <= i; ++r) v[r] -= q * H.at(r, i);
    }
    for (auto& x : v)
        if (x != 0) return false;
    return true;
}

bool hnf_solve(const ZMat& H, std::vector<mpz_class> v, std::vector<mpz_class>& x) {
    size_t n = H.rows();
    x.assign(n, 0);
    for (size_t i = n; i-- > 0;) {
        if (!mpz_divisible_p(v[i].get_mpz_t(), H.at(i, i).get_mpz_t())) return false;
        mpz_class q;
        mpz_divexact(q.get_mpz_t(), v[i].get_mpz_t(), H.at(i, i).get_mpz_t());
        x[i] = q;
        for (size_t r = 0; r <= i; ++r) v[r] -= q * H.at(r, i);
    }
    for (auto& e : v)
        if (e != 0) return false;
    return true;
}

SmithForm smith_form(const ZMat& R) {
    size_t m = R.rows(), n = R.cols();
    ZMat A = R;
    ZMat U = ZMat::identity(m), Uinv = ZMat::identity(m);

    auto rowswap = [&](size_t a, size_t b) {
        for (size_t j = 0; j < n; ++j) std::swap(A.at(a, j), A.at(b, j));
        for (size_t j = 0; j < m; ++j) std::swap(U.at(a, j), U.at(b, j));
        for (size_t i = 0; i < m; ++i) std::swap(Uinv.at(i, a), Uinv.at(i, b));
    };
    auto rowsub = [&](size_t dst, size_t src, const mpz_class& q) {
        // row_dst -= q*row_src ; Uinv col_src += q*col_dst
        for (size_t j = 0; j < n; ++j) A.at(dst, j) -= q * A.at(src, j);
        for (size_t j = 0; j < m; ++j) U.at(dst, j) -= q * U.at(src, j);
        for (size_t i = 0; i < m; ++i) Uinv.at(i, src) += q * Uinv.at(i, dst);
    };
    auto rowneg = [&](size_t a) {
        for (size_t j = 0; j < n; ++j) A.at(a, j) = -A.at(a, j);
        for (size_t j = 0; j < m; ++j) U.at(a, j) = -U.at(a, j);
        for (size_t i = 0; i < m; ++i) Uinv.at(i, a) = -Uinv.at(i, a);
    };
    auto colswap = [&](size_t a, size_t b) {
        for (size_t i = 0; i < m; ++i) std::swap(A.at(i, a), A.at(i, b));
    };
    auto colsub = [&](size_t dst, size_t src, const mpz_class& q) {
        for (size_t i = 0; i < m; ++i) A.at(i, dst) -= q * A.at(i, src);
    };

    size_t t = std::min(m, n);
    for (size_t k = 0; k < t; ++k) {
        while (true) {
            // find a nonzero pivot in the trailing block
            size_t pi = m, pj = n;
            for (size_t i = k; i < m && pi == m; ++i)
                for (size_t j = k; j < n; ++j)
                    if (A.at(i, j) != 0) { pi = i; pj = j; break; }
            if (pi == m) goto finished;  // trailing block all zero
            // smallest |entry| pivot for speed
            for (size_t i = k; i < m; ++i)
                for (size_t j = k; j < n; ++j)
                    if (A.at(i, j) != 0 && cmp(abs(A.at(i, j)), abs(A.at(pi, pj))) < 0) { pi = i; pj = j; }
            if (pi != k) rowswap(pi, k);
            if (pj != k) colswap(pj, k);
            bool clean = true;
            for (size_t i = k + 1; i < m; ++i) {
                if (A.at(i, k) == 0) continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(i, k).get_mpz_t(), A.at(k, k).get_mpz_t());
                rowsub(i, k, q);
                if (A.at(i, k) != 0) clean = false;
            }
            for (size_t j = k + 1; j < n; ++j) {
                if (A.at(k, j) == 0) continue;
                mpz_class q;
                mpz_fdiv_q(q.get_mpz_t(), A.at(k, j).get_mpz_t(), A.at(k, k).get_mpz_t());
                colsub(j, k, q);
                if (A.at(k, j) != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility: pivot must divide every entry of the trailing block
            bool fixed = false;
            for (size_t i = k + 1; i < m && !fixed; ++i)
                for (size_t j = k + 1; j < n && !fixed; ++j)
                    if (!mpz_divisible_p(A.at(i, j).get_mpz_t(), A.at(k, k).get_mpz_t())) {
                        // mix row i into row k and restart elimination at k
                        rowsub(k, i, mpz_class(-1));
                        fixed = true;
                    }
            if (!fixed) break;
        }
        if (A.at(k, k) < 0) rowneg(k);
    }
finished:
    SmithForm sf;
    sf.diag.resize(t);
    for (size_t k = 0; k < t; ++k) sf.diag[k] = A.at(k, k) >= 0 ? A.at(k, k) : mpz_class(-A.at(k, k));
    sf.U = std::move(U);
    sf.Uinv = std::move(Uinv);
    return sf;
}

QMat QMat::identity(size_t n) {
    QMat m(n, n);
    for (size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

QMat QMat::operator*(const QMat& o) const {
    if (c_ != o.r_) throw std::invalid_argument("QMat: size mismatch");
    QMat m(r_, o.c_);
    for (size_t i = 0; i < r_; ++i)
        for (size_t k = 0; k < c_; ++k) {
            if (at(i, k) == 0) continue;
            for (size_t j = 0; j < o.c_; ++j)
                m.at(i, j) += at(i, k) * o.at(k, j);
        }
    return m;
}

std::vector<mpq_class> QMat::apply(const std::vector<mpq_class>& v) const {
    std::vector<mpq_class> out(r_);
    for (size_t i = 0; i < r_; ++i)
        for (size_t j = 0; j < c_; ++j)
            if (at(i, j) != 0) out[i] += at(i, j) * v[j];
    return out;
}

QMat QMat::inverse() const {
    if (r_ != c_) throw std::invalid_argument("QMat: not square");
    size_t n = r_;
    QMat a = *this, inv = identity(n);
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        while (piv < n && a.at(piv, k) == 0) ++piv;
        if (piv == n) throw std::runtime_error("QMat: singular");
        if (piv != k)
            for (size_t j = 0; j < n; ++j) {
                std::swap(a.at(k, j), a.at(piv, j));
                std::swap(inv.at(k, j), inv.at(piv, j));
            }
        mpq_class d = a.at(k, k);
        for (size_t j = 0; j < n; ++j) { a.at(k, j) /= d; inv.at(k, j) /= d; }
        for (size_t i = 0; i < n; ++i) {
            if (i == k || a.at(i, k) == 0) continue;
            mpq_class f = a.at(i, k);
            for (size_t j = 0; j < n; ++j) {
                a.at(i, j) -= f * a.at(k, j);
                inv.at(i, j) -= f * inv.at(k, j);
            }
        }
    }
    return inv;
}

mpq_class QMat::det() const {
    if (r_ != c_) throw std::invalid_argument("QMat: not square");
    size_t n = r_;
    QMat a = *this;
    mpq_class d = 1;
    for (size_t k = 0; k < n; ++k) {
        size_t piv = k;
        while (piv < n && a.at(piv, k) == 0) ++piv;
        if (piv == n) return 0;
        if (piv != k) {
            for (size_t j = 0; j < n; ++j) std::swap(a.at(k, j), a.at(piv, j));
            d = -d;
        }
        d *= a.at(k, k);
        for (size_t i = k + 1; i < n; ++i) {
            if (a.at(i, k) == 0) continue;
            mpq_class f = a.at(i, k) / a.at(k, k);
            for (size_t j = k; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
        }
    }
    return d;
}

} // namespace k3hecke
