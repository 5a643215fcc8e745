#include "k3hecke/numfield.hpp"
#include "k3hecke/ffarith.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef K3HECKE_DATA_DIR
#define K3HECKE_DATA_DIR "data"
#endif

namespace k3hecke {
namespace numfield {

// ---------------------------------------------------------------- elements

bool NFElement::is_integral() const {
    for (auto& x : c)
        if (x.get_den() != 1) return false;
    return true;
}

bool NFElement::is_zero() const {
    for (auto& x : c)
        if (x != 0) return false;
    return true;
}

std::vector<mpz_class> NFElement::int_coords() const {
    std::vector<mpz_class> out;
    out.reserve(DEG);
    for (auto& x : c) {
        if (x.get_den() != 1) throw std::runtime_error("NFElement: not integral");
        out.push_back(x.get_num());
    }
    return out;
}

std::string NFElement::str() const {
    std::ostringstream os;
    os << "[";
    for (int i = 0; i < DEG; ++i) os << (i ? " " : "") << c[i].get_str();
    os << "]";
    return os.str();
}

bool IdealHNF::contains(const IdealHNF& other) const {
    for (size_t j = 0; j < other.H.cols(); ++j) {
        std::vector<mpz_class> col(DEG);
        for (int i = 0; i < DEG; ++i) col[i] = other.H.at(i, j);
        if (!hnf_member(H, col)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- field arithmetic

NFElement FieldData::one() const {
    // coordinates of 1 on the integral basis
    std::vector<mpq_class> pc(DEG);
    pc[0] = 1;
    return from_power_basis(pc);
}

NFElement FieldData::from_int(long v) const {
    NFElement r = one();
    for (auto& x : r.c) x *= v;
    return r;
}

NFElement FieldData::theta() const {
    std::vector<mpq_class> pc(DEG);
    pc[1] = 1;
    return from_power_basis(pc);
}

NFElement FieldData::add(const NFElement& a, const NFElement& b) const {
    NFElement r;
    for (int i = 0; i < DEG; ++i) r.c[i] = a.c[i] + b.c[i];
    return r;
}

NFElement FieldData::sub(const NFElement& a, const NFElement& b) const {
    NFElement r;
    for (int i = 0; i < DEG; ++i) r.c[i] = a.c[i] - b.c[i];
    return r;
}

NFElement FieldData::neg(const NFElement& a) const {
    NFElement r;
    for (int i = 0; i < DEG; ++i) r.c[i] = -a.c[i];
    return r;
}

NFElement FieldData::mul(const NFElement& a, const NFElement& b) const {
    NFElement r;
    for (int i = 0; i < DEG; ++i) {
        if (a.c[i] == 0) continue;
        for (int j = 0; j < DEG; ++j) {
            if (b.c[j] == 0) continue;
            mpq_class prod = a.c[i] * b.c[j];
            for (int k = 0; k < DEG; ++k) {
                const mpz_class& t = mtab(i, j, k);
                if (t != 0) r.c[k] += prod * t;
            }
        }
    }
    return r;
}

NFElement FieldData::mul_int(const NFElement& a, const mpz_class& s) const {
    NFElement r;
    for (int i = 0; i < DEG; ++i) r.c[i] = a.c[i] * s;
    return r;
}

NFElement FieldData::pow(const NFElement& a, unsigned long e) const {
    NFElement r = one();
    NFElement b = a;
    while (e) {
        if (e & 1) r = mul(r, b);
        e >>= 1;
        if (e) b = mul(b, b);
    }
    return r;
}

NFElement FieldData::inverse(const NFElement& a) const {
    QMat M(DEG, DEG);
    for (int j = 0; j < DEG; ++j) {
        NFElement bj;
        bj.c[j] = 1;
        NFElement col = mul(a, bj);
        for (int i = 0; i < DEG; ++i) M.at(i, j) = col.c[i];
    }
    QMat inv = M.inverse();
    return NFElement(inv.apply(one().c));
}

mpq_class FieldData::norm(const NFElement& a) const {
    QMat M(DEG, DEG);
    for (int j = 0; j < DEG; ++j) {
        NFElement bj;
        bj.c[j] = 1;
        NFElement col = mul(a, bj);
        for (int i = 0; i < DEG; ++i) M.at(i, j) = col.c[i];
    }
    return M.det();
}

mpq_class FieldData::trace(const NFElement& a) const {
    mpq_class t = 0;
    for (int j = 0; j < DEG; ++j) {
        NFElement bj;
        bj.c[j] = 1;
        NFElement col = mul(a, bj);
        t += col.c[j];
    }
    return t;
}

ZMat FieldData::mult_matrix_int(const std::vector<mpz_class>& coords) const {
    ZMat M(DEG, DEG);
    for (int i = 0; i < DEG; ++i) {
        if (coords[i] == 0) continue;
        for (int j = 0; j < DEG; ++j)
            for (int k = 0; k < DEG; ++k) {
                const mpz_class& t = mtab(i, j, k);
                if (t != 0) M.at(k, j) += coords[i] * t;
            }
    }
    return M;
}

std::vector<mpq_class> FieldData::to_power_basis(const NFElement& a) const {
    return basis.apply(a.c);
}

NFElement FieldData::from_power_basis(const std::vector<mpq_class>& pc) const {
    return NFElement(basis_inv_.apply(pc));
}

std::vector<mpq_class> FieldData::power_mul(const std::vector<mpq_class>& a,
                                            const std::vector<mpq_class>& b) const {
    std::vector<mpq_class> prod(2 * DEG - 1);
    for (int i = 0; i < DEG; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < DEG; ++j)
            if (b[j] != 0) prod[i + j] += a[i] * b[j];
    }
    // reduce modulo the monic defining polynomial
    for (int k = 2 * DEG - 2; k >= DEG; --k) {
        if (prod[k] == 0) continue;
        mpq_class t = prod[k];
        prod[k] = 0;
        for (int j = 0; j < DEG; ++j)
            prod[k - DEG + j] -= t * poly[j];
    }
    prod.resize(DEG);
    return prod;
}

// ---------------------------------------------------------------- ideals

IdealHNF FieldData::ideal_from_columns(const ZMat& cols) const {
    IdealHNF I;
    I.H = hnf_cols(cols);
    I.norm = 1;
    for (int i = 0; i < DEG; ++i) I.norm *= I.H.at(i, i);
    return I;
}

IdealHNF FieldData::ideal_principal(const NFElement& a) const {
    return ideal_from_columns(mult_matrix_int(a.int_coords()));
}

IdealHNF FieldData::ideal_two_gen(long p, const std::vector<mpz_class>& gen2) const {
    ZMat cols(DEG, 12);
    for (int i = 0; i < DEG; ++i) cols.at(i, i) = p;
    ZMat M = mult_matrix_int(gen2);
    for (int i = 0; i < DEG; ++i)
        for (int j = 0; j < DEG; ++j) cols.at(i, 6 + j) = M.at(i, j);
    return ideal_from_columns(cols);
}

IdealHNF FieldData::ideal_mul(const IdealHNF& a, const IdealHNF& b) const {
    ZMat cols(DEG, 36);
    int col = 0;
    for (int i = 0; i < DEG; ++i) {
        std::vector<mpz_class> ai(DEG);
        for (int r = 0; r < DEG; ++r) ai[r] = a.H.at(r, i);
        ZMat Mi = mult_matrix_int(ai);
        for (int j = 0; j < DEG; ++j) {
            for (int r = 0; r < DEG; ++r) {
                mpz_class acc = 0;
                for (int s = 0; s < DEG; ++s) acc += Mi.at(r, s) * b.H.at(s, j);
                cols.at(r, col) = acc;
            }
            ++col;
        }
    }
    return ideal_from_columns(cols);
}

IdealHNF FieldData::ideal_pow(const IdealHNF& a, unsigned long e) const {
    IdealHNF r = ideal_one();
    IdealHNF b = a;
    while (e) {
        if (e & 1) r = ideal_mul(r, b);
        e >>= 1;
        if (e) b = ideal_mul(b, b);
    }
    return r;
}

IdealHNF FieldData::ideal_one() const {
    IdealHNF I;
    I.H = ZMat::identity(DEG);
    I.norm = 1;
    return I;
}

// ---------------------------------------------------------------- Galois

NFElement FieldData::galois_apply(int k, const NFElement& a) const {
    const ZMat& S = sigma_matrix(k);
    NFElement r;
    for (int i = 0; i < DEG; ++i)
        for (int j = 0; j < DEG; ++j)
            if (S.at(i, j) != 0) r.c[i] += mpq_class(S.at(i, j)) * a.c[j];
    return r;
}

PrimeIdeal FieldData::galois_apply(int k, const PrimeIdeal& P) const {
    NFElement g;
    for (int i = 0; i < DEG; ++i) g.c[i] = P.gen2[i];
    NFElement img = galois_apply(k, g);
    IdealHNF I = ideal_two_gen(P.p, img.int_coords());
    for (const PrimeIdeal& Q : split_cached(P.p))
        if (Q.hnf == I) return Q;
    throw std::logic_error("galois_apply: image prime not found among primes above p");
}

// ---------------------------------------------------------------- embeddings

const std::vector<Cplx>& FieldData::roots(long digits) const {
    auto it = root_cache_.lower_bound(digits);
    if (it != root_cache_.end()) return it->second;
    long prec = digits_to_bits(digits);
    std::vector<Cplx> raw = complex_roots(poly, prec);
    // group into conjugate pairs, positive imaginary part first
    std::vector<int> used(6, 0);
    std::vector<std::pair<Cplx, Cplx>> pairs;
    for (int i = 0; i < 6; ++i) {
        if (used[i] || raw[i].im.sign() <= 0) continue;
        // find the conjugate partner
        int best = -1;
        double bd = 1e300;
        for (int j = 0; j < 6; ++j) {
            if (j == i || used[j]) continue;
            double d = (raw[j] - raw[i].conj()).abs().to_double();
            if (d < bd) { bd = d; best = j; }
        }
        if (best < 0 || raw[best].im.sign() >= 0)
            throw std::runtime_error("roots: conjugate pairing failed (field not totally imaginary?)");
        used[i] = used[best] = 1;
        pairs.emplace_back(raw[i], raw[best]);
    }
    if (pairs.size() != 3) throw std::runtime_error("roots: expected 3 conjugate pairs");
    // canonical order: increasing real part, ties broken by the imaginary
    // part of the positive-imaginary representative
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
        double ra = a.first.re.to_double(), rb = b.first.re.to_double();
        if (std::abs(ra - rb) > 1e-9) return ra < rb;
        return a.first.im.to_double() < b.first.im.to_double();
    });
    for (int i = 0; i + 1 < 3; ++i) {
        double dre = std::abs(pairs[i + 1].first.re.to_double() - pairs[i].first.re.to_double());
        double dim = std::abs(pairs[i + 1].first.im.to_double() - pairs[i].first.im.to_double());
        if (dre < 1e-6 && dim < 1e-6)
            throw std::runtime_error("roots: pairs not separated");
    }
    std::vector<Cplx> out;
    for (auto& [a, b] : pairs) { out.push_back(a); out.push_back(b); }
    return root_cache_.emplace(digits, std::move(out)).first->second;
}

std::vector<Cplx> FieldData::embed(const NFElement& a, long digits) const {
    auto eval_at = [&](long d) {
        const std::vector<Cplx>& rts = roots(d);
        long prec = digits_to_bits(d);
        std::vector<mpq_class> pc = to_power_basis(a);
        std::vector<Cplx> vals;
        vals.reserve(6);
        for (auto& r : rts) {
            Cplx acc(prec);
            for (int k = DEG; k-- > 0;) {
                acc = acc * r;
                acc.re = acc.re + Real::from(pc[k], prec);
            }
            vals.push_back(acc);
        }
        return vals;
    };
    long d = digits;
    std::vector<Cplx> lo = eval_at(d);
    while (true) {
        long d2 = 2 * d;
        if (d2 > 4000) throw std::runtime_error("embed: precision unreachable");
        std::vector<Cplx> hi = eval_at(d2);
        bool ok = true;
        Real tol = Real::pow2(-static_cast<long>(digits * 3.33), 64);
        for (int i = 0; i < 6 && ok; ++i) {
            Real diff = (hi[i] - lo[i]).abs();
            Real scale = hi[i].abs() + Real::from(1L, 64);
            if (!(diff < tol * scale)) ok = false;
        }
        if (ok) return hi;
        lo = std::move(hi);
        d = d2;
    }
}

std::array<Cplx, 3> FieldData::embed_pairs(const NFElement& a, long digits) const {
    std::vector<Cplx> v = embed(a, digits);
    return {v[0], v[2], v[4]};
}

double FieldData::generator_t2_bound(const mpz_class& ideal_norm) const {
    double n = mpz_get_d(ideal_norm.get_mpz_t());
    return 6.0 * std::exp(2.0 * unit_log_cover_) * std::cbrt(n) * 1.25 + 1.0;
}

const std::vector<PrimeIdeal>& FieldData::split_cached(long p) const {
    auto it = split_cache_.find(p);
    if (it != split_cache_.end()) return it->second;
    std::vector<PrimeIdeal> out;
    auto st = stored_splits.find(p);
    if (st != stored_splits.end()) {
        out = st->second;
    } else {
        auto factors = ffarith::factor_poly_mod_p(poly, static_cast<uint64_t>(p));
        int idx = 0;
        for (auto& [fp, mult] : factors) {
            PrimeIdeal P;
            P.p = p;
            P.e = mult;
            P.f = static_cast<int>(fp.size()) - 1;
            // evaluate the lifted factor at theta
            NFElement acc = zero();
            NFElement th = theta();
            for (size_t k = fp.size(); k-- > 0;) {
                acc = mul(acc, th);
                acc = add(acc, from_int(static_cast<long>(fp[k])));
            }
            P.gen2 = acc.int_coords();
            P.index = idx++;
            P.hnf = ideal_two_gen(p, P.gen2);
            out.push_back(std::move(P));
        }
    }
    // always-on sanity: norms and the product identity
    mpz_class pz(p), total = 1;
    int sum_ef = 0;
    IdealHNF prod = ideal_one();
    for (auto& P : out) {
        mpz_class pf;
        mpz_pow_ui(pf.get_mpz_t(), pz.get_mpz_t(), P.f);
        if (P.hnf.norm != pf) throw std::runtime_error("split_prime: norm check failed");
        sum_ef += P.e * P.f;
        prod = ideal_mul(prod, ideal_pow(P.hnf, P.e));
    }
    if (sum_ef != DEG) throw std::runtime_error("split_prime: sum of e*f != 6");
    IdealHNF pideal = ideal_principal(from_int(p));
    if (!(prod == pideal)) throw std::runtime_error("split_prime: product of primes != (p)");
    return split_cache_.emplace(p, std::move(out)).first->second;
}

std::vector<PrimeIdeal> split_prime(const FieldData& K, long p) { return K.split_cached(p); }

std::set<long> index_primes(const FieldData& K) {
    std::set<long> out;
    for (auto& [p, v] : K.stored_splits) out.insert(p);
    return out;
}

// ---------------------------------------------------------------- principal generators

namespace {

struct EnumState {
    const FieldData* K;
    std::vector<std::vector<mpz_class>> basis_vecs;   // reduced lattice basis, integer coords
    std::vector<std::array<double, 6>> basis_emb;     // embedding rows
    mpz_class target_norm;
    double radius2;
    long long nodes = 0;
    NFElement result;
    bool found = false;
    bool collect_all = false;
    size_t max_hits = 0;
    std::vector<NFElement> hits;
};

// LLL on the rows of a 6x6 double matrix; U tracks the integer transform.
void lll_reduce_rows(std::array<std::array<double, 6>, 6>& b, std::array<std::array<long, 6>, 6>& U) {
    const double delta = 0.99;
    auto dot = [](const std::array<double, 6>& x, const std::array<double, 6>& y) {
        double s = 0;
        for (int i = 0; i < 6; ++i) s += x[i] * y[i];
        return s;
    };
    std::array<std::array<double, 6>, 6> bs;   // Gram-Schmidt vectors
    std::array<std::array<double, 6>, 6> mu{};
    std::array<double, 6> B;
    auto gso = [&]() {
        for (int i = 0; i < 6; ++i) {
            bs[i] = b[i];
            for (int j = 0; j < i; ++j) {
                mu[i][j] = dot(b[i], bs[j]) / B[j];
                for (int t = 0; t < 6; ++t) bs[i][t] -= mu[i][j] * bs[j][t];
            }
            B[i] = dot(bs[i], bs[i]);
        }
    };
    gso();
    int k = 1;
    int guard = 0;
    while (k < 6 && ++guard < 10000) {
        for (int j = k - 1; j >= 0; --j) {
            long q = std::lround(mu[k][j]);
            if (q != 0) {
                for (int t = 0; t < 6; ++t) {
                    b[k][t] -= q * b[j][t];
                    U[k][t] -= q * U[j][t];
                }
                gso();
            }
        }
        if (B[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * B[k - 1]) {
            ++k;
        } else {
            std::swap(b[k], b[k - 1]);
            std::swap(U[k], U[k - 1]);
            gso();
            k = std::max(k - 1, 1);
        }
    }
}

// Fincke-Pohst over the Gram matrix of the reduced basis.
void enumerate(EnumState& st) {
    // Cholesky: Q(x) = sum_i q_ii (x_i + sum_{j>i} q_ij x_j)^2
    double q[6][6];
    {
        double g[6][6];
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) {
                double s = 0;
                for (int t = 0; t < 6; ++t) s += st.basis_emb[i][t] * st.basis_emb[j][t];
                g[i][j] = s;
            }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) q[i][j] = g[i][j];
        for (int i = 0; i < 6; ++i) {
            for (int j = i + 1; j < 6; ++j) {
                q[j][i] = q[i][j];
                q[i][j] /= q[i][i];
            }
            for (int k2 = i + 1; k2 < 6; ++k2)
                for (int l = k2; l < 6; ++l) q[k2][l] -= q[k2][i] * q[i][l];
        }
    }

    std::array<long, 6> x{};
    std::array<double, 6> partial{};   // accumulated quadratic value above level i
    std::array<double, 6> center{};

    // recursive descent, deterministic order (increasing x_i from the lower bound)
    auto rec = [&](auto&& self, int level) -> void {
        if (st.found) return;
        if (++st.nodes > 50000000LL)
            throw BoundExhaustedError("principal_generator: enumeration budget exhausted");
        if (level < 0) {
            bool allzero = true;
            for (int i = 0; i < 6; ++i)
                if (x[i] != 0) { allzero = false; break; }
            if (allzero) return;
            // exact norm check
            std::vector<mpz_class> coords(6, 0);
            for (int i = 0; i < 6; ++i) {
                if (x[i] == 0) continue;
                for (int t = 0; t < 6; ++t) coords[t] += x[i] * st.basis_vecs[i][t];
            }
            ZMat M = st.K->mult_matrix_int(coords);
            mpz_class n = M.det_bareiss();
            if (n < 0) n = -n;
            if (n == st.target_norm) {
                NFElement g;
                for (int t = 0; t < 6; ++t) g.c[t] = coords[t];
                if (st.collect_all) {
                    st.hits.push_back(g);
                    if (st.hits.size() >= st.max_hits) st.found = true;
                } else {
                    st.result = g;
                    st.found = true;
                }
            }
            return;
        }
        double c = 0;
        for (int j = level + 1; j < 6; ++j) c += q[level][j] * x[j];
        center[level] = c;
        double room = st.radius2 - partial[level];
        if (room < 0) return;
        double half = std::sqrt(room / q[level][level]);
        long lo = static_cast<long>(std::ceil(-c - half - 1e-9));
        long hi = static_cast<long>(std::floor(-c + half + 1e-9));
        for (long v = lo; v <= hi && !st.found; ++v) {
            x[level] = v;
            double d = v + c;
            double val = partial[level] + q[level][level] * d * d;
            if (val > st.radius2 + 1e-9) continue;
            if (level > 0) partial[level - 1] = val;
            self(self, level - 1);
        }
        x[level] = 0;
    };
    partial[5] = 0;
    rec(rec, 5);
}

EnumState prepare_enum(const IdealHNF& I, const FieldData& K, double radius2) {
    // embed the HNF basis at double precision
    const std::vector<Cplx>& rts = K.roots(40);
    std::array<std::array<double, 6>, 6> emb;
    std::vector<std::vector<mpz_class>> cols(6, std::vector<mpz_class>(6));
    const double SQRT2 = std::sqrt(2.0);
    for (int j = 0; j < 6; ++j) {
        NFElement el;
        for (int i = 0; i < 6; ++i) {
            cols[j][i] = I.H.at(i, j);
            el.c[i] = cols[j][i];
        }
        std::vector<mpq_class> pc = K.to_power_basis(el);
        for (int pr = 0; pr < 3; ++pr) {
            const Cplx& r = rts[2 * pr];
            // Horner in double complex
            double re = 0, im = 0, rr = r.re.to_double(), ri = r.im.to_double();
            for (int k = DEG; k-- > 0;) {
                double nre = re * rr - im * ri + mpq_get_d(pc[k].get_mpq_t());
                im = re * ri + im * rr;
                re = nre;
            }
            emb[j][2 * pr] = SQRT2 * re;
            emb[j][2 * pr + 1] = SQRT2 * im;
        }
    }
    std::array<std::array<long, 6>, 6> U{};
    for (int i = 0; i < 6; ++i) U[i][i] = 1;
    lll_reduce_rows(emb, U);

    EnumState st;
    st.K = &K;
    st.target_norm = I.norm;
    st.radius2 = radius2;
    st.basis_vecs.resize(6, std::vector<mpz_class>(6, 0));
    st.basis_emb.resize(6);
    for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j)
            for (int t = 0; t < 6; ++t) st.basis_vecs[i][t] += U[i][j] * cols[j][t];
        st.basis_emb[i] = emb[i];
    }
    return st;
}

} // namespace

NFElement principal_generator(const IdealHNF& I, const FieldData& K) {
    // staged radii: generators usually sit near the balanced profile, so try
    // small balls first; only the final rigorous radius can certify failure
    double full = K.generator_t2_bound(I.norm);
    double balanced = 6.0 * std::cbrt(mpz_get_d(I.norm.get_mpz_t())) + 1.0;
    for (double r : {balanced * 4, balanced * 24, full}) {
        if (r > full) r = full;
        EnumState st = prepare_enum(I, K, r);
        enumerate(st);
        if (st.found) return st.result;
        if (r >= full) break;
    }
    throw NonPrincipalError("principal_generator: no generator within the unit-covering radius");
}

NFElement prime_generator(const FieldData& K, const PrimeIdeal& P) {
    // structural shortcuts before the generic enumeration
    if (P.e == 1 && P.f == 6) return K.from_int(P.p);
    if (P.e == 1 && P.f == 3 && P.p % 4 == 1) {
        // the prime is generated by a Gaussian prime a + b*zeta
        long a = 1;
        for (; a * a <= P.p; ++a) {
            long r = P.p - a * a;
            long s = static_cast<long>(std::lround(std::sqrt(static_cast<double>(r))));
            if (s * s == r) break;
        }
        long b = static_cast<long>(std::lround(std::sqrt(static_cast<double>(P.p - a * a))));
        for (long bb : {b, -b}) {
            NFElement pi = K.add(K.from_int(a), K.mul_int(K.zeta, bb));
            if (K.ideal_principal(pi) == P.hnf) return pi;
        }
    }
    return principal_generator(P.hnf, K);
}

std::vector<NFElement> enumerate_norm_elements(const IdealHNF& I, const FieldData& K,
                                               const mpz_class& target_norm,
                                               double t2_bound, size_t max_hits) {
    EnumState st = prepare_enum(I, K, t2_bound);
    st.target_norm = target_norm;
    st.collect_all = true;
    st.max_hits = max_hits;
    enumerate(st);
    return st.hits;
}

// ---------------------------------------------------------------- cubic subfield

std::vector<std::pair<int, int>> cubic_subfield_split(const FieldData& K, long p) {
    auto it = K.cubic_stored.find(p);
    if (it != K.cubic_stored.end()) return it->second;
    auto factors = ffarith::factor_poly_mod_p(K.cubic_poly, static_cast<uint64_t>(p));
    std::vector<std::pair<int, int>> out;
    int total = 0;
    for (auto& [fp, mult] : factors) {
        int f = static_cast<int>(fp.size()) - 1;
        out.emplace_back(mult, f);
        total += mult * f;
    }
    if (total != 3) throw std::logic_error("cubic_subfield_split: sum of e*f != 3");
    return out;
}

// ---------------------------------------------------------------- setup & checks

void FieldData::finalize() {
    basis_inv_ = basis.inverse();
    // multiplication table
    mult_table_.assign(DEG * DEG * DEG, 0);
    for (int i = 0; i < DEG; ++i) {
        std::vector<mpq_class> bi(DEG);
        for (int r = 0; r < DEG; ++r) bi[r] = basis.at(r, i);
        for (int j = 0; j < DEG; ++j) {
            std::vector<mpq_class> bj(DEG);
            for (int r = 0; r < DEG; ++r) bj[r] = basis.at(r, j);
            std::vector<mpq_class> prod = power_mul(bi, bj);
            std::vector<mpq_class> coords = basis_inv_.apply(prod);
            for (int k = 0; k < DEG; ++k) {
                if (coords[k].get_den() != 1)
                    throw std::runtime_error("field data: basis not multiplicatively closed");
                mult_table_[(i * DEG + j) * DEG + k] = coords[k].get_num();
            }
        }
    }
    // sigma as a matrix on the power basis, then on the integral basis
    QMat spow(DEG, DEG);
    std::vector<mpq_class> cur(DEG);
    cur[0] = 1;
    for (int k = 0; k < DEG; ++k) {
        for (int r = 0; r < DEG; ++r) spow.at(r, k) = cur[r];
        if (k + 1 < DEG) cur = power_mul(cur, sigma_theta);
    }
    QMat sint = basis_inv_ * (spow * basis);
    sigma_mats_[0] = ZMat::identity(DEG);
    ZMat S1(DEG, DEG);
    for (int i = 0; i < DEG; ++i)
        for (int j = 0; j < DEG; ++j) {
            if (sint.at(i, j).get_den() != 1)
                throw std::runtime_error("field data: sigma does not preserve the integral basis");
            S1.at(i, j) = sint.at(i, j).get_num();
        }
    sigma_mats_[1] = S1;
    for (int k = 2; k < 6; ++k) sigma_mats_[k] = sigma_mats_[k - 1] * S1;

    // embedding permutation induced by sigma
    {
        const std::vector<Cplx>& rts = roots(50);
        long prec = digits_to_bits(50);
        for (int s = 0; s < 6; ++s) {
            // value of sigma(theta) at root s
            Cplx acc(prec);
            for (int k = DEG; k-- > 0;) {
                acc = acc * rts[s];
                acc.re = acc.re + Real::from(sigma_theta[k], prec);
            }
            int best = -1;
            double bd = 1e300;
            for (int t = 0; t < 6; ++t) {
                double d = (acc - rts[t]).abs().to_double();
                if (d < bd) { bd = d; best = t; }
            }
            if (bd > 1e-20) throw std::runtime_error("field data: sigma image is not a root");
            sigma_perm_[s] = best;
        }
    }

    // unit-lattice covering radius bound (sup norm over the three pair slots):
    // Lagrange-reduce the two log vectors, then use half the longer diagonal
    // of the fundamental parallelogram as a Euclidean covering bound
    {
        auto logs = [&](const NFElement& u) {
            std::array<Cplx, 3> e = embed_pairs(u, 40);
            std::array<double, 3> l{};
            for (int i = 0; i < 3; ++i) l[i] = std::log(e[i].abs().to_double());
            return l;
        };
        auto l1 = logs(unit1), l2 = logs(unit2);
        auto dot = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
            return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
        };
        for (int iter = 0; iter < 64; ++iter) {
            if (dot(l1, l1) > dot(l2, l2)) std::swap(l1, l2);
            double mu = dot(l1, l2) / dot(l1, l1);
            long q = std::lround(mu);
            if (q == 0) break;
            for (int i = 0; i < 3; ++i) l2[i] -= q * l1[i];
        }
        // sup-norm covering radius over a sampled fundamental cell, plus a
        // grid-spacing margin; points are covered by one of the 25 nearby
        // lattice translates
        const int G = 64;
        double cover = 0;
        for (int a = 0; a <= G; ++a)
            for (int b = 0; b <= G; ++b) {
                double t[3];
                for (int i = 0; i < 3; ++i)
                    t[i] = (a / double(G)) * l1[i] + (b / double(G)) * l2[i];
                double best = 1e300;
                for (int u = -2; u <= 2; ++u)
                    for (int v = -2; v <= 2; ++v) {
                        double m = 0;
                        for (int i = 0; i < 3; ++i)
                            m = std::max(m, std::abs(t[i] - u * l1[i] - v * l2[i]));
                        best = std::min(best, m);
                    }
                cover = std::max(cover, best);
            }
        double spacing = (std::sqrt(dot(l1, l1)) + std::sqrt(dot(l2, l2))) / G;
        unit_log_cover_ = cover + spacing + 0.01;
    }
}

void FieldData::run_load_checks() {
    // defining polynomial: monic degree 6, irreducible (inert-prime certificate)
    if (zx::degree(poly) != DEG || poly[DEG] != 1)
        throw std::runtime_error("field data: defining polynomial must be monic of degree 6");
    {
        mpz_class pd = zx::discriminant(poly);
        bool certified = false;
        for (long p = 3; p < 2000 && !certified; p += 2) {
            if (!ffarith::is_prime_u64(p)) continue;
            if (mpz_divisible_ui_p(pd.get_mpz_t(), p)) continue;
            auto f = ffarith::factor_poly_mod_p(poly, p);
            if (f.size() == 1 && f[0].mult == 1) certified = true;
        }
        if (!certified) throw std::runtime_error("field data: could not certify irreducibility");
    }
    // 1 lies in the basis span with integer coordinates
    if (!one().is_integral()) throw std::runtime_error("field data: 1 not integral on the basis");
    // discriminant of the basis matches the label
    {
        ZMat gram(DEG, DEG);
        for (int i = 0; i < DEG; ++i)
            for (int j = 0; j < DEG; ++j) {
                NFElement bi, bj;
                bi.c[i] = 1;
                bj.c[j] = 1;
                mpq_class t = trace(mul(bi, bj));
                if (t.get_den() != 1) throw std::runtime_error("field data: non-integral trace pairing");
                gram.at(i, j) = t.get_num();
            }
        mpz_class d = gram.det_bareiss();
        if (d != absdisc && d != -absdisc)
            throw std::runtime_error("field data: basis discriminant does not match the label");
    }
    // sigma has exact order 6 and sigma^3 is complex conjugation
    {
        if (!(sigma_mats_[1] * sigma_mats_[5] == ZMat::identity(DEG)))
            throw std::runtime_error("field data: sigma^6 != id");
        for (int k = 1; k < 6; ++k)
            if (sigma_mats_[k] == ZMat::identity(DEG))
                throw std::runtime_error("field data: sigma order < 6");
        // sigma^3 swaps each conjugate pair of embeddings
        std::array<int, 6> p3{};
        for (int s = 0; s < 6; ++s) p3[s] = sigma_perm_[sigma_perm_[sigma_perm_[s]]];
        for (int pr = 0; pr < 3; ++pr)
            if (p3[2 * pr] != 2 * pr + 1 || p3[2 * pr + 1] != 2 * pr)
                throw std::runtime_error("field data: sigma^3 is not complex conjugation");
    }
    // torsion
    {
        if (torsion_order < 2) throw std::runtime_error("field data: torsion order");
        NFElement z = zeta;
        NFElement acc = zeta;
        for (int k = 1; k < torsion_order; ++k) {
            if (acc == one()) throw std::runtime_error("field data: zeta order too small");
            acc = mul(acc, z);
        }
        if (!(acc == one())) throw std::runtime_error("field data: zeta^w != 1");
    }
    // units
    for (const NFElement* u : {&unit1, &unit2}) {
        mpq_class n = norm(*u);
        if (n != 1 && n != -1) throw std::runtime_error("field data: unit norm not +-1");
    }
    if (hasse_unit) {
        mpq_class n = norm(*hasse_unit);
        if (n != 1 && n != -1) throw std::runtime_error("field data: hasse unit norm not +-1");
    }
    {
        auto e1 = embed_pairs(unit1, 40), e2 = embed_pairs(unit2, 40);
        double a = std::log(e1[0].abs().to_double()), b = std::log(e1[1].abs().to_double());
        double c = std::log(e2[0].abs().to_double()), d = std::log(e2[1].abs().to_double());
        if (std::abs(a * d - b * c) < 1e-6)
            throw std::runtime_error("field data: units not independent (regulator too small)");
    }
    // class data
    {
        long h = 1;
        for (auto& cg : class_gens) {
            IdealHNF lhs = ideal_pow(cg.gen.hnf, static_cast<unsigned long>(cg.order));
            IdealHNF rhs = ideal_principal(cg.princ);
            if (!(lhs == rhs))
                throw std::runtime_error("field data: class generator principalization failed");
            h *= cg.order;
        }
        if (h != class_number)
            throw std::runtime_error("field data: class number inconsistent with generators");
    }
    // stored splits re-verified by construction in split_cached; force them now
    for (auto& [p, v] : stored_splits) split_cached(p);
    // cubic subfield
    {
        if (zx::degree(cubic_poly) != 3 || cubic_poly[3] != 1)
            throw std::runtime_error("field data: cubic subfield polynomial must be monic cubic");
        // v satisfies the cubic
        NFElement v = cubic_embed;
        NFElement acc = zero();
        for (int k = 3; k >= 0; --k) {
            acc = mul(acc, v);
            acc = add(acc, mul_int(one(), cubic_poly[k]));
        }
        if (!acc.is_zero()) throw std::runtime_error("field data: cubic_embed is not a root of the cubic");
        // the cubic subfield is the fixed field of complex conjugation sigma^3
        if (!(galois_apply(3, v) == v))
            throw std::runtime_error("field data: cubic subfield not fixed by sigma^3");
        if (galois_apply(1, v) == v)
            throw std::runtime_error("field data: cubic generator fixed by sigma");
        mpz_class cd = zx::discriminant(cubic_poly);
        if (cd <= 0 || !mpz_perfect_square_p(cd.get_mpz_t())) {
            // allow non-maximal cubic polynomial only if a square discriminant
            // basis correction is shipped
            if (cubic_basis.rows() != 3) throw std::runtime_error("field data: cubic basis missing");
        }
        for (auto& [p, ef] : cubic_stored) {
            int total = 0;
            for (auto& [e, f] : ef) total += e * f;
            if (total != 3) throw std::runtime_error("field data: stored cubic splitting invalid");
        }
    }
}

// ---------------------------------------------------------------- data file

namespace {

mpq_class parse_rat(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return mpq_class(mpz_class(s));
    mpq_class q(mpz_class(s.substr(0, slash)), mpz_class(s.substr(slash + 1)));
    q.canonicalize();
    return q;
}

std::vector<std::string> tokens(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string t;
    while (is >> t) out.push_back(t);
    return out;
}

NFElement parse_element(const std::vector<std::string>& tk, size_t from) {
    NFElement e;
    for (int i = 0; i < DEG; ++i) e.c[i] = parse_rat(tk[from + i]);
    return e;
}

} // namespace

std::string default_field_data_path() {
    return std::string(K3HECKE_DATA_DIR) + "/fields.dat";
}

FieldData load_field(int want, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field data file: " + path);
    std::string line;
    bool version_seen = false;
    int cur = -1;
    FieldData K;
    bool found = false;
    bool done = false;
    while (std::getline(in, line) && !done) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        auto tk = tokens(line);
        if (tk.empty()) continue;
        const std::string& key = tk[0];
        if (key == "format:") {
            if (tk.size() < 3 || tk[1] != "k3hecke-fields" || tk[2] != "v1")
                throw std::runtime_error("field data: unsupported format");
            version_seen = true;
            continue;
        }
        if (key == "[field") {
            int id = std::stoi(tk[1]);
            if (found) { done = true; break; }   // finished the wanted block
            cur = id;
            if (cur == want) { found = true; K.id = id; }
            continue;
        }
        if (cur != want) continue;
        if (key == "label:") K.label = tk[1];
        else if (key == "absdisc:") K.absdisc = mpz_class(tk[1]);
        else if (key == "poly:") {
            K.poly.clear();
            for (size_t i = 1; i < tk.size(); ++i) K.poly.emplace_back(tk[i]);
        } else if (key.rfind("basis", 0) == 0 && key.size() == 7) {
            int j = key[5] - '0';
            if (K.basis.rows() != DEG) K.basis = QMat(DEG, DEG);
            for (int i = 0; i < DEG; ++i) K.basis.at(i, j) = parse_rat(tk[1 + i]);
        } else if (key == "sigma:") {
            K.sigma_theta.clear();
            for (int i = 0; i < DEG; ++i) K.sigma_theta.push_back(parse_rat(tk[1 + i]));
        } else if (key == "zeta:") {
            K.zeta = parse_element(tk, 1);
        } else if (key == "torsion:") {
            K.torsion_order = std::stoi(tk[1]);
        } else if (key == "unit1:") {
            K.unit1 = parse_element(tk, 1);
        } else if (key == "unit2:") {
            K.unit2 = parse_element(tk, 1);
        } else if (key == "hasse_unit:") {
            K.hasse_unit = parse_element(tk, 1);
        } else if (key == "h:") {
            K.class_number = std::stol(tk[1]);
        } else if (key == "classgen:") {
            // p e f idx g0..g5 order a0..a5
            ClassGenerator cg;
            cg.gen.p = std::stol(tk[1]);
            cg.gen.e = std::stoi(tk[2]);
            cg.gen.f = std::stoi(tk[3]);
            cg.gen.index = std::stoi(tk[4]);
            cg.gen.gen2.resize(DEG);
            for (int i = 0; i < DEG; ++i) cg.gen.gen2[i] = mpz_class(tk[5 + i]);
            cg.order = std::stol(tk[11]);
            for (int i = 0; i < DEG; ++i) cg.princ.c[i] = parse_rat(tk[12 + i]);
            K.class_gens.push_back(std::move(cg));
        } else if (key == "cubic:") {
            K.cubic_poly.clear();
            for (size_t i = 1; i < tk.size(); ++i) K.cubic_poly.emplace_back(tk[i]);
        } else if (key.rfind("cubic_basis", 0) == 0 && key.size() == 13) {
            int j = key[11] - '0';
            if (K.cubic_basis.rows() != 3) K.cubic_basis = QMat(3, 3);
            for (int i = 0; i < 3; ++i) K.cubic_basis.at(i, j) = parse_rat(tk[1 + i]);
        } else if (key == "cubic_embed:") {
            K.cubic_embed = parse_element(tk, 1);
        } else if (key == "split:") {
            // p e f idx c0..c5
            PrimeIdeal P;
            P.p = std::stol(tk[1]);
            P.e = std::stoi(tk[2]);
            P.f = std::stoi(tk[3]);
            P.index = std::stoi(tk[4]);
            P.gen2.resize(DEG);
            for (int i = 0; i < DEG; ++i) P.gen2[i] = mpz_class(tk[5 + i]);
            K.stored_splits[P.p].push_back(std::move(P));
        } else if (key == "cubic_split:") {
            long p = std::stol(tk[1]);
            std::vector<std::pair<int, int>> ef;
            for (size_t i = 2; i + 1 < tk.size(); i += 2)
                ef.emplace_back(std::stoi(tk[i]), std::stoi(tk[i + 1]));
            K.cubic_stored[p] = std::move(ef);
        } else {
            throw std::runtime_error("field data: unrecognized key: " + key);
        }
    }
    if (!version_seen) throw std::runtime_error("field data: missing format line");
    if (!found) throw std::runtime_error("field data: field block not found");
    // build the HNFs of stored primes
    K.finalize();
    for (auto& [p, v] : K.stored_splits)
        for (auto& P : v) P.hnf = K.ideal_two_gen(P.p, P.gen2);
    for (auto& cg : K.class_gens) cg.gen.hnf = K.ideal_two_gen(cg.gen.p, cg.gen.gen2);
    K.run_load_checks();
    return K;
}

} // namespace numfield
} // namespace k3hecke
