#include "k3hecke/resring.hpp"
#include "k3hecke/zmatrix.hpp"

#include <algorithm>
#include <map>
#include <sstream>

namespace k3hecke {
namespace resring {

using numfield::DEG;

// ---------------------------------------------------------------- modulus

std::string Modulus::key() const {
    std::ostringstream os;
    for (auto& [P, e] : parts) os << P.p << ":" << P.index << "^" << e << ";";
    return os.str();
}

Modulus make_modulus(const FieldData& K, std::vector<std::pair<PrimeIdeal, int>> parts) {
    std::sort(parts.begin(), parts.end(), [](const auto& a, const auto& b) {
        if (a.first.p != b.first.p) return a.first.p < b.first.p;
        return a.first.index < b.first.index;
    });
    for (size_t i = 0; i + 1 < parts.size(); ++i)
        if (parts[i].first.p == parts[i + 1].first.p &&
            parts[i].first.index == parts[i + 1].first.index)
            throw std::invalid_argument("make_modulus: repeated prime");
    Modulus m;
    m.hnf = K.ideal_one();
    m.norm = 1;
    for (auto& [P, e] : parts) {
        if (e < 1) throw std::invalid_argument("make_modulus: exponent < 1");
        m.hnf = K.ideal_mul(m.hnf, K.ideal_pow(P.hnf, static_cast<unsigned long>(e)));
        mpz_class pe;
        mpz_pow_ui(pe.get_mpz_t(), P.norm().get_mpz_t(), e);
        m.norm *= pe;
    }
    m.parts = std::move(parts);
    if (m.hnf.norm != m.norm) throw std::logic_error("make_modulus: norm mismatch");
    return m;
}

// ---------------------------------------------------------------- residue ring

ResidueRing::ResidueRing(const FieldData& K, IdealHNF I) : K_(&K), I_(std::move(I)) {}

Res ResidueRing::reduce(const std::vector<mpz_class>& coords) const {
    return hnf_reduce(I_.H, coords);
}

Res ResidueRing::reduce(const NFElement& x) const { return reduce(x.int_coords()); }

Res ResidueRing::one() const {
    return reduce(K_->one().int_coords());
}

Res ResidueRing::mul(const Res& a, const Res& b) const {
    std::vector<mpz_class> out(DEG, 0);
    for (int i = 0; i < DEG; ++i) {
        if (a[i] == 0) continue;
        for (int j = 0; j < DEG; ++j) {
            if (b[j] == 0) continue;
            mpz_class prod = a[i] * b[j];
            for (int k = 0; k < DEG; ++k) {
                const mpz_class& t = K_->mtab(i, j, k);
                if (t != 0) out[k] += prod * t;
            }
        }
    }
    return reduce(out);
}

bool ResidueRing::is_coprime(const Res& a) const {
    // (a) + I = O: the HNF of the combined columns is the identity
    ZMat cols(DEG, 12);
    ZMat M = K_->mult_matrix_int(a);
    for (int i = 0; i < DEG; ++i)
        for (int j = 0; j < DEG; ++j) {
            cols.at(i, j) = M.at(i, j);
            cols.at(i, 6 + j) = I_.H.at(i, j);
        }
    return hnf_cols(cols) == ZMat::identity(DEG);
}

Res ResidueRing::inverse(const Res& a) const {
    // solve a*y + (ideal part) = 1 through the HNF transform
    ZMat cols(DEG, 12);
    ZMat M = K_->mult_matrix_int(a);
    for (int i = 0; i < DEG; ++i)
        for (int j = 0; j < DEG; ++j) {
            cols.at(i, j) = M.at(i, j);
            cols.at(i, 6 + j) = I_.H.at(i, j);
        }
    ZMat H, U;
    hnf_cols_transform(cols, H, U);
    if (!(H == ZMat::identity(DEG)))
        throw std::domain_error("ResidueRing: element not coprime to the modulus");
    // 1 = sum_j U(.,j)-combination: 1's coordinates select combination columns
    std::vector<mpz_class> onec = K_->one().int_coords();
    std::vector<mpz_class> y(DEG, 0);
    for (int j = 0; j < DEG; ++j) {
        if (onec[j] == 0) continue;
        for (int i = 0; i < DEG; ++i) y[i] += onec[j] * U.at(i, j);
    }
    // y holds the coefficients on the 6 columns of M: inverse = sum y_i * e_i
    return reduce(y);
}

Res ResidueRing::pow(const Res& a, mpz_class e) const {
    Res base = a;
    if (e < 0) {
        base = inverse(a);
        e = -e;
    }
    Res r = one();
    while (e > 0) {
        if (mpz_odd_p(e.get_mpz_t())) r = mul(r, base);
        e >>= 1;
        if (e > 0) base = mul(base, base);
    }
    return r;
}

bool ResidueRing::is_one_elem(const Res& a) const { return a == one(); }

// ---------------------------------------------------------------- presentations

namespace {

struct AbPres {
    std::shared_ptr<ResidueRing> R;   // ambient ring (mod the prime power / modulus)
    std::vector<Res> gens;
    std::vector<mpz_class> orders;
    // dlog defined on the subgroup the presentation generates
    std::function<std::vector<mpz_class>(const Res&)> dlog;
};

std::string res_key(const Res& r) {
    std::string s;
    for (auto& c : r) {
        s += c.get_str();
        s += ',';
    }
    return s;
}

std::vector<std::pair<mpz_class, int>> factor_mpz(mpz_class n) {
    std::vector<std::pair<mpz_class, int>> out;
    for (mpz_class p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (!mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) continue;
        int e = 0;
        while (mpz_divisible_p(n.get_mpz_t(), p.get_mpz_t())) {
            n /= p;
            ++e;
        }
        out.emplace_back(p, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

// BSGS in the cyclic group <g> of prime order ell inside R
mpz_class bsgs(const ResidueRing& R, const Res& g, const Res& x, const mpz_class& ell) {
    mpz_class m;
    mpz_sqrt(m.get_mpz_t(), ell.get_mpz_t());
    m += 1;
    std::map<std::string, mpz_class> baby;
    Res cur = R.one();
    for (mpz_class j = 0; j < m; ++j) {
        baby.emplace(res_key(cur), j);
        cur = R.mul(cur, g);
    }
    Res gm_inv = R.pow(g, -m);   // g^{-m}
    Res y = x;
    for (mpz_class i = 0; i < m + 1; ++i) {
        auto it = baby.find(res_key(y));
        if (it != baby.end()) {
            mpz_class r = (i * m + it->second) % ell;
            return r;
        }
        y = R.mul(y, gm_inv);
    }
    throw std::logic_error("bsgs: dlog not found");
}

// Pohlig-Hellman in <g> of order n
mpz_class ph_dlog(const ResidueRing& R, const Res& g, const Res& x, const mpz_class& n) {
    mpz_class result = 0, modulus = 1;
    for (auto& [ell, a] : factor_mpz(n)) {
        mpz_class la = 1;
        for (int i = 0; i < a; ++i) la *= ell;
        Res g_l = R.pow(g, n / la);       // order ell^a
        Res x_l = R.pow(x, n / la);
        Res gamma = R.pow(g_l, la / ell); // order ell
        mpz_class d = 0, shift = 1;
        for (int i = 0; i < a; ++i) {
            Res t = R.mul(x_l, R.pow(g_l, -d));
            mpz_class exp = la / (shift * ell);
            Res t2 = R.pow(t, exp);
            mpz_class digit = bsgs(R, gamma, t2, ell);
            d += digit * shift;
            shift *= ell;
        }
        // CRT accumulate
        mpz_class g_, s, t;
        mpz_gcdext(g_.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(),
                   modulus.get_mpz_t(), la.get_mpz_t());
        mpz_class newmod = modulus * la;
        mpz_class r = (result * t % newmod * la + d * s % newmod * modulus) % newmod;
        if (r < 0) r += newmod;
        result = r;
        modulus = newmod;
    }
    return result;
}

// combine a quotient presentation (dlog valid on the whole group) with a
// subgroup presentation via SNF of the stacked relation matrix
AbPres extend(const AbPres& quot, const AbPres& sub) {
    if (quot.gens.empty()) return sub;
    if (sub.gens.empty()) {
        // still normalize through SNF for the divisor chain
    }
    const auto& R = quot.R;
    size_t tq = quot.gens.size(), ta = sub.gens.size();
    size_t g = tq + ta;
    ZMat M(g, g);
    for (size_t j = 0; j < tq; ++j) {
        M.at(j, j) = quot.orders[j];
        Res pw = R->pow(quot.gens[j], quot.orders[j]);
        std::vector<mpz_class> v = ta ? sub.dlog(pw) : std::vector<mpz_class>{};
        for (size_t i = 0; i < ta; ++i) M.at(tq + i, j) = -v[i];
    }
    for (size_t i = 0; i < ta; ++i) M.at(tq + i, tq + i) = sub.orders[i];

    SmithForm sf = smith_form(M);
    std::vector<Res> all = quot.gens;
    for (auto& s : sub.gens) all.push_back(s);

    AbPres out;
    out.R = R;
    std::vector<size_t> kept;
    for (size_t k = 0; k < g; ++k) {
        if (sf.diag[k] == 1) continue;
        if (sf.diag[k] == 0) throw std::logic_error("extend: infinite quotient");
        Res h = R->one();
        for (size_t i = 0; i < g; ++i) {
            const mpz_class& e = sf.Uinv.at(i, k);
            if (e != 0) h = R->mul(h, R->pow(all[i], e));
        }
        out.gens.push_back(h);
        out.orders.push_back(sf.diag[k]);
        kept.push_back(k);
    }
    ZMat U = sf.U;
    auto qd = quot.dlog;
    auto sd = sub.dlog;
    auto qgens = quot.gens;
    auto orders = out.orders;
    out.dlog = [R, U, qd, sd, qgens, tq, ta, kept, orders](const Res& x) {
        std::vector<mpz_class> w(tq + ta, 0);
        std::vector<mpz_class> f = qd(x);
        Res rem = x;
        for (size_t j = 0; j < tq; ++j) {
            w[j] = f[j];
            if (f[j] != 0) rem = R->mul(rem, R->pow(qgens[j], -f[j]));
        }
        if (ta) {
            std::vector<mpz_class> v = sd(rem);
            for (size_t i = 0; i < ta; ++i) w[tq + i] = v[i];
        }
        std::vector<mpz_class> out_exps;
        for (size_t t = 0; t < kept.size(); ++t) {
            size_t k = kept[t];
            mpz_class acc = 0;
            for (size_t i = 0; i < tq + ta; ++i) acc += U.at(k, i) * w[i];
            acc %= orders[t];
            if (acc < 0) acc += orders[t];
            out_exps.push_back(acc);
        }
        return out_exps;
    };
    return out;
}

// (1 + P^a)/(1 + P^b) as an additive quotient, b <= 2a
AbPres additive_section(const FieldData& K, std::shared_ptr<ResidueRing> R,
                        const IdealHNF& Pa, const IdealHNF& Pb) {
    // X with Pa * X = Pb columnwise
    ZMat X(DEG, DEG);
    for (int j = 0; j < DEG; ++j) {
        std::vector<mpz_class> col(DEG), sol;
        for (int i = 0; i < DEG; ++i) col[i] = Pb.H.at(i, j);
        if (!hnf_solve(Pa.H, col, sol))
            throw std::logic_error("additive_section: Pb not inside Pa");
        for (int i = 0; i < DEG; ++i) X.at(i, j) = sol[i];
    }
    SmithForm sf = smith_form(X);
    AbPres out;
    out.R = R;
    std::vector<size_t> kept;
    std::vector<std::vector<mpz_class>> wvecs;
    for (int k = 0; k < DEG; ++k) {
        if (sf.diag[k] == 1) continue;
        if (sf.diag[k] == 0) throw std::logic_error("additive_section: infinite quotient");
        std::vector<mpz_class> w(DEG, 0);
        for (int i = 0; i < DEG; ++i) {
            const mpz_class& e = sf.Uinv.at(i, k);
            if (e == 0) continue;
            for (int r = 0; r < DEG; ++r) w[r] += e * Pa.H.at(r, i);
        }
        // generator 1 + w
        std::vector<mpz_class> onec = K.one().int_coords();
        Res gen(DEG);
        for (int r = 0; r < DEG; ++r) gen[r] = onec[r] + w[r];
        out.gens.push_back(R->reduce(gen));
        out.orders.push_back(sf.diag[k]);
        kept.push_back(k);
        wvecs.push_back(w);
    }
    ZMat U = sf.U;
    ZMat Ha = Pa.H;
    auto orders = out.orders;
    std::vector<mpz_class> onec = K.one().int_coords();
    out.dlog = [U, Ha, kept, orders, onec](const Res& x) {
        // x = 1 + y with y in Pa; exponents = U * coords(y) mod diag
        std::vector<mpz_class> y(DEG);
        for (int i = 0; i < DEG; ++i) y[i] = x[i] - onec[i];
        std::vector<mpz_class> c;
        if (!hnf_solve(Ha, y, c))
            throw std::logic_error("additive_section dlog: element not 1 mod P^a");
        std::vector<mpz_class> out_exps;
        for (size_t t = 0; t < kept.size(); ++t) {
            size_t k = kept[t];
            mpz_class acc = 0;
            for (int i = 0; i < DEG; ++i) acc += U.at(k, i) * c[i];
            acc %= orders[t];
            if (acc < 0) acc += orders[t];
            out_exps.push_back(acc);
        }
        return out_exps;
    };
    return out;
}

// presentation of (O/P^e)^x inside its own residue ring
AbPres prime_power_units(const FieldData& K, const PrimeIdeal& P, int e) {
    IdealHNF Pe = K.ideal_pow(P.hnf, static_cast<unsigned long>(e));
    auto R = std::make_shared<ResidueRing>(K, Pe);
    auto Rp = std::make_shared<ResidueRing>(K, P.hnf);
    mpz_class q = P.norm();
    mpz_class qm1 = q - 1;

    // deterministic generator of the residue field: first full-order element
    // in the coordinate box order
    Res gamma;
    {
        auto fac = factor_mpz(qm1);
        // iterate residues of O/P in box order
        std::vector<mpz_class> diag(DEG);
        for (int i = 0; i < DEG; ++i) diag[i] = P.hnf.H.at(i, i);
        std::vector<mpz_class> cnt(DEG, 0);
        bool found = false;
        while (!found) {
            // advance odometer (start from 1, skipping zero first time is fine:
            // zero is not coprime)
            int k = 0;
            while (k < DEG && ++cnt[k] == diag[k]) cnt[k++] = 0;
            if (k == DEG) throw std::logic_error("prime_power_units: no field generator");
            Res cand = Rp->reduce(cnt);
            bool zero = true;
            for (auto& c : cand)
                if (c != 0) zero = false;
            if (zero) continue;
            bool full = true;
            for (auto& [ell, a] : fac) {
                (void)a;
                if (Rp->is_one_elem(Rp->pow(cand, qm1 / ell))) {
                    full = false;
                    break;
                }
            }
            if (full) {
                gamma = cand;
                found = true;
            }
        }
    }

    // Teichmueller-style lift: gamma^(q^{e-1}) has exact order q-1 mod P^e
    Res teich;
    {
        mpz_class qe1 = 1;
        for (int i = 1; i < e; ++i) qe1 *= q;
        teich = R->pow(R->reduce(gamma), qe1);
    }
    AbPres cyc;
    cyc.R = R;
    cyc.gens = {teich};
    cyc.orders = {qm1};
    {
        auto RpLocal = Rp;
        Res g = gamma;
        mpz_class n = qm1;
        cyc.dlog = [RpLocal, g, n](const Res& x) {
            Res xr = RpLocal->reduce(x);
            return std::vector<mpz_class>{ph_dlog(*RpLocal, g, xr, n)};
        };
    }
    if (e == 1) return cyc;

    // principal units via the doubling tower
    std::vector<int> levels{1};
    while (levels.back() < e) levels.push_back(std::min(2 * levels.back(), e));
    AbPres upart;
    upart.R = R;
    upart.dlog = [](const Res&) { return std::vector<mpz_class>{}; };
    for (size_t li = levels.size() - 1; li-- > 0;) {
        int a = levels[li], b = levels[li + 1];
        IdealHNF Pa = K.ideal_pow(P.hnf, static_cast<unsigned long>(a));
        IdealHNF Pb = K.ideal_pow(P.hnf, static_cast<unsigned long>(b));
        AbPres section = additive_section(K, R, Pa, Pb);
        upart = extend(section, upart);
    }
    return extend(cyc, upart);
}

} // namespace

// ---------------------------------------------------------------- unit group

std::shared_ptr<const UnitGroup> unit_group(const FieldData& K, const Modulus& m,
                                            const mpz_class& budget) {
    // the cost driver is the discrete-log work in each residue field, so the
    // budget caps the residue-field norms rather than the product norm
    for (auto& [P, e] : m.parts)
        if (P.norm() > budget)
            throw std::runtime_error("unit_group: residue field norm exceeds budget");
    auto G = std::make_shared<UnitGroup>();
    G->K_ = &K;
    G->m_ = m;
    G->ring_ = std::make_shared<ResidueRing>(K, m.hnf);

    if (m.is_one()) {
        G->dlog_ = [](const Res&) { return std::vector<mpz_class>{}; };
        return G;
    }

    // per-prime-power presentations
    std::vector<AbPres> pps;
    std::vector<std::shared_ptr<ResidueRing>> rings;
    for (auto& [P, e] : m.parts) {
        pps.push_back(prime_power_units(K, P, e));
        rings.push_back(pps.back().R);
    }

    // CRT idempotent lifts into O/m
    size_t n = m.parts.size();
    std::vector<std::vector<mpz_class>> eps(n);   // eps_i = 1 mod P_i^{e_i}, 0 mod rest
    for (size_t i = 0; i < n; ++i) {
        if (n == 1) {
            eps[i] = K.one().int_coords();
            continue;
        }
        IdealHNF rest = K.ideal_one();
        for (size_t j = 0; j < n; ++j)
            if (j != i)
                rest = K.ideal_mul(rest, K.ideal_pow(m.parts[j].first.hnf,
                                                     static_cast<unsigned long>(m.parts[j].second)));
        IdealHNF Pi = K.ideal_pow(m.parts[i].first.hnf,
                                  static_cast<unsigned long>(m.parts[i].second));
        ZMat cols(DEG, 12);
        for (int r = 0; r < DEG; ++r)
            for (int c = 0; c < DEG; ++c) {
                cols.at(r, c) = Pi.H.at(r, c);
                cols.at(r, 6 + c) = rest.H.at(r, c);
            }
        ZMat H, U;
        hnf_cols_transform(cols, H, U);
        if (!(H == ZMat::identity(DEG)))
            throw std::logic_error("unit_group: modulus parts not coprime");
        std::vector<mpz_class> onec = K.one().int_coords();
        std::vector<mpz_class> sol(12, 0);
        for (int j = 0; j < DEG; ++j) {
            if (onec[j] == 0) continue;
            for (int r = 0; r < 12; ++r) sol[r] += onec[j] * U.at(r, j);
        }
        // eps_i = rest-part of the decomposition 1 = u + w
        std::vector<mpz_class> w(DEG, 0);
        for (int c = 0; c < DEG; ++c) {
            if (sol[6 + c] == 0) continue;
            for (int r = 0; r < DEG; ++r) w[r] += sol[6 + c] * rest.H.at(r, c);
        }
        eps[i] = w;
    }

    // combined presentation over O/m
    AbPres comb;
    comb.R = G->ring_;
    {
        std::vector<mpz_class> onec = K.one().int_coords();
        for (size_t i = 0; i < n; ++i) {
            ZMat Me = K.mult_matrix_int(eps[i]);
            for (size_t j = 0; j < pps[i].gens.size(); ++j) {
                // lift = eps_i * g + (1 - eps_i)
                std::vector<mpz_class> g = pps[i].gens[j];
                std::vector<mpz_class> lift(DEG, 0);
                for (int r = 0; r < DEG; ++r) {
                    lift[r] = onec[r] - eps[i][r];
                    for (int c = 0; c < DEG; ++c) lift[r] += Me.at(r, c) * g[c];
                }
                comb.gens.push_back(G->ring_->reduce(lift));
                comb.orders.push_back(pps[i].orders[j]);
            }
        }
        auto parts = m.parts;
        auto ppsL = pps;
        auto ringsL = rings;
        comb.dlog = [ppsL, ringsL](const Res& x) {
            std::vector<mpz_class> out;
            for (size_t i = 0; i < ppsL.size(); ++i) {
                Res xi = ringsL[i]->reduce(x);
                auto v = ppsL[i].dlog(xi);
                out.insert(out.end(), v.begin(), v.end());
            }
            return out;
        };
    }

    // final SNF normalization into a divisor chain
    {
        size_t g = comb.gens.size();
        ZMat M(g, g);
        for (size_t i = 0; i < g; ++i) M.at(i, i) = comb.orders[i];
        SmithForm sf = smith_form(M);
        std::vector<size_t> kept;
        for (size_t k = 0; k < g; ++k) {
            if (sf.diag[k] == 1) continue;
            Res h = G->ring_->one();
            for (size_t i = 0; i < g; ++i) {
                const mpz_class& e = sf.Uinv.at(i, k);
                if (e != 0) h = G->ring_->mul(h, G->ring_->pow(comb.gens[i], e));
            }
            G->gens_.push_back(h);
            G->orders_.push_back(sf.diag[k]);
            kept.push_back(k);
        }
        ZMat U = sf.U;
        auto cd = comb.dlog;
        auto orders = G->orders_;
        G->dlog_ = [U, cd, kept, orders, g](const Res& x) {
            std::vector<mpz_class> w = cd(x);
            std::vector<mpz_class> out;
            for (size_t t = 0; t < kept.size(); ++t) {
                size_t k = kept[t];
                mpz_class acc = 0;
                for (size_t i = 0; i < g; ++i) acc += U.at(k, i) * w[i];
                acc %= orders[t];
                if (acc < 0) acc += orders[t];
                out.push_back(acc);
            }
            return out;
        };
    }

    // order formula check
    G->order_ = 1;
    for (auto& d : G->orders_) G->order_ *= d;
    mpz_class expect = 1;
    for (auto& [P, e] : m.parts) {
        mpz_class q = P.norm();
        mpz_class pe = q - 1;
        for (int i = 1; i < e; ++i) pe *= q;
        expect *= pe;
    }
    if (G->order_ != expect)
        throw std::logic_error("unit_group: order formula violated");
    return G;
}

std::vector<mpz_class> UnitGroup::dlog(const Res& x) const {
    if (!ring_->is_coprime(x)) throw std::domain_error("dlog: not coprime to the modulus");
    return dlog_(x);
}

std::vector<mpz_class> UnitGroup::dlog(const NFElement& x) const {
    return dlog(ring_->reduce(x));
}

std::vector<mpz_class> discrete_log(const UnitGroup& G, const Res& x) { return G.dlog(x); }

// ---------------------------------------------------------------- characters

mpz_class FiniteCharacter::order() const {
    mpz_class o = 1;
    for (size_t j = 0; j < exps.size(); ++j) {
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), exps[j].get_mpz_t(), G->orders()[j].get_mpz_t());
        mpz_class oj = G->orders()[j] / g;
        mpz_lcm(o.get_mpz_t(), o.get_mpz_t(), oj.get_mpz_t());
    }
    return o;
}

mpq_class FiniteCharacter::value_on_exponents(const std::vector<mpz_class>& v) const {
    mpq_class acc = 0;
    for (size_t j = 0; j < exps.size(); ++j) {
        acc += mpq_class(exps[j] * v[j], G->orders()[j]);
    }
    acc.canonicalize();
    // reduce mod 1 into [0,1)
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), acc.get_num().get_mpz_t(), acc.get_den().get_mpz_t());
    acc -= mpq_class(fl);
    return acc;
}

mpq_class FiniteCharacter::value_frac(const Res& x) const {
    return value_on_exponents(G->dlog(x));
}

mpq_class FiniteCharacter::value_frac(const NFElement& x) const {
    return value_on_exponents(G->dlog(x));
}

bool FiniteCharacter::is_trivial() const {
    for (size_t j = 0; j < exps.size(); ++j)
        if (exps[j] % G->orders()[j] != 0) return false;
    return true;
}

std::string FiniteCharacter::key() const {
    std::string s = G->modulus().key() + "|";
    for (auto& e : exps) {
        s += e.get_str();
        s += ',';
    }
    return s;
}

// ---------------------------------------------------------------- conductors

std::shared_ptr<const UnitGroup> ModulusCtx::group(const Modulus& m) {
    auto it = groups_.find(m.key());
    if (it != groups_.end()) return it->second;
    auto G = unit_group(*K_, m, budget_);
    groups_.emplace(m.key(), G);
    return G;
}

const ModulusCtx::DescentData& ModulusCtx::descent_data(const Modulus& m,
                                                        std::shared_ptr<const UnitGroup> G,
                                                        const Modulus& m2) {
    std::string key = m.key() + ">" + m2.key();
    auto it = descents_.find(key);
    if (it != descents_.end()) return it->second;

    DescentData d;
    d.G2 = group(m2);
    size_t r = G->rank(), r2 = d.G2->rank();

    // lifts of G2 generators coprime to the big modulus
    d.lifts.resize(r2);
    d.lift_dlogs.resize(r2);
    for (size_t j = 0; j < r2; ++j) {
        Res cand = G->ring().reduce(d.G2->gens()[j]);
        if (!G->ring().is_coprime(cand)) {
            bool fixed = false;
            for (int c = 0; c < 6 && !fixed; ++c) {
                for (long t = 1; t <= 4 && !fixed; ++t) {
                    Res adj = cand;
                    for (int i = 0; i < DEG; ++i) adj[i] += t * m2.hnf.H.at(i, c);
                    adj = G->ring().reduce(adj);
                    if (G->ring().is_coprime(adj)) {
                        cand = adj;
                        fixed = true;
                    }
                }
            }
            if (!fixed) throw std::logic_error("try_descend: no coprime lift");
        }
        d.lifts[j] = cand;
        d.lift_dlogs[j] = G->dlog(cand);
    }

    // matrix of the reduction map on generators
    ZMat A(r2 ? r2 : 1, r);
    for (size_t k = 0; k < r; ++k) {
        auto v = r2 ? d.G2->dlog(d.G2->ring().reduce(G->gens()[k])) : std::vector<mpz_class>{};
        for (size_t j = 0; j < r2; ++j) A.at(j, k) = v[j];
    }

    // kernel of G -> G2 in exponent coordinates
    if (r2 == 0) {
        for (size_t k = 0; k < r; ++k) {
            std::vector<mpz_class> w(r, 0);
            w[k] = 1;
            d.kernel.push_back(w);
        }
    } else {
        ZMat M(r2, r + r2);
        for (size_t j = 0; j < r2; ++j) {
            for (size_t k = 0; k < r; ++k) M.at(j, k) = A.at(j, k);
            M.at(j, r + j) = d.G2->orders()[j];
        }
        ZMat Kr = hnf_cols_kernel(M);
        for (size_t c = 0; c < Kr.cols(); ++c) {
            std::vector<mpz_class> w(r);
            for (size_t k = 0; k < r; ++k) w[k] = Kr.at(k, c);
            d.kernel.push_back(w);
        }
    }
    return descents_.emplace(key, std::move(d)).first->second;
}

std::optional<FiniteCharacter> ModulusCtx::try_descend(const FiniteCharacter& chi,
                                                       const Modulus& m2) {
    const DescentData& d = descent_data(chi.G->modulus(), chi.G, m2);
    for (auto& w : d.kernel) {
        mpq_class val = chi.value_on_exponents(w);
        if (val != 0) return std::nullopt;   // chi nontrivial on the kernel
    }
    FiniteCharacter chi2;
    chi2.G = d.G2;
    size_t r2 = d.G2->rank();
    chi2.exps.resize(r2);
    for (size_t j = 0; j < r2; ++j) {
        mpq_class val = chi.value_on_exponents(d.lift_dlogs[j]);
        mpq_class scaled = val * d.G2->orders()[j];
        if (scaled.get_den() != 1)
            throw std::logic_error("try_descend: induced value not a d-th root");
        mpz_class a = scaled.get_num() % d.G2->orders()[j];
        if (a < 0) a += d.G2->orders()[j];
        chi2.exps[j] = a;
    }
    return chi2;
}

std::pair<Modulus, FiniteCharacter> ModulusCtx::conductor(const FiniteCharacter& chi) {
    Modulus m = chi.G->modulus();
    FiniteCharacter cur = chi;
    bool progress = true;
    while (progress) {
        progress = false;
        for (size_t i = 0; i < m.parts.size(); ++i) {
            std::vector<std::pair<PrimeIdeal, int>> parts = m.parts;
            if (parts[i].second > 1)
                parts[i].second -= 1;
            else
                parts.erase(parts.begin() + i);
            Modulus m2 = make_modulus(*K_, parts);
            auto descended = try_descend(cur, m2);
            if (descended) {
                m = m2;
                cur = *descended;
                progress = true;
                break;
            }
        }
    }
    return {m, cur};
}

Modulus char_conductor(ModulusCtx& ctx, const FiniteCharacter& chi) {
    return ctx.conductor(chi).first;
}

std::vector<FiniteCharacter> enumerate_chars(std::shared_ptr<const UnitGroup> G, long n_max) {
    std::vector<mpz_class> step, count;
    for (auto& d : G->orders()) {
        mpz_class g;
        mpz_class nm(n_max);
        mpz_gcd(g.get_mpz_t(), d.get_mpz_t(), nm.get_mpz_t());
        step.push_back(d / g);
        count.push_back(g);
    }
    std::vector<FiniteCharacter> out;
    std::vector<mpz_class> idx(G->rank(), 0);
    while (true) {
        FiniteCharacter chi;
        chi.G = G;
        chi.exps.resize(G->rank());
        for (size_t j = 0; j < G->rank(); ++j) chi.exps[j] = idx[j] * step[j];
        out.push_back(std::move(chi));
        size_t j = 0;
        while (j < G->rank() && ++idx[j] == count[j]) idx[j++] = 0;
        if (j == G->rank()) break;
    }
    return out;
}

} // namespace resring
} // namespace k3hecke
