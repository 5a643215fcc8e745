#include "k3hecke/hecke.hpp"

#include <algorithm>
#include <sstream>

namespace k3hecke {
namespace hecke {

using numfield::DEG;
using resring::Res;
using resring::enumerate_chars;
using resring::make_modulus;
using resring::unit_group;

// ---------------------------------------------------------------- infinity types

int InfinityType::weight() const {
    int w = ab[0].first + ab[0].second;
    for (auto& [a, b] : ab)
        if (a + b != w) throw std::invalid_argument("InfinityType: non-constant weight");
    return w;
}

std::string InfinityType::key() const {
    std::ostringstream os;
    for (auto& [a, b] : ab) os << a << "," << b << ";";
    return os.str();
}

std::vector<InfinityType> type_assignments(const std::array<std::pair<int, int>, 3>& multiset) {
    std::vector<InfinityType> out;
    std::set<std::string> seen;
    for (int conj = 0; conj < 2; ++conj) {
        std::array<std::pair<int, int>, 3> ms = multiset;
        if (conj)
            for (auto& [a, b] : ms) std::swap(a, b);
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end());
        do {
            InfinityType t;
            for (int j = 0; j < 3; ++j) t.ab[j] = ms[idx[j]];
            t.weight();   // validates
            if (seen.insert(t.key()).second) out.push_back(t);
        } while (std::next_permutation(idx.begin(), idx.end()));
    }
    std::sort(out.begin(), out.end(), [](const InfinityType& a, const InfinityType& b) {
        return a.key() < b.key();
    });
    return out;
}

std::string HeckeCharacter::key() const {
    std::ostringstream os;
    os << cond.key() << "!" << type.key() << "!";
    for (auto& e : chi.exps) os << e.get_str() << ",";
    os << "!";
    for (auto& cv : class_values) os << cv.root_index << ",";
    return os.str();
}

ValueFieldBound max_char_order(const FieldData& K) {
    ValueFieldBound b;
    b.assumption = "M = K";
    for (long n = 1; n <= K.torsion_order; ++n)
        if (K.torsion_order % n == 0) b.admissible.insert(n);
    return b;
}

// ---------------------------------------------------------------- eval context

EvalCtx::EvalCtx(const FieldData& K, long digits)
    : K_(&K), digits_(digits), mctx_(K) {}

namespace {

std::string prime_key(const PrimeIdeal& P) {
    return std::to_string(P.p) + ":" + std::to_string(P.index);
}

std::string elem_key(const NFElement& x) {
    std::string s;
    for (auto& c : x.c) {
        s += c.get_str();
        s += ',';
    }
    return s;
}

} // namespace

const std::vector<mpz_class>& EvalCtx::dlog_cached(const resring::UnitGroup& G,
                                                   const NFElement& x) {
    std::string key = G.modulus().key() + "|" + elem_key(x);
    auto it = dlog_cache_.find(key);
    if (it == dlog_cache_.end()) it = dlog_cache_.emplace(key, G.dlog(x)).first;
    return it->second;
}

const std::array<Cplx, 3>& EvalCtx::embed_cached(const NFElement& x, long digits) {
    std::string key = std::to_string(digits) + "|" + elem_key(x);
    auto it = emb_cache_.find(key);
    if (it == emb_cache_.end()) it = emb_cache_.emplace(key, K_->embed_pairs(x, digits)).first;
    return it->second;
}

const NFElement& EvalCtx::generator(const PrimeIdeal& P) {
    std::string k = prime_key(P);
    auto it = gen_cache_.find(k);
    if (it != gen_cache_.end()) return it->second;
    NFElement g = numfield::prime_generator(*K_, P);
    return gen_cache_.emplace(k, std::move(g)).first->second;
}

const EvalCtx::ClassDecomp& EvalCtx::class_decompose(const PrimeIdeal& P) {
    std::string k = prime_key(P);
    auto it = class_cache_.find(k);
    if (it != class_cache_.end()) return it->second;

    ClassDecomp d;
    size_t n = K_->class_gens.size();
    d.exps.assign(n, 0);
    if (n == 0) {
        d.beta = generator(P);
        return class_cache_.emplace(k, std::move(d)).first->second;
    }
    // try exponent tuples until P * prod gen^(order - a) is principal
    std::vector<long> a(n, 0);
    while (true) {
        IdealHNF I = P.hnf;
        for (size_t j = 0; j < n; ++j) {
            long o = K_->class_gens[j].order;
            long e = (o - a[j]) % o;
            if (e) I = K_->ideal_mul(I, K_->ideal_pow(K_->class_gens[j].gen.hnf,
                                                      static_cast<unsigned long>(e)));
        }
        try {
            d.beta = numfield::principal_generator(I, *K_);
            d.exps.assign(a.begin(), a.end());
            return class_cache_.emplace(k, std::move(d)).first->second;
        } catch (const numfield::NonPrincipalError&) {
        }
        size_t j = 0;
        while (j < n && ++a[j] == K_->class_gens[j].order) a[j++] = 0;
        if (j == n) throw std::logic_error("class_decompose: no tuple worked");
    }
}

Cplx EvalCtx::infinity_eval(const InfinityType& T, const NFElement& x) {
    return hecke::infinity_eval(*K_, T, x, digits_);
}

Cplx infinity_eval(const FieldData& K, const InfinityType& T, const NFElement& x, long digits) {
    if (x.is_zero()) throw std::invalid_argument("infinity_eval: zero argument");
    auto pairs = K.embed_pairs(x, digits);
    long prec = pairs[0].prec();
    Cplx acc(prec);
    acc.re = Real::from(1L, prec);
    for (int j = 0; j < 3; ++j) {
        if (T.ab[j].first)
            acc = acc * pairs[j].pow_ui(static_cast<unsigned long>(T.ab[j].first));
        if (T.ab[j].second)
            acc = acc * pairs[j].conj().pow_ui(static_cast<unsigned long>(T.ab[j].second));
    }
    return acc;
}

// ---------------------------------------------------------------- unit compatibility

namespace {

// snap z (|z| = 1) to a w-th root of unity: returns k with z = e^{2 pi i k/w},
// or nullopt if no root is within tolerance
std::optional<long> snap_root(const Cplx& z, long w, double tol) {
    long prec = z.prec();
    for (long k = 0; k < w; ++k) {
        Cplx r = unit_root(mpq_class(k, w), prec);
        if ((z - r).abs().to_double() < tol) return k;
    }
    return std::nullopt;
}

// units whose compatibility pins the character: torsion generator, the two
// fundamental units, and the extra unit if shipped
std::vector<const NFElement*> compat_units(const FieldData& K) {
    std::vector<const NFElement*> us{&K.zeta, &K.unit1, &K.unit2};
    if (K.hasse_unit) us.push_back(&*K.hasse_unit);
    return us;
}

} // namespace

bool unit_compatible(EvalCtx& ctx, const FiniteCharacter& chi, const InfinityType& T) {
    const FieldData& K = ctx.field();
    long w = K.torsion_order;
    auto units = compat_units(K);
    for (size_t ui = 0; ui < units.size(); ++ui) {
        // snapped infinity part (cached per type/unit)
        static thread_local std::map<std::string, std::optional<long>> snap_cache;
        std::string key = std::to_string(K.id) + "#" + T.key() + "#" + std::to_string(ui);
        auto it = snap_cache.find(key);
        if (it == snap_cache.end()) {
            std::optional<long> snapped;
            long digits = ctx.digits();
            for (int attempt = 0; attempt < 3 && !snapped; ++attempt, digits *= 2)
                snapped = snap_root(infinity_eval(K, T, *units[ui], digits), w, 1e-20);
            it = snap_cache.emplace(key, snapped).first;
        }
        if (!it->second) return false;   // infinity part is not a root of unity
        // chi(u) * e^{2 pi i k/w} = 1 exactly in Q/Z; the unit dlogs are
        // cached per modulus
        static thread_local std::map<std::string, std::vector<mpz_class>> dlog_cache;
        std::string dkey = std::to_string(K.id) + "#" + chi.G->modulus().key() + "#u" +
                           std::to_string(ui);
        auto dit = dlog_cache.find(dkey);
        if (dit == dlog_cache.end())
            dit = dlog_cache.emplace(dkey, chi.G->dlog(*units[ui])).first;
        mpq_class total = chi.value_on_exponents(dit->second) + mpq_class(*it->second, w);
        total.canonicalize();
        if (total.get_den() != 1) return false;
    }
    return true;
}

// ---------------------------------------------------------------- exponent bounds

int bound_exponents(ModulusCtx& ctx, const PrimeIdeal& P, long n_max) {
    if (n_max <= 1) return 0;
    const FieldData& K = ctx.field();
    // the principal-unit layers form a p-group, so characters of order
    // coprime to p are trivial on every layer
    {
        mpz_class g;
        mpz_class nm(n_max), pz(P.p);
        mpz_gcd(g.get_mpz_t(), nm.get_mpz_t(), pz.get_mpz_t());
        if (g == 1) return 1;
    }
    auto layer_trivial = [&](int e) {
        // every admissible character of (O/P^{e+1})^x is trivial on
        // (1 + P^e)/(1 + P^{e+1})
        Modulus m = make_modulus(K, {{P, e + 1}});
        auto G = ctx.group(m);
        IdealHNF Pe = K.ideal_pow(P.hnf, static_cast<unsigned long>(e));
        std::vector<mpz_class> onec = K.one().int_coords();
        for (int c = 0; c < DEG; ++c) {
            std::vector<mpz_class> v(DEG);
            for (int i = 0; i < DEG; ++i) v[i] = onec[i] + Pe.H.at(i, c);
            auto dl = G->dlog(G->ring().reduce(v));
            for (size_t j = 0; j < dl.size(); ++j) {
                mpz_class g;
                mpz_class nm(n_max);
                mpz_gcd(g.get_mpz_t(), G->orders()[j].get_mpz_t(), nm.get_mpz_t());
                if (dl[j] % g != 0) return false;
            }
        }
        return true;
    };
    for (int e = 1; e <= 24; ++e) {
        if (layer_trivial(e) && layer_trivial(e + 1) && layer_trivial(e + 2)) return e;
    }
    throw std::runtime_error("bound_exponents: no stable bound within budget");
}

// ---------------------------------------------------------------- evaluation

namespace {

Cplx inf_eval_pairs(const std::array<Cplx, 3>& pairs, const InfinityType& T) {
    long prec = pairs[0].prec();
    Cplx acc(prec);
    acc.re = Real::from(1L, prec);
    for (int j = 0; j < 3; ++j) {
        if (T.ab[j].first)
            acc = acc * pairs[j].pow_ui(static_cast<unsigned long>(T.ab[j].first));
        if (T.ab[j].second)
            acc = acc * pairs[j].conj().pow_ui(static_cast<unsigned long>(T.ab[j].second));
    }
    return acc;
}

// chi value of the class-generator principalization plus its infinity part
Cplx class_base_value(EvalCtx& ctx, const HeckeCharacter& psi, size_t j, long digits) {
    const FieldData& K = ctx.field();
    const NFElement& alpha = K.class_gens[j].princ;
    mpq_class fr = psi.chi.exps.empty()
                       ? mpq_class(0)
                       : psi.chi.value_on_exponents(ctx.dlog_cached(*psi.chi.G, alpha));
    long prec = digits_to_bits(digits);
    return unit_root(fr, prec) * inf_eval_pairs(ctx.embed_cached(alpha, digits), psi.type);
}

Cplx class_gen_value(EvalCtx& ctx, const HeckeCharacter& psi, size_t j, long digits) {
    const FieldData& K = ctx.field();
    long o = K.class_gens[j].order;
    Cplx base = class_base_value(ctx, psi, j, digits);
    long prec = base.prec();
    Cplx root = base.nth_root(static_cast<unsigned long>(o));
    return root * unit_root(mpq_class(psi.class_values[j].root_index, o), prec);
}

} // namespace

namespace {

// evaluation at an explicit precision; exact data (generators, class
// decompositions) comes from the shared context caches
Cplx eval_at_prime_digits(EvalCtx& ctx, const HeckeCharacter& psi, const PrimeIdeal& P,
                          long digits) {
    const FieldData& K = ctx.field();
    if (mpz_divisible_ui_p(psi.cond.norm.get_mpz_t(), static_cast<unsigned long>(P.p)))
        throw std::invalid_argument("eval_at_prime: prime not coprime to the conductor");
    long prec = digits_to_bits(digits);
    if (K.class_gens.empty()) {
        const NFElement& alpha = ctx.generator(P);
        mpq_class fr = psi.chi.exps.empty()
                           ? mpq_class(0)
                           : psi.chi.value_on_exponents(ctx.dlog_cached(*psi.chi.G, alpha));
        return unit_root(fr, prec) * inf_eval_pairs(ctx.embed_cached(alpha, digits), psi.type);
    }
    const auto& d = ctx.class_decompose(P);
    mpq_class fr = psi.chi.exps.empty()
                       ? mpq_class(0)
                       : psi.chi.value_on_exponents(ctx.dlog_cached(*psi.chi.G, d.beta));
    Cplx val = unit_root(fr, prec) * inf_eval_pairs(ctx.embed_cached(d.beta, digits), psi.type);
    for (size_t j = 0; j < K.class_gens.size(); ++j) {
        long o = K.class_gens[j].order;
        long ecomp = (o - d.exps[j]) % o;   // P * prod g_j^{ecomp} = (beta)
        if (ecomp == 0) continue;
        Cplx gv = class_gen_value(ctx, psi, j, digits);
        val = val * gv.pow_ui(static_cast<unsigned long>(ecomp)).inverse();
    }
    return val;
}

} // namespace

Cplx eval_at_prime(EvalCtx& ctx, const HeckeCharacter& psi, const PrimeIdeal& P) {
    return eval_at_prime_digits(ctx, psi, P, ctx.digits());
}

std::vector<Cplx> char_power_sums(EvalCtx& ctx, const HeckeCharacter& psi, long p, int smax) {
    const FieldData& K = ctx.field();
    long prec = digits_to_bits(ctx.digits());
    std::vector<Cplx> s(smax, Cplx(prec));
    for (const PrimeIdeal& P : split_prime(K, p)) {
        Cplx v = eval_at_prime(ctx, psi, P);
        for (int m = 1; m <= smax; ++m) {
            if (m % P.f != 0) continue;
            Cplx term = v.pow_ui(static_cast<unsigned long>(m / P.f));
            term.re = term.re * Real::from(static_cast<long>(P.f), prec);
            term.im = term.im * Real::from(static_cast<long>(P.f), prec);
            s[m - 1] = s[m - 1] + term;
        }
    }
    return s;
}

EulerFactor euler_factor_Q(EvalCtx& ctx, const HeckeCharacter& psi, long p) {
    const FieldData& K = ctx.field();
    if (mpz_divisible_ui_p(psi.cond.norm.get_mpz_t(), static_cast<unsigned long>(p)))
        throw std::invalid_argument("euler_factor_Q: p divides the conductor norm");
    int w = psi.type.weight();

    long digits = ctx.digits();
    std::vector<mpz_class> rounded;
    for (int attempt = 0; attempt < 5; ++attempt, digits *= 2) {
        if (digits > 2000) break;
        long prec = digits_to_bits(digits);
        std::vector<Cplx> poly{Cplx(prec)};
        poly[0].re = Real::from(1L, prec);
        for (const PrimeIdeal& P : split_prime(K, p)) {
            Cplx v = eval_at_prime_digits(ctx, psi, P, digits);
            // multiply by (1 - v T^f)
            std::vector<Cplx> next(poly.size() + P.f, Cplx(prec));
            for (size_t k = 0; k < poly.size(); ++k) {
                next[k] = next[k] + poly[k];
                next[k + P.f] = next[k + P.f] - poly[k] * v;
            }
            poly = std::move(next);
        }
        bool ok = true;
        std::vector<mpz_class> cand;
        for (auto& c : poly) {
            mpz_class r = c.re.round_to_mpz();
            double err = (c.re - Real::from(r, prec)).abs().to_double() + c.im.abs().to_double();
            double scale = std::abs(mpz_get_d(r.get_mpz_t())) + 1.0;
            if (err > 1e-15 * scale) {
                ok = false;
                break;
            }
            cand.push_back(r);
        }
        if (!ok) continue;
        if (!rounded.empty() && rounded == cand) {
            EulerFactor f;
            f.p = p;
            f.weight = w;
            f.coeffs = zx::trim(std::move(cand));
            if (!f.check_weil())
                throw std::runtime_error("euler_factor_Q: Weil bound violated after rounding");
            return f;
        }
        rounded = std::move(cand);
    }
    throw std::runtime_error("euler_factor_Q: certified rounding failed");
}

// ---------------------------------------------------------------- Galois twist

const EvalCtx::TwistMap& EvalCtx::twist_map(const Modulus& m,
                                            std::shared_ptr<const resring::UnitGroup> G, int k) {
    std::string key = m.key() + "@" + std::to_string(k);
    auto it = twist_cache_.find(key);
    if (it != twist_cache_.end()) return it->second;
    TwistMap tm;
    std::vector<std::pair<PrimeIdeal, int>> parts;
    for (auto& [P, e] : m.parts) parts.emplace_back(K_->galois_apply(6 - k, P), e);
    tm.m2 = make_modulus(*K_, parts);
    tm.G2 = mctx_.group(tm.m2);
    tm.gen_dlogs.resize(tm.G2->rank());
    for (size_t j = 0; j < tm.G2->rank(); ++j) {
        NFElement g;
        for (int i = 0; i < DEG; ++i) g.c[i] = tm.G2->gens()[j][i];
        NFElement img = K_->galois_apply(k, g);
        tm.gen_dlogs[j] = G->dlog(img);
    }
    return twist_cache_.emplace(key, std::move(tm)).first->second;
}

HeckeCharacter galois_twist(EvalCtx& ctx, const HeckeCharacter& psi, int k) {
    k = ((k % 6) + 6) % 6;
    if (k == 0) return psi;
    const FieldData& K = ctx.field();

    const EvalCtx::TwistMap& tm = ctx.twist_map(psi.cond, psi.chi.G, k);
    const Modulus& m2 = tm.m2;
    auto G2 = tm.G2;

    HeckeCharacter out;
    out.K = &K;
    out.cond = m2;
    out.chi.G = G2;
    out.chi.exps.resize(G2->rank());
    for (size_t j = 0; j < G2->rank(); ++j) {
        // chi'(g) = chi(sigma^k g), transported through the cached dlogs
        mpq_class val =
            psi.chi.exps.empty() ? mpq_class(0) : psi.chi.value_on_exponents(tm.gen_dlogs[j]);
        mpq_class scaled = val * G2->orders()[j];
        if (scaled.get_den() != 1)
            throw std::logic_error("galois_twist: induced exponent not integral");
        mpz_class a = scaled.get_num() % G2->orders()[j];
        if (a < 0) a += G2->orders()[j];
        out.chi.exps[j] = a;
    }

    // infinity type: phi_s(sigma^k x) = phi_{perm^k[s]}(x)
    std::array<int, 6> perm{0, 1, 2, 3, 4, 5};
    for (int t = 0; t < k; ++t) {
        std::array<int, 6> next;
        for (int s = 0; s < 6; ++s) next[s] = K.sigma_embedding_perm()[perm[s]];
        perm = next;
    }
    std::array<int, 6> n{};
    for (int j = 0; j < 3; ++j) {
        n[perm[2 * j]] += psi.type.ab[j].first;
        n[perm[2 * j + 1]] += psi.type.ab[j].second;
    }
    for (int t = 0; t < 3; ++t) out.type.ab[t] = {n[2 * t], n[2 * t + 1]};

    // class values: snap psi(sigma^k g_j) against the twisted base value
    out.class_values.resize(K.class_gens.size());
    for (size_t j = 0; j < K.class_gens.size(); ++j) {
        PrimeIdeal img = K.galois_apply(k, K.class_gens[j].gen);
        Cplx want = eval_at_prime(ctx, psi, img);
        long o = K.class_gens[j].order;
        Cplx base = class_base_value(ctx, out, j, ctx.digits());
        Cplx root = base.nth_root(static_cast<unsigned long>(o));
        Cplx ratio = want / root;
        auto snapped = snap_root(ratio, o, 1e-15);
        if (!snapped) throw std::logic_error("galois_twist: class value does not snap");
        out.class_values[j].root_index = *snapped;
    }
    return out;
}

// ---------------------------------------------------------------- enumeration

std::vector<std::vector<HeckeCharacter>> enumerate_hecke(
    EvalCtx& ctx, const std::array<std::pair<int, int>, 3>& type_multiset,
    const std::set<long>& bad_primes) {
    const FieldData& K = ctx.field();
    long w = K.torsion_order;

    // maximal modulus over the primes above the bad primes
    std::vector<std::pair<PrimeIdeal, int>> parts;
    for (long p : bad_primes)
        for (const PrimeIdeal& P : split_prime(K, p)) {
            int e = bound_exponents(ctx.modctx(), P, w);
            if (e >= 1) parts.emplace_back(P, e);
        }
    Modulus mmax = make_modulus(K, parts);
    auto G = ctx.modctx().group(mmax);
    auto finite_chars = enumerate_chars(G, w);
    auto types = type_assignments(type_multiset);

    // filter by unit compatibility, reduce to conductors, deduplicate
    std::vector<HeckeCharacter> prims;
    std::set<std::string> seen;
    for (const auto& T : types)
        for (const auto& chi : finite_chars) {
            if (!unit_compatible(ctx, chi, T)) continue;
            auto [cond, chi0] = ctx.modctx().conductor(chi);
            HeckeCharacter h;
            h.K = &K;
            h.cond = cond;
            h.chi = chi0;
            h.type = T;
            h.class_values.resize(K.class_gens.size());
            // all h-consistent extensions over the class generators
            std::vector<long> idx(K.class_gens.size(), 0);
            while (true) {
                for (size_t j = 0; j < idx.size(); ++j) h.class_values[j].root_index = idx[j];
                if (seen.insert(h.key()).second) prims.push_back(h);
                size_t j = 0;
                while (j < idx.size() && ++idx[j] == K.class_gens[j].order) idx[j++] = 0;
                if (j == idx.size()) break;
            }
        }

    // group into Galois orbits
    std::vector<std::vector<HeckeCharacter>> orbits;
    std::set<std::string> grouped;
    std::sort(prims.begin(), prims.end(), [](const HeckeCharacter& a, const HeckeCharacter& b) {
        return a.key() < b.key();
    });
    for (const auto& h : prims) {
        if (grouped.count(h.key())) continue;
        std::vector<HeckeCharacter> orbit;
        for (int k = 0; k < 6; ++k) {
            HeckeCharacter t = galois_twist(ctx, h, k);
            if (!grouped.insert(t.key()).second) continue;
            orbit.push_back(std::move(t));
        }
        orbits.push_back(std::move(orbit));
    }
    return orbits;
}

} // namespace hecke
} // namespace k3hecke
