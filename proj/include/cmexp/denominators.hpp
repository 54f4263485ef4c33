#ifndef CMEXP_DENOMINATORS_HPP
#define CMEXP_DENOMINATORS_HPP

#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <cmexp/certificate.hpp>
#include <cmexp/formal_group.hpp>
#include <cmexp/number_field.hpp>
#include <cmexp/quaternion.hpp>

namespace cmexp
{

/// What to do when p in {2, 3} divides j_E (j_E - 1728).
enum class SmallPrimePolicy
{
    reject,       // out-of-scope error
    conservative  // v_den = v_a over both j0, no containment test
};

/// Everything the per-prime driver needs about the CM point and the level structure.
struct BasepointContext
{
    long n = 1;
    SubgroupPtr h;
    ModMatrix g;
    long r = 0, s = 0;                          // tau^2 + r tau + s = 0
    NumberFieldElement j_e;
    std::map<long, ReductionType> hints;        // per-prime overrides
    SmallPrimePolicy small_primes = SmallPrimePolicy::reject;
    std::uint64_t budget = 100'000;
    long padic_digits = 16;

    long discriminant() const
    {
        return r * r - 4 * s;
    }
    void validate() const
    {
        require(n >= 1 && gcd64(n, 6) == 1, ErrorKind::invalid_input, "N must be coprime to 6");
        require(h != nullptr && h->modulus() == n, ErrorKind::invalid_input, "H must be a subgroup of GL2(Z/N)");
        h->validate();
        require(g.modulus() == n && g.invertible(), ErrorKind::invalid_input, "g must be invertible mod N");
        require(discriminant() < 0, ErrorKind::invalid_input, "tau must be imaginary quadratic");
        require(!j_e.is_rational() || (j_e.coords()[0] != 0 && j_e.coords()[0] != 1728), ErrorKind::out_of_scope,
                "j_E in {0, 1728} needs a larger cover and is not supported");
        require(j_e.is_integral(), ErrorKind::invalid_input, "CM j-invariants are algebraic integers");
    }
};

struct TaggedPrime
{
    long p = 0;
    bool divides_n = false;
    bool divides_j = false;      // p | Norm(j_E)
    bool divides_j1728 = false;  // p | Norm(j_E - 1728)

    std::string tags() const
    {
        std::string t;
        auto add = [&](bool b, const char *s) {
            if (b) {
                t += t.empty() ? s : std::string(",") + s;
            }
        };
        add(divides_n, "N");
        add(divides_j, "j");
        add(divides_j1728, "j-1728");
        return t;
    }
};

inline NumberFieldElement j_minus(const NumberFieldElement &j, long j0)
{
    return j - NumberFieldElement(j.field(), Rational(j0));
}

/// Primes dividing N Norm(j_E) Norm(j_E - 1728), ascending, with their triggers.
inline std::vector<TaggedPrime> relevant_primes(long n, const NumberFieldElement &j)
{
    require(!j_minus(j, 0).is_zero() && !j_minus(j, 1728).is_zero(), ErrorKind::out_of_scope,
            "j_E in {0, 1728} needs a larger cover and is not supported");
    std::map<long, TaggedPrime> out;
    auto collect = [&](const Integer &x, bool TaggedPrime::*flag) {
        for (const auto &[p, e] : factor(abs(x))) {
            require(p.fits_slong_p(), ErrorKind::out_of_scope, "prime " + to_string(p) + " is too large for the level-structure machinery");
            auto &t = out[p.get_si()];
            t.p = p.get_si();
            t.*flag = true;
        }
    };
    if (n > 1) {
        collect(Integer(n), &TaggedPrime::divides_n);
    }
    collect(j.norm().get_num(), &TaggedPrime::divides_j);
    collect(j_minus(j, 1728).norm().get_num(), &TaggedPrime::divides_j1728);
    std::vector<TaggedPrime> v;
    for (const auto &[p, t] : out) {
        v.push_back(t);
    }
    return v;
}

/// max over embeddings L -> Qbar_p of nu(x), nu(p) = 1: the steepest root valuation read
/// off the Newton polygon of the characteristic polynomial.
inline Rational max_valuation(const NumberFieldElement &x, long p)
{
    require(!x.is_zero(), ErrorKind::invalid_input, "valuation of zero");
    QPoly c = x.charpoly();
    const Integer P(p);
    long v0 = valuation(c[0], P);
    Rational best = 0;
    bool have = false;
    for (std::size_t k = 1; k < c.size(); ++k) {
        if (c[k] == 0) {
            continue;
        }
        Rational v = ratio(v0 - valuation(c[k], P), static_cast<long>(k));
        if (!have || v > best) {
            best = v;
            have = true;
        }
    }
    return best;
}

/// Reduction type of the CM curve at p: ordinary iff p splits in Q(tau).
inline ReductionType cm_reduction_type(const BasepointContext &ctx, long p)
{
    auto it = ctx.hints.find(p);
    if (it != ctx.hints.end()) {
        return it->second;
    }
    return mpz_kronecker_si(Integer(ctx.discriminant()).get_mpz_t(), p) == 1 ? ReductionType::ordinary : ReductionType::supersingular;
}

/// Whether the reduction of the curve with j = j0 at p >= 5 is supersingular.
inline bool j0_supersingular(JClass j0, long p)
{
    return j0 == JClass::zero ? p % 3 == 2 : p % 4 == 3;
}

/// v_{d,vert} at p | N: 1/(p-1) when ordinary; from the polygon of [p](T) when
/// supersingular and j_E is rational; otherwise the cap 1/(p^2 - p) (r >= 0).
inline VerticalBound vertical_bound(const BasepointContext &ctx, long p, int m, ReductionType type, std::string &note)
{
    VerticalBound vb;
    if (type == ReductionType::ordinary) {
        vb.height = 1;
        vb.value = ratio(1, p - 1);
        return vb;
    }
    if (!ctx.j_e.is_rational()) {
        vb.height = 2;
        vb.value = ratio(1, p * p - p);
        note += "supersingular polygon not computed for irrational j_E; using r >= 0. ";
        return vb;
    }
    auto model = model_from_j(ctx.j_e.coords()[0]);
    auto good = good_reduction_model(to_padic(model, Integer(p), 1, ctx.padic_digits), p);
    auto f = FormalGroupLaw<PadicElement>::from_model(good.model, static_cast<std::size_t>(p * p + 2));
    vb = v_vert_details(f, p, m);
    require(vb.height == 2, ErrorKind::inconsistent_input,
            "formal group at p = " + std::to_string(p) + " is ordinary but the CM data predicts supersingular reduction");
    return vb;
}

namespace detail
{

inline std::vector<ModMatrix> reduced_automorphisms(const BasepointContext &ctx, long p, JClass j0, ReductionType j0_type)
{
    ModMatrix t = tau_matrix(ctx.n, ctx.r, ctx.s);
    if (j0_type == ReductionType::ordinary) {
        return automorphism_set(j0, t, ctx.n);
    }
    return m_j0(maximal_order_for(p, j0), ctx.r, ctx.s, ctx.n, j0).set;
}

inline int exact_power(long n, long p)
{
    int m = 0;
    while (n % p == 0) {
        n /= p;
        ++m;
    }
    return m;
}

} // namespace detail

/// Per-prime v_den with the values it is assembled from.
inline PrimeEntry v_den_for_prime(const TaggedPrime &tp, const BasepointContext &ctx)
{
    const long p = tp.p;
    PrimeEntry e;
    e.triggers = tp.tags();
    // 1. v_a over the applicable j0.
    std::optional<JClass> j0;
    Rational va = 0;
    for (auto [jc, val] : {std::pair{JClass::zero, 0L}, std::pair{JClass::k1728, 1728L}}) {
        bool triggered = jc == JClass::zero ? tp.divides_j : tp.divides_j1728;
        if (!triggered) {
            continue;
        }
        Rational v = max_valuation(j_minus(ctx.j_e, val), p);
        if (v > va) {
            va = v;
            j0 = jc;
        }
    }
    e.v_a = va;
    if (p < 5) {
        require(!(va > 0) || ctx.small_primes == SmallPrimePolicy::conservative, ErrorKind::out_of_scope,
                "p = " + std::to_string(p) + " divides j_E (j_E - 1728); small primes are rejected by policy");
        e.r = va;
        e.provenance = Provenance::horizontal;
        if (va > 0) {
            e.note = "small prime: v_a over both j0, containment test skipped";
        }
        return e;
    }
    // 2. vertical part.
    Rational v = 0;
    if (tp.divides_n) {
        int m = detail::exact_power(ctx.n, p);
        ReductionType type = cm_reduction_type(ctx, p);
        auto vb = vertical_bound(ctx, p, m, type, e.note);
        ReductionContext rc;
        rc.p = p;
        rc.m = m;
        rc.type = type;
        if (j0 && va > 0) {
            rc.a_fp = detail::reduced_automorphisms(ctx, p, *j0, j0_supersingular(*j0, p) ? ReductionType::supersingular : ReductionType::ordinary);
        }
        DoubleCoset c(ctx.h, ctx.g, {});
        long ed = e_den(c, rc, ctx.budget);
        e.e_den = ed;
        e.v_d_vert = vb.value;
        v = vb.value * ed;
    }
    e.vertical = v;
    // 3. vertical dominates.
    if (v >= va) {
        e.r = v;
        e.provenance = Provenance::vertical;
        return e;
    }
    // 4. horizontal containment test.
    bool ss = j0_supersingular(*j0, p);
    auto m = detail::reduced_automorphisms(ctx, p, *j0, ss ? ReductionType::supersingular : ReductionType::ordinary);
    bool contained = containment(m, *ctx.h, ctx.g);
    e.horizontal_contained = contained;
    e.r = contained ? v : std::max(v, va);
    e.provenance = v > 0 ? Provenance::combined : Provenance::horizontal;
    e.note += std::string(ss ? "rank 4" : "rank 2") + " horizontal test at j0 = " + (*j0 == JClass::zero ? "0" : "1728");
    return e;
}

/// C = prod p^{v_den(p)} over the relevant primes; primes are certified in parallel.
inline DenominatorCertificate certify(const BasepointContext &ctx, unsigned jobs = 1)
{
    ctx.validate();
    auto primes = relevant_primes(ctx.n, ctx.j_e);
    DenominatorCertificate cert;
    if (jobs <= 1) {
        for (const auto &tp : primes) {
            cert.entries[tp.p] = v_den_for_prime(tp, ctx);
        }
        return cert;
    }
    std::vector<std::future<PrimeEntry>> pending;
    std::size_t next = 0;
    std::vector<PrimeEntry> done(primes.size());
    while (next < primes.size()) {
        pending.clear();
        std::size_t base = next;
        for (unsigned k = 0; k < jobs && next < primes.size(); ++k, ++next) {
            pending.push_back(std::async(std::launch::async, [&, i = next] { return v_den_for_prime(primes[i], ctx); }));
        }
        for (std::size_t k = 0; k < pending.size(); ++k) {
            done[base + k] = pending[k].get();
        }
    }
    for (std::size_t i = 0; i < primes.size(); ++i) {
        cert.entries[primes[i].p] = done[i];
    }
    return cert;
}

} // namespace cmexp

#endif
