#ifndef CMEXP_COSETS_HPP
#define CMEXP_COSETS_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <cmexp/mod_matrix.hpp>

namespace cmexp
{

/// Subgroup H of GL_2(Z/N), materialized from generators.
class SubgroupH
{
public:
    SubgroupH(long n, std::vector<ModMatrix> gens) : m_n(n), m_gens(std::move(gens))
    {
        for (const auto &g : m_gens) {
            require(g.modulus() == n, ErrorKind::invalid_input, "generator modulus differs from N");
            require(g.invertible(), ErrorKind::invalid_input, "generator " + g.str() + " is not invertible mod N");
        }
        m_codes = generate_group(n, m_gens);
        m_elems.reserve(m_codes.size());
        for (auto c : m_codes) {
            m_elems.push_back(ModMatrix::from_code(n, c));
        }
    }

    static SubgroupH full(long n)
    {
        std::vector<ModMatrix> g{{n, 1, 1, 0, 1}, {n, 1, 0, 1, 1}};
        for (long u = 1; u < n; ++u) {
            if (gcd64(u, n) == 1) {
                g.emplace_back(n, u, 0, 0, 1);
            }
        }
        return {n, g};
    }
    static SubgroupH borel(long n)
    {
        std::vector<ModMatrix> g{{n, 1, 1, 0, 1}};
        for (long u = 1; u < n; ++u) {
            if (gcd64(u, n) == 1) {
                g.emplace_back(n, u, 0, 0, 1);
                g.emplace_back(n, 1, 0, 0, u);
            }
        }
        return {n, g};
    }

    long modulus() const noexcept
    {
        return m_n;
    }
    const std::vector<ModMatrix> &generators() const noexcept
    {
        return m_gens;
    }
    const std::vector<ModMatrix> &elements() const noexcept
    {
        return m_elems;
    }
    std::size_t size() const noexcept
    {
        return m_codes.size();
    }
    bool contains(const ModMatrix &m) const
    {
        return m.modulus() == m_n && std::binary_search(m_codes.begin(), m_codes.end(), m.code());
    }
    std::uint64_t index() const
    {
        return gl2_order(m_n) / m_codes.size();
    }

    /// -I in H and det: H -> (Z/N)^x surjective.
    void validate() const
    {
        require(contains(-ModMatrix::identity(m_n)), ErrorKind::invalid_input, "H must contain -I");
        std::set<long> dets;
        for (const auto &h : m_elems) {
            dets.insert(h.det());
        }
        long units = 0;
        for (long u = 0; u < m_n; ++u) {
            units += gcd64(u, m_n) == 1 ? 1 : 0;
        }
        require(static_cast<long>(dets.size()) == units, ErrorKind::invalid_input, "det: H -> (Z/N)^x is not surjective");
    }

    /// g^{-1} H g membership.
    bool conjugate_contains(const ModMatrix &g, const ModMatrix &x) const
    {
        return contains(g * x * g.inverse());
    }

private:
    long m_n;
    std::vector<ModMatrix> m_gens;
    std::vector<std::uint64_t> m_codes;
    std::vector<ModMatrix> m_elems;
};

using SubgroupPtr = std::shared_ptr<const SubgroupH>;

/// One representative per right coset Hg, each the least element of its coset
/// in code order.
inline std::vector<ModMatrix> enumerate_cosets(const SubgroupH &h, std::uint64_t budget = 100'000)
{
    const long n = h.modulus();
    std::uint64_t idx = h.index();
    require(idx <= budget, ErrorKind::resource, "coset index " + std::to_string(idx) + " exceeds budget " + std::to_string(budget));
    std::uint64_t n4 = static_cast<std::uint64_t>(n) * n * n * n;
    std::vector<bool> seen(n4, false);
    std::vector<ModMatrix> reps;
    for (std::uint64_t c = 0; c < n4; ++c) {
        if (seen[c]) {
            continue;
        }
        ModMatrix g = ModMatrix::from_code(n, c);
        if (!g.invertible()) {
            continue;
        }
        reps.push_back(g);
        for (const auto &x : h.elements()) {
            seen[(x * g).code()] = true;
        }
    }
    require(reps.size() == idx, ErrorKind::internal, "coset count disagrees with group orders");
    return reps;
}

/// Sorted codes of the closure of a set of matrices (a finite group).
inline std::vector<ModMatrix> group_from(long n, const std::vector<ModMatrix> &gens)
{
    std::vector<ModMatrix> out;
    for (auto c : generate_group(n, gens)) {
        out.push_back(ModMatrix::from_code(n, c));
    }
    return out;
}

/// Double coset H g A, materialized.
class DoubleCoset
{
public:
    DoubleCoset(SubgroupPtr h, ModMatrix g, std::vector<ModMatrix> a) : m_h(std::move(h)), m_g(g)
    {
        const long n = m_h->modulus();
        require(g.modulus() == n && g.invertible(), ErrorKind::invalid_input, "g must be invertible mod N");
        std::vector<ModMatrix> gens = a;
        gens.push_back(-ModMatrix::identity(n));
        m_a = group_from(n, gens);
        std::vector<ModMatrix> sorted_a = a;
        sorted_a.push_back(ModMatrix::identity(n));
        sorted_a.push_back(-ModMatrix::identity(n));
        std::sort(sorted_a.begin(), sorted_a.end());
        sorted_a.erase(std::unique(sorted_a.begin(), sorted_a.end()), sorted_a.end());
        require(sorted_a == m_a, ErrorKind::invalid_input, "automorphism set is not a group containing -I");
        std::set<std::uint64_t> s;
        for (const auto &x : m_h->elements()) {
            ModMatrix xg = x * g;
            for (const auto &y : m_a) {
                s.insert((xg * y).code());
            }
        }
        m_codes.assign(s.begin(), s.end());
    }

    const SubgroupH &H() const noexcept
    {
        return *m_h;
    }
    const SubgroupPtr &H_ptr() const noexcept
    {
        return m_h;
    }
    const ModMatrix &g() const noexcept
    {
        return m_g;
    }
    const std::vector<ModMatrix> &A() const noexcept
    {
        return m_a;
    }
    const std::vector<std::uint64_t> &codes() const noexcept
    {
        return m_codes;
    }
    std::size_t size() const noexcept
    {
        return m_codes.size();
    }
    bool contains(const ModMatrix &x) const
    {
        return std::binary_search(m_codes.begin(), m_codes.end(), x.code());
    }
    /// Canonical representative: least element in code order.
    ModMatrix rep() const
    {
        return ModMatrix::from_code(m_h->modulus(), m_codes.front());
    }
    /// Number of right cosets Hx contained in HgA.
    std::size_t right_coset_count() const
    {
        return m_codes.size() / m_h->size();
    }
    friend bool operator==(const DoubleCoset &x, const DoubleCoset &y)
    {
        return x.m_codes == y.m_codes;
    }

private:
    SubgroupPtr m_h;
    ModMatrix m_g;
    std::vector<ModMatrix> m_a;
    std::vector<std::uint64_t> m_codes;
};

/// All double cosets H \ GL_2(Z/N) / A, ordered by canonical representative.
inline std::vector<DoubleCoset> enumerate_double_cosets(const SubgroupPtr &h, const std::vector<ModMatrix> &a, std::uint64_t budget = 100'000)
{
    std::vector<DoubleCoset> out;
    std::vector<std::uint64_t> covered;
    for (const auto &g : enumerate_cosets(*h, budget)) {
        if (std::binary_search(covered.begin(), covered.end(), g.code())) {
            continue;
        }
        DoubleCoset dc(h, g, a);
        std::vector<std::uint64_t> merged;
        std::merge(covered.begin(), covered.end(), dc.codes().begin(), dc.codes().end(), std::back_inserter(merged));
        covered = std::move(merged);
        out.push_back(std::move(dc));
    }
    std::sort(out.begin(), out.end(), [](const DoubleCoset &x, const DoubleCoset &y) { return x.codes().front() < y.codes().front(); });
    return out;
}

enum class JClass
{
    generic,
    zero,
    k1728
};

/// Image of tau = [[-r, 1], [-s, 0]] in M_2(Z/N).
inline ModMatrix tau_matrix(long n, long r, long s)
{
    return {n, -r, 1, -s, 0};
}

/// Automorphism group of the CM point acting on E[N] through Z[tau].
///
/// For the extra-automorphism classes the generator is x + y*tau with
/// X^2 + 1 = 0 (1728) or X^2 + X + 1 = 0 (0), and X must not be scalar modulo
/// any prime dividing N: a scalar root of unity mod N is not the reduction of
/// an element of Z[tau].
inline std::vector<ModMatrix> automorphism_set(JClass jc, const ModMatrix &tau, long n)
{
    const ModMatrix id = ModMatrix::identity(n);
    if (jc == JClass::generic) {
        return n <= 2 ? std::vector<ModMatrix>{id} : std::vector<ModMatrix>{id, -id};
    }
    require(gcd64(n, 6) == 1, ErrorKind::invalid_input, "N must be coprime to 6 for extra automorphisms");
    auto is_root = [&](const ModMatrix &x) {
        ModMatrix fx = jc == JClass::k1728 ? x * x + id : x * x + x + id;
        return fx == ModMatrix(n, 0, 0, 0, 0);
    };
    const long r = mod(-tau.a(), n), s = mod(-tau.c(), n);
    const long disc = mod(r * r - 4 * s, n);
    std::optional<ModMatrix> root;
    // Closed forms when the discriminant is -4 f^2 or -3 f^2 with 2f invertible mod N.
    for (long f = 1; f <= 64 && !root; ++f) {
        long two_f_inv = inv_mod(2 * f, n);
        if (two_f_inv == 0) {
            continue;
        }
        ModMatrix t2 = 2 * tau + r * id;
        if (jc == JClass::k1728 && mod(-4 * f * f, n) == disc) {
            ModMatrix x = two_f_inv * t2;
            if (is_root(x)) {
                root = x;
            }
        } else if (jc == JClass::zero && mod(-3 * f * f, n) == disc) {
            ModMatrix x = two_f_inv * (t2 - f * id);
            if (is_root(x)) {
                root = x;
            }
        }
    }
    if (!root) {
        auto primes = factor_small(n);
        for (long y = 0; y < n && !root; ++y) {
            bool nonscalar = std::all_of(primes.begin(), primes.end(), [&](const auto &pk) { return y % pk.first != 0; });
            if (!nonscalar) {
                continue;
            }
            for (long x = 0; x < n && !root; ++x) {
                ModMatrix cand = x * id + y * tau;
                if (is_root(cand)) {
                    root = cand;
                }
            }
        }
    }
    require(root.has_value(), ErrorKind::inconsistent_input, "no automorphism of the required order commutes with tau mod " + std::to_string(n));
    return group_from(n, {*root, -id});
}

enum class ReductionType
{
    ordinary,
    supersingular
};

/// Decidable encoding of a reduced level structure: the mod-N0 part and, in the
/// ordinary case with m > 0, the kernel line of the etale surjection.
struct ReducedStructure
{
    long n0 = 1;
    std::uint64_t n0_code = 0;
    long pm = 1;
    std::uint64_t line = 0;
    ReductionType type = ReductionType::supersingular;

    friend bool operator==(const ReducedStructure &a, const ReducedStructure &b)
    {
        return std::tie(a.n0, a.n0_code, a.pm, a.line, a.type) == std::tie(b.n0, b.n0_code, b.pm, b.line, b.type);
    }
    friend bool operator<(const ReducedStructure &a, const ReducedStructure &b)
    {
        return std::tie(a.n0, a.n0_code, a.pm, a.line, a.type) < std::tie(b.n0, b.n0_code, b.pm, b.line, b.type);
    }
};

/// Reduction data at a prime p with N = N0 p^m.
struct ReductionContext
{
    long p = 0;
    int m = 0;
    ReductionType type = ReductionType::supersingular;
    std::vector<ModMatrix> a_fp;          // automorphisms of the reduced curve, mod N
    std::array<long, 2> kernel{1, 0};     // generator of the kernel line in E-coordinates (ordinary case)
};

namespace detail
{

inline long ipow(long b, int e)
{
    long r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
    }
    return r;
}

/// Canonical code of the cyclic subgroup generated by (x, y) in (Z/pm)^2.
inline std::uint64_t line_code(long pm, long x, long y)
{
    std::uint64_t best = ~std::uint64_t(0);
    for (long u = 1; u < pm; ++u) {
        if (gcd64(u, pm) != 1) {
            continue;
        }
        auto c = static_cast<std::uint64_t>(mod(u * x, pm)) * static_cast<std::uint64_t>(pm) + static_cast<std::uint64_t>(mod(u * y, pm));
        best = std::min(best, c);
    }
    return pm == 1 ? 0 : best;
}

/// line_code for every vector of (Z/pm)^2, indexed by x * pm + y.
inline std::vector<std::uint64_t> line_table(long pm)
{
    std::vector<std::uint64_t> t(static_cast<std::size_t>(pm * pm));
    for (long x = 0; x < pm; ++x) {
        for (long y = 0; y < pm; ++y) {
            t[static_cast<std::size_t>(x * pm + y)] = line_code(pm, x, y);
        }
    }
    return t;
}

struct PrimeSplit
{
    long n0;
    long pm;
};

inline PrimeSplit split_level(long n, long p, int m)
{
    long pm = ipow(p, m);
    require(p >= 2 && n % pm == 0, ErrorKind::invalid_input, "p^m must divide N");
    long n0 = n / pm;
    require(n0 % p != 0, ErrorKind::invalid_input, "m must be the exact power of p dividing N");
    return {n0, pm};
}

/// Minimum over h in H, a in A of the key of h g a. With `full_a` false the
/// A-action is applied to the mod-N0 part only.
inline ReducedStructure reduce_structure(const SubgroupH &h, const ModMatrix &g, const ReductionContext &ctx, const std::vector<ModMatrix> &a, bool full_a)
{
    const long n = h.modulus();
    auto [n0, pm] = split_level(n, ctx.p, ctx.m);
    const bool etale = ctx.type == ReductionType::ordinary && ctx.m > 0;
    static thread_local std::map<long, std::vector<std::uint64_t>> tables;
    auto it = tables.find(pm);
    if (it == tables.end()) {
        it = tables.emplace(pm, line_table(pm)).first;
    }
    const auto &lines = it->second;
    auto line_of = [&](const std::array<long, 2> &v) { return lines[static_cast<std::size_t>(v[0] * pm + v[1])]; };
    ReducedStructure best;
    bool have = false;
    for (const auto &x : h.elements()) {
        ModMatrix xg = x * g;
        std::uint64_t plain_line = 0;
        if (etale && !full_a) {
            plain_line = line_of(xg.apply(ctx.kernel[0], ctx.kernel[1]));
        }
        for (const auto &y : a) {
            ModMatrix xga = xg * y;
            ReducedStructure s;
            s.n0 = n0;
            s.n0_code = xga.reduce(n0).code();
            s.pm = etale ? pm : 1;
            s.type = ctx.type;
            if (etale) {
                if (full_a) {
                    s.line = line_of(xga.apply(ctx.kernel[0], ctx.kernel[1]));
                } else {
                    s.line = plain_line;
                }
            }
            if (!have || s < best) {
                best = s;
                have = true;
            }
        }
    }
    return best;
}

inline std::vector<ModMatrix> fp_automorphisms(const DoubleCoset &c, const ReductionContext &ctx)
{
    const long n = c.H().modulus();
    std::vector<ModMatrix> gens = c.A();
    for (const auto &x : ctx.a_fp) {
        require(x.modulus() == n, ErrorKind::invalid_input, "reduced automorphism modulus differs from N");
        gens.push_back(x);
    }
    return group_from(n, gens);
}

inline void check_kernel(const ReductionContext &ctx)
{
    if (ctx.type != ReductionType::ordinary || ctx.m == 0) {
        return;
    }
    bool ok = ctx.kernel[0] % ctx.p != 0 || ctx.kernel[1] % ctx.p != 0;
    require(ok, ErrorKind::invalid_input, "kernel generator does not have order p^m");
}

} // namespace detail

/// pr_*: reduction of the level structure H g A modulo the prime, normalized by
/// the left H-action and the right action of the reduced automorphism group.
inline ReducedStructure pr_star(const DoubleCoset &c, const ReductionContext &ctx)
{
    detail::check_kernel(ctx);
    return detail::reduce_structure(c.H(), c.g(), ctx, detail::fp_automorphisms(c, ctx), true);
}

/// The fiber of pr_* through c among the double cosets H g' A (A the
/// characteristic-zero automorphisms of c).
struct Fiber
{
    std::vector<DoubleCoset> members;
    /// True when applying the reduced automorphisms to the etale part as well
    /// as the mod-N0 part changes the fiber size.
    bool a_action_matters = false;
};

inline Fiber fiber(const DoubleCoset &c, const ReductionContext &ctx, std::uint64_t budget = 100'000)
{
    detail::check_kernel(ctx);
    auto afp = detail::fp_automorphisms(c, ctx);
    auto target = detail::reduce_structure(c.H(), c.g(), ctx, afp, true);
    auto target_alt = detail::reduce_structure(c.H(), c.g(), ctx, afp, false);
    Fiber out;
    std::size_t alt = 0;
    for (auto &d : enumerate_double_cosets(c.H_ptr(), c.A(), budget)) {
        if (detail::reduce_structure(d.H(), d.g(), ctx, afp, false) == target_alt) {
            ++alt;
        }
        if (detail::reduce_structure(d.H(), d.g(), ctx, afp, true) == target) {
            out.members.push_back(std::move(d));
        }
    }
    out.a_action_matters = alt != out.members.size();
    return out;
}

inline long ram_index(const DoubleCoset &c, const ReductionContext &ctx, std::uint64_t budget = 100'000)
{
    return static_cast<long>(fiber(c, ctx, budget).members.size());
}

/// Every cyclic subgroup of order p^m in (Z/p^m)^2, by a generator.
inline std::vector<std::array<long, 2>> cyclic_kernels(long p, int m)
{
    long pm = detail::ipow(p, m);
    std::vector<std::array<long, 2>> out;
    for (long y = 0; y < pm; ++y) {
        out.push_back({1, y});
    }
    for (long x = 0; x < pm / p; ++x) {
        out.push_back({p * x, 1});
    }
    return out;
}

/// e_den: the ramification index itself in the supersingular case, and its
/// maximum over all cyclic kernels of order p^m in the ordinary case.
inline long e_den(const DoubleCoset &c, const ReductionContext &ctx, std::uint64_t budget = 100'000)
{
    if (ctx.type == ReductionType::supersingular || ctx.m == 0) {
        return ram_index(c, ctx, budget);
    }
    auto afp = detail::fp_automorphisms(c, ctx);
    auto all = enumerate_double_cosets(c.H_ptr(), c.A(), budget);
    long best = 0;
    for (const auto &k : cyclic_kernels(ctx.p, ctx.m)) {
        ReductionContext kc = ctx;
        kc.kernel = k;
        auto target = detail::reduce_structure(c.H(), c.g(), kc, afp, true);
        long e = 0;
        for (const auto &d : all) {
            if (detail::reduce_structure(d.H(), d.g(), kc, afp, true) == target) {
                ++e;
            }
        }
        best = std::max(best, e);
    }
    return best;
}

} // namespace cmexp

#endif
