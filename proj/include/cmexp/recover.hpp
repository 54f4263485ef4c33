#ifndef CMEXP_RECOVER_HPP
#define CMEXP_RECOVER_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <cmexp/ball.hpp>
#include <cmexp/linalg.hpp>
#include <cmexp/number_field.hpp>

namespace cmexp
{

struct AbelianStructure
{
    std::vector<long> invariants;          // d_1 | d_2 | ... | d_k, all > 1
    std::vector<std::size_t> generators;   // sigma indices, one per invariant
};

/// L/K with K = Q or imaginary quadratic, and Gal(L/K) as matrices on the power basis of L:
/// coords(sigma_i(x)) = sigma[i] * coords(x).
struct GaloisData
{
    FieldPtr L;
    std::vector<Integer> k_poly{Integer(0), Integer(1)};
    std::vector<Rational> k_gen;  // coordinates in L of a root of k_poly; empty when K = Q
    std::vector<QMatrix> sigma;
    std::size_t root_index = 0;   // the embedding iota
    std::optional<AbelianStructure> abelian;

    std::size_t d() const
    {
        return sigma.size();
    }
    bool k_is_q() const
    {
        return k_gen.empty();
    }

    NumberFieldElement apply(std::size_t i, const NumberFieldElement &x) const
    {
        return NumberFieldElement(L, linalg::mul(sigma[i], x.coords()));
    }

    /// Matrix of the automorphism theta -> y: column k holds the coordinates of y^k.
    static QMatrix matrix_from_image(const FieldPtr &field, const NumberFieldElement &y)
    {
        const std::size_t n = field->degree();
        QMatrix m = linalg::zeros(n, n);
        NumberFieldElement pw(field, Rational(1));
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                m[i][k] = pw.coords()[i];
            }
            pw = pw * y;
        }
        return m;
    }

    /// cayley()[i][j] = index of sigma_i sigma_j.
    std::vector<std::vector<std::size_t>> cayley() const
    {
        std::vector<std::vector<std::size_t>> t(d(), std::vector<std::size_t>(d()));
        for (std::size_t i = 0; i < d(); ++i) {
            for (std::size_t j = 0; j < d(); ++j) {
                QMatrix p = linalg::mul(sigma[i], sigma[j]);
                auto it = std::find(sigma.begin(), sigma.end(), p);
                require(it != sigma.end(), ErrorKind::invalid_input, "sigma-table is not closed under composition");
                t[i][j] = static_cast<std::size_t>(it - sigma.begin());
            }
        }
        return t;
    }

    std::size_t inverse_index(std::size_t i) const
    {
        auto t = cayley();
        for (std::size_t j = 0; j < d(); ++j) {
            if (t[i][j] == 0) {
                return j;
            }
        }
        fail(ErrorKind::invalid_input, "sigma-table element without inverse");
    }

    void validate() const;
};

namespace detail
{

inline Integer floor_div(const Integer &a, const Integer &b)
{
    Integer q;
    mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return q;
}

inline bool is_integer_monic(const std::vector<Integer> &c)
{
    return c.size() >= 2 && c.back() == 1;
}

} // namespace detail

inline void GaloisData::validate() const
{
    require(L != nullptr, ErrorKind::invalid_input, "GaloisData without a field");
    const std::size_t n = L->degree();
    require(!sigma.empty(), ErrorKind::invalid_input, "empty sigma-table");
    require(root_index < n, ErrorKind::invalid_input, "root index out of range");
    for (const auto &m : sigma) {
        require(m.size() == n && std::all_of(m.begin(), m.end(), [&](const auto &row) { return row.size() == n; }),
                ErrorKind::invalid_input, "sigma matrices must be n x n");
    }
    require(sigma[0] == linalg::identity(n), ErrorKind::invalid_input, "sigma_0 must be the identity");
    auto theta = NumberFieldElement::generator(L);
    for (std::size_t i = 0; i < d(); ++i) {
        auto y = apply(i, theta);
        NumberFieldElement fy(L);
        for (std::size_t k = L->coeffs().size(); k-- > 0;) {
            fy = fy * y + NumberFieldElement(L, Rational(L->coeffs()[k]));
        }
        require(fy.is_zero(), ErrorKind::invalid_input, "sigma_" + std::to_string(i) + " does not map theta to a root of the defining polynomial");
        require(matrix_from_image(L, y) == sigma[i], ErrorKind::invalid_input, "sigma_" + std::to_string(i) + " is not a field automorphism");
    }
    auto t = cayley();
    for (std::size_t i = 0; i + 1 < d(); ++i) {
        require(std::find(sigma.begin() + static_cast<long>(i) + 1, sigma.end(), sigma[i]) == sigma.end(), ErrorKind::invalid_input,
                "sigma-table has repeated entries");
    }
    if (k_is_q()) {
        require(n == d(), ErrorKind::invalid_input, "[L:Q] must equal d when K = Q");
    } else {
        require(k_poly.size() == 3 && detail::is_integer_monic(k_poly), ErrorKind::invalid_input, "K must be given by a monic integer quadratic");
        require(k_poly[1] * k_poly[1] - 4 * k_poly[0] < 0, ErrorKind::out_of_scope, "K must be Q or imaginary quadratic");
        require(n == 2 * d(), ErrorKind::invalid_input, "[L:Q] must equal 2d for quadratic K");
        NumberFieldElement w(L, k_gen);
        NumberFieldElement kw = w * w + w * Rational(k_poly[1]) + NumberFieldElement(L, Rational(k_poly[0]));
        require(kw.is_zero(), ErrorKind::invalid_input, "k_gen is not a root of the K polynomial");
        for (std::size_t i = 0; i < d(); ++i) {
            require(apply(i, w) == w, ErrorKind::invalid_input, "sigma_" + std::to_string(i) + " does not fix K");
        }
    }
    if (abelian) {
        long prod = 1;
        for (std::size_t i = 0; i < abelian->invariants.size(); ++i) {
            long di = abelian->invariants[i];
            require(di > 1 && (i == 0 || di % abelian->invariants[i - 1] == 0), ErrorKind::invalid_input, "invariant factors must form a divisibility chain");
            prod *= di;
        }
        require(static_cast<std::size_t>(prod) == d(), ErrorKind::invalid_input, "product of invariant factors must equal d");
        require(abelian->generators.size() == abelian->invariants.size(), ErrorKind::invalid_input, "one generator per invariant factor");
        for (auto g : abelian->generators) {
            require(g < d(), ErrorKind::invalid_input, "generator index out of range");
            for (auto h : abelian->generators) {
                require(t[g][h] == t[h][g], ErrorKind::invalid_input, "generators do not commute");
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Smith normal form

struct SmithForm
{
    std::vector<Integer> invariants;               // nontrivial diagonal entries, chain order (0 = free)
    std::vector<std::vector<Integer>> generators;  // matching generators as vectors over the input generators
};

/// Smith form of Z^ngens / (row span of relations).
inline SmithForm smith_form(std::vector<std::vector<Integer>> m, std::size_t ngens)
{
    for (const auto &row : m) {
        require(row.size() == ngens, ErrorKind::invalid_input, "relation length must equal the number of generators");
    }
    const std::size_t rows = m.size(), cols = ngens;
    std::vector<std::vector<Integer>> vinv(cols, std::vector<Integer>(cols, 0));
    for (std::size_t i = 0; i < cols; ++i) {
        vinv[i][i] = 1;
    }
    auto swap_cols = [&](std::size_t i, std::size_t j) {
        for (auto &row : m) {
            std::swap(row[i], row[j]);
        }
        std::swap(vinv[i], vinv[j]);
    };
    // col_j -= q col_i
    auto col_op = [&](std::size_t i, std::size_t j, const Integer &q) {
        for (auto &row : m) {
            row[j] -= q * row[i];
        }
        for (std::size_t k = 0; k < cols; ++k) {
            vinv[i][k] += q * vinv[j][k];
        }
    };
    std::size_t t = 0;
    for (; t < std::min(rows, cols); ++t) {
        while (true) {
            // smallest nonzero entry of the remaining block
            std::size_t pi = rows, pj = cols;
            for (std::size_t i = t; i < rows; ++i) {
                for (std::size_t j = t; j < cols; ++j) {
                    if (m[i][j] != 0 && (pi == rows || abs(m[i][j]) < abs(m[pi][pj]))) {
                        pi = i;
                        pj = j;
                    }
                }
            }
            if (pi == rows) {
                goto done;
            }
            std::swap(m[t], m[pi]);
            if (pj != t) {
                swap_cols(t, pj);
            }
            bool clean = true;
            for (std::size_t i = t + 1; i < rows; ++i) {
                Integer q = detail::floor_div(m[i][t], m[t][t]);
                for (std::size_t j = t; j < cols; ++j) {
                    m[i][j] -= q * m[t][j];
                }
                clean = clean && m[i][t] == 0;
            }
            for (std::size_t j = t + 1; j < cols; ++j) {
                Integer q = detail::floor_div(m[t][j], m[t][t]);
                if (q != 0) {
                    col_op(t, j, q);
                }
                clean = clean && m[t][j] == 0;
            }
            if (!clean) {
                continue;
            }
            // divisibility of the rest by the pivot
            std::size_t bad = rows;
            for (std::size_t i = t + 1; i < rows && bad == rows; ++i) {
                for (std::size_t j = t + 1; j < cols; ++j) {
                    if (m[i][j] % m[t][t] != 0) {
                        bad = i;
                        break;
                    }
                }
            }
            if (bad == rows) {
                break;
            }
            for (std::size_t j = t; j < cols; ++j) {
                m[t][j] += m[bad][j];
            }
        }
    }
done:
    SmithForm out;
    for (std::size_t i = 0; i < cols; ++i) {
        Integer di = i < t ? abs(m[i][i]) : Integer(0);
        if (di == 1) {
            continue;
        }
        out.invariants.push_back(di);
        std::vector<Integer> g = vinv[i];
        if (di != 0) {
            for (auto &x : g) {
                x = mod(x, di);
            }
        }
        out.generators.push_back(std::move(g));
    }
    // zeros (free factors) go last
    std::vector<std::size_t> idx(out.invariants.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        idx[i] = i;
    }
    std::stable_partition(idx.begin(), idx.end(), [&](std::size_t i) { return out.invariants[i] != 0; });
    SmithForm sorted;
    for (auto i : idx) {
        sorted.invariants.push_back(out.invariants[i]);
        sorted.generators.push_back(out.generators[i]);
    }
    return sorted;
}

/// Invariant factors of a finite group given by its Cayley table, with the lexicographically
/// smallest tuple of element indices generating it as Z/d_1 x ... x Z/d_k.
inline AbelianStructure abelian_structure(const std::vector<std::vector<std::size_t>> &table)
{
    const std::size_t d = table.size();
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            require(table[i][j] == table[j][i], ErrorKind::invalid_input, "Galois group is not abelian");
        }
    }
    // presentation: generators = all elements, relations e_a + e_b - e_{ab}
    std::vector<std::vector<Integer>> rel;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            std::vector<Integer> r(d, 0);
            r[a] += 1;
            r[b] += 1;
            r[table[a][b]] -= 1;
            rel.push_back(std::move(r));
        }
    }
    auto snf = smith_form(rel, d);
    AbelianStructure s;
    for (const auto &x : snf.invariants) {
        require(x != 0, ErrorKind::internal, "finite group with a free factor");
        s.invariants.push_back(x.get_si());
    }
    std::size_t id = 0;
    auto power = [&](std::size_t g, long e) {
        std::size_t r = id;
        for (long i = 0; i < e; ++i) {
            r = table[r][g];
        }
        return r;
    };
    auto order = [&](std::size_t g) {
        long k = 1;
        for (std::size_t x = g; x != id; x = table[x][g]) {
            ++k;
        }
        return k;
    };
    const std::size_t k = s.invariants.size();
    std::vector<std::size_t> pick;
    // depth-first in index order; the first complete tuple is the lexicographic minimum
    std::function<bool(std::vector<bool> &)> search = [&](std::vector<bool> &span) -> bool {
        if (pick.size() == k) {
            return true;
        }
        long dt = s.invariants[pick.size()];
        for (std::size_t g = 0; g < d; ++g) {
            if (order(g) != dt) {
                continue;
            }
            // new span = span + <g>, must have size |span| * dt
            std::vector<bool> next(d, false);
            std::size_t count = 0;
            bool ok = true;
            for (std::size_t x = 0; x < d && ok; ++x) {
                if (!span[x]) {
                    continue;
                }
                for (long e = 0; e < dt; ++e) {
                    std::size_t y = table[x][power(g, e)];
                    if (next[y]) {
                        ok = false;
                        break;
                    }
                    next[y] = true;
                    ++count;
                }
            }
            if (!ok) {
                continue;
            }
            pick.push_back(g);
            if (search(next)) {
                return true;
            }
            pick.pop_back();
        }
        return false;
    };
    std::vector<bool> span(d, false);
    span[id] = true;
    require(search(span), ErrorKind::internal, "no generator tuple for the Smith form");
    s.generators = pick;
    return s;
}

/// Map from the flattened index of (m_1, ..., m_k) (row-major) to the sigma index of prod g_t^{m_t}.
inline std::vector<std::size_t> abelian_index_map(const AbelianStructure &s, const std::vector<std::vector<std::size_t>> &table)
{
    std::vector<std::size_t> out{0};
    for (std::size_t t = 0; t < s.invariants.size(); ++t) {
        std::vector<std::size_t> next;
        for (auto x : out) {
            std::size_t y = x;
            for (long e = 0; e < s.invariants[t]; ++e) {
                next.push_back(y);
                y = table[y][s.generators[t]];
            }
        }
        out = std::move(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// DFT over Z/d_1 x ... x Z/d_k

/// Forward: F(x)[m] = sum_i x[i] prod_t mu_{d_t}^{-i_t m_t}; inverse uses +i.m and divides by #G.
/// Arrays are flattened row-major; mu_{d_t} = mu_{d_k}^{d_k / d_t}.
inline std::vector<ComplexBall> dft(const std::vector<ComplexBall> &x, const std::vector<long> &dims, bool inverse, long prec)
{
    long size = 1;
    for (long dt : dims) {
        require(dt >= 1, ErrorKind::invalid_input, "DFT dimensions must be positive");
        size *= dt;
    }
    require(static_cast<long>(x.size()) == size, ErrorKind::invalid_input, "DFT array size does not match dims");
    const long dk = dims.empty() ? 1 : *std::max_element(dims.begin(), dims.end());
    for (long dt : dims) {
        require(dk % dt == 0, ErrorKind::invalid_input, "DFT dims must divide the largest one");
    }
    std::vector<ComplexBall> mu(static_cast<std::size_t>(dk), ComplexBall(prec, 1L));
    if (dk > 1) {
        ComplexBall root = ball::exp(ComplexBall(prec, Rational(0), ratio(2, dk)) * ball::pi(prec));
        for (long e = 1; e < dk; ++e) {
            mu[static_cast<std::size_t>(e)] = mu[static_cast<std::size_t>(e - 1)] * root;
        }
    }
    // multi-index of each flat index
    std::vector<std::vector<long>> idx(static_cast<std::size_t>(size));
    for (long f = 0; f < size; ++f) {
        long r = f;
        std::vector<long> v(dims.size());
        for (std::size_t t = dims.size(); t-- > 0;) {
            v[t] = r % dims[t];
            r /= dims[t];
        }
        idx[static_cast<std::size_t>(f)] = std::move(v);
    }
    std::vector<ComplexBall> out(static_cast<std::size_t>(size), ComplexBall(prec));
    for (long m = 0; m < size; ++m) {
        ComplexBall acc(prec);
        for (long i = 0; i < size; ++i) {
            long e = 0;
            for (std::size_t t = 0; t < dims.size(); ++t) {
                e += idx[static_cast<std::size_t>(i)][t] * idx[static_cast<std::size_t>(m)][t] * (dk / dims[t]);
            }
            e %= dk;
            if (!inverse) {
                e = (dk - e) % dk;
            }
            acc += x[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(e)];
        }
        if (inverse) {
            acc = acc * ComplexBall(prec, ratio(1, size));
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

/// (a * b)[j] = sum_k a[j - k] b[k] over Z/d_1 x ... x Z/d_k.
inline std::vector<ComplexBall> group_convolution(const std::vector<ComplexBall> &a, const std::vector<ComplexBall> &b, const std::vector<long> &dims)
{
    const std::size_t size = a.size();
    auto sub = [&](std::size_t j, std::size_t k) {
        std::size_t out = 0, rj = j, rk = k, stride = 1;
        for (std::size_t t = dims.size(); t-- > 0;) {
            long dt = dims[t];
            long x = (static_cast<long>(rj % dt) - static_cast<long>(rk % dt) + dt) % dt;
            out += static_cast<std::size_t>(x) * stride;
            stride *= static_cast<std::size_t>(dt);
            rj /= dt;
            rk /= dt;
        }
        return out;
    };
    std::vector<ComplexBall> out(size, ComplexBall(a.empty() ? 128 : a[0].prec()));
    for (std::size_t j = 0; j < size; ++j) {
        for (std::size_t k = 0; k < size; ++k) {
            out[j] += a[sub(j, k)] * b[k];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Index bound via Dedekind's criterion

namespace detail
{

using FpPoly = std::vector<long>;

inline void fp_trim(FpPoly &a)
{
    while (!a.empty() && a.back() == 0) {
        a.pop_back();
    }
}

inline long fp_mulmod(long a, long b, long p)
{
    return static_cast<long>(static_cast<__int128>(a) * b % p);
}

inline long fp_inv(long a, long p)
{
    return static_cast<long>(inv_mod(a, p));
}

inline FpPoly fp_mul(const FpPoly &a, const FpPoly &b, long p)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    FpPoly r(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            r[i + j] = (r[i + j] + fp_mulmod(a[i], b[j], p)) % p;
        }
    }
    fp_trim(r);
    return r;
}

inline std::pair<FpPoly, FpPoly> fp_divmod(FpPoly a, const FpPoly &b, long p)
{
    fp_trim(a);
    require(!b.empty(), ErrorKind::internal, "division by the zero polynomial");
    if (a.size() < b.size()) {
        return {{}, a};
    }
    FpPoly q(a.size() - b.size() + 1, 0);
    long inv = fp_inv(b.back(), p);
    for (std::size_t s = q.size(); s-- > 0;) {
        long c = fp_mulmod(a[s + b.size() - 1], inv, p);
        q[s] = c;
        for (std::size_t j = 0; j < b.size(); ++j) {
            a[s + j] = ((a[s + j] - fp_mulmod(c, b[j], p)) % p + p) % p;
        }
    }
    fp_trim(a);
    fp_trim(q);
    return {q, a};
}

inline FpPoly fp_gcd(FpPoly a, FpPoly b, long p)
{
    fp_trim(a);
    fp_trim(b);
    while (!b.empty()) {
        auto r = fp_divmod(a, b, p).second;
        a = std::move(b);
        b = std::move(r);
    }
    if (!a.empty()) {
        long inv = fp_inv(a.back(), p);
        for (auto &c : a) {
            c = fp_mulmod(c, inv, p);
        }
    }
    return a;
}

inline FpPoly fp_derivative(const FpPoly &a, long p)
{
    FpPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) {
        r.push_back(fp_mulmod(a[i], static_cast<long>(i % static_cast<std::size_t>(p)), p));
    }
    fp_trim(r);
    return r;
}

/// Product of the distinct monic irreducible factors of a (a nonzero).
inline FpPoly fp_radical(const FpPoly &a, long p)
{
    if (a.size() <= 1) {
        return {1};
    }
    FpPoly da = fp_derivative(a, p);
    if (da.empty()) {
        FpPoly root;
        for (std::size_t i = 0; i < a.size(); i += static_cast<std::size_t>(p)) {
            root.push_back(a[i]);
        }
        return fp_radical(root, p);
    }
    FpPoly g = fp_gcd(a, da, p);
    FpPoly w = fp_divmod(a, g, p).first;
    FpPoly rg = fp_radical(g, p);
    FpPoly c = fp_gcd(w, rg, p);
    FpPoly l = fp_divmod(fp_mul(w, rg, p), c, p).first;
    long inv = fp_inv(l.back(), p);
    for (auto &x : l) {
        x = fp_mulmod(x, inv, p);
    }
    return l;
}

/// Dedekind's criterion: is Z[theta] maximal at p for theta a root of the monic f?
inline bool dedekind_p_maximal(const std::vector<Integer> &f, long p)
{
    FpPoly fb;
    for (const auto &c : f) {
        fb.push_back(mod(c, Integer(p)).get_si());
    }
    fp_trim(fb);
    FpPoly g = fp_radical(fb, p);
    FpPoly h = fp_divmod(fb, g, p).first;
    // F = (f - g h) / p with g, h lifted to [0, p) and multiplied over Z
    std::vector<Integer> gh(g.size() + h.size() - 1, 0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < h.size(); ++j) {
            gh[i + j] += Integer(g[i]) * h[j];
        }
    }
    FpPoly big;
    for (std::size_t i = 0; i < f.size(); ++i) {
        Integer c = f[i] - (i < gh.size() ? gh[i] : Integer(0));
        require(c % p == 0, ErrorKind::internal, "Dedekind lift is not divisible by p");
        big.push_back(mod(Integer(c / p), Integer(p)).get_si());
    }
    fp_trim(big);
    FpPoly t = fp_gcd(fp_gcd(big, g, p), h, p);
    return t.size() <= 1;
}

} // namespace detail

/// Discriminant of the monic defining polynomial: (-1)^{n(n-1)/2} Norm(f'(theta)).
inline Integer poly_discriminant(const FieldPtr &field)
{
    const std::size_t n = field->degree();
    auto df = NumberFieldElement::from_poly(field, poly::derivative(field->poly()));
    Rational nm = df.norm();
    require(nm.get_den() == 1, ErrorKind::internal, "non-integral discriminant");
    Integer d = nm.get_num();
    return (n * (n - 1) / 2) % 2 == 0 ? d : Integer(-d);
}

/// An integer B with B O_L contained in Z[theta]: prod p^{floor(v_p(disc)/2)} over the primes
/// where Dedekind's criterion fails.
inline Integer index_bound(const FieldPtr &field)
{
    Integer disc = poly_discriminant(field);
    require(disc != 0, ErrorKind::invalid_input, "defining polynomial is not squarefree");
    Integer b = 1;
    for (const auto &[p, e] : factor(abs(disc))) {
        if (e < 2) {
            continue;
        }
        require(p.fits_slong_p(), ErrorKind::out_of_scope, "discriminant prime too large");
        if (!detail::dedekind_p_maximal(field->coeffs(), p.get_si())) {
            b *= pow(p, static_cast<unsigned long>(e / 2));
        }
    }
    return b;
}

// ---------------------------------------------------------------------------
// Normal basis

using BallMatrix = std::vector<std::vector<ComplexBall>>;

namespace detail
{

inline BallMatrix ball_inverse(BallMatrix a)
{
    const std::size_t n = a.size();
    const long prec = n ? a[0][0].prec() : 128;
    BallMatrix inv(n, std::vector<ComplexBall>(n, ComplexBall(prec)));
    for (std::size_t i = 0; i < n; ++i) {
        inv[i][i] = ComplexBall(prec, 1L);
    }
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = n;
        for (std::size_t r = c; r < n; ++r) {
            if (!a[r][c].contains_zero() && (piv == n || real::cmp(a[r][c].abs_lower(), a[piv][c].abs_lower()) > 0)) {
                piv = r;
            }
        }
        if (piv == n) {
            throw PrecisionError("normal-basis matrix is not certifiably invertible at this precision", prec);
        }
        std::swap(a[c], a[piv]);
        std::swap(inv[c], inv[piv]);
        ComplexBall pinv = a[c][c].inverse();
        for (std::size_t j = 0; j < n; ++j) {
            a[c][j] = a[c][j] * pinv;
            inv[c][j] = inv[c][j] * pinv;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) {
                continue;
            }
            ComplexBall f = a[r][c];
            for (std::size_t j = 0; j < n; ++j) {
                a[r][j] -= f * a[c][j];
                inv[r][j] -= f * inv[c][j];
            }
        }
    }
    return inv;
}

} // namespace detail

struct NormalBasis
{
    NumberFieldElement alpha;
    std::vector<NumberFieldElement> basis;  // b_k = sigma_k^{-1}(alpha)
    BallMatrix a;                           // a[j][k] = iota(sigma_j(b_k))
    BallMatrix a_inv;
    Integer D = 1;
    long prec = 128;
    ComplexBall root;                       // iota(theta)
    ComplexBall omega;                      // iota(k_gen), or 0 when K = Q
    double a_inv_norm = 0;                  // max row sum of |A^-1|
    // abelian fast path
    std::vector<long> dims;
    std::vector<std::size_t> index_map;     // flat group index -> sigma index
    std::vector<ComplexBall> fa;            // F(a), a[m] = iota(sigma_m(alpha))

    ComplexBall embed(const NumberFieldElement &x) const
    {
        return detail::horner(x.coords(), root);
    }
    /// Largest input radius for which rounding is guaranteed unambiguous (precision law).
    double max_input_radius() const
    {
        double scale = a_inv_norm * D.get_d();
        return scale > 0 ? 0.25 / scale : 0.25;
    }
};

namespace detail
{

/// Candidates theta^k + c in a fixed order, starting with 1.
inline std::vector<NumberFieldElement> normal_basis_candidates(const FieldPtr &L, std::size_t count)
{
    std::vector<NumberFieldElement> out{NumberFieldElement(L, Rational(1))};
    auto theta = NumberFieldElement::generator(L);
    for (unsigned long k = 1; out.size() < count; ++k) {
        auto t = theta.pow(k);
        for (long c = 0; c <= 3 && out.size() < count; ++c) {
            out.push_back(t + NumberFieldElement(L, Rational(c)));
        }
    }
    return out;
}

} // namespace detail

inline NormalBasis build_normal_basis(const GaloisData &gal, long prec)
{
    gal.validate();
    const std::size_t d = gal.d(), n = gal.L->degree();
    auto table = gal.cayley();
    std::vector<std::size_t> inv(d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (table[i][j] == 0) {
                inv[i] = j;
            }
        }
    }
    NumberFieldElement omega(gal.L, Rational(1));
    if (!gal.k_is_q()) {
        omega = NumberFieldElement(gal.L, gal.k_gen);
    }
    NormalBasis nb;
    nb.prec = prec;
    nb.root = gal.L->roots(prec + 16)[gal.root_index];
    nb.omega = gal.k_is_q() ? ComplexBall(prec) : nb.embed(omega);
    for (const auto &alpha : detail::normal_basis_candidates(gal.L, 32)) {
        std::vector<NumberFieldElement> b;
        for (std::size_t k = 0; k < d; ++k) {
            b.push_back(gal.apply(inv[k], alpha));
        }
        // Q-basis {b_k} or {b_k, omega b_k}, as columns in power coordinates
        QMatrix s = linalg::zeros(n, n);
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t i = 0; i < n; ++i) {
                s[i][k] = b[k].coords()[i];
                if (!gal.k_is_q()) {
                    s[i][d + k] = (omega * b[k]).coords()[i];
                }
            }
        }
        if (linalg::det(s) == 0) {
            continue;
        }
        BallMatrix a(d, std::vector<ComplexBall>(d, ComplexBall(prec)));
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t k = 0; k < d; ++k) {
                a[j][k] = nb.embed(gal.apply(j, b[k]));
            }
        }
        BallMatrix ainv;
        try {
            ainv = detail::ball_inverse(a);
        } catch (const PrecisionError &) {
            continue;
        }
        Integer den = 1;
        for (const auto &row : linalg::inverse(s)) {
            for (const auto &x : row) {
                den = lcm(den, x.get_den());
            }
        }
        nb.alpha = alpha;
        nb.basis = std::move(b);
        nb.a = std::move(a);
        nb.a_inv = std::move(ainv);
        nb.D = den * index_bound(gal.L);
        double norm = 0;
        for (const auto &row : nb.a_inv) {
            double sum = 0;
            for (const auto &x : row) {
                sum += x.abs_upper().to_double();
            }
            norm = std::max(norm, sum);
        }
        nb.a_inv_norm = norm;
        if (gal.abelian) {
            nb.dims = gal.abelian->invariants;
            nb.index_map = abelian_index_map(*gal.abelian, table);
            std::vector<ComplexBall> arr;
            for (auto s_idx : nb.index_map) {
                arr.push_back(nb.embed(gal.apply(s_idx, alpha)));
            }
            nb.fa = dft(arr, nb.dims, false, prec);
        }
        return nb;
    }
    fail(ErrorKind::internal, "no normal-basis candidate among the first 32 works");
}

// ---------------------------------------------------------------------------
// Recovery

struct Recovered
{
    NumberFieldElement value;
    double residual = 0;  // max_j |iota(sigma_j(gamma)) - mid(w_j)|
};

namespace detail
{

inline Integer round_unique(const Real &x, const Real &rad, const char *what)
{
    Rational mid = x.to_rational();
    Integer n = floor_of(mid + ratio(1, 2));
    Rational dist = abs(mid - Rational(n));
    Rational r = rad.to_rational();
    if (dist + r >= ratio(1, 2)) {
        throw Error(ErrorKind::ambiguous_rounding,
                    std::string("rounding of ") + what + " is ambiguous: ball radius " + std::to_string(r.get_d()) +
                        " leaves two lattice points; need radius < " + std::to_string(Rational(ratio(1, 2) - dist).get_d()) +
                        " (raise --prec)");
    }
    return n;
}

inline Recovered finish_recovery(const NormalBasis &nb, const GaloisData &gal, const std::vector<ComplexBall> &v,
                                 const std::vector<ComplexBall> &w, double tolerance)
{
    const std::size_t d = gal.d();
    const long prec = nb.prec;
    NumberFieldElement gamma(gal.L);
    NumberFieldElement omega = gal.k_is_q() ? NumberFieldElement(gal.L) : NumberFieldElement(gal.L, gal.k_gen);
    for (std::size_t k = 0; k < d; ++k) {
        ComplexBall z = v[k] * nb.D;
        Integer a, b = 0;
        if (gal.k_is_q()) {
            a = round_unique(z.re(), z.rad(), "a K = Q coordinate");
        } else {
            // z = a + b omega with a, b real
            ComplexBall bb = (z - z.conj()) / (nb.omega - nb.omega.conj());
            b = round_unique(bb.re(), bb.rad(), "an omega coordinate");
            ComplexBall aa = z - nb.omega * ComplexBall(prec, b);
            a = round_unique(aa.re(), aa.rad(), "a rational coordinate");
        }
        if (a == 0 && b == 0) {
            continue;
        }
        Rational qa(a, nb.D), qb(b, nb.D);
        qa.canonicalize();
        qb.canonicalize();
        NumberFieldElement vk = NumberFieldElement(gal.L, qa) + omega * qb;
        gamma = gamma + vk * nb.basis[k];
    }
    Recovered out{gamma, 0};
    for (std::size_t j = 0; j < d; ++j) {
        ComplexBall e = nb.embed(gal.apply(j, gamma));
        ComplexBall mid(w[j].re(), w[j].im(), Real(ComplexBall::rad_prec));
        out.residual = std::max(out.residual, (e - mid).mid_abs_upper().to_double());
        ComplexBall wj = w[j];
        wj.inflate(tolerance);
        require(e.overlaps(wj), ErrorKind::inconsistent_input,
                "recovered element does not re-embed into conjugate ball " + std::to_string(j) + " (residual " +
                    std::to_string((e - mid).mid_abs_upper().to_double()) + ")");
    }
    require(gamma.is_integral(), ErrorKind::inconsistent_input, "recovered element is not an algebraic integer");
    return out;
}

inline void check_input(const NormalBasis &nb, const GaloisData &gal, const std::vector<ComplexBall> &w)
{
    require(w.size() == gal.d(), ErrorKind::invalid_input, "expected " + std::to_string(gal.d()) + " conjugates, got " + std::to_string(w.size()));
    require(nb.basis.size() == gal.d(), ErrorKind::invalid_input, "normal basis does not match the Galois data");
}

} // namespace detail

/// gamma from approximations w_j of sigma_j(gamma): v = A^{-1} w, round D v_k in O_K, re-embed.
inline Recovered recover_integer(const NormalBasis &nb, const std::vector<ComplexBall> &w, const GaloisData &gal, double tolerance = 0)
{
    detail::check_input(nb, gal, w);
    const std::size_t d = gal.d();
    std::vector<ComplexBall> v(d, ComplexBall(nb.prec));
    for (std::size_t k = 0; k < d; ++k) {
        for (std::size_t j = 0; j < d; ++j) {
            v[k] += nb.a_inv[k][j] * w[j];
        }
    }
    return detail::finish_recovery(nb, gal, v, w, tolerance);
}

/// Same contract as recover_integer, solving the group convolution w = a * v by DFT.
inline Recovered recover_abelian(const NormalBasis &nb, const std::vector<ComplexBall> &w, const GaloisData &gal, double tolerance = 0)
{
    detail::check_input(nb, gal, w);
    require(gal.abelian.has_value() && !nb.index_map.empty(), ErrorKind::invalid_input, "abelian recovery needs an abelian structure");
    const std::size_t d = gal.d();
    std::vector<ComplexBall> x;
    for (auto s : nb.index_map) {
        x.push_back(w[s]);
    }
    auto fx = dft(x, nb.dims, false, nb.prec);
    for (std::size_t m = 0; m < d; ++m) {
        require(!nb.fa[m].contains_zero(), ErrorKind::inconsistent_input, "degenerate normal basis: a DFT entry of the alpha conjugates contains 0");
        fx[m] = fx[m] / nb.fa[m];
    }
    auto vflat = dft(fx, nb.dims, true, nb.prec);
    std::vector<ComplexBall> v(d, ComplexBall(nb.prec));
    for (std::size_t m = 0; m < d; ++m) {
        v[nb.index_map[m]] = vflat[m];
    }
    return detail::finish_recovery(nb, gal, v, w, tolerance);
}

// ---------------------------------------------------------------------------
// Standard Galois data

inline std::vector<Integer> cyclotomic_polynomial(long m)
{
    require(m >= 1, ErrorKind::invalid_input, "cyclotomic index must be positive");
    QPoly num(static_cast<std::size_t>(m) + 1, Rational(0));
    num[0] = -1;
    num[static_cast<std::size_t>(m)] = 1;
    for (long e = 1; e < m; ++e) {
        if (m % e == 0) {
            auto c = cyclotomic_polynomial(e);
            num = poly::divmod(num, poly::from_integers(c)).first;
        }
    }
    std::vector<Integer> out;
    for (const auto &c : num) {
        out.push_back(c.get_num());
    }
    return out;
}

/// Q(zeta_m)/Q with sigma_a: zeta -> zeta^a, a coprime to m ascending.
inline GaloisData cyclotomic_galois(long m)
{
    GaloisData g;
    g.L = make_field(cyclotomic_polynomial(m));
    auto zeta = NumberFieldElement::generator(g.L);
    for (long a = 1; a < std::max(m, 2L); ++a) {
        if (gcd64(a, m) == 1) {
            g.sigma.push_back(GaloisData::matrix_from_image(g.L, zeta.pow(static_cast<unsigned long>(a))));
        }
    }
    g.abelian = abelian_structure(g.cayley());
    return g;
}

/// Q(sqrt t)/Q for squarefree t != 0, 1, presented by x^2 - t.
inline GaloisData quadratic_galois(long t)
{
    GaloisData g;
    g.L = make_field({Integer(-t), Integer(0), Integer(1)});
    auto th = NumberFieldElement::generator(g.L);
    g.sigma = {linalg::identity(2), GaloisData::matrix_from_image(g.L, -th)};
    g.abelian = abelian_structure(g.cayley());
    return g;
}

} // namespace cmexp

#endif
