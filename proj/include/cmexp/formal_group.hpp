#ifndef CMEXP_FORMAL_GROUP_HPP
#define CMEXP_FORMAL_GROUP_HPP

#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include <cmexp/newton_polygon.hpp>
#include <cmexp/series.hpp>

namespace cmexp
{

/// y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over a ring R.
template <typename R>
struct WeierstrassModel
{
    R a1, a2, a3, a4, a6;

    R b2() const
    {
        return a1 * a1 + a2 * ring_like(a2, 4);
    }
    R b4() const
    {
        return a4 * ring_like(a4, 2) + a1 * a3;
    }
    R b6() const
    {
        return a3 * a3 + a6 * ring_like(a6, 4);
    }
    R b8() const
    {
        return a1 * a1 * a6 + a2 * a6 * ring_like(a6, 4) - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    }
    R c4() const
    {
        R b = b2();
        return b * b - b4() * ring_like(a4, 24);
    }
    R c6() const
    {
        R b = b2();
        return -(b * b * b) + b * b4() * ring_like(a4, 36) - b6() * ring_like(a6, 216);
    }
    R disc() const
    {
        R x2 = b2(), x4 = b4(), x6 = b6(), x8 = b8();
        return -(x2 * x2 * x8) - x4 * x4 * x4 * ring_like(a4, 8) - x6 * x6 * ring_like(a6, 27) + x2 * x4 * x6 * ring_like(a6, 9);
    }
};

/// y^2 + xy = x^3 - 36/(j - 1728) x - 1/(j - 1728), a model with j-invariant j.
inline WeierstrassModel<Rational> model_from_j(const Rational &j)
{
    require(j != 0 && j != 1728, ErrorKind::out_of_scope, "j = 0 and j = 1728 basepoints are not supported");
    Rational d = j - 1728;
    return {Rational(1), Rational(0), Rational(0), Rational(-36) / d, Rational(-1) / d};
}

/// The same model over Q_p(p^(1/e)) at the given precision in pi-adic digits.
inline WeierstrassModel<PadicElement> to_padic(const WeierstrassModel<Rational> &m, const Integer &p, int e, long prec_digits)
{
    auto c = [&](const Rational &x) { return PadicElement(p, e, prec_digits, x); };
    return {c(m.a1), c(m.a2), c(m.a3), c(m.a4), c(m.a6)};
}

namespace detail
{

// Minimal series algebras over which the chord construction of the group law
// is written once: univariate (for [n](T)) and bivariate (the law itself).

template <typename R>
struct USeries
{
    TruncSeries<R> c;

    static USeries constant(const R &proto, std::size_t n, long v)
    {
        USeries s{ts::zeros(proto, n)};
        s.c[0] = ring_like(proto, v);
        return s;
    }
    USeries operator+(const USeries &o) const
    {
        return {ts::add(c, o.c)};
    }
    USeries operator-(const USeries &o) const
    {
        return {ts::sub(c, o.c)};
    }
    USeries operator-() const
    {
        return {ts::scale(c, ring_like(c[0], -1))};
    }
    USeries operator*(const USeries &o) const
    {
        return {ts::mul(c, o.c)};
    }
    USeries operator*(const R &x) const
    {
        return {ts::scale(c, x)};
    }
    USeries inv_one_plus() const
    {
        return {ts::inv_one_plus(c)};
    }
    /// f(this) for a univariate f with zero constant term.
    USeries substitute_into(const TruncSeries<R> &f) const
    {
        return {ts::compose(f, c)};
    }
    std::size_t length() const
    {
        return c.size();
    }
};

/// Bivariate series truncated by total degree: terms X^i Y^j with i + j < n.
template <typename R>
struct BSeries
{
    std::size_t n = 0;
    std::vector<R> c; // row-major over i, row i holds j < n - i

    static std::size_t offset(std::size_t n, std::size_t i)
    {
        return i * n - i * (i - 1) / 2;
    }
    static BSeries zero(const R &proto, std::size_t n)
    {
        return {n, std::vector<R>(n * (n + 1) / 2, ring_like(proto, 0))};
    }
    static BSeries constant(const R &proto, std::size_t n, long v)
    {
        BSeries s = zero(proto, n);
        s.c[0] = ring_like(proto, v);
        return s;
    }
    static BSeries var(const R &proto, std::size_t n, bool second)
    {
        BSeries s = zero(proto, n);
        if (n > 1) {
            s.at(second ? 0 : 1, second ? 1 : 0) = ring_like(proto, 1);
        }
        return s;
    }
    R &at(std::size_t i, std::size_t j)
    {
        return c[offset(n, i) + j];
    }
    const R &at(std::size_t i, std::size_t j) const
    {
        return c[offset(n, i) + j];
    }
    BSeries operator+(const BSeries &o) const
    {
        BSeries r = *this;
        for (std::size_t k = 0; k < c.size(); ++k) {
            r.c[k] = c[k] + o.c[k];
        }
        return r;
    }
    BSeries operator-(const BSeries &o) const
    {
        BSeries r = *this;
        for (std::size_t k = 0; k < c.size(); ++k) {
            r.c[k] = c[k] - o.c[k];
        }
        return r;
    }
    BSeries operator-() const
    {
        BSeries r = *this;
        for (auto &x : r.c) {
            x = -x;
        }
        return r;
    }
    BSeries operator*(const R &x) const
    {
        BSeries r = *this;
        for (auto &y : r.c) {
            y = y * x;
        }
        return r;
    }
    BSeries operator*(const BSeries &o) const
    {
        BSeries r = zero(c[0], n);
        for (std::size_t i1 = 0; i1 < n; ++i1) {
            for (std::size_t j1 = 0; i1 + j1 < n; ++j1) {
                const R &x = at(i1, j1);
                if (ring_is_zero(x)) {
                    continue;
                }
                for (std::size_t i2 = 0; i1 + j1 + i2 < n; ++i2) {
                    for (std::size_t j2 = 0; i1 + j1 + i2 + j2 < n; ++j2) {
                        const R &y = o.at(i2, j2);
                        if (!ring_is_zero(y)) {
                            r.at(i1 + i2, j1 + j2) += x * y;
                        }
                    }
                }
            }
        }
        return r;
    }
    BSeries inv_one_plus() const
    {
        // r = 1 - (this - 1) r, solved degree by degree.
        BSeries u = *this;
        u.c[0] = ring_like(c[0], 0);
        BSeries r = constant(c[0], n, 1);
        BSeries term = r;
        for (std::size_t k = 1; k < n; ++k) {
            term = -(term * u);
            r = r + term;
        }
        return r;
    }
    BSeries substitute_into(const TruncSeries<R> &f) const
    {
        BSeries r = zero(c[0], n);
        for (std::size_t i = std::min(f.size(), n); i-- > 0;) {
            r = r * *this;
            r.c[0] += f[i];
        }
        return r;
    }
    std::size_t length() const
    {
        return n;
    }
};

/// z3 and F(z1, z2) = i(z3) by the chord construction on the formal group.
template <typename S, typename R>
S chord_law(const WeierstrassModel<R> &m, const TruncSeries<R> &w, const S &z1, const S &z2, const S &one)
{
    // lambda = sum_{n>=3} w_n (z2^n - z1^n) / (z2 - z1) = sum w_n h_{n-1}(z1, z2)
    std::size_t n = z1.length();
    S h = one;       // h_0
    S z2pow = one;   // z2^k
    S lambda = one * ring_like(m.a1, 0);
    for (std::size_t k = 1; k < n && k + 1 < w.size(); ++k) {
        z2pow = z2pow * z2;
        h = z1 * h + z2pow;
        if (k + 1 >= 3 && !ring_is_zero(w[k + 1])) {
            lambda = lambda + h * w[k + 1];
        }
    }
    S nu = z1.substitute_into(w) - lambda * z1;
    S l2 = lambda * lambda;
    // w = lambda z + nu meets the curve in a cubic whose z^2 and z^3 coefficients give z1 + z2 + z3.
    S num = lambda * m.a1 + nu * m.a2 + l2 * m.a3 + lambda * nu * (m.a4 * ring_like(m.a4, 2)) + l2 * nu * (m.a6 * ring_like(m.a6, 3));
    S den = one + lambda * m.a2 + l2 * m.a4 + l2 * lambda * m.a6;
    S z3 = -z1 - z2 - num * den.inv_one_plus();
    S inv_den = one - z3 * m.a1 - z3.substitute_into(w) * m.a3;
    return -(z3 * inv_den.inv_one_plus());
}

} // namespace detail

/// Formal group law F(X, Y), either derived from a Weierstrass model (in the
/// parameter T = -x/y) or given directly by bivariate coefficients.
template <typename R>
class FormalGroupLaw
{
public:
    /// w(z) = z^3 + a1 z w + a2 z^2 w + a3 w^2 + a4 z w^2 + a6 w^3, by fixed-point iteration.
    static TruncSeries<R> w_series(const WeierstrassModel<R> &m, std::size_t prec)
    {
        const R zero = ring_like(m.a1, 0);
        TruncSeries<R> z = ts::zeros(zero, prec), z2 = z, z3 = z, w = z;
        if (prec > 1) {
            z[1] = ring_like(zero, 1);
        }
        if (prec > 2) {
            z2[2] = ring_like(zero, 1);
        }
        if (prec > 3) {
            z3[3] = ring_like(zero, 1);
        }
        for (std::size_t it = 0; it + 3 < prec; ++it) {
            TruncSeries<R> ww = ts::mul(w, w);
            TruncSeries<R> next = z3;
            next = ts::add(next, ts::scale(ts::mul(z, w), m.a1));
            next = ts::add(next, ts::scale(ts::mul(z2, w), m.a2));
            next = ts::add(next, ts::scale(ww, m.a3));
            next = ts::add(next, ts::scale(ts::mul(z, ww), m.a4));
            next = ts::add(next, ts::scale(ts::mul(ww, w), m.a6));
            w = std::move(next);
        }
        return w;
    }

    static FormalGroupLaw from_model(const WeierstrassModel<R> &m, std::size_t prec)
    {
        require(prec >= 2, ErrorKind::invalid_input, "formal group precision must be >= 2");
        FormalGroupLaw f(m.a1, prec);
        f.m_model = m;
        // w_n enters the law at total degree n - 1
        f.m_w = w_series(m, prec + 1);
        return f;
    }
    /// A law given by coefficients coeffs[i][j] of X^i Y^j (i + j < prec).
    static FormalGroupLaw from_coefficients(const R &proto, std::size_t prec, const std::vector<std::vector<R>> &coeffs)
    {
        FormalGroupLaw f(proto, prec);
        auto b = detail::BSeries<R>::zero(proto, prec);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            for (std::size_t j = 0; j < coeffs[i].size(); ++j) {
                if (i + j < prec) {
                    b.at(i, j) = coeffs[i][j];
                }
            }
        }
        f.m_bivariate = b;
        return f;
    }

    std::size_t prec() const noexcept
    {
        return m_prec;
    }
    const R &proto() const noexcept
    {
        return m_proto;
    }
    const std::optional<WeierstrassModel<R>> &model() const noexcept
    {
        return m_model;
    }
    /// Coefficient of X^i Y^j.
    R coeff(std::size_t i, std::size_t j) const
    {
        require(i + j < m_prec, ErrorKind::precision, "coefficient beyond the stored precision");
        return bivariate().at(i, j);
    }

    /// F(a(T), b(T)) for series a, b without constant term.
    TruncSeries<R> apply(const TruncSeries<R> &a, const TruncSeries<R> &b) const
    {
        std::size_t n = std::min({a.size(), b.size(), m_prec});
        TruncSeries<R> aa(a.begin(), a.begin() + static_cast<long>(n)), bb(b.begin(), b.begin() + static_cast<long>(n));
        if (m_model) {
            using U = detail::USeries<R>;
            return detail::chord_law(*m_model, m_w, U{aa}, U{bb}, U::constant(m_proto, n, 1)).c;
        }
        const auto &f = bivariate();
        // sum_i a^i * (sum_j f_ij b^j)
        std::vector<TruncSeries<R>> bpow{ts::zeros(m_proto, n)};
        bpow[0][0] = ring_like(m_proto, 1);
        for (std::size_t j = 1; j < n; ++j) {
            bpow.push_back(ts::mul(bpow.back(), bb));
        }
        TruncSeries<R> r = ts::zeros(m_proto, n);
        for (std::size_t i = n; i-- > 0;) {
            r = ts::mul(r, aa);
            for (std::size_t j = 0; i + j < n; ++j) {
                if (!ring_is_zero(f.at(i, j))) {
                    r = ts::add(r, ts::scale(bpow[j], f.at(i, j)));
                }
            }
        }
        return r;
    }

private:
    FormalGroupLaw(const R &proto, std::size_t prec) : m_proto(ring_like(proto, 0)), m_prec(prec) {}

    const detail::BSeries<R> &bivariate() const
    {
        if (!m_bivariate) {
            using B = detail::BSeries<R>;
            auto one = B::constant(m_proto, m_prec, 1);
            m_bivariate = detail::chord_law(*m_model, m_w, B::var(m_proto, m_prec, false), B::var(m_proto, m_prec, true), one);
        }
        return *m_bivariate;
    }

    R m_proto;
    std::size_t m_prec;
    std::optional<WeierstrassModel<R>> m_model;
    TruncSeries<R> m_w;
    mutable std::optional<detail::BSeries<R>> m_bivariate;
};

/// [n](T) = F([n-1](T), T), [1](T) = T.
template <typename R>
TruncSeries<R> mult_by(const FormalGroupLaw<R> &f, long n)
{
    require(n >= 1, ErrorKind::invalid_input, "multiplier must be >= 1");
    require(f.prec() >= 2, ErrorKind::precision, "formal group precision exhausted");
    TruncSeries<R> t = ts::zeros(f.proto(), f.prec());
    t[1] = ring_like(f.proto(), 1);
    TruncSeries<R> r = t;
    for (long k = 2; k <= n; ++k) {
        r = f.apply(r, t);
    }
    return r;
}

/// [p^m](T) by m-fold composition of [p](T).
template <typename R>
TruncSeries<R> mult_by_prime_power(const FormalGroupLaw<R> &f, long p, int m)
{
    TruncSeries<R> mp = mult_by(f, p);
    TruncSeries<R> r = mp;
    for (int k = 1; k < m; ++k) {
        r = ts::compose(mp, r);
    }
    return r;
}

/// Newton polygon points (i, nu(c_i)) of a series.
template <typename R>
std::vector<ValuationPoint> valuation_points(const TruncSeries<R> &s, const Integer &p)
{
    std::vector<ValuationPoint> pts;
    for (std::size_t i = 0; i < s.size(); ++i) {
        pts.emplace_back(static_cast<long>(i), ring_valuation(s[i], p));
    }
    return pts;
}

/// Height of the formal group over a p-adic integer ring: the degree of the
/// lowest unit coefficient of [p](T) is p^h.
template <typename R>
int formal_height(const FormalGroupLaw<R> &f, long p)
{
    require(static_cast<long>(f.prec()) > p, ErrorKind::precision, "formal group precision must exceed p");
    auto s = mult_by(f, p);
    for (std::size_t i = 1; i < s.size(); ++i) {
        auto v = ring_valuation(s[i], Integer(p));
        if (v && *v == 0) {
            if (static_cast<long>(i) == p) {
                return 1;
            }
            if (static_cast<long>(i) == p * p) {
                return 2;
            }
            fail(ErrorKind::internal, "lowest unit coefficient of [p](T) at degree " + std::to_string(i) + ": not an elliptic formal group");
        }
    }
    if (static_cast<long>(f.prec()) <= p * p) {
        throw PrecisionError("no unit coefficient below the series precision; need more than p^2 terms", 0);
    }
    fail(ErrorKind::internal, "[p](T) has no unit coefficient up to degree p^2");
}

struct VerticalBound
{
    Rational value;
    int height = 1;
    std::optional<Rational> r;                 // supersingular only
    std::optional<NewtonPolygon> polygon;      // supersingular only
};

/// v_vert <= 1/(p-1) (ordinary) or (1 - r)/(p^2 - p) (supersingular), with r
/// the height of the Newton polygon of [p](T) at x = p^2 - p + 1.
template <typename R>
VerticalBound v_vert_details(const FormalGroupLaw<R> &f, long p, int m)
{
    require(m >= 1, ErrorKind::invalid_input, "m must be >= 1");
    VerticalBound out;
    out.height = formal_height(f, p);
    if (out.height == 1) {
        out.value = ratio(1, p - 1);
        return out;
    }
    auto s = mult_by(f, p);
    s.resize(static_cast<std::size_t>(p * p + 1), ring_like(f.proto(), 0));
    auto poly = newton_polygon(valuation_points(s, Integer(p)));
    require(poly.has_vertex(1, Rational(1)) && poly.has_vertex(p * p, Rational(0)), ErrorKind::internal,
            "Newton polygon of [p](T) lacks the vertices (1,1) and (p^2,0)");
    Rational r = poly.value_at(p * p - p + 1);
    require(r >= 0 && r <= 1, ErrorKind::internal, "supersingular polygon height outside [0,1]");
    out.r = r;
    out.value = (1 - r) / Rational(p * p - p);
    out.polygon = poly;
    return out;
}

template <typename R>
Rational v_vert_bound(const FormalGroupLaw<R> &f, long p, int m)
{
    return v_vert_details(f, p, m).value;
}

/// Good-reduction model over a tamely ramified extension and its degree e_p.
struct GoodReduction
{
    WeierstrassModel<PadicElement> model;
    int e_p = 1;
    long delta_min = 0; // nu(Delta) of a minimal model over Q_p
};

/// e_p = 12 / gcd(nu(Delta_min), 12), and the twist by u with 12 nu(u) = nu(Delta_min).
inline GoodReduction good_reduction_model(const WeierstrassModel<PadicElement> &e, long p)
{
    require(p != 2 && p != 3, ErrorKind::out_of_scope, "good reduction models need p >= 5");
    require(e.a1.e() == 1 && e.a1.p() == p, ErrorKind::invalid_input, "model must be over Q_p");
    PadicElement c4 = e.c4(), c6 = e.c6(), d = e.disc();
    require(!d.is_zero(), ErrorKind::invalid_input, "singular model");
    long vd = d.valuation_digits();
    if (!c4.is_zero()) {
        require(3 * c4.valuation_digits() - vd >= 0, ErrorKind::invalid_input, "multiplicative reduction (nu(j) < 0)");
    }
    if (vd == 0) {
        return {e, 1, 0};
    }
    // Short model y^2 = x^3 - 27 c4 x - 54 c6, then strip p^4, p^6 while possible.
    PadicElement a4 = c4 * -27, a6 = c6 * -54;
    auto val_or = [](const PadicElement &x, long big) { return x.is_zero() ? big : x.valuation_digits(); };
    const long big = 1L << 40;
    WeierstrassModel<PadicElement> s{a4.like(0), a4.like(0), a4.like(0), a4, a6};
    long delta = s.disc().valuation_digits();
    while (val_or(s.a4, big) >= 4 && val_or(s.a6, big) >= 6 && delta >= 12) {
        s.a4 = s.a4.shift(-4);
        s.a6 = s.a6.shift(-6);
        delta -= 12;
    }
    int ep = static_cast<int>(12 / std::gcd(delta, 12L));
    if (delta == 0) {
        return {s, 1, 0};
    }
    // Over Q_p(pi), pi^ep = p, u = pi^(delta ep / 12).
    long u = delta * ep / 12;
    WeierstrassModel<PadicElement> t{s.a1.with_ramification(ep), s.a2.with_ramification(ep), s.a3.with_ramification(ep),
                                     s.a4.with_ramification(ep).shift(-4 * u), s.a6.with_ramification(ep).shift(-6 * u)};
    return {t, ep, delta};
}

} // namespace cmexp

#endif
