#ifndef CMEXP_QUATERNION_HPP
#define CMEXP_QUATERNION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include <cmexp/cosets.hpp>
#include <cmexp/linalg.hpp>

namespace cmexp
{

/// Rational quaternion in the basis 1, i, j, k with i^2 = a, j^2 = b, k = ij.
using QCoords = std::array<Rational, 4>;

/// The definite algebra ramified at p and infinity, presented as (a, b).
struct QuaternionAlgebra
{
    long p = 0;
    long a = 0, b = 0;

    QCoords mul(const QCoords &x, const QCoords &y) const
    {
        const Rational A(a), B(b);
        return {x[0] * y[0] + A * x[1] * y[1] + B * x[2] * y[2] - A * B * x[3] * y[3],
                x[0] * y[1] + x[1] * y[0] - B * x[2] * y[3] + B * x[3] * y[2],
                x[0] * y[2] + x[2] * y[0] + A * x[1] * y[3] - A * x[3] * y[1],
                x[0] * y[3] + x[3] * y[0] + x[1] * y[2] - x[2] * y[1]};
    }
    static Rational trd(const QCoords &x)
    {
        return 2 * x[0];
    }
    Rational nrd(const QCoords &x) const
    {
        return x[0] * x[0] - a * x[1] * x[1] - b * x[2] * x[2] + a * b * x[3] * x[3];
    }
};

/// A Z-lattice order with basis e_0..e_3 and integer structure constants.
class QuaternionOrder
{
public:
    QuaternionOrder(QuaternionAlgebra alg, std::array<QCoords, 4> basis) : m_alg(alg), m_basis(basis)
    {
        QMatrix m = linalg::zeros(4, 4);
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                m[r][c] = basis[r][c];
            }
        }
        m_inv = linalg::inverse(m);
    }

    const QuaternionAlgebra &algebra() const noexcept
    {
        return m_alg;
    }
    long p() const noexcept
    {
        return m_alg.p;
    }
    const std::array<QCoords, 4> &basis() const noexcept
    {
        return m_basis;
    }
    /// Coordinates of a rational quaternion in the order basis (possibly non-integral).
    std::array<Rational, 4> coords_of(const QCoords &x) const
    {
        std::array<Rational, 4> out;
        for (std::size_t c = 0; c < 4; ++c) {
            Rational s = 0;
            for (std::size_t r = 0; r < 4; ++r) {
                s += x[r] * m_inv[r][c];
            }
            out[c] = s;
        }
        return out;
    }
    QCoords to_q(const std::array<Integer, 4> &c) const
    {
        QCoords x{0, 0, 0, 0};
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t k = 0; k < 4; ++k) {
                x[k] += c[r] * m_basis[r][k];
            }
        }
        return x;
    }
    bool contains(const QCoords &x) const
    {
        for (const auto &c : coords_of(x)) {
            if (c.get_den() != 1) {
                return false;
            }
        }
        return true;
    }
    /// det(trd(e_i e_j)); |disc| = (reduced discriminant)^2.
    Rational discriminant() const
    {
        QMatrix g = linalg::zeros(4, 4);
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                g[r][c] = QuaternionAlgebra::trd(m_alg.mul(m_basis[r], m_basis[c]));
            }
        }
        return linalg::det(g);
    }
    bool closed_under_multiplication() const
    {
        if (!contains({1, 0, 0, 0})) {
            return false;
        }
        for (const auto &x : m_basis) {
            for (const auto &y : m_basis) {
                if (!contains(m_alg.mul(x, y))) {
                    return false;
                }
            }
        }
        return true;
    }
    /// Least common denominator of the basis coordinates.
    Integer denominator() const
    {
        Integer d = 1;
        for (const auto &v : m_basis) {
            for (const auto &x : v) {
                d = lcm(d, x.get_den());
            }
        }
        return d;
    }

private:
    QuaternionAlgebra m_alg;
    std::array<QCoords, 4> m_basis;
    QMatrix m_inv;
};

using OrderPtr = std::shared_ptr<const QuaternionOrder>;

/// Element of an order, by integer coordinates in its basis.
class QuaternionElement
{
public:
    QuaternionElement(OrderPtr o, std::array<Integer, 4> c) : m_o(std::move(o)), m_c(c) {}
    static QuaternionElement from_q(OrderPtr o, const QCoords &x)
    {
        auto c = o->coords_of(x);
        std::array<Integer, 4> z;
        for (std::size_t i = 0; i < 4; ++i) {
            require(c[i].get_den() == 1, ErrorKind::invalid_input, "quaternion is not in the order");
            z[i] = c[i].get_num();
        }
        return {std::move(o), z};
    }
    static QuaternionElement scalar(OrderPtr o, long v)
    {
        return from_q(std::move(o), {Rational(v), 0, 0, 0});
    }

    const std::array<Integer, 4> &coords() const noexcept
    {
        return m_c;
    }
    const OrderPtr &order() const noexcept
    {
        return m_o;
    }
    QCoords q() const
    {
        return m_o->to_q(m_c);
    }
    Integer trace() const
    {
        Rational t = QuaternionAlgebra::trd(q());
        require(t.get_den() == 1, ErrorKind::internal, "non-integral trace in an order");
        return t.get_num();
    }
    Integer norm() const
    {
        Rational n = m_o->algebra().nrd(q());
        require(n.get_den() == 1, ErrorKind::internal, "non-integral norm in an order");
        return n.get_num();
    }
    QuaternionElement conj() const
    {
        QCoords x = q();
        return from_q(m_o, {x[0], -x[1], -x[2], -x[3]});
    }
    bool is_scalar() const
    {
        QCoords x = q();
        return x[1] == 0 && x[2] == 0 && x[3] == 0;
    }
    friend QuaternionElement operator*(const QuaternionElement &x, const QuaternionElement &y)
    {
        return from_q(x.m_o, x.m_o->algebra().mul(x.q(), y.q()));
    }
    friend QuaternionElement operator+(const QuaternionElement &x, const QuaternionElement &y)
    {
        std::array<Integer, 4> c;
        for (std::size_t i = 0; i < 4; ++i) {
            c[i] = x.m_c[i] + y.m_c[i];
        }
        return {x.m_o, c};
    }
    friend QuaternionElement operator-(const QuaternionElement &x, const QuaternionElement &y)
    {
        std::array<Integer, 4> c;
        for (std::size_t i = 0; i < 4; ++i) {
            c[i] = x.m_c[i] - y.m_c[i];
        }
        return {x.m_o, c};
    }
    friend QuaternionElement operator*(long k, const QuaternionElement &x)
    {
        std::array<Integer, 4> c = x.m_c;
        for (auto &v : c) {
            v *= k;
        }
        return {x.m_o, c};
    }
    friend bool operator==(const QuaternionElement &x, const QuaternionElement &y)
    {
        return x.m_c == y.m_c;
    }
    friend bool operator<(const QuaternionElement &x, const QuaternionElement &y)
    {
        return x.m_c < y.m_c;
    }
    std::string str() const
    {
        QCoords x = q();
        return "(" + to_string(x[0]) + ", " + to_string(x[1]) + "i, " + to_string(x[2]) + "j, " + to_string(x[3]) + "k)";
    }

private:
    OrderPtr m_o;
    std::array<Integer, 4> m_c;
};

namespace detail
{

inline long legendre(long a, long p)
{
    return mpz_legendre(Integer(a).get_mpz_t(), Integer(p).get_mpz_t());
}

} // namespace detail

/// Standard maximal orders of the algebra ramified at p and infinity, by p mod 8.
inline OrderPtr maximal_order(long p)
{
    require(p >= 5 && is_probable_prime(Integer(p)), ErrorKind::out_of_scope, "maximal orders are built for primes p >= 5");
    const Rational h = ratio(1, 2), q4 = ratio(1, 4);
    std::shared_ptr<QuaternionOrder> o;
    if (p % 4 == 3) {
        QuaternionAlgebra alg{p, -1, -p};
        o = std::make_shared<QuaternionOrder>(alg, std::array<QCoords, 4>{QCoords{1, 0, 0, 0}, QCoords{0, 1, 0, 0}, QCoords{0, h, h, 0}, QCoords{h, 0, 0, h}});
    } else if (p % 8 == 5) {
        QuaternionAlgebra alg{p, -2, -p};
        o = std::make_shared<QuaternionOrder>(alg, std::array<QCoords, 4>{QCoords{1, 0, 0, 0}, QCoords{h, 0, h, h}, QCoords{0, q4, h, q4}, QCoords{0, 0, 0, 1}});
    } else {
        // p = 1 mod 8: (-p, -q) with q = 3 mod 4 prime and (p/q) = -1, q | c^2 p + 1.
        long q = 3;
        while (!(q % 4 == 3 && is_probable_prime(Integer(q)) && detail::legendre(p, q) == -1)) {
            ++q;
        }
        long c = 0;
        while ((c * c * p + 1) % q != 0) {
            ++c;
        }
        QuaternionAlgebra alg{p, -p, -q};
        Rational iq = ratio(1, q), cq = ratio(c, q);
        o = std::make_shared<QuaternionOrder>(alg, std::array<QCoords, 4>{QCoords{h, 0, h, 0}, QCoords{0, h, 0, h}, QCoords{0, 0, iq, cq}, QCoords{0, 0, 0, 1}});
    }
    require(o->closed_under_multiplication(), ErrorKind::internal, "constructed order is not closed under multiplication");
    require(abs(o->discriminant()) == Rational(p * p), ErrorKind::internal, "constructed order does not have reduced discriminant p");
    return o;
}

/// A maximal order containing the roots of f_{j0}: the endomorphism ring of the
/// supersingular reduction with j = j0 (unique up to conjugation).
inline OrderPtr maximal_order_for(long p, JClass j0)
{
    require(j0 != JClass::generic, ErrorKind::invalid_input, "j0 must be 0 or 1728");
    require(p >= 5 && is_probable_prime(Integer(p)), ErrorKind::out_of_scope, "maximal orders are built for primes p >= 5");
    if (j0 == JClass::k1728) {
        require(p % 4 == 3, ErrorKind::out_of_scope, "j = 1728 is ordinary at p = " + std::to_string(p));
        return maximal_order(p);
    }
    require(p % 3 == 2, ErrorKind::out_of_scope, "j = 0 is ordinary at p = " + std::to_string(p));
    // (-3, -p): Z<1, (1+i)/2, (j+k)/2, (i+k)/3> or its mirror (i-k)/3.
    const Rational h = ratio(1, 2), t = ratio(1, 3);
    QuaternionAlgebra alg{p, -3, -p};
    for (const Rational &sg : {t, Rational(-t)}) {
        auto o = std::make_shared<QuaternionOrder>(alg, std::array<QCoords, 4>{QCoords{1, 0, 0, 0}, QCoords{h, h, 0, 0}, QCoords{0, 0, h, h}, QCoords{0, t, 0, sg}});
        if (o->closed_under_multiplication() && abs(o->discriminant()) == Rational(p * p)) {
            return o;
        }
    }
    fail(ErrorKind::internal, "no maximal order containing a cube root of unity was found");
}

/// All x in the order with trd(x) = -r and nrd(x) = s.
inline std::vector<QuaternionElement> embed_tau_all(const OrderPtr &o, long r, long s)
{
    require(r * r - 4 * s < 0, ErrorKind::invalid_input, "T^2 + rT + s must have negative discriminant");
    const auto &alg = o->algebra();
    long d = to_long(o->denominator());
    Rational t = ratio(-r, 2);
    Rational rest = Rational(s) - t * t; // = |a| x^2 + |b| y^2 + |ab| z^2
    long aa = -alg.a, bb = -alg.b, ab = alg.a * alg.b;
    auto bound = [&](long coef) { return to_long(floor_of(Rational(rest * d * d / coef))); };
    auto isqrt = [](long v) {
        long x = static_cast<long>(std::sqrt(static_cast<double>(v)));
        while (x * x > v) {
            --x;
        }
        while ((x + 1) * (x + 1) <= v) {
            ++x;
        }
        return x;
    };
    std::vector<QuaternionElement> out;
    long zmax = isqrt(bound(ab));
    for (long Z = -zmax; Z <= zmax; ++Z) {
        Rational z = ratio(Z, d);
        Rational r1 = rest - ab * z * z;
        long ymax = isqrt(to_long(floor_of(Rational(r1 * d * d / bb))));
        for (long Y = -ymax; Y <= ymax; ++Y) {
            Rational y = ratio(Y, d);
            Rational r2 = r1 - bb * y * y; // = |a| x^2
            Rational x2 = r2 / aa;
            if (x2 < 0) {
                continue;
            }
            Rational xd2 = x2 * d * d;
            if (xd2.get_den() != 1) {
                continue;
            }
            long X = isqrt(to_long(xd2.get_num()));
            if (X * X != to_long(xd2.get_num())) {
                continue;
            }
            for (long sx : {X, -X}) {
                QCoords v{t, ratio(sx, d), y, z};
                if (o->contains(v)) {
                    out.push_back(QuaternionElement::from_q(o, v));
                }
                if (X == 0) {
                    break;
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<QuaternionElement> embed_tau(const OrderPtr &o, long r, long s)
{
    auto out = embed_tau_all(o, r, s);
    require(!out.empty(), ErrorKind::inconsistent_input,
            "Z[tau] does not embed in the maximal order at p = " + std::to_string(o->p()) + " (prime/basepoint inconsistency)");
    return out;
}

/// f_{j0} = T^2 + rT + s: (1, 1) for j0 = 0, (0, 1) for j0 = 1728.
inline std::pair<long, long> f_j0(JClass j0)
{
    require(j0 != JClass::generic, ErrorKind::invalid_input, "j0 must be 0 or 1728");
    return j0 == JClass::zero ? std::pair{1L, 1L} : std::pair{0L, 1L};
}

/// S_{j0}: roots of f_{j0} in the order (possibly empty).
inline std::vector<QuaternionElement> solve_char_poly(const OrderPtr &o, JClass j0)
{
    auto [r, s] = f_j0(j0);
    return embed_tau_all(o, r, s);
}

using Relation = std::array<Integer, 5>;

namespace detail
{

inline std::array<Rational, 4> qcoords(const QuaternionElement &x)
{
    std::array<Rational, 4> v;
    for (std::size_t i = 0; i < 4; ++i) {
        v[i] = x.coords()[i];
    }
    return v;
}

inline Relation primitive_relation(const std::vector<Rational> &v)
{
    auto z = linalg::primitive(v);
    Relation r;
    for (std::size_t i = 0; i < 5; ++i) {
        r[i] = z[i];
    }
    for (const auto &x : r) {
        if (x != 0) {
            if (x < 0) {
                for (auto &y : r) {
                    y = -y;
                }
            }
            break;
        }
    }
    return r;
}

} // namespace detail

/// Basis of all integer relations a0 tau u = a1 + a2 tau + a3 u + a4 u tau (primitive vectors).
inline std::vector<Relation> relation_kernel(const QuaternionElement &tau, const QuaternionElement &u)
{
    auto one = QuaternionElement::scalar(tau.order(), 1);
    std::array<QuaternionElement, 5> cols{tau * u, one, tau, u, u * tau};
    QMatrix m = linalg::zeros(4, 5);
    for (std::size_t c = 0; c < 5; ++c) {
        auto v = detail::qcoords(cols[c]);
        for (std::size_t r = 0; r < 4; ++r) {
            m[r][c] = c == 0 ? v[r] : Rational(-v[r]);
        }
    }
    auto k = linalg::kernel(m, 5);
    require(!k.empty(), ErrorKind::internal, "five quaternions in a rank-4 lattice have no relation");
    std::vector<Relation> out;
    for (const auto &v : k) {
        out.push_back(detail::primitive_relation(v));
    }
    return out;
}

/// One canonical relation: (1, 0, c, 0, 0) for scalar u = c, (1, 0, 0, 0, 1) for commuting
/// tau and u, otherwise the unique primitive relation with a0 >= 0.
inline Relation find_relation(const QuaternionElement &tau, const QuaternionElement &u)
{
    if (u.is_scalar()) {
        Rational c = u.q()[0];
        return {1, 0, c.get_num(), 0, 0};
    }
    if (tau * u == u * tau) {
        return {1, 0, 0, 0, 1};
    }
    auto k = relation_kernel(tau, u);
    require(k.size() == 1, ErrorKind::internal, "non-commuting quaternions with a relation space of dimension > 1");
    return k.front();
}

namespace detail
{

inline long mod_l(const Integer &x, long n)
{
    Integer r;
    mpz_fdiv_r_ui(r.get_mpz_t(), x.get_mpz_t(), static_cast<unsigned long>(n));
    return to_long(r);
}

inline long vp_l(long x, long p, long k)
{
    if (x == 0) {
        return k;
    }
    long v = 0;
    while (x % p == 0) {
        x /= p;
        ++v;
    }
    return v;
}

/// All solutions of A x = b over Z/p^k (A rows x 4), by a local Smith form with unit pivots.
inline std::vector<std::array<long, 4>> solve_local(std::vector<std::array<long, 4>> a, std::vector<long> b, long p, long k)
{
    long q = 1;
    for (long i = 0; i < k; ++i) {
        q *= p;
    }
    auto md = [q](long x) { return ((x % q) + q) % q; };
    std::size_t rows = a.size();
    // Column operations are tracked in qm: x = qm y.
    std::array<std::array<long, 4>, 4> qm{};
    for (std::size_t i = 0; i < 4; ++i) {
        qm[i][i] = 1;
    }
    std::vector<long> diag;
    std::size_t rank = 0;
    for (; rank < 4 && rank < rows; ++rank) {
        // pivot of minimal valuation in the remaining block
        long best = k;
        std::size_t br = rank, bc = rank;
        for (std::size_t r = rank; r < rows; ++r) {
            for (std::size_t c = rank; c < 4; ++c) {
                long v = vp_l(md(a[r][c]), p, k);
                if (v < best) {
                    best = v;
                    br = r;
                    bc = c;
                }
            }
        }
        if (best >= k) {
            break;
        }
        std::swap(a[rank], a[br]);
        std::swap(b[rank], b[br]);
        for (std::size_t r = 0; r < rows; ++r) {
            std::swap(a[r][rank], a[r][bc]);
        }
        for (std::size_t r = 0; r < 4; ++r) {
            std::swap(qm[r][rank], qm[r][bc]);
        }
        long pv = md(a[rank][rank]);
        long pk = 1;
        for (long i = 0; i < best; ++i) {
            pk *= p;
        }
        long unit = pv / pk;
        long uinv = inv_mod(unit, q);
        // normalize the pivot row to p^best on the diagonal
        for (std::size_t c = 0; c < 4; ++c) {
            a[rank][c] = md(static_cast<long>((static_cast<__int128>(a[rank][c]) * uinv) % q));
        }
        b[rank] = md(static_cast<long>((static_cast<__int128>(b[rank]) * uinv) % q));
        // eliminate the column below and the row to the right (entries are multiples of p^best)
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == rank || md(a[r][rank]) == 0) {
                continue;
            }
            long f = md(a[r][rank]) / pk;
            for (std::size_t c = 0; c < 4; ++c) {
                a[r][c] = md(a[r][c] - f * a[rank][c]);
            }
            b[r] = md(b[r] - f * b[rank]);
        }
        for (std::size_t c = rank + 1; c < 4; ++c) {
            long e = md(a[rank][c]);
            if (e == 0) {
                continue;
            }
            long f = e / pk;
            for (std::size_t r = 0; r < rows; ++r) {
                a[r][c] = md(a[r][c] - f * a[r][rank]);
            }
            for (std::size_t r = 0; r < 4; ++r) {
                qm[r][c] = md(qm[r][c] - f * qm[r][rank]);
            }
        }
        diag.push_back(best);
    }
    for (std::size_t r = rank; r < rows; ++r) {
        if (md(b[r]) != 0) {
            return {};
        }
    }
    // y_i for i < rank: p^{v_i} y_i = b_i; y_i free for i >= rank.
    std::vector<std::vector<long>> choices(4);
    for (std::size_t i = 0; i < 4; ++i) {
        if (i < rank) {
            long v = diag[i];
            long pv = 1;
            for (long t = 0; t < v; ++t) {
                pv *= p;
            }
            long bi = md(b[i]);
            if (bi % pv != 0) {
                return {};
            }
            long step = q / pv;
            for (long y = bi / pv; y < q; y += step) {
                choices[i].push_back(y);
            }
        } else {
            for (long y = 0; y < q; ++y) {
                choices[i].push_back(y);
            }
        }
    }
    std::vector<std::array<long, 4>> out;
    for (long y0 : choices[0]) {
        for (long y1 : choices[1]) {
            for (long y2 : choices[2]) {
                for (long y3 : choices[3]) {
                    std::array<long, 4> y{y0, y1, y2, y3}, x{};
                    for (std::size_t r = 0; r < 4; ++r) {
                        __int128 s = 0;
                        for (std::size_t c = 0; c < 4; ++c) {
                            s += static_cast<__int128>(qm[r][c]) * y[c];
                        }
                        x[r] = md(static_cast<long>(s % q));
                    }
                    out.push_back(x);
                }
            }
        }
    }
    return out;
}

} // namespace detail

/// All solutions of A x = b over Z/N, glued from the prime-power components by CRT.
inline std::vector<std::array<long, 4>> solve_linear_mod(const std::vector<std::array<long, 4>> &a, const std::vector<long> &b, long n)
{
    std::vector<std::array<long, 4>> acc{{0, 0, 0, 0}};
    long m = 1;
    for (auto [p, k] : factor_small(n)) {
        long q = 1;
        for (long i = 0; i < k; ++i) {
            q *= p;
        }
        std::vector<std::array<long, 4>> aq = a;
        std::vector<long> bq = b;
        for (auto &row : aq) {
            for (auto &x : row) {
                x = ((x % q) + q) % q;
            }
        }
        for (auto &x : bq) {
            x = ((x % q) + q) % q;
        }
        auto local = detail::solve_local(aq, bq, p, k);
        std::vector<std::array<long, 4>> next;
        long mi = inv_mod(m % q, q), qi = inv_mod(q % m, m);
        for (const auto &x : acc) {
            for (const auto &y : local) {
                std::array<long, 4> z;
                for (std::size_t i = 0; i < 4; ++i) {
                    // z = x mod m, z = y mod q
                    __int128 v = static_cast<__int128>(x[i]) * q % (m * q) * qi + static_cast<__int128>(y[i]) * m % (m * q) * mi;
                    z[i] = static_cast<long>(((v % (m * q)) + m * q) % (m * q));
                }
                next.push_back(z);
            }
        }
        acc = std::move(next);
        m *= q;
    }
    std::sort(acc.begin(), acc.end());
    return acc;
}

/// M_u: all X in M2(Z/N) with characteristic polynomial f_{j0} satisfying every relation
/// a0 T X = a1 I + a2 T + a3 X + a4 X T.
inline std::vector<ModMatrix> undetermined_coeffs(const std::vector<Relation> &rels, JClass j0, const ModMatrix &t, long n)
{
    auto [fr, fs] = f_j0(j0);
    // unknown X = [[x0, x1], [x2, x3]]; each relation gives four linear equations.
    std::vector<std::array<long, 4>> rows;
    std::vector<long> rhs;
    long ta = t.a(), tb = t.b(), tc = t.c(), td = t.d();
    for (const auto &rel : rels) {
        long a0 = detail::mod_l(rel[0], n), a1 = detail::mod_l(rel[1], n), a2 = detail::mod_l(rel[2], n), a3 = detail::mod_l(rel[3], n),
             a4 = detail::mod_l(rel[4], n);
        // (T X)_{rc} = sum_m T_rm X_mc, (X T)_{rc} = sum_m X_rm T_mc
        std::array<std::array<long, 2>, 2> tm{{{ta, tb}, {tc, td}}};
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                std::array<long, 4> row{0, 0, 0, 0};
                for (int m = 0; m < 2; ++m) {
                    row[static_cast<std::size_t>(2 * m + c)] += a0 * tm[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
                    row[static_cast<std::size_t>(2 * r + m)] -= a4 * tm[static_cast<std::size_t>(m)][static_cast<std::size_t>(c)];
                }
                row[static_cast<std::size_t>(2 * r + c)] -= a3;
                rows.push_back(row);
                long id = r == c ? 1 : 0;
                rhs.push_back(a1 * id + a2 * tm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
            }
        }
    }
    std::vector<ModMatrix> out;
    for (const auto &x : solve_linear_mod(rows, rhs, n)) {
        ModMatrix m(n, x[0], x[1], x[2], x[3]);
        if (m.trace() == ((-fr) % n + n) % n && m.det() == ((fs % n) + n) % n) {
            out.push_back(m);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<ModMatrix> undetermined_coeffs(const Relation &rel, JClass j0, const ModMatrix &t, long n)
{
    return undetermined_coeffs(std::vector<Relation>{rel}, j0, t, n);
}

/// M_{j0} for the supersingular case, with the per-embedding sets kept for diagnostics.
struct MJ0
{
    std::vector<ModMatrix> set;                       // union over all embeddings of tau
    std::vector<std::vector<ModMatrix>> per_embedding;
    std::size_t embeddings = 0;
    std::size_t s_size = 0;

    bool embeddings_disagree() const
    {
        for (const auto &x : per_embedding) {
            if (x != per_embedding.front()) {
                return true;
            }
        }
        return false;
    }
};

inline MJ0 m_j0(const OrderPtr &o, long r, long s, long n, JClass j0)
{
    MJ0 out;
    auto taus = embed_tau(o, r, s);
    auto us = solve_char_poly(o, j0);
    out.embeddings = taus.size();
    out.s_size = us.size();
    ModMatrix t = tau_matrix(n, r, s);
    std::set<ModMatrix> all;
    for (const auto &tau : taus) {
        std::set<ModMatrix> mine;
        for (const auto &u : us) {
            for (const auto &x : undetermined_coeffs(relation_kernel(tau, u), j0, t, n)) {
                mine.insert(x);
            }
        }
        out.per_embedding.emplace_back(mine.begin(), mine.end());
        all.insert(mine.begin(), mine.end());
    }
    out.set.assign(all.begin(), all.end());
    return out;
}

/// Rank-2 (ordinary) M_{j0}: roots of f_{j0} among the automorphisms commuting with T.
inline std::vector<ModMatrix> m_j0_ordinary(JClass j0, const ModMatrix &t, long n)
{
    auto [fr, fs] = f_j0(j0);
    std::vector<ModMatrix> out;
    for (const auto &x : automorphism_set(j0, t, n)) {
        if (x.trace() == ((-fr) % n + n) % n && x.det() == fs % n) {
            out.push_back(x);
        }
    }
    return out;
}

/// Every X in M lies in g^-1 H g.
inline bool containment(const std::vector<ModMatrix> &m, const SubgroupH &h, const ModMatrix &g)
{
    return std::all_of(m.begin(), m.end(), [&](const ModMatrix &x) { return h.conjugate_contains(g, x); });
}

} // namespace cmexp

#endif
