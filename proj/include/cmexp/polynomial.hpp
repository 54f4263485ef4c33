#ifndef CMEXP_POLYNOMIAL_HPP
#define CMEXP_POLYNOMIAL_HPP

#include <utility>
#include <vector>

#include <cmexp/rational.hpp>

namespace cmexp
{

// Dense univariate polynomials over Q, coefficients stored low degree first.
using QPoly = std::vector<Rational>;

namespace poly
{

inline void trim(QPoly &a)
{
    while (!a.empty() && a.back() == 0) {
        a.pop_back();
    }
}

inline long degree(const QPoly &a)
{
    for (long i = static_cast<long>(a.size()) - 1; i >= 0; --i) {
        if (a[static_cast<std::size_t>(i)] != 0) {
            return i;
        }
    }
    return -1;
}

inline QPoly add(const QPoly &a, const QPoly &b)
{
    QPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] += b[i];
    }
    trim(r);
    return r;
}

inline QPoly sub(const QPoly &a, const QPoly &b)
{
    QPoly r(std::max(a.size(), b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        r[i] += a[i];
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        r[i] -= b[i];
    }
    trim(r);
    return r;
}

inline QPoly mul(const QPoly &a, const QPoly &b)
{
    if (a.empty() || b.empty()) {
        return {};
    }
    QPoly r(a.size() + b.size() - 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; j < b.size(); ++j) {
            r[i + j] += a[i] * b[j];
        }
    }
    trim(r);
    return r;
}

inline QPoly scale(const QPoly &a, const Rational &c)
{
    QPoly r = a;
    for (auto &x : r) {
        x *= c;
    }
    trim(r);
    return r;
}

/// Quotient and remainder of a by b (b nonzero).
inline std::pair<QPoly, QPoly> divmod(QPoly a, const QPoly &b)
{
    long db = degree(b);
    require(db >= 0, ErrorKind::internal, "polynomial division by zero");
    trim(a);
    long da = degree(a);
    if (da < db) {
        return {{}, a};
    }
    QPoly q(static_cast<std::size_t>(da - db + 1));
    const Rational &lead = b[static_cast<std::size_t>(db)];
    for (long i = da; i >= db; --i) {
        Rational c = a[static_cast<std::size_t>(i)] / lead;
        q[static_cast<std::size_t>(i - db)] = c;
        if (c == 0) {
            continue;
        }
        for (long j = 0; j <= db; ++j) {
            a[static_cast<std::size_t>(i - db + j)] -= c * b[static_cast<std::size_t>(j)];
        }
    }
    trim(a);
    trim(q);
    return {q, a};
}

inline QPoly mod(const QPoly &a, const QPoly &b)
{
    return divmod(a, b).second;
}

inline QPoly derivative(const QPoly &a)
{
    QPoly r;
    for (std::size_t i = 1; i < a.size(); ++i) {
        r.push_back(a[i] * static_cast<long>(i));
    }
    trim(r);
    return r;
}

inline QPoly monic(QPoly a)
{
    trim(a);
    if (a.empty()) {
        return a;
    }
    Rational l = a.back();
    for (auto &x : a) {
        x /= l;
    }
    return a;
}

inline QPoly gcd(QPoly a, QPoly b)
{
    trim(a);
    trim(b);
    while (!b.empty()) {
        QPoly r = mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return monic(a);
}

/// Returns (g, s) with s*a == g (mod m), g = gcd(a, m) monic.
inline std::pair<QPoly, QPoly> inverse_mod(const QPoly &a, const QPoly &m)
{
    QPoly r0 = m, r1 = a, s0{}, s1{Rational(1)};
    trim(r1);
    while (!r1.empty()) {
        auto [q, r] = divmod(r0, r1);
        QPoly s = sub(s0, mul(q, s1));
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s);
    }
    if (r0.empty()) {
        return {{}, {}};
    }
    Rational l = r0.back();
    return {monic(r0), scale(s0, 1 / l)};
}

inline Rational eval(const QPoly &a, const Rational &x)
{
    Rational r = 0;
    for (std::size_t i = a.size(); i-- > 0;) {
        r = r * x + a[i];
    }
    return r;
}

inline QPoly from_integers(const std::vector<Integer> &c)
{
    QPoly r;
    for (const auto &z : c) {
        r.emplace_back(z);
    }
    trim(r);
    return r;
}

} // namespace poly

} // namespace cmexp

#endif
