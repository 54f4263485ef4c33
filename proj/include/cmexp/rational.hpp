#ifndef CMEXP_RATIONAL_HPP
#define CMEXP_RATIONAL_HPP

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

#include <cmexp/error.hpp>

namespace cmexp
{

using Integer = mpz_class;
using Rational = mpq_class;

/// n/d in lowest terms (mpq_class(n, d) does not canonicalize).
inline Rational ratio(long n, long d)
{
    require(d != 0, ErrorKind::invalid_input, "zero denominator");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

// Exact rationals travel as "num/den" strings (or bare integers) in every file format.
inline std::string to_string(const Rational &q)
{
    Rational c = q;
    c.canonicalize();
    if (c.get_den() == 1) {
        return c.get_num().get_str();
    }
    return c.get_num().get_str() + "/" + c.get_den().get_str();
}

inline std::string to_string(const Integer &z)
{
    return z.get_str();
}

inline Rational parse_rational(const std::string &s)
{
    Rational q;
    if (s.empty() || q.set_str(s, 10) != 0) {
        fail(ErrorKind::invalid_input, "not a rational number: '" + s + "'");
    }
    if (q.get_den() == 0) {
        fail(ErrorKind::invalid_input, "zero denominator in '" + s + "'");
    }
    q.canonicalize();
    return q;
}

inline Integer parse_integer(const std::string &s)
{
    Integer z;
    if (s.empty() || z.set_str(s, 10) != 0) {
        fail(ErrorKind::invalid_input, "not an integer: '" + s + "'");
    }
    return z;
}

inline Integer floor_of(const Rational &q)
{
    Integer r;
    mpz_fdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline Integer ceil_of(const Rational &q)
{
    Integer r;
    mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
    return r;
}

inline long to_long(const Integer &z)
{
    require(z.fits_slong_p(), ErrorKind::resource, "integer does not fit in a machine word: " + z.get_str());
    return z.get_si();
}

/// p-adic valuation of a nonzero integer.
inline long valuation(const Integer &z, const Integer &p)
{
    require(z != 0, ErrorKind::invalid_input, "valuation of zero");
    Integer t;
    return static_cast<long>(mpz_remove(t.get_mpz_t(), z.get_mpz_t(), p.get_mpz_t()));
}

inline long valuation(const Rational &q, const Integer &p)
{
    return valuation(q.get_num(), p) - valuation(q.get_den(), p);
}

inline Integer pow(const Integer &b, unsigned long e)
{
    Integer r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

inline Integer abs(const Integer &z)
{
    return z < 0 ? Integer(-z) : z;
}

inline Integer gcd(const Integer &a, const Integer &b)
{
    Integer r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Integer lcm(const Integer &a, const Integer &b)
{
    Integer r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline bool is_probable_prime(const Integer &n)
{
    return n >= 2 && mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

namespace detail
{

inline Integer pollard_rho(const Integer &n)
{
    if (mpz_even_p(n.get_mpz_t())) {
        return 2;
    }
    for (unsigned long c = 1;; ++c) {
        Integer x = 2, y = 2, d = 1;
        auto step = [&](const Integer &v) {
            Integer r = v * v + c;
            mpz_mod(r.get_mpz_t(), r.get_mpz_t(), n.get_mpz_t());
            return r;
        };
        while (d == 1) {
            x = step(x);
            y = step(step(y));
            Integer diff = abs(Integer(x - y));
            d = gcd(diff, n);
        }
        if (d != n) {
            return d;
        }
    }
}

inline void factor_into(Integer n, std::map<Integer, long> &out)
{
    if (n == 1) {
        return;
    }
    if (is_probable_prime(n)) {
        ++out[n];
        return;
    }
    Integer d = pollard_rho(n);
    factor_into(d, out);
    factor_into(Integer(n / d), out);
}

} // namespace detail

/// Prime factorisation of |n| (n != 0) as prime -> exponent, ascending.
inline std::map<Integer, long> factor(const Integer &n)
{
    require(n != 0, ErrorKind::invalid_input, "cannot factor zero");
    std::map<Integer, long> out;
    Integer m = abs(n);
    for (unsigned long p = 2; p < 10000 && m > 1; ++p) {
        Integer pp = p;
        if (!is_probable_prime(pp)) {
            continue;
        }
        while (mpz_divisible_ui_p(m.get_mpz_t(), p)) {
            m /= p;
            ++out[pp];
        }
    }
    detail::factor_into(m, out);
    return out;
}

/// Least nonnegative residue of a modulo n > 0.
inline Integer mod(const Integer &a, const Integer &n)
{
    Integer r;
    mpz_fdiv_r(r.get_mpz_t(), a.get_mpz_t(), n.get_mpz_t());
    return r;
}

// Small modular helpers used by the GL2(Z/N) code, where N stays tiny.
inline std::int64_t mod(std::int64_t a, std::int64_t n)
{
    std::int64_t r = a % n;
    return r < 0 ? r + n : r;
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b)
{
    a = a < 0 ? -a : a;
    b = b < 0 ? -b : b;
    while (b != 0) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

/// Inverse of a modulo n, or 0 when a is not a unit (n > 1).
inline std::int64_t inv_mod(std::int64_t a, std::int64_t n)
{
    std::int64_t t = 0, newt = 1, r = n, newr = mod(a, n);
    while (newr != 0) {
        std::int64_t q = r / newr;
        std::int64_t tmp = t - q * newt;
        t = newt;
        newt = tmp;
        tmp = r - q * newr;
        r = newr;
        newr = tmp;
    }
    if (r != 1) {
        return 0;
    }
    return mod(t, n);
}

inline std::vector<std::pair<std::int64_t, int>> factor_small(std::int64_t n)
{
    std::vector<std::pair<std::int64_t, int>> out;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        if (e > 0) {
            out.emplace_back(p, e);
        }
    }
    if (n > 1) {
        out.emplace_back(n, 1);
    }
    return out;
}

} // namespace cmexp

#endif
