#ifndef CMEXP_SERIES_HPP
#define CMEXP_SERIES_HPP

#include <vector>

#include <cmexp/ball.hpp>
#include <cmexp/padic.hpp>

namespace cmexp
{

// Scalars used generically by the series code. Each ring supplies constants
// built "like" a prototype element so that p-adic context (p, e, precision)
// and ball precision carry over.

inline Rational ring_like(const Rational &, long v)
{
    return Rational(v);
}
inline PadicElement ring_like(const PadicElement &proto, long v)
{
    return proto.like(v);
}
inline ComplexBall ring_like(const ComplexBall &proto, long v)
{
    return ComplexBall(proto.prec(), v);
}

inline bool ring_is_zero(const Rational &x)
{
    return x == 0;
}
inline bool ring_is_zero(const PadicElement &x)
{
    return x.is_zero();
}
inline bool ring_is_zero(const ComplexBall &x)
{
    return x.is_exact() && x.re().is_zero() && x.im().is_zero();
}

/// Valuation at p; std::nullopt when the element is (indistinguishable from) zero.
inline std::optional<Rational> ring_valuation(const Rational &x, const Integer &p)
{
    if (x == 0) {
        return std::nullopt;
    }
    return Rational(valuation(x, p));
}
inline std::optional<Rational> ring_valuation(const PadicElement &x, const Integer &p)
{
    require(x.p() == p, ErrorKind::invalid_input, "valuation at a prime different from the element's");
    if (x.is_zero()) {
        return std::nullopt;
    }
    return x.val();
}

/// Truncated univariate power series: coefficient i is the coefficient of T^i.
template <typename R>
using TruncSeries = std::vector<R>;

namespace ts
{

template <typename R>
TruncSeries<R> zeros(const R &proto, std::size_t n)
{
    return TruncSeries<R>(n, ring_like(proto, 0));
}

template <typename R>
TruncSeries<R> add(const TruncSeries<R> &a, const TruncSeries<R> &b)
{
    std::size_t n = std::min(a.size(), b.size());
    TruncSeries<R> r(a.begin(), a.begin() + static_cast<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = a[i] + b[i];
    }
    return r;
}

template <typename R>
TruncSeries<R> sub(const TruncSeries<R> &a, const TruncSeries<R> &b)
{
    std::size_t n = std::min(a.size(), b.size());
    TruncSeries<R> r(a.begin(), a.begin() + static_cast<long>(n));
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = a[i] - b[i];
    }
    return r;
}

template <typename R>
TruncSeries<R> scale(const TruncSeries<R> &a, const R &c)
{
    TruncSeries<R> r = a;
    for (auto &x : r) {
        x = x * c;
    }
    return r;
}

/// Product truncated to the shorter operand's length.
template <typename R>
TruncSeries<R> mul(const TruncSeries<R> &a, const TruncSeries<R> &b)
{
    std::size_t n = std::min(a.size(), b.size());
    if (n == 0) {
        return {};
    }
    TruncSeries<R> r = zeros(a[0], n);
    for (std::size_t i = 0; i < n; ++i) {
        if (ring_is_zero(a[i])) {
            continue;
        }
        for (std::size_t j = 0; i + j < n; ++j) {
            if (!ring_is_zero(b[j])) {
                r[i + j] += a[i] * b[j];
            }
        }
    }
    return r;
}

/// 1 / a for a with constant term exactly 1 (no division in the ring needed).
template <typename R>
TruncSeries<R> inv_one_plus(const TruncSeries<R> &a)
{
    std::size_t n = a.size();
    require(n > 0 && ring_is_zero(a[0] - ring_like(a[0], 1)), ErrorKind::internal, "series inverse needs constant term 1");
    TruncSeries<R> r = zeros(a[0], n);
    r[0] = ring_like(a[0], 1);
    for (std::size_t k = 1; k < n; ++k) {
        R acc = ring_like(a[0], 0);
        for (std::size_t i = 1; i <= k; ++i) {
            if (!ring_is_zero(a[i])) {
                acc += a[i] * r[k - i];
            }
        }
        r[k] = -acc;
    }
    return r;
}

/// a(b(T)) for b with zero constant term, truncated to the shorter length.
template <typename R>
TruncSeries<R> compose(const TruncSeries<R> &a, const TruncSeries<R> &b)
{
    std::size_t n = std::min(a.size(), b.size());
    if (n == 0) {
        return {};
    }
    require(ring_is_zero(b[0]), ErrorKind::internal, "inner series must have zero constant term");
    TruncSeries<R> bb(b.begin(), b.begin() + static_cast<long>(n));
    TruncSeries<R> r = zeros(a[0], n);
    for (std::size_t i = n; i-- > 0;) {
        r = mul(r, bb);
        r[0] += a[i];
    }
    return r;
}

} // namespace ts

} // namespace cmexp

#endif
