#ifndef CMEXP_EXPANSION_HPP
#define CMEXP_EXPANSION_HPP

#include <vector>

#include <cmexp/certificate.hpp>
#include <cmexp/series.hpp>

namespace cmexp
{

/// a = (a_1, ..., a_{n+1}): Taylor coefficients of t at q_b; b = (b_0, ..., b_n): those of f.
template <typename T>
struct CoeffSystem
{
    std::vector<T> a;
    std::vector<T> b;
    std::size_t n = 0;

    void validate() const
    {
        require(a.size() == n + 1, ErrorKind::invalid_input, "coefficient system needs a_1 .. a_{n+1}");
        require(b.size() == n + 1, ErrorKind::invalid_input, "coefficient system needs b_0 .. b_n");
    }
};

namespace detail
{

inline bool maybe_zero(const Rational &x)
{
    return x == 0;
}
inline bool maybe_zero(const ComplexBall &x)
{
    return x.contains_zero();
}

} // namespace detail

/// M_{l,0} = (l+1) a_{l+1}, M_{l,j} = sum_{k=1}^{l-j+1} a_k M_{l-k,j-1}: the coefficient
/// of s^l in t(s)^j t'(s). Lower triangular, (n+1) x (n+1).
template <typename T>
std::vector<std::vector<T>> build_M(const std::vector<T> &a, std::size_t n)
{
    require(a.size() >= n + 1, ErrorKind::invalid_input, "build_M needs a_1 .. a_{n+1}");
    const T zero = ring_like(a[0], 0);
    std::vector<std::vector<T>> m(n + 1, std::vector<T>(n + 1, zero));
    for (std::size_t l = 0; l <= n; ++l) {
        m[l][0] = a[l] * ring_like(a[0], static_cast<long>(l + 1));
    }
    for (std::size_t j = 1; j <= n; ++j) {
        for (std::size_t l = j; l <= n; ++l) {
            T acc = zero;
            for (std::size_t k = 1; k <= l - j + 1; ++k) {
                acc += a[k - 1] * m[l - k][j - 1];
            }
            m[l][j] = acc;
        }
    }
    return m;
}

/// c = M^-1 b by forward substitution: g(t) dt = sum c_l t^l dt matches f(q) dq.
template <typename T>
std::vector<T> solve_coeffs(const CoeffSystem<T> &sys)
{
    sys.validate();
    if (detail::maybe_zero(sys.a[0])) {
        throw PrecisionError("singular system: a_1 contains zero (diagonal entry 0)", 0);
    }
    auto m = build_M(sys.a, sys.n);
    std::vector<T> c;
    c.reserve(sys.n + 1);
    for (std::size_t l = 0; l <= sys.n; ++l) {
        T acc = sys.b[l];
        for (std::size_t j = 0; j < l; ++j) {
            acc -= m[l][j] * c[j];
        }
        if (detail::maybe_zero(m[l][l])) {
            throw PrecisionError("singular system: diagonal entry " + std::to_string(l) + " contains zero", 0);
        }
        c.push_back(acc / m[l][l]);
    }
    return c;
}

/// [c_l * C^[l+1]]_l.
template <typename T>
std::vector<T> rescale(const std::vector<T> &c, const DenominatorCertificate &cert)
{
    std::vector<T> out;
    out.reserve(c.size());
    for (std::size_t l = 0; l < c.size(); ++l) {
        out.push_back(c[l] * cert.C(static_cast<long>(l + 1)));
    }
    return out;
}

} // namespace cmexp

#endif
