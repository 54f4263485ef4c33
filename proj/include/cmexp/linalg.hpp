#ifndef CMEXP_LINALG_HPP
#define CMEXP_LINALG_HPP

#include <vector>

#include <cmexp/rational.hpp>

namespace cmexp
{

// Small exact matrices over Q (row-major, vector of rows).
using QMatrix = std::vector<std::vector<Rational>>;

namespace linalg
{

inline QMatrix zeros(std::size_t rows, std::size_t cols)
{
    return QMatrix(rows, std::vector<Rational>(cols));
}

inline QMatrix identity(std::size_t n)
{
    QMatrix m = zeros(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i][i] = 1;
    }
    return m;
}

inline QMatrix mul(const QMatrix &a, const QMatrix &b)
{
    QMatrix r = zeros(a.size(), b.empty() ? 0 : b[0].size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (a[i][k] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < b[k].size(); ++j) {
                r[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    return r;
}

inline std::vector<Rational> mul(const QMatrix &a, const std::vector<Rational> &v)
{
    std::vector<Rational> r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            r[i] += a[i][j] * v[j];
        }
    }
    return r;
}

inline QMatrix transpose(const QMatrix &a)
{
    QMatrix r = zeros(a.empty() ? 0 : a[0].size(), a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < a[i].size(); ++j) {
            r[j][i] = a[i][j];
        }
    }
    return r;
}

inline Rational det(QMatrix a)
{
    std::size_t n = a.size();
    Rational d = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) {
            ++piv;
        }
        if (piv == n) {
            return 0;
        }
        if (piv != c) {
            std::swap(a[piv], a[c]);
            d = -d;
        }
        d *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            if (a[r][c] == 0) {
                continue;
            }
            Rational f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) {
                a[r][k] -= f * a[c][k];
            }
        }
    }
    return d;
}

/// Inverse of a square matrix; throws when singular.
inline QMatrix inverse(QMatrix a)
{
    std::size_t n = a.size();
    QMatrix inv = identity(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        while (piv < n && a[piv][c] == 0) {
            ++piv;
        }
        require(piv < n, ErrorKind::inconsistent_input, "singular matrix");
        std::swap(a[piv], a[c]);
        std::swap(inv[piv], inv[c]);
        Rational s = 1 / a[c][c];
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] *= s;
            inv[c][k] *= s;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c || a[r][c] == 0) {
                continue;
            }
            Rational f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    return inv;
}

/// Basis of the right kernel {x : a x = 0} over Q.
inline std::vector<std::vector<Rational>> kernel(QMatrix a, std::size_t cols)
{
    std::size_t rows = a.size();
    std::vector<long> pivot_col;
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t piv = r;
        while (piv < rows && a[piv][c] == 0) {
            ++piv;
        }
        if (piv == rows) {
            continue;
        }
        std::swap(a[piv], a[r]);
        Rational s = 1 / a[r][c];
        for (auto &x : a[r]) {
            x *= s;
        }
        for (std::size_t rr = 0; rr < rows; ++rr) {
            if (rr == r || a[rr][c] == 0) {
                continue;
            }
            Rational f = a[rr][c];
            for (std::size_t k = 0; k < cols; ++k) {
                a[rr][k] -= f * a[r][k];
            }
        }
        pivot_col.push_back(static_cast<long>(c));
        ++r;
    }
    std::vector<bool> is_pivot(cols, false);
    for (long c : pivot_col) {
        is_pivot[static_cast<std::size_t>(c)] = true;
    }
    std::vector<std::vector<Rational>> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) {
            continue;
        }
        std::vector<Rational> v(cols);
        v[free] = 1;
        for (std::size_t i = 0; i < pivot_col.size(); ++i) {
            v[static_cast<std::size_t>(pivot_col[i])] = -a[i][free];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

/// Scales a rational vector to a primitive integer vector (same direction).
inline std::vector<Integer> primitive(const std::vector<Rational> &v)
{
    Integer den = 1;
    for (const auto &x : v) {
        den = lcm(den, x.get_den());
    }
    std::vector<Integer> r;
    Integer g = 0;
    for (const auto &x : v) {
        Integer z = x.get_num() * (den / x.get_den());
        r.push_back(z);
        g = gcd(g, z);
    }
    if (g > 1) {
        for (auto &z : r) {
            z /= g;
        }
    }
    return r;
}

} // namespace linalg

} // namespace cmexp

#endif
