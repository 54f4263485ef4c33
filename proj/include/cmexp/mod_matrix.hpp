#ifndef CMEXP_MOD_MATRIX_HPP
#define CMEXP_MOD_MATRIX_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include <cmexp/rational.hpp>

namespace cmexp
{

/// 2x2 matrix over Z/N, entries kept in [0, N).
class ModMatrix
{
public:
    ModMatrix() = default;
    ModMatrix(long n, long a, long b, long c, long d) : m_n(n)
    {
        require(n >= 1, ErrorKind::invalid_input, "modulus must be >= 1");
        m_e = {mod(a, n), mod(b, n), mod(c, n), mod(d, n)};
    }
    static ModMatrix identity(long n)
    {
        return {n, 1, 0, 0, 1};
    }
    static ModMatrix scalar(long n, long x)
    {
        return {n, x, 0, 0, x};
    }
    /// Inverse of code().
    static ModMatrix from_code(long n, std::uint64_t code)
    {
        auto un = static_cast<std::uint64_t>(n);
        long d = static_cast<long>(code % un);
        code /= un;
        long c = static_cast<long>(code % un);
        code /= un;
        long b = static_cast<long>(code % un);
        code /= un;
        return {n, static_cast<long>(code), b, c, d};
    }

    long modulus() const noexcept
    {
        return m_n;
    }
    long a() const noexcept
    {
        return m_e[0];
    }
    long b() const noexcept
    {
        return m_e[1];
    }
    long c() const noexcept
    {
        return m_e[2];
    }
    long d() const noexcept
    {
        return m_e[3];
    }
    long det() const
    {
        return mod(mulmod(m_e[0], m_e[3]) - mulmod(m_e[1], m_e[2]), m_n);
    }
    long trace() const
    {
        return mod(m_e[0] + m_e[3], m_n);
    }
    bool invertible() const
    {
        return gcd64(det(), m_n) == 1;
    }
    bool is_scalar() const
    {
        return m_e[1] == 0 && m_e[2] == 0 && m_e[0] == m_e[3];
    }
    ModMatrix inverse() const
    {
        long di = inv_mod(det(), m_n);
        if (m_n != 1 && di == 0) {
            fail(ErrorKind::invalid_input, "matrix is not invertible mod " + std::to_string(m_n));
        }
        return {m_n, mulmod(di, m_e[3]), mulmod(di, -m_e[1]), mulmod(di, -m_e[2]), mulmod(di, m_e[0])};
    }
    /// Image under Z/N -> Z/M for M dividing N.
    ModMatrix reduce(long m) const
    {
        require(m >= 1 && m_n % m == 0, ErrorKind::invalid_input, "reduction modulus must divide N");
        return {m, m_e[0], m_e[1], m_e[2], m_e[3]};
    }
    /// Dense index in [0, N^4), used for set membership and canonical ordering.
    std::uint64_t code() const noexcept
    {
        auto un = static_cast<std::uint64_t>(m_n);
        std::uint64_t r = 0;
        for (long x : m_e) {
            r = r * un + static_cast<std::uint64_t>(x);
        }
        return r;
    }
    /// Action on a column vector.
    std::array<long, 2> apply(long x, long y) const
    {
        return {mod(mulmod(m_e[0], x) + mulmod(m_e[1], y), m_n), mod(mulmod(m_e[2], x) + mulmod(m_e[3], y), m_n)};
    }

    friend bool operator==(const ModMatrix &x, const ModMatrix &y)
    {
        return x.m_n == y.m_n && x.m_e == y.m_e;
    }
    friend bool operator<(const ModMatrix &x, const ModMatrix &y)
    {
        return x.m_n != y.m_n ? x.m_n < y.m_n : x.m_e < y.m_e;
    }
    friend ModMatrix operator+(const ModMatrix &x, const ModMatrix &y)
    {
        same_modulus(x, y);
        return {x.m_n, x.m_e[0] + y.m_e[0], x.m_e[1] + y.m_e[1], x.m_e[2] + y.m_e[2], x.m_e[3] + y.m_e[3]};
    }
    friend ModMatrix operator-(const ModMatrix &x, const ModMatrix &y)
    {
        same_modulus(x, y);
        return {x.m_n, x.m_e[0] - y.m_e[0], x.m_e[1] - y.m_e[1], x.m_e[2] - y.m_e[2], x.m_e[3] - y.m_e[3]};
    }
    ModMatrix operator-() const
    {
        return {m_n, -m_e[0], -m_e[1], -m_e[2], -m_e[3]};
    }
    friend ModMatrix operator*(long s, const ModMatrix &x)
    {
        s = mod(s, x.m_n);
        return {x.m_n, x.mulmod(s, x.m_e[0]), x.mulmod(s, x.m_e[1]), x.mulmod(s, x.m_e[2]), x.mulmod(s, x.m_e[3])};
    }
    friend ModMatrix operator*(const ModMatrix &x, const ModMatrix &y)
    {
        same_modulus(x, y);
        return {x.m_n,
                x.mulmod(x.m_e[0], y.m_e[0]) + x.mulmod(x.m_e[1], y.m_e[2]),
                x.mulmod(x.m_e[0], y.m_e[1]) + x.mulmod(x.m_e[1], y.m_e[3]),
                x.mulmod(x.m_e[2], y.m_e[0]) + x.mulmod(x.m_e[3], y.m_e[2]),
                x.mulmod(x.m_e[2], y.m_e[1]) + x.mulmod(x.m_e[3], y.m_e[3])};
    }

    std::string str() const
    {
        return "[[" + std::to_string(m_e[0]) + "," + std::to_string(m_e[1]) + "],[" + std::to_string(m_e[2]) + "," + std::to_string(m_e[3]) + "]]";
    }

private:
    static void same_modulus(const ModMatrix &x, const ModMatrix &y)
    {
        if (x.m_n != y.m_n) {
            fail(ErrorKind::invalid_input, "modulus mismatch: " + std::to_string(x.m_n) + " vs " + std::to_string(y.m_n));
        }
    }
    long mulmod(long x, long y) const
    {
        if (m_n < (1L << 31)) {
            return (x * y) % m_n;
        }
        return static_cast<long>((static_cast<__int128>(x) * y) % m_n);
    }

    long m_n = 1;
    std::array<long, 4> m_e{0, 0, 0, 0};
};

inline ModMatrix matmul_modN(const ModMatrix &a, const ModMatrix &b)
{
    return a * b;
}

/// |GL_2(Z/N)| = N^4 * prod_{p | N} (1 - 1/p)(1 - 1/p^2).
inline std::uint64_t gl2_order(long n)
{
    std::uint64_t r = 1;
    for (auto [p, k] : factor_small(n)) {
        std::uint64_t pk = 1;
        for (long i = 0; i < k; ++i) {
            pk *= static_cast<std::uint64_t>(p);
        }
        auto up = static_cast<std::uint64_t>(p);
        r *= (pk / up) * (pk / up) * (pk / up) * (pk / up) * (up * up - 1) * (up * up - up);
    }
    return r;
}

/// Closure of a set of invertible matrices under multiplication, as sorted codes.
inline std::vector<std::uint64_t> generate_group(long n, const std::vector<ModMatrix> &gens, std::uint64_t limit = 50'000'000)
{
    std::vector<std::uint64_t> out;
    std::vector<bool> seen;
    std::uint64_t n4 = static_cast<std::uint64_t>(n) * n * n * n;
    seen.assign(n4, false);
    std::deque<ModMatrix> queue;
    ModMatrix id = ModMatrix::identity(n);
    seen[id.code()] = true;
    queue.push_back(id);
    while (!queue.empty()) {
        ModMatrix x = queue.front();
        queue.pop_front();
        out.push_back(x.code());
        require(out.size() <= limit, ErrorKind::resource, "group closure exceeds limit");
        for (const auto &g : gens) {
            ModMatrix y = x * g;
            if (!seen[y.code()]) {
                seen[y.code()] = true;
                queue.push_back(y);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cmexp

#endif
