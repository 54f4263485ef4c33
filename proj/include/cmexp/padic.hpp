#ifndef CMEXP_PADIC_HPP
#define CMEXP_PADIC_HPP

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include <cmexp/rational.hpp>

namespace cmexp
{

/// Element of Q_p(pi) with pi^e = p (a totally, tamely ramified extension for
/// p not dividing e), held to a capped absolute precision.
///
/// The value is p^k * sum_{i<e} c_i pi^i with integer c_i. Valuations are
/// normalised so that nu(p) = 1; precision is counted in pi-adic digits, so an
/// element is known modulo pi^prec, i.e. up to valuation prec/e. Terms at or
/// beyond the cap are dropped. Precision propagates pessimistically: a product
/// is known to min(prec_a + v_b, prec_b + v_a).
class PadicElement
{
public:
    PadicElement(Integer p, int e, long prec_digits) : m_p(std::move(p)), m_e(e), m_prec(prec_digits), m_c(static_cast<std::size_t>(e))
    {
        require(m_p >= 2, ErrorKind::invalid_input, "p-adic prime must be >= 2");
        require(e >= 1, ErrorKind::invalid_input, "ramification index must be >= 1");
    }
    PadicElement(Integer p, int e, long prec_digits, const Rational &q) : PadicElement(std::move(p), e, prec_digits)
    {
        if (q != 0) {
            long vn = valuation(q.get_num(), m_p), vd = valuation(q.get_den(), m_p);
            Integer num = q.get_num(), den = q.get_den();
            Integer t;
            mpz_remove(t.get_mpz_t(), num.get_mpz_t(), m_p.get_mpz_t());
            num = t;
            mpz_remove(t.get_mpz_t(), den.get_mpz_t(), m_p.get_mpz_t());
            den = t;
            m_k = vn - vd;
            long digits = ceil_div(m_prec, m_e) - m_k;
            if (digits > 0) {
                Integer mod = cmexp::pow(m_p, static_cast<unsigned long>(digits));
                Integer inv;
                mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), mod.get_mpz_t());
                m_c[0] = num * inv;
            }
            normalize();
        }
    }
    PadicElement(Integer p, int e, long prec_digits, long x) : PadicElement(std::move(p), e, prec_digits, Rational(x)) {}

    /// The uniformizer pi of Q_p(p^(1/e)).
    static PadicElement uniformizer(const Integer &p, int e, long prec_digits)
    {
        PadicElement r(p, e, prec_digits);
        if (e == 1) {
            r.m_c[0] = 1;
            r.m_k = 1;
        } else {
            r.m_c[1] = 1;
        }
        r.normalize();
        return r;
    }

    const Integer &p() const noexcept
    {
        return m_p;
    }
    int e() const noexcept
    {
        return m_e;
    }
    /// Absolute precision in pi-adic digits.
    long prec_digits() const noexcept
    {
        return m_prec;
    }
    /// Absolute precision in valuation units (nu(p) = 1).
    Rational prec() const
    {
        return ratio(m_prec, m_e);
    }
    bool is_zero() const
    {
        return std::all_of(m_c.begin(), m_c.end(), [](const Integer &c) { return c == 0; });
    }
    /// A context-compatible constant.
    PadicElement like(long x) const
    {
        return PadicElement(m_p, m_e, m_prec, Rational(x));
    }
    PadicElement like(const Rational &x) const
    {
        return PadicElement(m_p, m_e, m_prec, x);
    }

    /// Valuation in pi-adic digits; exact because distinct i give distinct residues mod e.
    long valuation_digits() const
    {
        if (is_zero()) {
            fail(ErrorKind::precision, "undecidable valuation: element is zero to precision " + to_string(prec()));
        }
        long best = std::numeric_limits<long>::max();
        for (int i = 0; i < m_e; ++i) {
            if (m_c[static_cast<std::size_t>(i)] != 0) {
                best = std::min(best, m_e * (m_k + valuation(m_c[static_cast<std::size_t>(i)], m_p)) + i);
            }
        }
        return best;
    }
    /// nu(x) with nu(p) = 1; a rational whose denominator divides e.
    Rational val() const
    {
        Rational r(valuation_digits(), m_e);
        r.canonicalize();
        return r;
    }
    /// Lower bound on the valuation (in digits) usable for precision bookkeeping.
    long valuation_floor_digits() const
    {
        return is_zero() ? m_prec : valuation_digits();
    }

    friend PadicElement operator+(const PadicElement &a, const PadicElement &b)
    {
        check_compatible(a, b);
        PadicElement r(a.m_p, a.m_e, std::min(a.m_prec, b.m_prec));
        if (a.is_zero()) {
            r.m_c = b.m_c;
            r.m_k = b.m_k;
        } else if (b.is_zero()) {
            r.m_c = a.m_c;
            r.m_k = a.m_k;
        } else {
            long k = std::min(a.m_k, b.m_k);
            Integer fa = cmexp::pow(a.m_p, static_cast<unsigned long>(a.m_k - k));
            Integer fb = cmexp::pow(a.m_p, static_cast<unsigned long>(b.m_k - k));
            for (std::size_t i = 0; i < r.m_c.size(); ++i) {
                r.m_c[i] = a.m_c[i] * fa + b.m_c[i] * fb;
            }
            r.m_k = k;
        }
        r.normalize();
        return r;
    }
    PadicElement operator-() const
    {
        PadicElement r = *this;
        for (auto &c : r.m_c) {
            c = -c;
        }
        r.normalize();
        return r;
    }
    friend PadicElement operator-(const PadicElement &a, const PadicElement &b)
    {
        return a + (-b);
    }
    friend PadicElement operator*(const PadicElement &a, const PadicElement &b)
    {
        check_compatible(a, b);
        long prec = std::min(a.m_prec + b.valuation_floor_digits(), b.m_prec + a.valuation_floor_digits());
        PadicElement r(a.m_p, a.m_e, prec);
        if (a.is_zero() || b.is_zero()) {
            return r;
        }
        const std::size_t e = r.m_c.size();
        for (std::size_t i = 0; i < e; ++i) {
            if (a.m_c[i] == 0) {
                continue;
            }
            for (std::size_t j = 0; j < e; ++j) {
                if (i + j < e) {
                    r.m_c[i + j] += a.m_c[i] * b.m_c[j];
                } else {
                    r.m_c[i + j - e] += a.m_c[i] * b.m_c[j] * a.m_p;
                }
            }
        }
        r.m_k = a.m_k + b.m_k;
        r.normalize();
        return r;
    }
    friend PadicElement operator*(const PadicElement &a, long x)
    {
        return a * a.like(x);
    }
    PadicElement &operator+=(const PadicElement &o)
    {
        return *this = *this + o;
    }
    PadicElement &operator-=(const PadicElement &o)
    {
        return *this = *this - o;
    }
    PadicElement &operator*=(const PadicElement &o)
    {
        return *this = *this * o;
    }

    PadicElement pow(unsigned long n) const
    {
        PadicElement r = like(1), b = *this;
        while (n > 0) {
            if (n & 1u) {
                r *= b;
            }
            n >>= 1u;
            if (n > 0) {
                b *= b;
            }
        }
        return r;
    }

    /// Multiplication by pi^m (m may be negative); exact, shifts the precision.
    PadicElement shift(long m) const
    {
        PadicElement r(m_p, m_e, m_prec + m);
        long q = floor_div(m, m_e);
        long rem = m - q * m_e;
        for (int i = 0; i < m_e; ++i) {
            long j = i + rem;
            if (j < m_e) {
                r.m_c[static_cast<std::size_t>(j)] += m_c[static_cast<std::size_t>(i)];
            } else {
                r.m_c[static_cast<std::size_t>(j - m_e)] += m_c[static_cast<std::size_t>(i)] * m_p;
            }
        }
        r.m_k = m_k + q;
        r.normalize();
        return r;
    }

    /// Same element inside Q_p(p^(1/E)) for E a multiple of e.
    PadicElement with_ramification(int E) const
    {
        require(E % m_e == 0, ErrorKind::invalid_input, "target ramification must be a multiple of e");
        int f = E / m_e;
        PadicElement r(m_p, E, m_prec * f);
        for (int i = 0; i < m_e; ++i) {
            r.m_c[static_cast<std::size_t>(i * f)] = m_c[static_cast<std::size_t>(i)];
        }
        r.m_k = m_k;
        r.normalize();
        return r;
    }

    /// Reduction to the residue field F_p (the element must be integral).
    Integer residue() const
    {
        if (is_zero()) {
            return 0;
        }
        require(valuation_digits() >= 0, ErrorKind::invalid_input, "residue of a non-integral element");
        if (m_k > 0) {
            return 0;
        }
        Integer r;
        mpz_fdiv_r(r.get_mpz_t(), m_c[0].get_mpz_t(), m_p.get_mpz_t());
        return r;
    }

    std::string str() const
    {
        std::string s = "p^" + std::to_string(m_k) + "*(";
        for (int i = 0; i < m_e; ++i) {
            s += (i ? " + " : "") + m_c[static_cast<std::size_t>(i)].get_str() + "*pi^" + std::to_string(i);
        }
        return s + ") + O(pi^" + std::to_string(m_prec) + ")";
    }

private:
    static long floor_div(long a, long b)
    {
        long q = a / b;
        return (a % b != 0 && (a < 0) != (b < 0)) ? q - 1 : q;
    }
    static long ceil_div(long a, long b)
    {
        return -floor_div(-a, b);
    }
    static void check_compatible(const PadicElement &a, const PadicElement &b)
    {
        require(a.m_e == b.m_e && a.m_p == b.m_p, ErrorKind::invalid_input, "p-adic elements from different fields");
    }

    void normalize()
    {
        bool all_zero = true;
        for (int i = 0; i < m_e; ++i) {
            auto &c = m_c[static_cast<std::size_t>(i)];
            if (c == 0) {
                continue;
            }
            long digits = ceil_div(m_prec - i, m_e) - m_k;
            if (digits <= 0) {
                c = 0;
                continue;
            }
            Integer mod = cmexp::pow(m_p, static_cast<unsigned long>(digits));
            mpz_fdiv_r(c.get_mpz_t(), c.get_mpz_t(), mod.get_mpz_t());
            if (c != 0) {
                all_zero = false;
            }
        }
        if (all_zero) {
            m_k = 0;
            return;
        }
        while (std::all_of(m_c.begin(), m_c.end(), [&](const Integer &c) { return mpz_divisible_p(c.get_mpz_t(), m_p.get_mpz_t()) != 0; })) {
            for (auto &c : m_c) {
                c /= m_p;
            }
            ++m_k;
        }
    }

    Integer m_p;
    int m_e;
    long m_prec;
    long m_k = 0;
    std::vector<Integer> m_c;
};

/// nu(x) for a p-adic element; throws when x is zero at its precision.
inline Rational padic_val(const PadicElement &x)
{
    return x.val();
}

} // namespace cmexp

#endif
