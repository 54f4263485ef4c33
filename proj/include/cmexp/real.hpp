#ifndef CMEXP_REAL_HPP
#define CMEXP_REAL_HPP

#include <string>
#include <utility>

#include <mpfr.h>

#include <cmexp/rational.hpp>

namespace cmexp
{

// RAII holder for an mpfr_t with its own precision. Arithmetic goes through the
// free functions below so that the rounding direction is always explicit.
class Real
{
public:
    explicit Real(long prec = 128)
    {
        mpfr_init2(m_v, prec);
        mpfr_set_zero(m_v, 1);
    }
    Real(long prec, long x) : Real(prec)
    {
        mpfr_set_si(m_v, x, MPFR_RNDN);
    }
    Real(long prec, const Integer &z, mpfr_rnd_t rnd = MPFR_RNDN) : Real(prec)
    {
        mpfr_set_z(m_v, z.get_mpz_t(), rnd);
    }
    Real(long prec, const Rational &q, mpfr_rnd_t rnd = MPFR_RNDN) : Real(prec)
    {
        mpfr_set_q(m_v, q.get_mpq_t(), rnd);
    }
    Real(const Real &o)
    {
        mpfr_init2(m_v, mpfr_get_prec(o.m_v));
        mpfr_set(m_v, o.m_v, MPFR_RNDN);
    }
    Real(Real &&o) noexcept
    {
        mpfr_init2(m_v, MPFR_PREC_MIN);
        mpfr_swap(m_v, o.m_v);
    }
    Real &operator=(const Real &o)
    {
        if (this != &o) {
            mpfr_set_prec(m_v, mpfr_get_prec(o.m_v));
            mpfr_set(m_v, o.m_v, MPFR_RNDN);
        }
        return *this;
    }
    Real &operator=(Real &&o) noexcept
    {
        mpfr_swap(m_v, o.m_v);
        return *this;
    }
    ~Real()
    {
        mpfr_clear(m_v);
    }

    mpfr_ptr get() noexcept
    {
        return m_v;
    }
    mpfr_srcptr get() const noexcept
    {
        return m_v;
    }
    long prec() const noexcept
    {
        return static_cast<long>(mpfr_get_prec(m_v));
    }
    int sign() const noexcept
    {
        return mpfr_sgn(m_v);
    }
    bool is_zero() const noexcept
    {
        return mpfr_zero_p(m_v) != 0;
    }
    bool is_finite() const noexcept
    {
        return mpfr_number_p(m_v) != 0;
    }
    double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const noexcept
    {
        return mpfr_get_d(m_v, rnd);
    }
    /// Exact value as a rational (midpoints are dyadic).
    Rational to_rational() const
    {
        require(is_finite(), ErrorKind::precision, "non-finite real");
        Rational q;
        mpfr_get_q(q.get_mpq_t(), m_v);
        return q;
    }
    /// Decimal string with `digits` significant digits (0 = enough to round-trip).
    std::string str(std::size_t digits = 0, mpfr_rnd_t rnd = MPFR_RNDN) const
    {
        if (is_zero()) {
            return "0";
        }
        mpfr_exp_t e;
        char *s = mpfr_get_str(nullptr, &e, 10, digits, m_v, rnd);
        std::string mant(s);
        mpfr_free_str(s);
        std::string sign;
        if (!mant.empty() && mant[0] == '-') {
            sign = "-";
            mant.erase(0, 1);
        }
        return sign + "0." + mant + "e" + std::to_string(static_cast<long>(e));
    }
    static Real parse(const std::string &s, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
    {
        Real r(prec);
        if (mpfr_set_str(r.m_v, s.c_str(), 10, rnd) != 0) {
            fail(ErrorKind::invalid_input, "not a decimal number: '" + s + "'");
        }
        return r;
    }

private:
    mpfr_t m_v;
};

namespace real
{

inline Real add(const Real &a, const Real &b, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_add(r.get(), a.get(), b.get(), rnd);
    return r;
}
inline Real sub(const Real &a, const Real &b, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_sub(r.get(), a.get(), b.get(), rnd);
    return r;
}
inline Real mul(const Real &a, const Real &b, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_mul(r.get(), a.get(), b.get(), rnd);
    return r;
}
inline Real div(const Real &a, const Real &b, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_div(r.get(), a.get(), b.get(), rnd);
    return r;
}
inline Real abs(const Real &a, long prec, mpfr_rnd_t rnd = MPFR_RNDU)
{
    Real r(prec);
    mpfr_abs(r.get(), a.get(), rnd);
    return r;
}
inline Real sqrt(const Real &a, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_sqrt(r.get(), a.get(), rnd);
    return r;
}
inline Real hypot(const Real &a, const Real &b, long prec, mpfr_rnd_t rnd)
{
    Real r(prec);
    mpfr_hypot(r.get(), a.get(), b.get(), rnd);
    return r;
}
inline Real pi(long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_const_pi(r.get(), rnd);
    return r;
}
inline Real exp(const Real &a, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_exp(r.get(), a.get(), rnd);
    return r;
}
inline Real mul_2si(const Real &a, long e, long prec, mpfr_rnd_t rnd = MPFR_RNDN)
{
    Real r(prec);
    mpfr_mul_2si(r.get(), a.get(), e, rnd);
    return r;
}
inline Real max(const Real &a, const Real &b, long prec)
{
    Real r(prec);
    mpfr_max(r.get(), a.get(), b.get(), MPFR_RNDU);
    return r;
}
inline Real from_double(double d, long prec)
{
    Real r(prec);
    mpfr_set_d(r.get(), d, MPFR_RNDN);
    return r;
}
inline int cmp(const Real &a, const Real &b)
{
    return mpfr_cmp(a.get(), b.get());
}

} // namespace real

} // namespace cmexp

#endif
