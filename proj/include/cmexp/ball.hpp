#ifndef CMEXP_BALL_HPP
#define CMEXP_BALL_HPP

#include <algorithm>
#include <ostream>
#include <string>

#include <cmexp/real.hpp>

namespace cmexp
{

/// Complex midpoint-radius enclosure. Every operation returns a ball that
/// contains the exact image of its inputs: midpoints are rounded to nearest
/// at `prec` bits and the rounding error is folded into the radius, which is
/// always rounded upward.
class ComplexBall
{
public:
    static constexpr long rad_prec = 64;

    explicit ComplexBall(long prec = 128) : m_re(prec), m_im(prec), m_rad(rad_prec) {}
    ComplexBall(long prec, long x) : ComplexBall(prec)
    {
        mpfr_set_si(m_re.get(), x, MPFR_RNDN);
    }
    ComplexBall(long prec, const Integer &z) : ComplexBall(prec)
    {
        mpfr_set_z(m_re.get(), z.get_mpz_t(), MPFR_RNDN);
        add_rounding_error();
    }
    ComplexBall(long prec, const Rational &re, const Rational &im = 0) : ComplexBall(prec)
    {
        mpfr_set_q(m_re.get(), re.get_mpq_t(), MPFR_RNDN);
        mpfr_set_q(m_im.get(), im.get_mpq_t(), MPFR_RNDN);
        add_rounding_error();
    }
    /// Builds a ball from explicit parts; `rad` is taken as given (rounded up).
    ComplexBall(const Real &re, const Real &im, const Real &rad)
        : m_re(re), m_im(im), m_rad(rad_prec)
    {
        long p = std::max(re.prec(), im.prec());
        if (m_re.prec() != p) {
            m_re = widen(re, p);
        }
        if (m_im.prec() != p) {
            m_im = widen(im, p);
        }
        mpfr_abs(m_rad.get(), rad.get(), MPFR_RNDU);
    }

    long prec() const noexcept
    {
        return m_re.prec();
    }
    const Real &re() const noexcept
    {
        return m_re;
    }
    const Real &im() const noexcept
    {
        return m_im;
    }
    const Real &rad() const noexcept
    {
        return m_rad;
    }
    double radius() const noexcept
    {
        return m_rad.to_double(MPFR_RNDU);
    }
    bool is_exact() const noexcept
    {
        return m_rad.is_zero();
    }

    /// Upper bound on |z| for every z in the ball.
    Real abs_upper() const
    {
        Real r = real::hypot(m_re, m_im, rad_prec, MPFR_RNDU);
        mpfr_add(r.get(), r.get(), m_rad.get(), MPFR_RNDU);
        return r;
    }
    /// Lower bound on |z| over the ball (zero if the ball touches the origin).
    Real abs_lower() const
    {
        Real r = real::hypot(m_re, m_im, rad_prec, MPFR_RNDD);
        mpfr_sub(r.get(), r.get(), m_rad.get(), MPFR_RNDD);
        if (r.sign() < 0) {
            mpfr_set_zero(r.get(), 1);
        }
        return r;
    }
    Real mid_abs_upper() const
    {
        return real::hypot(m_re, m_im, rad_prec, MPFR_RNDU);
    }
    bool contains_zero() const
    {
        return abs_lower().is_zero();
    }

    /// Exact containment test of a Gaussian rational re + i*im.
    bool contains(const Rational &re, const Rational &im = 0) const
    {
        Rational dr = m_re.to_rational() - re;
        Rational di = m_im.to_rational() - im;
        Rational r = m_rad.to_rational();
        return dr * dr + di * di <= r * r;
    }
    bool overlaps(const ComplexBall &o) const
    {
        Rational dr = m_re.to_rational() - o.m_re.to_rational();
        Rational di = m_im.to_rational() - o.m_im.to_rational();
        Rational r = m_rad.to_rational() + o.m_rad.to_rational();
        return dr * dr + di * di <= r * r;
    }
    /// True when `o` lies entirely inside this ball.
    bool contains(const ComplexBall &o) const
    {
        Rational dr = m_re.to_rational() - o.m_re.to_rational();
        Rational di = m_im.to_rational() - o.m_im.to_rational();
        Rational r = m_rad.to_rational() - o.m_rad.to_rational();
        return r >= 0 && dr * dr + di * di <= r * r;
    }

    ComplexBall &inflate(const Real &extra)
    {
        Real e = real::abs(extra, rad_prec, MPFR_RNDU);
        mpfr_add(m_rad.get(), m_rad.get(), e.get(), MPFR_RNDU);
        return *this;
    }
    ComplexBall &inflate(double extra)
    {
        return inflate(real::from_double(extra, 53));
    }

    ComplexBall conj() const
    {
        ComplexBall r = *this;
        mpfr_neg(r.m_im.get(), r.m_im.get(), MPFR_RNDN);
        return r;
    }
    ComplexBall operator-() const
    {
        ComplexBall r = *this;
        mpfr_neg(r.m_re.get(), r.m_re.get(), MPFR_RNDN);
        mpfr_neg(r.m_im.get(), r.m_im.get(), MPFR_RNDN);
        return r;
    }

    friend ComplexBall operator+(const ComplexBall &a, const ComplexBall &b)
    {
        ComplexBall r(std::max(a.prec(), b.prec()));
        mpfr_add(r.m_re.get(), a.m_re.get(), b.m_re.get(), MPFR_RNDN);
        mpfr_add(r.m_im.get(), a.m_im.get(), b.m_im.get(), MPFR_RNDN);
        mpfr_add(r.m_rad.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        r.add_rounding_error();
        return r;
    }
    friend ComplexBall operator-(const ComplexBall &a, const ComplexBall &b)
    {
        ComplexBall r(std::max(a.prec(), b.prec()));
        mpfr_sub(r.m_re.get(), a.m_re.get(), b.m_re.get(), MPFR_RNDN);
        mpfr_sub(r.m_im.get(), a.m_im.get(), b.m_im.get(), MPFR_RNDN);
        mpfr_add(r.m_rad.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
        r.add_rounding_error();
        return r;
    }
    friend ComplexBall operator*(const ComplexBall &a, const ComplexBall &b)
    {
        ComplexBall r(std::max(a.prec(), b.prec()));
        // fmma/fmms are correctly rounded, so each component has a single rounding.
        mpfr_fmms(r.m_re.get(), a.m_re.get(), b.m_re.get(), a.m_im.get(), b.m_im.get(), MPFR_RNDN);
        mpfr_fmma(r.m_im.get(), a.m_re.get(), b.m_im.get(), a.m_im.get(), b.m_re.get(), MPFR_RNDN);
        if (!a.is_exact() || !b.is_exact()) {
            Real ma = a.mid_abs_upper(), mb = b.mid_abs_upper();
            Real t(rad_prec);
            mpfr_mul(t.get(), ma.get(), b.m_rad.get(), MPFR_RNDU);
            mpfr_add(r.m_rad.get(), r.m_rad.get(), t.get(), MPFR_RNDU);
            mpfr_mul(t.get(), mb.get(), a.m_rad.get(), MPFR_RNDU);
            mpfr_add(r.m_rad.get(), r.m_rad.get(), t.get(), MPFR_RNDU);
            mpfr_mul(t.get(), a.m_rad.get(), b.m_rad.get(), MPFR_RNDU);
            mpfr_add(r.m_rad.get(), r.m_rad.get(), t.get(), MPFR_RNDU);
        }
        r.add_rounding_error();
        return r;
    }
    friend ComplexBall operator*(const ComplexBall &a, long k)
    {
        ComplexBall r = a;
        mpfr_mul_si(r.m_re.get(), r.m_re.get(), k, MPFR_RNDN);
        mpfr_mul_si(r.m_im.get(), r.m_im.get(), k, MPFR_RNDN);
        mpfr_mul_ui(r.m_rad.get(), r.m_rad.get(), static_cast<unsigned long>(k < 0 ? -k : k), MPFR_RNDU);
        r.add_rounding_error();
        return r;
    }
    friend ComplexBall operator*(const ComplexBall &a, const Integer &k)
    {
        return a * ComplexBall(a.prec(), k);
    }

    /// 1/z; throws PrecisionError when the ball contains zero.
    ComplexBall inverse() const
    {
        Real lo = abs_lower();
        if (lo.is_zero()) {
            throw PrecisionError("division by a ball that contains zero", 2 * prec());
        }
        long p = prec();
        ComplexBall r(p);
        Real n2(p + 16);
        mpfr_fmma(n2.get(), m_re.get(), m_re.get(), m_im.get(), m_im.get(), MPFR_RNDN);
        mpfr_div(r.m_re.get(), m_re.get(), n2.get(), MPFR_RNDN);
        mpfr_div(r.m_im.get(), m_im.get(), n2.get(), MPFR_RNDN);
        mpfr_neg(r.m_im.get(), r.m_im.get(), MPFR_RNDN);
        // Rounding: two roundings on each component plus the norm; bound by 2^(3-p)/|m|.
        Real mlo = real::hypot(m_re, m_im, rad_prec, MPFR_RNDD);
        Real e(rad_prec);
        mpfr_ui_div(e.get(), 1, mlo.get(), MPFR_RNDU);
        mpfr_mul_2si(e.get(), e.get(), 3 - p, MPFR_RNDU);
        mpfr_add(r.m_rad.get(), r.m_rad.get(), e.get(), MPFR_RNDU);
        if (!is_exact()) {
            // |1/(m+d) - 1/m| <= r / (|m| (|m| - r))
            Real t(rad_prec);
            mpfr_mul(t.get(), mlo.get(), lo.get(), MPFR_RNDD);
            mpfr_div(t.get(), m_rad.get(), t.get(), MPFR_RNDU);
            mpfr_add(r.m_rad.get(), r.m_rad.get(), t.get(), MPFR_RNDU);
        }
        return r;
    }
    friend ComplexBall operator/(const ComplexBall &a, const ComplexBall &b)
    {
        return a * b.inverse();
    }
    ComplexBall &operator+=(const ComplexBall &o)
    {
        return *this = *this + o;
    }
    ComplexBall &operator-=(const ComplexBall &o)
    {
        return *this = *this - o;
    }
    ComplexBall &operator*=(const ComplexBall &o)
    {
        return *this = *this * o;
    }

    ComplexBall pow(unsigned long e) const
    {
        ComplexBall result(prec(), 1), base = *this;
        while (e > 0) {
            if (e & 1u) {
                result *= base;
            }
            e >>= 1u;
            if (e > 0) {
                base *= base;
            }
        }
        return result;
    }

    std::string str(std::size_t digits = 20) const
    {
        return "(" + m_re.str(digits) + " + " + m_im.str(digits) + "i) +/- " + m_rad.str(4, MPFR_RNDU);
    }
    friend std::ostream &operator<<(std::ostream &os, const ComplexBall &b)
    {
        return os << b.str();
    }

private:
    static Real widen(const Real &x, long p)
    {
        Real r(p);
        mpfr_set(r.get(), x.get(), MPFR_RNDN);
        return r;
    }
    void add_rounding_error()
    {
        if (m_re.is_zero() && m_im.is_zero()) {
            return;
        }
        // Each component carries at most one rounding of 2^-prec relative size.
        Real e(rad_prec);
        Real ar = real::abs(m_re, rad_prec), ai = real::abs(m_im, rad_prec);
        mpfr_add(e.get(), ar.get(), ai.get(), MPFR_RNDU);
        mpfr_mul_2si(e.get(), e.get(), -prec(), MPFR_RNDU);
        mpfr_add(m_rad.get(), m_rad.get(), e.get(), MPFR_RNDU);
    }

    Real m_re, m_im, m_rad;
};

namespace ball
{

inline ComplexBall pi(long prec)
{
    Real p = real::pi(prec);
    Real r(ComplexBall::rad_prec);
    mpfr_set_ui_2exp(r.get(), 4, -prec, MPFR_RNDU);
    return ComplexBall(p, Real(prec), r);
}

inline ComplexBall i(long prec)
{
    return ComplexBall(Real(prec), Real(prec, 1L), Real(ComplexBall::rad_prec));
}

/// Square root of a real ball whose every point is strictly positive.
inline ComplexBall sqrt_positive(const ComplexBall &x)
{
    long p = x.prec();
    Real lo(ComplexBall::rad_prec);
    mpfr_sub(lo.get(), x.re().get(), x.rad().get(), MPFR_RNDD);
    if (lo.sign() <= 0 || !x.im().is_zero()) {
        throw PrecisionError("sqrt_positive needs a strictly positive real ball", 2 * p);
    }
    Real s = real::sqrt(x.re(), p);
    Real r(ComplexBall::rad_prec);
    // |sqrt(a+d) - sqrt(a)| <= d / sqrt(a - d); plus one rounding.
    Real slo = real::sqrt(lo, ComplexBall::rad_prec, MPFR_RNDD);
    mpfr_div(r.get(), x.rad().get(), slo.get(), MPFR_RNDU);
    Real e = real::abs(s, ComplexBall::rad_prec);
    mpfr_mul_2si(e.get(), e.get(), -p, MPFR_RNDU);
    mpfr_add(r.get(), r.get(), e.get(), MPFR_RNDU);
    return ComplexBall(s, Real(p), r);
}

/// Principal square root. The enclosure assumes the ball stays off the
/// negative real axis; it is only used where a coarse answer suffices.
inline ComplexBall sqrt(const ComplexBall &z)
{
    long p = z.prec();
    Real m = real::hypot(z.re(), z.im(), p, MPFR_RNDN);
    Real a = real::add(m, z.re(), p);
    mpfr_div_2ui(a.get(), a.get(), 1, MPFR_RNDN);
    Real re = real::sqrt(a, p);
    Real im(p);
    if (re.is_zero()) {
        Real b = real::sub(m, z.re(), p);
        mpfr_div_2ui(b.get(), b.get(), 1, MPFR_RNDN);
        im = real::sqrt(b, p);
        if (z.im().sign() < 0) {
            mpfr_neg(im.get(), im.get(), MPFR_RNDN);
        }
    } else {
        im = real::div(z.im(), re, p);
        mpfr_div_2ui(im.get(), im.get(), 1, MPFR_RNDN);
    }
    Real r(ComplexBall::rad_prec);
    Real lo = z.abs_lower();
    if (!z.is_exact() && !lo.is_zero()) {
        Real s = real::sqrt(lo, ComplexBall::rad_prec, MPFR_RNDD);
        mpfr_div(r.get(), z.rad().get(), s.get(), MPFR_RNDU);
    } else if (!z.is_exact()) {
        r = real::sqrt(z.rad(), ComplexBall::rad_prec, MPFR_RNDU);
        mpfr_mul_2ui(r.get(), r.get(), 1, MPFR_RNDU);
    }
    Real e = real::hypot(re, im, ComplexBall::rad_prec, MPFR_RNDU);
    mpfr_mul_2si(e.get(), e.get(), 4 - p, MPFR_RNDU);
    mpfr_add(r.get(), r.get(), e.get(), MPFR_RNDU);
    return ComplexBall(re, im, r);
}

/// exp(z), with |exp(z+d) - exp(z)| <= |exp(z)| (e^|d| - 1).
inline ComplexBall exp(const ComplexBall &z)
{
    long p = z.prec();
    long wp = p + 32;
    Real ex = real::exp(z.re(), wp);
    Real c(wp), s(wp);
    mpfr_sin_cos(s.get(), c.get(), z.im().get(), MPFR_RNDN);
    Real re = real::mul(ex, c, p), im = real::mul(ex, s, p);
    Real bound(ComplexBall::rad_prec);
    {
        Real hi(ComplexBall::rad_prec);
        mpfr_add(hi.get(), z.re().get(), z.rad().get(), MPFR_RNDU);
        mpfr_exp(bound.get(), hi.get(), MPFR_RNDU);
    }
    Real r(ComplexBall::rad_prec);
    if (!z.is_exact()) {
        mpfr_expm1(r.get(), z.rad().get(), MPFR_RNDU);
        mpfr_mul(r.get(), r.get(), bound.get(), MPFR_RNDU);
    }
    // Roundings of exp, sin, cos at wp bits and of the products at p bits.
    Real e(ComplexBall::rad_prec);
    mpfr_mul_2si(e.get(), bound.get(), 2 - p, MPFR_RNDU);
    mpfr_add(r.get(), r.get(), e.get(), MPFR_RNDU);
    return ComplexBall(re, im, r);
}

} // namespace ball

} // namespace cmexp

#endif
