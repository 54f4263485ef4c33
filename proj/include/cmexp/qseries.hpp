#ifndef CMEXP_QSERIES_HPP
#define CMEXP_QSERIES_HPP

#include <array>
#include <complex>
#include <optional>
#include <vector>

#include <cmexp/ball.hpp>
#include <cmexp/number_field.hpp>

namespace cmexp
{

/// Truncated Laurent series sum_i coeffs[i] q^(offset + i); prec() terms are known.
template <typename R>
struct PowerSeries
{
    long offset = 0;
    std::vector<R> coeffs;

    std::size_t prec() const noexcept
    {
        return coeffs.size();
    }
    /// Exponent of the last known term.
    long last_exponent() const noexcept
    {
        return offset + static_cast<long>(coeffs.size()) - 1;
    }
};

namespace qs
{

template <typename R>
PowerSeries<R> mul(const PowerSeries<R> &a, const PowerSeries<R> &b, const R &zero)
{
    std::size_t n = std::min(a.prec(), b.prec());
    PowerSeries<R> r{a.offset + b.offset, std::vector<R>(n, zero)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; i + j < n; ++j) {
            r.coeffs[i + j] += a.coeffs[i] * b.coeffs[j];
        }
    }
    return r;
}

/// d/dq, term by term.
template <typename R>
PowerSeries<R> derivative(const PowerSeries<R> &s)
{
    PowerSeries<R> r{s.offset - 1, s.coeffs};
    for (std::size_t i = 0; i < r.coeffs.size(); ++i) {
        r.coeffs[i] = r.coeffs[i] * Rational(s.offset + static_cast<long>(i));
    }
    if (s.offset == 0 && !r.coeffs.empty()) {
        r.coeffs.erase(r.coeffs.begin());
        r.offset = 0;
    }
    return r;
}

/// Integer series: sum_k (-1)^k q^(k(3k-1)/2), the Euler product prod (1 - q^n).
inline std::vector<Integer> euler_product(std::size_t n)
{
    std::vector<Integer> c(n, 0);
    for (long k = 0;; ++k) {
        bool any = false;
        for (long kk : {k, -k}) {
            long e = kk * (3 * kk - 1) / 2;
            if (e < static_cast<long>(n)) {
                any = true;
                c[static_cast<std::size_t>(e)] = (k % 2 == 0) ? 1 : -1;
            }
        }
        if (!any) {
            break;
        }
    }
    return c;
}

inline std::vector<Integer> mul_int(const std::vector<Integer> &a, const std::vector<Integer> &b)
{
    std::size_t n = std::min(a.size(), b.size());
    std::vector<Integer> r(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i] == 0) {
            continue;
        }
        for (std::size_t j = 0; i + j < n; ++j) {
            r[i + j] += a[i] * b[j];
        }
    }
    return r;
}

/// 1 + k * sum sigma_{m}(n) q^n.
inline std::vector<Integer> eisenstein(std::size_t n, unsigned long m, long k)
{
    std::vector<Integer> c(n, 0);
    if (n > 0) {
        c[0] = 1;
    }
    for (std::size_t d = 1; d < n; ++d) {
        Integer dm = pow(Integer(static_cast<long>(d)), m);
        for (std::size_t e = d; e < n; e += d) {
            c[e] += dm;
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        c[i] *= k;
    }
    return c;
}

} // namespace qs

/// j(q) = E4^3 / Delta with Delta = q prod (1 - q^n)^24; prec terms from q^-1.
inline PowerSeries<Rational> j_series(std::size_t prec)
{
    require(prec >= 1, ErrorKind::invalid_input, "j-series precision must be >= 1");
    auto e4 = qs::eisenstein(prec, 3, 240);
    auto e4c = qs::mul_int(qs::mul_int(e4, e4), e4);
    auto eta = qs::euler_product(prec);
    auto eta2 = qs::mul_int(eta, eta);
    auto eta4 = qs::mul_int(eta2, eta2);
    auto eta8 = qs::mul_int(eta4, eta4);
    auto d = qs::mul_int(qs::mul_int(eta8, eta8), eta8); // Delta / q, constant term 1
    // e4c / d by long division
    std::vector<Integer> q(prec, 0);
    for (std::size_t i = 0; i < prec; ++i) {
        Integer acc = e4c[i];
        for (std::size_t k = 1; k <= i; ++k) {
            acc -= d[k] * q[i - k];
        }
        q[i] = acc;
    }
    PowerSeries<Rational> j{-1, {}};
    for (auto &x : q) {
        j.coeffs.emplace_back(x);
    }
    return j;
}

/// Coefficients of a number-field series pushed through one complex embedding.
inline PowerSeries<ComplexBall> embed_series(const PowerSeries<NumberFieldElement> &s, std::size_t root, long prec)
{
    PowerSeries<ComplexBall> r{s.offset, {}};
    for (const auto &c : s.coeffs) {
        r.coeffs.push_back(nf_embed(c, root, prec));
    }
    return r;
}

inline PowerSeries<ComplexBall> to_ball_series(const PowerSeries<Rational> &s, long prec)
{
    PowerSeries<ComplexBall> r{s.offset, {}};
    for (const auto &c : s.coeffs) {
        r.coeffs.emplace_back(prec, c);
    }
    return r;
}

/// tau = root of T^2 + rT + s in the upper half plane, q_b = exp(2 pi i tau), and the
/// tau-values of the Galois conjugates (one per reduced primitive form of the discriminant).
struct Basepoint
{
    long r = 0, s = 0;
    ComplexBall tau;
    ComplexBall q_b;
    std::vector<ComplexBall> conjugates;

    long discriminant() const noexcept
    {
        return r * r - 4 * s;
    }
};

/// Reduced primitive positive-definite forms (a, b, c) of discriminant d < 0.
inline std::vector<std::array<long, 3>> reduced_forms(long d)
{
    require(d < 0 && (d % 4 == 0 || (d % 4 + 4) % 4 == 1), ErrorKind::invalid_input, "not a negative discriminant");
    std::vector<std::array<long, 3>> out;
    for (long a = 1; 3 * a * a <= -d; ++a) {
        for (long b = -a + 1; b <= a; ++b) {
            long num = b * b - d;
            if (num % (4 * a) != 0) {
                continue;
            }
            long c = num / (4 * a);
            if (c < a || (c == a && b < 0)) {
                continue;
            }
            if (gcd64(gcd64(a, std::abs(b)), c) != 1) {
                continue;
            }
            out.push_back({a, b, c});
        }
    }
    return out;
}

namespace detail
{

/// (-b + sqrt(d)) / (2a) as a ball, d < 0.
inline ComplexBall tau_of_form(long a, long b, long d, long prec)
{
    long wp = prec + 16;
    ComplexBall root = ball::sqrt_positive(ComplexBall(wp, -d)) * ball::i(wp);
    return (root - ComplexBall(wp, b)) * ComplexBall(wp, ratio(1, 2 * a));
}

inline ComplexBall q_of_tau(const ComplexBall &tau)
{
    long wp = tau.prec();
    ComplexBall two_pi_i = ball::pi(wp) * ball::i(wp) * 2;
    return ball::exp(two_pi_i * tau);
}

} // namespace detail

inline Basepoint make_basepoint(long r, long s, long prec)
{
    long d = r * r - 4 * s;
    require(d < 0, ErrorKind::invalid_input, "tau must be imaginary quadratic (r^2 - 4s < 0)");
    Basepoint b;
    b.r = r;
    b.s = s;
    b.tau = detail::tau_of_form(1, r, d, prec);
    b.q_b = detail::q_of_tau(b.tau);
    for (const auto &f : reduced_forms(d)) {
        b.conjugates.push_back(detail::tau_of_form(f[0], f[1], d, prec));
    }
    return b;
}

namespace detail
{

inline Real abs_upper(const Rational &x)
{
    return Real(ComplexBall::rad_prec, Rational(abs(x)), MPFR_RNDU);
}
inline Real abs_upper(const ComplexBall &x)
{
    return x.abs_upper();
}

/// Heuristic tail bound for sum_{l > M} c_l z^l given the known terms (exponent, c_l),
/// last known exponent M and |z| <= qabs:
///   c* rho^(M+1) / (1 - rho), rho = |z| G, G = 2 max growth ratio over the last 20 terms,
/// with c* = max over those terms of |c_l| G^(M - l) >= |c_M|, so a vanishing c_M cannot hide the tail.
inline Real tail_bound(const std::vector<std::pair<long, Real>> &terms, long M, const Real &qabs)
{
    const long rp = ComplexBall::rad_prec;
    Real zero(rp);
    if (terms.empty()) {
        return zero;
    }
    std::size_t from = terms.size() > 21 ? terms.size() - 21 : 0;
    Real g(rp);
    std::optional<std::size_t> prev;
    for (std::size_t i = from; i < terms.size(); ++i) {
        if (terms[i].second.is_zero()) {
            continue;
        }
        if (prev) {
            Real ratio_ = real::div(terms[i].second, terms[*prev].second, rp, MPFR_RNDU);
            long gap = terms[i].first - terms[*prev].first;
            if (gap > 1) {
                mpfr_rootn_ui(ratio_.get(), ratio_.get(), static_cast<unsigned long>(gap), MPFR_RNDU);
            }
            g = real::max(g, ratio_, rp);
        }
        prev = i;
    }
    if (!prev) {
        return zero; // every recent coefficient vanishes
    }
    mpfr_mul_2ui(g.get(), g.get(), 1, MPFR_RNDU);
    Real cstar(rp);
    for (std::size_t i = from; i < terms.size(); ++i) {
        Real t(rp);
        mpfr_pow_ui(t.get(), g.get(), static_cast<unsigned long>(M - terms[i].first), MPFR_RNDU);
        t = real::mul(t, terms[i].second, rp, MPFR_RNDU);
        cstar = real::max(cstar, t, rp);
    }
    Real rho = real::mul(qabs, g, rp, MPFR_RNDU);
    if (mpfr_cmp_ui(rho.get(), 1) >= 0) {
        throw PrecisionError("series tail bound diverges at |q_b| (growth ratio too large)", 0);
    }
    Real pw(rp);
    if (M + 1 >= 0) {
        mpfr_pow_ui(pw.get(), rho.get(), static_cast<unsigned long>(M + 1), MPFR_RNDU);
    } else {
        mpfr_pow_si(pw.get(), rho.get(), M + 1, MPFR_RNDU);
    }
    Real den(rp, 1L);
    mpfr_sub(den.get(), den.get(), rho.get(), MPFR_RNDD);
    Real out = real::mul(cstar, pw, rp, MPFR_RNDU);
    return real::div(out, den, rp, MPFR_RNDU);
}

inline ComplexBall as_ball(const Rational &x, long prec)
{
    return ComplexBall(prec, x);
}
inline ComplexBall as_ball(const ComplexBall &x, long)
{
    return x;
}

/// Generalized binomial e(e-1)...(e-k+1)/k! for any integer e.
inline Integer binom_signed(long e, long k)
{
    Integer num = 1, den = 1;
    for (long i = 0; i < k; ++i) {
        num *= (e - i);
        den *= (i + 1);
    }
    return num / den;
}

} // namespace detail

/// [s(q_b), s'(q_b)/1!, ..., s^(n)(q_b)/n!], each inflated by the tail bound of the
/// corresponding formally differentiated series.
template <typename R>
std::vector<ComplexBall> taylor_at(const PowerSeries<R> &s, const ComplexBall &q_b, std::size_t n)
{
    long prec = q_b.prec();
    Real qabs = q_b.abs_upper();
    if (mpfr_cmp_ui(qabs.get(), 1) >= 0) {
        throw PrecisionError("|q_b| >= 1: series does not converge", 0);
    }
    require(!s.coeffs.empty(), ErrorKind::invalid_input, "empty series");
    bool has_negative = s.offset < 0;
    std::optional<ComplexBall> qinv;
    if (has_negative) {
        qinv = q_b.inverse();
    }
    std::vector<ComplexBall> out;
    for (std::size_t k = 0; k <= n; ++k) {
        long kk = static_cast<long>(k);
        // d_k(q) = sum_e c_e binom(e, k) q^(e - k)
        std::vector<ComplexBall> pos; // coefficient of q^(e-k) for e - k >= 0
        std::vector<ComplexBall> neg; // coefficient of q^-(m) for m = k - e >= 1, index m - 1
        std::vector<std::pair<long, Real>> mags;
        for (std::size_t i = 0; i < s.coeffs.size(); ++i) {
            long e = s.offset + static_cast<long>(i);
            Integer bc = detail::binom_signed(e, kk);
            long x = e - kk;
            if (bc == 0) {
                if (x >= 0) {
                    mags.emplace_back(x, Real(ComplexBall::rad_prec));
                }
                continue;
            }
            ComplexBall c = detail::as_ball(s.coeffs[i], prec) * bc;
            if (x >= 0) {
                if (pos.size() <= static_cast<std::size_t>(x)) {
                    pos.resize(static_cast<std::size_t>(x) + 1, ComplexBall(prec, 0L));
                }
                pos[static_cast<std::size_t>(x)] += c;
                Real m = real::mul(detail::abs_upper(s.coeffs[i]), Real(ComplexBall::rad_prec, abs(bc), MPFR_RNDU), ComplexBall::rad_prec, MPFR_RNDU);
                mags.emplace_back(x, m);
            } else {
                std::size_t idx = static_cast<std::size_t>(-x - 1);
                if (neg.size() <= idx) {
                    neg.resize(idx + 1, ComplexBall(prec, 0L));
                }
                neg[idx] += c;
            }
        }
        ComplexBall acc(prec, 0L);
        for (std::size_t i = pos.size(); i-- > 0;) {
            acc = acc * q_b + pos[i];
        }
        if (!neg.empty()) {
            ComplexBall nacc(prec, 0L);
            for (std::size_t i = neg.size(); i-- > 0;) {
                nacc = (nacc + neg[i]) * *qinv;
            }
            acc += nacc;
        }
        acc.inflate(detail::tail_bound(mags, s.last_exponent() - kk, qabs));
        out.push_back(acc);
    }
    return out;
}

namespace detail
{

using cplx = std::complex<double>;

/// Drops the radius; used where only a tolerance matters (period lattices).
inline ComplexBall strip(const ComplexBall &b)
{
    return ComplexBall(b.re(), b.im(), Real(ComplexBall::rad_prec));
}

/// Roots of a monic complex cubic x^3 + c2 x^2 + c1 x + c0 (midpoints), refined by Newton.
inline std::vector<ComplexBall> cubic_roots(const ComplexBall &c2, const ComplexBall &c1, const ComplexBall &c0)
{
    long prec = c0.prec();
    cplx a2(c2.re().to_double(), c2.im().to_double()), a1(c1.re().to_double(), c1.im().to_double()),
        a0(c0.re().to_double(), c0.im().to_double());
    auto f = [&](cplx x) { return ((x + a2) * x + a1) * x + a0; };
    std::vector<cplx> z{cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9), cplx(0.4, 0.9) * cplx(0.4, 0.9) * cplx(0.4, 0.9)};
    double scale = 1 + std::max({std::abs(a2), std::abs(a1), std::abs(a0)});
    for (auto &x : z) {
        x *= scale;
    }
    for (int it = 0; it < 500; ++it) {
        for (std::size_t i = 0; i < 3; ++i) {
            cplx den = 1;
            for (std::size_t j = 0; j < 3; ++j) {
                if (j != i) {
                    den *= z[i] - z[j];
                }
            }
            z[i] -= f(z[i]) / den;
        }
    }
    std::vector<ComplexBall> out;
    for (auto x : z) {
        ComplexBall b(prec, Rational(x.real()), Rational(x.imag()));
        b = strip(b);
        for (int it = 0; it < 24; ++it) {
            ComplexBall fx = strip(((b + c2) * b + c1) * b + c0);
            ComplexBall dfx = strip((b * 3 + c2 * 2) * b + c1);
            if (dfx.contains_zero()) {
                break;
            }
            b = strip(b - fx * strip(dfx.inverse()));
        }
        out.push_back(b);
    }
    return out;
}

/// Optimal complex AGM: at each step the square root closer to the arithmetic mean.
inline ComplexBall agm(ComplexBall a, ComplexBall b)
{
    long prec = a.prec();
    for (int it = 0; it < 4 * prec; ++it) {
        ComplexBall an = strip((a + b) * ComplexBall(prec, ratio(1, 2)));
        ComplexBall bn = strip(ball::sqrt(strip(a * b)));
        if (strip(an - bn).mid_abs_upper().to_double() > strip(an + bn).mid_abs_upper().to_double()) {
            bn = -bn;
        }
        a = an;
        b = bn;
        Real d = strip(a - b).mid_abs_upper();
        Real m = strip(a).mid_abs_upper();
        if (d.is_zero() || mpfr_get_exp(d.get()) < mpfr_get_exp(m.get()) - prec + 4) {
            break;
        }
    }
    return a;
}

/// Reduce tau into the standard fundamental domain (midpoint arithmetic).
inline ComplexBall reduce_tau(ComplexBall t)
{
    long prec = t.prec();
    for (int it = 0; it < 1000; ++it) {
        Real re = t.re();
        mpfr_rint(re.get(), re.get(), MPFR_RNDN);
        t = strip(t - ComplexBall(re, Real(prec), Real(ComplexBall::rad_prec)));
        Real n = t.mid_abs_upper();
        if (mpfr_cmp_ui(n.get(), 1) >= 0) {
            break;
        }
        t = strip(-strip(t.inverse()));
    }
    return t;
}

} // namespace detail

/// Period ratio w1/w2 of y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over C, in the upper half plane.
inline ComplexBall period_ratio(const ComplexBall &a1, const ComplexBall &a2, const ComplexBall &a3, const ComplexBall &a4, const ComplexBall &a6)
{
    using namespace detail;
    long prec = a1.prec();
    ComplexBall four(prec, 4L);
    ComplexBall b2 = strip(a1 * a1 + a2 * four), b4 = strip(a4 * 2 + a1 * a3), b6 = strip(a3 * a3 + a6 * four);
    // (2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6
    ComplexBall q = ComplexBall(prec, ratio(1, 4));
    auto e = cubic_roots(strip(b2 * q), strip(b4 * ComplexBall(prec, ratio(1, 2))), strip(b6 * q));
    ComplexBall a = ball::sqrt(strip(e[0] - e[2])), b = ball::sqrt(strip(e[0] - e[1])), c = ball::sqrt(strip(e[1] - e[2]));
    if (strip(a - b).mid_abs_upper().to_double() > strip(a + b).mid_abs_upper().to_double()) {
        b = -b;
    }
    if (strip(a - c).mid_abs_upper().to_double() > strip(a + c).mid_abs_upper().to_double()) {
        c = -c;
    }
    ComplexBall pi = strip(ball::pi(prec));
    ComplexBall w1 = strip(pi * strip(agm(a, b).inverse()));
    ComplexBall w2 = strip(pi * strip(agm(a, c).inverse()) * ball::i(prec));
    ComplexBall t = strip(w1 * strip(w2.inverse()));
    if (t.im().sign() < 0) {
        t = strip(-strip(t.inverse()));
    }
    if (t.im().sign() < 0) {
        t = -t;
    }
    return t;
}

/// True when tau1 and tau2 are SL2(Z)-equivalent up to the tolerance 2^-(prec/2).
inline bool same_lattice(const ComplexBall &tau1, const ComplexBall &tau2, long prec)
{
    using detail::strip;
    ComplexBall x = detail::reduce_tau(strip(tau1)), y = detail::reduce_tau(strip(tau2));
    Real tol(ComplexBall::rad_prec);
    mpfr_set_ui_2exp(tol.get(), 1, -prec / 2, MPFR_RNDN);
    std::vector<ComplexBall> variants{y, strip(y + ComplexBall(prec, 1L)), strip(y - ComplexBall(prec, 1L)), strip(-strip(y.inverse()))};
    variants.push_back(strip(variants[3] + ComplexBall(prec, 1L)));
    variants.push_back(strip(variants[3] - ComplexBall(prec, 1L)));
    for (const auto &v : variants) {
        if (real::cmp(strip(x - v).mid_abs_upper(), tol) <= 0) {
            return true;
        }
    }
    return false;
}

/// Embedding indices of the field of j_E whose image of E0(j_E) has lattice homothetic to Z tau + Z.
inline std::vector<std::size_t> matching_embeddings(const NumberFieldElement &j_e, long r, long s, long prec = 128)
{
    require(r * r - 4 * s < 0, ErrorKind::invalid_input, "tau must be imaginary quadratic");
    long wp = prec + 32;
    ComplexBall tau = detail::tau_of_form(1, r, r * r - 4 * s, wp);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < j_e.field()->degree(); ++k) {
        ComplexBall j = nf_embed(j_e, k, wp);
        ComplexBall d = detail::strip(j - ComplexBall(wp, 1728L));
        if (d.mid_abs_upper().to_double() < 1e-30 || j.mid_abs_upper().to_double() < 1e-30) {
            fail(ErrorKind::out_of_scope, "j_E must avoid 0 and 1728 in every embedding");
        }
        ComplexBall di = detail::strip(d.inverse());
        ComplexBall a4 = detail::strip(di * ComplexBall(wp, -36L)), a6 = detail::strip(-di);
        ComplexBall zero(wp, 0L), one(wp, 1L);
        ComplexBall t = period_ratio(one, zero, zero, a4, a6);
        if (same_lattice(t, tau, prec)) {
            out.push_back(k);
        }
    }
    return out;
}

/// The embedding index used downstream; the first match in root order.
inline std::size_t match_lattice(const NumberFieldElement &j_e, long r, long s, long prec = 128)
{
    auto m = matching_embeddings(j_e, r, s, prec);
    require(!m.empty(), ErrorKind::inconsistent_input, "no embedding of j_E has period lattice homothetic to Z tau + Z");
    return m.front();
}

} // namespace cmexp

#endif
