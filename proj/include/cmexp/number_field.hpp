#ifndef CMEXP_NUMBER_FIELD_HPP
#define CMEXP_NUMBER_FIELD_HPP

#include <algorithm>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <cmexp/ball.hpp>
#include <cmexp/linalg.hpp>
#include <cmexp/polynomial.hpp>

namespace cmexp
{

/// Q[T]/(f) for a monic integer polynomial f. Towers are flattened to absolute
/// fields by the caller. Complex roots are isolated on demand and cached.
class NumberField
{
public:
    explicit NumberField(std::vector<Integer> coeffs) : m_coeffs(std::move(coeffs))
    {
        while (!m_coeffs.empty() && m_coeffs.back() == 0) {
            m_coeffs.pop_back();
        }
        require(m_coeffs.size() >= 2, ErrorKind::invalid_input, "defining polynomial must have degree >= 1");
        require(m_coeffs.back() == 1, ErrorKind::invalid_input, "defining polynomial must be monic");
        m_poly = poly::from_integers(m_coeffs);
    }
    NumberField(const NumberField &) = delete;
    NumberField &operator=(const NumberField &) = delete;

    std::size_t degree() const noexcept
    {
        return m_coeffs.size() - 1;
    }
    const QPoly &poly() const noexcept
    {
        return m_poly;
    }
    const std::vector<Integer> &coeffs() const noexcept
    {
        return m_coeffs;
    }
    bool same_as(const NumberField &o) const
    {
        return m_coeffs == o.m_coeffs;
    }
    bool squarefree() const
    {
        return poly::degree(poly::gcd(m_poly, poly::derivative(m_poly))) == 0;
    }

    /// Complex roots as certified, pairwise disjoint balls, ordered
    /// lexicographically by (real part, imaginary part).
    std::vector<ComplexBall> roots(long prec) const
    {
        std::lock_guard<std::mutex> lock(m_mutex);
        auto it = m_roots.find(prec);
        if (it != m_roots.end()) {
            return it->second;
        }
        auto r = isolate_roots(prec);
        m_roots.emplace(prec, r);
        return r;
    }

private:
    std::vector<ComplexBall> isolate_roots(long prec) const;

    std::vector<Integer> m_coeffs;
    QPoly m_poly;
    mutable std::mutex m_mutex;
    mutable std::map<long, std::vector<ComplexBall>> m_roots;
};

using FieldPtr = std::shared_ptr<const NumberField>;

inline FieldPtr make_field(std::vector<Integer> coeffs)
{
    return std::make_shared<const NumberField>(std::move(coeffs));
}

/// The field Q itself, presented as Q[T]/(T).
inline FieldPtr rational_field()
{
    static const FieldPtr q = make_field({Integer(0), Integer(1)});
    return q;
}

namespace detail
{

template <typename Coeffs>
ComplexBall horner(const Coeffs &c, const ComplexBall &z)
{
    ComplexBall acc(z.prec());
    for (std::size_t i = c.size(); i-- > 0;) {
        acc = acc * z + ComplexBall(z.prec(), c[i]);
    }
    return acc;
}

inline ComplexBall exact_point(const ComplexBall &z)
{
    return ComplexBall(z.re(), z.im(), Real(ComplexBall::rad_prec));
}

} // namespace detail

inline std::vector<ComplexBall> NumberField::isolate_roots(long prec) const
{
    require(squarefree(), ErrorKind::invalid_input, "defining polynomial is not squarefree");
    const std::size_t n = degree();
    // Stage 1: Durand-Kerner in double precision.
    std::vector<std::complex<double>> z(n);
    double bound = 1;
    for (const auto &c : m_coeffs) {
        bound = std::max(bound, 1 + std::abs(c.get_d()));
    }
    const std::complex<double> seed(0.4, 0.9);
    for (std::size_t k = 0; k < n; ++k) {
        z[k] = std::pow(seed, static_cast<double>(k)) * std::min(bound, 2.0);
    }
    auto eval_d = [&](std::complex<double> x) {
        std::complex<double> acc = 0;
        for (std::size_t i = m_coeffs.size(); i-- > 0;) {
            acc = acc * x + m_coeffs[i].get_d();
        }
        return acc;
    };
    for (int it = 0; it < 2000; ++it) {
        double move = 0;
        for (std::size_t k = 0; k < n; ++k) {
            std::complex<double> den = 1;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != k) {
                    den *= z[k] - z[j];
                }
            }
            if (std::abs(den) == 0) {
                den = 1e-30;
            }
            std::complex<double> step = eval_d(z[k]) / den;
            z[k] -= step;
            move = std::max(move, std::abs(step) / (1 + std::abs(z[k])));
        }
        if (move < 1e-15) {
            break;
        }
    }
    // Stage 2: Newton refinement at the working precision.
    const long wp = prec + 32;
    QPoly deriv = poly::derivative(m_poly);
    std::vector<ComplexBall> roots;
    for (std::size_t k = 0; k < n; ++k) {
        ComplexBall x(wp, Rational(z[k].real()), Rational(z[k].imag()));
        x = detail::exact_point(x);
        for (int it = 0; it < 200; ++it) {
            ComplexBall fx = detail::horner(m_poly, x), dfx = detail::horner(deriv, x);
            if (dfx.contains_zero()) {
                break;
            }
            ComplexBall step = detail::exact_point(fx / dfx);
            x = detail::exact_point(x - step);
            Real s = step.mid_abs_upper(), m = x.mid_abs_upper();
            mpfr_mul_2si(m.get(), m.get(), -wp + 4, MPFR_RNDU);
            if (real::cmp(s, m) <= 0 || (step.re().is_zero() && step.im().is_zero())) {
                break;
            }
        }
        roots.push_back(x);
    }
    // Stage 3: certify. Some root of f lies within deg(f) * |f(x)| / |f'(x)| of x.
    std::vector<ComplexBall> out;
    for (auto &x : roots) {
        ComplexBall fx = detail::horner(m_poly, x), dfx = detail::horner(deriv, x);
        Real lo = dfx.abs_lower();
        if (lo.is_zero()) {
            throw PrecisionError("cannot isolate roots: derivative ball contains zero", 2 * prec);
        }
        Real rho(ComplexBall::rad_prec);
        Real up = fx.abs_upper();
        mpfr_div(rho.get(), up.get(), lo.get(), MPFR_RNDU);
        mpfr_mul_ui(rho.get(), rho.get(), static_cast<unsigned long>(n), MPFR_RNDU);
        // round the midpoint down to the requested precision
        Real re(prec), im(prec);
        mpfr_set(re.get(), x.re().get(), MPFR_RNDN);
        mpfr_set(im.get(), x.im().get(), MPFR_RNDN);
        ComplexBall shifted(re, im, Real(ComplexBall::rad_prec));
        Real drift = (shifted - detail::exact_point(x)).abs_upper();
        shifted.inflate(rho).inflate(drift);
        out.push_back(shifted);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (out[i].overlaps(out[j])) {
                throw PrecisionError("cannot isolate roots at this precision", 2 * prec);
            }
        }
    }
    // Deterministic order: by real part, ties (conjugate pairs) broken by imaginary part.
    std::sort(out.begin(), out.end(), [](const ComplexBall &a, const ComplexBall &b) {
        Real d = real::sub(a.re(), b.re(), 64);
        Real scale = real::max(real::abs(a.re(), 64), real::abs(b.re(), 64), 64);
        mpfr_add_ui(scale.get(), scale.get(), 1, MPFR_RNDU);
        mpfr_mul_2si(scale.get(), scale.get(), -40, MPFR_RNDU);
        if (mpfr_cmpabs(d.get(), scale.get()) > 0) {
            return d.sign() < 0;
        }
        return real::cmp(a.im(), b.im()) < 0;
    });
    return out;
}

/// Element of a number field in power-basis coordinates.
class NumberFieldElement
{
public:
    NumberFieldElement() : NumberFieldElement(rational_field()) {}
    explicit NumberFieldElement(FieldPtr field) : m_field(std::move(field)), m_c(m_field->degree()) {}
    NumberFieldElement(FieldPtr field, const Rational &q) : NumberFieldElement(std::move(field))
    {
        m_c[0] = q;
    }
    NumberFieldElement(FieldPtr field, std::vector<Rational> coords) : m_field(std::move(field)), m_c(std::move(coords))
    {
        require(m_c.size() <= m_field->degree(), ErrorKind::invalid_input, "too many coordinates for the field degree");
        m_c.resize(m_field->degree());
    }
    /// Element represented by an arbitrary polynomial in the generator.
    static NumberFieldElement from_poly(FieldPtr field, const QPoly &p)
    {
        QPoly r = poly::mod(p, field->poly());
        r.resize(field->degree());
        return NumberFieldElement(std::move(field), std::move(r));
    }
    static NumberFieldElement generator(FieldPtr field)
    {
        return from_poly(field, {Rational(0), Rational(1)});
    }

    const FieldPtr &field() const noexcept
    {
        return m_field;
    }
    const std::vector<Rational> &coords() const noexcept
    {
        return m_c;
    }
    bool is_zero() const
    {
        return std::all_of(m_c.begin(), m_c.end(), [](const Rational &x) { return x == 0; });
    }
    bool is_rational() const
    {
        return std::all_of(m_c.begin() + 1, m_c.end(), [](const Rational &x) { return x == 0; });
    }

    friend NumberFieldElement operator+(const NumberFieldElement &a, const NumberFieldElement &b)
    {
        check_same(a, b);
        NumberFieldElement r = a;
        for (std::size_t i = 0; i < r.m_c.size(); ++i) {
            r.m_c[i] += b.m_c[i];
        }
        return r;
    }
    friend NumberFieldElement operator-(const NumberFieldElement &a, const NumberFieldElement &b)
    {
        check_same(a, b);
        NumberFieldElement r = a;
        for (std::size_t i = 0; i < r.m_c.size(); ++i) {
            r.m_c[i] -= b.m_c[i];
        }
        return r;
    }
    NumberFieldElement operator-() const
    {
        NumberFieldElement r = *this;
        for (auto &x : r.m_c) {
            x = -x;
        }
        return r;
    }
    friend NumberFieldElement operator*(const NumberFieldElement &a, const NumberFieldElement &b)
    {
        check_same(a, b);
        return from_poly(a.m_field, poly::mul(a.m_c, b.m_c));
    }
    friend NumberFieldElement operator*(const NumberFieldElement &a, const Rational &q)
    {
        NumberFieldElement r = a;
        for (auto &x : r.m_c) {
            x *= q;
        }
        return r;
    }
    friend bool operator==(const NumberFieldElement &a, const NumberFieldElement &b)
    {
        return a.m_field->same_as(*b.m_field) && a.m_c == b.m_c;
    }

    NumberFieldElement inverse() const
    {
        auto [g, s] = poly::inverse_mod(m_c, m_field->poly());
        require(poly::degree(g) == 0, ErrorKind::invalid_input, "element is not invertible (zero or zero divisor)");
        return from_poly(m_field, s);
    }
    NumberFieldElement pow(unsigned long e) const
    {
        NumberFieldElement r(m_field, Rational(1)), b = *this;
        while (e > 0) {
            if (e & 1u) {
                r = r * b;
            }
            e >>= 1u;
            if (e > 0) {
                b = b * b;
            }
        }
        return r;
    }

    /// Matrix of multiplication by this element; column j holds x * T^j.
    QMatrix mul_matrix() const
    {
        std::size_t n = m_field->degree();
        QMatrix m = linalg::zeros(n, n);
        NumberFieldElement basis(m_field, Rational(1));
        NumberFieldElement gen = generator(m_field);
        for (std::size_t j = 0; j < n; ++j) {
            NumberFieldElement col = *this * basis;
            for (std::size_t i = 0; i < n; ++i) {
                m[i][j] = col.m_c[i];
            }
            basis = basis * gen;
        }
        return m;
    }

    /// Characteristic polynomial (monic, low degree first), by Faddeev-LeVerrier.
    QPoly charpoly() const
    {
        QMatrix a = mul_matrix();
        std::size_t n = a.size();
        QPoly c(n + 1);
        c[n] = 1;
        QMatrix m = linalg::zeros(n, n);
        for (std::size_t k = 1; k <= n; ++k) {
            QMatrix am = linalg::mul(a, m);
            for (std::size_t i = 0; i < n; ++i) {
                am[i][i] += c[n - k + 1];
            }
            m = am;
            QMatrix t = linalg::mul(a, m);
            Rational tr = 0;
            for (std::size_t i = 0; i < n; ++i) {
                tr += t[i][i];
            }
            c[n - k] = -tr / static_cast<long>(k);
        }
        return c;
    }
    Rational norm() const
    {
        QPoly c = charpoly();
        return (m_field->degree() % 2 == 0) ? c[0] : Rational(-c[0]);
    }
    Rational trace() const
    {
        QPoly c = charpoly();
        return -c[c.size() - 2];
    }
    bool is_integral() const
    {
        QPoly c = charpoly();
        return std::all_of(c.begin(), c.end(), [](const Rational &x) { return x.get_den() == 1; });
    }

    std::string str() const
    {
        std::string s = "[";
        for (std::size_t i = 0; i < m_c.size(); ++i) {
            s += (i ? ", " : "") + to_string(m_c[i]);
        }
        return s + "]";
    }

private:
    static void check_same(const NumberFieldElement &a, const NumberFieldElement &b)
    {
        require(a.m_field->same_as(*b.m_field), ErrorKind::invalid_input, "number field mismatch");
    }

    FieldPtr m_field;
    std::vector<Rational> m_c;
};

/// Image of x under the embedding sending the generator to the root with the
/// given index (see NumberField::roots for the ordering).
inline ComplexBall nf_embed(const NumberFieldElement &x, std::size_t root_index, long prec)
{
    const auto &field = *x.field();
    require(root_index < field.degree(), ErrorKind::invalid_input, "root index out of range");
    auto roots = field.roots(prec + 16);
    ComplexBall v = detail::horner(x.coords(), roots[root_index]);
    Real re(prec), im(prec);
    mpfr_set(re.get(), v.re().get(), MPFR_RNDN);
    mpfr_set(im.get(), v.im().get(), MPFR_RNDN);
    ComplexBall out(re, im, v.rad());
    ComplexBall diff = out - v;
    return out.inflate(diff.mid_abs_upper());
}

} // namespace cmexp

#endif
