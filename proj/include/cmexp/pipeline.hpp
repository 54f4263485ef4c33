#ifndef CMEXP_PIPELINE_HPP
#define CMEXP_PIPELINE_HPP

#include <array>
#include <cmath>
#include <future>
#include <optional>
#include <vector>

#include <cmexp/denominators.hpp>
#include <cmexp/expansion.hpp>
#include <cmexp/qseries.hpp>
#include <cmexp/recover.hpp>

namespace cmexp
{

/// f(q) with f(q) dq the differential. Coefficients are integer coordinates over Z[zeta_N]
/// (power basis of the N-th cyclotomic polynomial; one entry = a rational integer).
/// A synthetic form f = j'(q) P(j(q)) is generated to any length on demand.
struct CuspForm
{
    long offset = 0;
    std::vector<std::vector<Integer>> coeffs;
    std::optional<std::vector<Integer>> j_polynomial;  // P, low degree first

    bool synthetic() const
    {
        return j_polynomial.has_value();
    }
    long pole_order() const
    {
        return synthetic() ? static_cast<long>(j_polynomial->size()) + 1 : std::max(0L, -offset);
    }
};

/// A reduced form (a, b, c) standing for tau = (-b + sqrt(b^2 - 4ac)) / 2a.
using QuadForm = std::array<long, 3>;

struct JobConfig
{
    long level = 1;
    SubgroupPtr h;
    ModMatrix g;
    long r = 0, s = 0;
    NumberFieldElement j_e;
    CuspForm form;
    std::vector<QuadForm> conjugates;  // in the order of the sigma-table
    GaloisData galois;
    long precision = 256;
    long n = 10;                       // truncation order: c_0 .. c_n
    std::map<long, ReductionType> hints;
    SmallPrimePolicy small_primes = SmallPrimePolicy::reject;
    std::uint64_t budget = 100'000;
    long padic_digits = 16;
    std::optional<long> q_terms;

    long discriminant() const
    {
        return r * r - 4 * s;
    }

    BasepointContext context() const
    {
        BasepointContext c;
        c.n = level;
        c.h = h;
        c.g = g;
        c.r = r;
        c.s = s;
        c.j_e = j_e;
        c.hints = hints;
        c.small_primes = small_primes;
        c.budget = budget;
        c.padic_digits = padic_digits;
        return c;
    }

    void validate() const
    {
        context().validate();
        require(precision >= 64, ErrorKind::invalid_input, "precision must be at least 64 bits");
        require(n >= 0, ErrorKind::invalid_input, "n must be >= 0");
        require(!conjugates.empty(), ErrorKind::invalid_input, "at least one conjugate basepoint is required");
        for (const auto &f : conjugates) {
            require(f[0] > 0 && f[1] * f[1] - 4 * f[0] * f[2] == discriminant(), ErrorKind::invalid_input,
                    "conjugate form has the wrong discriminant or is not positive definite");
        }
        galois.validate();
        require(conjugates.size() == galois.d(), ErrorKind::invalid_input,
                "conjugate count " + std::to_string(conjugates.size()) + " does not match the Galois orbit size " + std::to_string(galois.d()));
        if (!form.synthetic()) {
            require(!form.coeffs.empty(), ErrorKind::invalid_input, "cusp form has no coefficients");
            std::size_t width = level > 1 ? static_cast<std::size_t>(cyclotomic_polynomial(level).size() - 1) : 1;
            for (const auto &c : form.coeffs) {
                require(!c.empty() && c.size() <= width, ErrorKind::invalid_input, "cusp-form coefficient has too many Z[zeta_N] coordinates");
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Series

namespace detail
{

/// f = j' P(j) to `terms` known coefficients.
inline PowerSeries<Rational> synthetic_form(const std::vector<Integer> &p, std::size_t terms)
{
    auto j = j_series(terms);
    PowerSeries<Rational> acc{0, std::vector<Rational>(terms, Rational(0))};
    for (std::size_t k = p.size(); k-- > 0;) {
        if (k + 1 < p.size()) {
            acc = qs::mul(acc, j, Rational(0));
        }
        long idx = -acc.offset;
        if (idx >= 0 && static_cast<std::size_t>(idx) < acc.coeffs.size()) {
            acc.coeffs[static_cast<std::size_t>(idx)] += p[k];
        }
    }
    return qs::mul(qs::derivative(j), acc, Rational(0));
}

} // namespace detail

/// g(t) = P(t + j_E) for the synthetic form: the exact c_l, l = 0..n.
inline std::vector<Rational> synthetic_coefficients(const std::vector<Integer> &p, const Rational &j_e, long n)
{
    std::vector<Rational> out(static_cast<std::size_t>(n) + 1, Rational(0));
    for (std::size_t k = 0; k < p.size(); ++k) {
        for (std::size_t l = 0; l <= k && l <= static_cast<std::size_t>(n); ++l) {
            Integer b;
            mpz_bin_uiui(b.get_mpz_t(), k, l);
            Rational jp(pow(j_e.get_num(), k - l), pow(j_e.get_den(), k - l));
            out[l] += Rational(p[k] * b) * jp;
        }
    }
    return out;
}

/// The cusp form as a ball series under zeta_N = exp(2 pi i / N).
inline PowerSeries<ComplexBall> form_series(const CuspForm &f, long level, std::size_t terms, long prec)
{
    if (f.synthetic()) {
        return to_ball_series(detail::synthetic_form(*f.j_polynomial, terms), prec);
    }
    PowerSeries<ComplexBall> out{f.offset, {}};
    ComplexBall zeta(prec, 1L);
    if (level > 1) {
        zeta = ball::exp(ComplexBall(prec, Rational(0), ratio(2, level)) * ball::pi(prec));
    }
    std::size_t count = std::min(terms, f.coeffs.size());
    for (std::size_t i = 0; i < count; ++i) {
        out.coeffs.push_back(detail::horner(f.coeffs[i], zeta));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Expansion

struct ConjugateExpansion
{
    QuadForm form{};
    std::vector<ComplexBall> c;       // unscaled c_l
    std::vector<ComplexBall> scaled;  // c_l C^[l+1]
    std::size_t q_terms = 0;
};

namespace detail
{

inline std::vector<ComplexBall> expand_at(const JobConfig &job, const ComplexBall &q, std::size_t terms, long prec)
{
    const auto n = static_cast<std::size_t>(job.n);
    auto js = j_series(terms);
    auto a = taylor_at(js, q, n + 1);
    a.erase(a.begin());
    auto fs = form_series(job.form, job.level, terms, prec);
    auto b = taylor_at(fs, q, n);
    CoeffSystem<ComplexBall> sys{a, b, n};
    return solve_coeffs(sys);
}

inline double max_radius(const std::vector<ComplexBall> &v)
{
    double r = 0;
    for (const auto &x : v) {
        r = std::max(r, x.radius());
    }
    return r;
}

/// Terms M with M log2(1/|q|) beating coefficient growth e^{4 pi sqrt(k M)} and the target.
inline std::size_t estimate_terms(const ComplexBall &q, long prec, long pole, long n)
{
    double beta = -std::log2(q.abs_upper().to_double());
    double k = static_cast<double>(std::max(1L, pole));
    for (std::size_t m = 16;; m += 8) {
        double md = static_cast<double>(m);
        double gain = md * beta - 4 * M_PI * std::sqrt(k * md) / std::log(2.0) - static_cast<double>(n + 1) * std::log2(md) - k * beta;
        if (gain >= static_cast<double>(prec + 32) || m > 20000) {
            return m;
        }
    }
}

} // namespace detail

/// c_l at the conjugate tau = (-b + sqrt D)/2a. Terms are doubled while that still shrinks the radii.
inline ConjugateExpansion expand_conjugate(const JobConfig &job, const QuadForm &f, const DenominatorCertificate &cert, long prec)
{
    ConjugateExpansion out;
    out.form = f;
    ComplexBall tau = detail::tau_of_form(f[0], f[1], job.discriminant(), prec);
    ComplexBall q = detail::q_of_tau(tau);
    std::size_t terms = job.q_terms ? static_cast<std::size_t>(*job.q_terms)
                                    : detail::estimate_terms(q, prec, job.form.pole_order(), job.n);
    auto c = detail::expand_at(job, q, terms, prec);
    if (!job.q_terms && job.form.synthetic()) {
        for (int it = 0; it < 6; ++it) {
            auto c2 = detail::expand_at(job, q, 2 * terms, prec);
            bool better = detail::max_radius(c2) < detail::max_radius(c) / 2;
            c = std::move(c2);
            terms *= 2;
            if (!better) {
                break;
            }
        }
    }
    out.q_terms = terms;
    out.c = c;
    out.scaled = rescale(c, cert);
    return out;
}

/// One expansion per conjugate basepoint; conjugates run in parallel when jobs > 1.
inline std::vector<ConjugateExpansion> expand_all(const JobConfig &job, const DenominatorCertificate &cert, long prec, unsigned jobs = 1)
{
    std::vector<ConjugateExpansion> out(job.conjugates.size());
    if (jobs <= 1) {
        for (std::size_t i = 0; i < job.conjugates.size(); ++i) {
            out[i] = expand_conjugate(job, job.conjugates[i], cert, prec);
        }
        return out;
    }
    for (std::size_t base = 0; base < job.conjugates.size(); base += jobs) {
        std::vector<std::future<ConjugateExpansion>> pending;
        for (std::size_t i = base; i < std::min(job.conjugates.size(), base + jobs); ++i) {
            pending.push_back(std::async(std::launch::async, [&, i] { return expand_conjugate(job, job.conjugates[i], cert, prec); }));
        }
        for (std::size_t k = 0; k < pending.size(); ++k) {
            out[base + k] = pending[k].get();
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Recovery

struct RecoveredCoefficient
{
    long l = 0;
    NumberFieldElement scaled;  // c_l C^[l+1], an algebraic integer
    Integer divisor;            // C^[l+1]
    NumberFieldElement value;   // c_l
    double residual = 0;
};

/// Exact c_l C^[l+1] from the per-conjugate balls; the abelian path, when available,
/// must agree with the generic one.
inline std::vector<RecoveredCoefficient> recover_all(const GaloisData &gal, const std::vector<std::vector<ComplexBall>> &scaled,
                                                     const DenominatorCertificate &cert, long prec, double tolerance = 0)
{
    require(scaled.size() == gal.d(), ErrorKind::invalid_input,
            "conjugate count " + std::to_string(scaled.size()) + " does not match the Galois orbit size " + std::to_string(gal.d()));
    require(!scaled.empty(), ErrorKind::invalid_input, "no conjugates");
    const std::size_t count = scaled[0].size();
    for (const auto &v : scaled) {
        require(v.size() == count, ErrorKind::invalid_input, "conjugates carry different numbers of coefficients");
    }
    auto nb = build_normal_basis(gal, prec);
    std::vector<RecoveredCoefficient> out;
    for (std::size_t l = 0; l < count; ++l) {
        std::vector<ComplexBall> w;
        for (const auto &v : scaled) {
            w.push_back(v[l]);
        }
        Recovered r;
        try {
            r = recover_integer(nb, w, gal, tolerance);
        } catch (const Error &e) {
            if (e.kind() == ErrorKind::ambiguous_rounding) {
                // Radii scale like 2^-prec once the expansion is converged.
                double worst = 0;
                for (const auto &v : scaled) {
                    for (std::size_t k = l; k < count; ++k) {
                        worst = std::max(worst, v[k].radius());
                    }
                }
                long bits = prec + static_cast<long>(std::ceil(std::log2(worst / nb.max_input_radius()))) + 32;
                throw Error(ErrorKind::ambiguous_rounding,
                            "coefficient l = " + std::to_string(l) + ": " + e.what() + "; estimated --prec " + std::to_string(bits));
            }
            throw;
        }
        if (gal.abelian) {
            auto ra = recover_abelian(nb, w, gal, tolerance);
            require(ra.value == r.value, ErrorKind::internal, "abelian and generic recovery disagree at l = " + std::to_string(l));
        }
        RecoveredCoefficient rc;
        rc.l = static_cast<long>(l);
        rc.scaled = r.value;
        rc.divisor = cert.C(static_cast<long>(l) + 1);
        Rational inv(Integer(1), rc.divisor);
        rc.value = r.value * inv;
        rc.residual = r.residual;
        out.push_back(std::move(rc));
    }
    return out;
}

struct PipelineResult
{
    DenominatorCertificate certificate;
    std::vector<ConjugateExpansion> expansions;
    std::vector<RecoveredCoefficient> coefficients;
};

inline PipelineResult run_pipeline(const JobConfig &job, unsigned jobs = 1)
{
    job.validate();
    PipelineResult res;
    res.certificate = certify(job.context(), jobs);
    res.expansions = expand_all(job, res.certificate, job.precision, jobs);
    std::vector<std::vector<ComplexBall>> scaled;
    for (const auto &e : res.expansions) {
        scaled.push_back(e.scaled);
    }
    res.coefficients = recover_all(job.galois, scaled, res.certificate, job.precision);
    return res;
}

} // namespace cmexp

#endif
