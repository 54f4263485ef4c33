#ifndef CMEXP_CONFIG_HPP
#define CMEXP_CONFIG_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include <cmexp/pipeline.hpp>

namespace cmexp
{

using json = nlohmann::json;

inline constexpr const char *kSchema = "cm-expand/1";

namespace io
{

inline std::string where(const std::string &key)
{
    return key.empty() ? "" : " (" + key + ")";
}

/// Integers may be JSON numbers or decimal strings; interchange files always write strings.
inline Integer to_integer(const json &j, const std::string &key = "")
{
    if (j.is_number_integer()) {
        return Integer(j.get<long>());
    }
    require(j.is_string(), ErrorKind::invalid_input, "expected an integer" + where(key));
    Integer z;
    require(z.set_str(j.get<std::string>(), 10) == 0, ErrorKind::invalid_input, "malformed integer '" + j.get<std::string>() + "'" + where(key));
    return z;
}

inline long to_long(const json &j, const std::string &key = "")
{
    Integer z = to_integer(j, key);
    require(z.fits_slong_p(), ErrorKind::invalid_input, "integer out of range" + where(key));
    return z.get_si();
}

inline Rational to_rational(const json &j, const std::string &key = "")
{
    if (j.is_number_integer()) {
        return Rational(j.get<long>());
    }
    require(j.is_string(), ErrorKind::invalid_input, "expected a rational string" + where(key));
    return parse_rational(j.get<std::string>());
}

inline std::vector<Integer> integers(const json &j, const std::string &key)
{
    require(j.is_array(), ErrorKind::invalid_input, "expected an array" + where(key));
    std::vector<Integer> v;
    for (const auto &x : j) {
        v.push_back(to_integer(x, key));
    }
    return v;
}

inline std::vector<Rational> rationals(const json &j, const std::string &key)
{
    require(j.is_array(), ErrorKind::invalid_input, "expected an array" + where(key));
    std::vector<Rational> v;
    for (const auto &x : j) {
        v.push_back(to_rational(x, key));
    }
    return v;
}

inline json strings(const std::vector<Integer> &v)
{
    json a = json::array();
    for (const auto &x : v) {
        a.push_back(to_string(x));
    }
    return a;
}

inline json strings(const std::vector<Rational> &v)
{
    json a = json::array();
    for (const auto &x : v) {
        a.push_back(to_string(x));
    }
    return a;
}

inline ModMatrix matrix(const json &j, long n, const std::string &key)
{
    require(j.is_array() && j.size() == 4, ErrorKind::invalid_input, "matrices are [a, b, c, d]" + where(key));
    return ModMatrix(n, to_long(j[0], key), to_long(j[1], key), to_long(j[2], key), to_long(j[3], key));
}

inline json ball_to_json(const ComplexBall &b)
{
    Real rad(ComplexBall::rad_prec);
    mpfr_set(rad.get(), b.rad().get(), MPFR_RNDU);
    // Shortest upward-rounded decimal that parses (upward) back to the same radius.
    std::string r = rad.str(0, MPFR_RNDU);
    for (std::size_t digits = 21; !mpfr_equal_p(Real::parse(r, ComplexBall::rad_prec, MPFR_RNDU).get(), rad.get()); ++digits) {
        r = rad.str(digits, MPFR_RNDU);
    }
    return {{"re", b.re().str()}, {"im", b.im().str()}, {"rad", r}, {"bits", b.prec()}};
}

/// Midpoints are read at their recorded bit length so the round trip is exact.
inline ComplexBall ball_from_json(const json &j, long prec)
{
    require(j.is_object() && j.contains("re") && j.contains("im") && j.contains("rad"), ErrorKind::invalid_input, "balls are {re, im, rad}");
    if (j.contains("bits")) {
        prec = std::max(prec, to_long(j.at("bits"), "bits"));
    }
    Real re = Real::parse(j.at("re").get<std::string>(), prec);
    Real im = Real::parse(j.at("im").get<std::string>(), prec);
    Real rad = Real::parse(j.at("rad").get<std::string>(), ComplexBall::rad_prec, MPFR_RNDU);
    return ComplexBall(re, im, rad);
}

inline std::string residual_string(double r)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", r);
    return buf;
}

inline json read_file(const std::filesystem::path &p)
{
    std::ifstream in(p);
    require(in.good(), ErrorKind::invalid_input, "cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        fail(ErrorKind::invalid_input, "malformed JSON in " + p.string() + ": " + e.what());
    }
}

inline void check_schema(const json &j, const std::string &what)
{
    require(j.is_object(), ErrorKind::invalid_input, what + " must be a JSON object");
    if (j.contains("schema")) {
        require(j.at("schema") == kSchema, ErrorKind::invalid_input, what + ": unsupported schema " + j.at("schema").dump());
    }
}

} // namespace io

// ---------------------------------------------------------------------------
// Galois data

inline GaloisData galois_from_json(const json &j)
{
    GaloisData g;
    if (j.contains("cyclotomic")) {
        g = cyclotomic_galois(io::to_long(j.at("cyclotomic"), "cyclotomic"));
    } else if (j.contains("quadratic")) {
        g = quadratic_galois(io::to_long(j.at("quadratic"), "quadratic"));
    } else {
        require(j.contains("L"), ErrorKind::invalid_input, "galois data needs L, cyclotomic or quadratic");
        g.L = make_field(io::integers(j.at("L"), "galois.L"));
        const std::size_t n = g.L->degree();
        if (j.contains("sigma")) {
            for (const auto &m : j.at("sigma")) {
                QMatrix q;
                for (const auto &row : m) {
                    q.push_back(io::rationals(row, "galois.sigma"));
                }
                g.sigma.push_back(std::move(q));
            }
        } else if (j.contains("sigma_images")) {
            // coordinates of sigma_i(theta)
            for (const auto &img : j.at("sigma_images")) {
                g.sigma.push_back(GaloisData::matrix_from_image(g.L, NumberFieldElement(g.L, io::rationals(img, "galois.sigma_images"))));
            }
        } else {
            require(n == 1, ErrorKind::invalid_input, "galois data needs sigma or sigma_images");
            g.sigma = {linalg::identity(1)};
        }
    }
    if (j.contains("K")) {
        g.k_poly = io::integers(j.at("K"), "galois.K");
        require(j.contains("k_gen"), ErrorKind::invalid_input, "galois.K needs k_gen");
        g.k_gen = io::rationals(j.at("k_gen"), "galois.k_gen");
    }
    if (j.contains("root_index")) {
        g.root_index = static_cast<std::size_t>(io::to_long(j.at("root_index"), "galois.root_index"));
    }
    if (j.contains("abelian")) {
        const auto &a = j.at("abelian");
        if (a.is_string()) {
            require(a == "auto", ErrorKind::invalid_input, "galois.abelian must be \"auto\" or an object");
            g.abelian = abelian_structure(g.cayley());
        } else if (a.is_null()) {
            g.abelian.reset();
        } else {
            AbelianStructure s;
            for (const auto &x : a.at("invariants")) {
                s.invariants.push_back(io::to_long(x, "abelian.invariants"));
            }
            for (const auto &x : a.at("generators")) {
                s.generators.push_back(static_cast<std::size_t>(io::to_long(x, "abelian.generators")));
            }
            g.abelian = s;
        }
    }
    g.validate();
    return g;
}

inline json galois_to_json(const GaloisData &g)
{
    json j;
    j["L"] = io::strings(g.L->coeffs());
    json sig = json::array();
    for (const auto &m : g.sigma) {
        json rows = json::array();
        for (const auto &row : m) {
            rows.push_back(io::strings(row));
        }
        sig.push_back(rows);
    }
    j["sigma"] = sig;
    if (!g.k_is_q()) {
        j["K"] = io::strings(g.k_poly);
        j["k_gen"] = io::strings(g.k_gen);
    }
    j["root_index"] = g.root_index;
    if (g.abelian) {
        j["abelian"] = {{"invariants", g.abelian->invariants}, {"generators", g.abelian->generators}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Job configuration

inline CuspForm cusp_form_from_json(const json &j, const std::filesystem::path &base)
{
    if (j.contains("file")) {
        auto p = std::filesystem::path(j.at("file").get<std::string>());
        return cusp_form_from_json(io::read_file(p.is_absolute() ? p : base / p), base);
    }
    CuspForm f;
    if (j.contains("synthetic_j_polynomial")) {
        f.j_polynomial = io::integers(j.at("synthetic_j_polynomial"), "synthetic_j_polynomial");
        require(!f.j_polynomial->empty(), ErrorKind::invalid_input, "synthetic_j_polynomial is empty");
        return f;
    }
    require(j.contains("coeffs"), ErrorKind::invalid_input, "cusp form needs coeffs, file or synthetic_j_polynomial");
    f.offset = j.value("offset", 0L);
    for (const auto &c : j.at("coeffs")) {
        if (c.is_array()) {
            f.coeffs.push_back(io::integers(c, "cusp_form.coeffs"));
        } else {
            f.coeffs.push_back({io::to_integer(c, "cusp_form.coeffs")});
        }
    }
    return f;
}

inline JobConfig job_from_json(const json &j, const std::filesystem::path &base = ".")
{
    io::check_schema(j, "job config");
    JobConfig job;
    require(j.contains("N"), ErrorKind::invalid_input, "job config needs N");
    job.level = io::to_long(j.at("N"), "N");
    require(job.level >= 1 && gcd64(job.level, 6) == 1, ErrorKind::invalid_input, "N must be coprime to 6");
    const json h = j.value("H", json("borel"));
    if (h.is_string()) {
        require(h == "borel" || h == "full", ErrorKind::invalid_input, "H must be \"borel\", \"full\" or a generator list");
        job.h = std::make_shared<const SubgroupH>(h == "borel" ? SubgroupH::borel(job.level) : SubgroupH::full(job.level));
    } else {
        const json &gens = h.is_object() ? h.at("generators") : h;
        std::vector<ModMatrix> g;
        for (const auto &m : gens) {
            g.push_back(io::matrix(m, job.level, "H"));
        }
        job.h = std::make_shared<const SubgroupH>(job.level, g);
    }
    job.g = j.contains("g") ? io::matrix(j.at("g"), job.level, "g") : ModMatrix::identity(job.level);
    require(j.contains("tau"), ErrorKind::invalid_input, "job config needs tau {r, s}");
    job.r = io::to_long(j.at("tau").at("r"), "tau.r");
    job.s = io::to_long(j.at("tau").at("s"), "tau.s");
    require(job.discriminant() < 0, ErrorKind::invalid_input, "tau must be imaginary quadratic");
    require(j.contains("j_E"), ErrorKind::invalid_input, "job config needs j_E");
    const json &je = j.at("j_E");
    if (je.is_object()) {
        auto field = je.contains("polynomial") ? make_field(io::integers(je.at("polynomial"), "j_E.polynomial")) : rational_field();
        job.j_e = NumberFieldElement(field, io::rationals(je.at("coords"), "j_E.coords"));
    } else {
        job.j_e = NumberFieldElement(rational_field(), io::to_rational(je, "j_E"));
    }
    require(j.contains("cusp_form"), ErrorKind::invalid_input, "job config needs cusp_form");
    job.form = cusp_form_from_json(j.at("cusp_form"), base);
    if (j.contains("conjugates")) {
        for (const auto &f : j.at("conjugates")) {
            require(f.is_array() && f.size() == 3, ErrorKind::invalid_input, "conjugates are forms [a, b, c]");
            job.conjugates.push_back({io::to_long(f[0]), io::to_long(f[1]), io::to_long(f[2])});
        }
    } else {
        job.conjugates = {{1, job.r, job.s}};
    }
    if (j.contains("galois")) {
        job.galois = galois_from_json(j.at("galois"));
    } else {
        job.galois.L = rational_field();
        job.galois.sigma = {linalg::identity(1)};
    }
    job.precision = j.contains("precision") ? io::to_long(j.at("precision"), "precision") : 256;
    job.n = j.contains("n") ? io::to_long(j.at("n"), "n") : 10;
    if (j.contains("reduction_hints")) {
        for (const auto &[k, v] : j.at("reduction_hints").items()) {
            require(v == "ordinary" || v == "supersingular", ErrorKind::invalid_input, "reduction hints are \"ordinary\" or \"supersingular\"");
            job.hints[io::to_long(json(k), "reduction_hints")] = v == "ordinary" ? ReductionType::ordinary : ReductionType::supersingular;
        }
    }
    const std::string sp = j.value("small_primes", std::string("reject"));
    require(sp == "reject" || sp == "conservative", ErrorKind::invalid_input, "small_primes is \"reject\" or \"conservative\"");
    job.small_primes = sp == "reject" ? SmallPrimePolicy::reject : SmallPrimePolicy::conservative;
    if (j.contains("budget")) {
        job.budget = static_cast<std::uint64_t>(io::to_long(j.at("budget"), "budget"));
    }
    if (j.contains("padic_digits")) {
        job.padic_digits = io::to_long(j.at("padic_digits"), "padic_digits");
    }
    if (j.contains("q_terms")) {
        job.q_terms = io::to_long(j.at("q_terms"), "q_terms");
    }
    job.validate();
    return job;
}

inline JobConfig load_job(const std::filesystem::path &p)
{
    return job_from_json(io::read_file(p), p.parent_path());
}

// ---------------------------------------------------------------------------
// Certificates

inline Provenance provenance_from_string(const std::string &s)
{
    if (s == "vertical") {
        return Provenance::vertical;
    }
    if (s == "horizontal") {
        return Provenance::horizontal;
    }
    require(s == "combined", ErrorKind::invalid_input, "unknown provenance '" + s + "'");
    return Provenance::combined;
}

inline json certificate_to_json(const DenominatorCertificate &c)
{
    json primes = json::object();
    for (const auto &[p, e] : c.entries) {
        json x;
        x["r"] = to_string(e.r);
        x["triggers"] = e.triggers;
        x["provenance"] = to_string(e.provenance);
        x["v_a"] = to_string(e.v_a);
        x["vertical"] = to_string(e.vertical);
        if (e.v_d_vert) {
            x["v_d_vert"] = to_string(*e.v_d_vert);
        }
        if (e.e_den) {
            x["e_den"] = *e.e_den;
        }
        if (e.horizontal_contained) {
            x["horizontal_contained"] = *e.horizontal_contained;
        }
        if (!e.note.empty()) {
            x["note"] = e.note;
        }
        primes[to_string(p)] = x;
    }
    return {{"schema", kSchema}, {"kind", "certificate"}, {"primes", primes}, {"C_sym", c.symbolic()}};
}

inline DenominatorCertificate certificate_from_json(const json &j)
{
    io::check_schema(j, "certificate");
    DenominatorCertificate c;
    for (const auto &[k, x] : j.at("primes").items()) {
        PrimeEntry e;
        e.r = io::to_rational(x.at("r"), "r");
        require(e.r >= 0, ErrorKind::invalid_input, "certificate exponents must be >= 0");
        e.triggers = x.value("triggers", std::string());
        e.provenance = provenance_from_string(x.value("provenance", std::string("vertical")));
        e.v_a = io::to_rational(x.value("v_a", json("0")), "v_a");
        e.vertical = io::to_rational(x.value("vertical", json("0")), "vertical");
        if (x.contains("v_d_vert")) {
            e.v_d_vert = io::to_rational(x.at("v_d_vert"), "v_d_vert");
        }
        if (x.contains("e_den")) {
            e.e_den = io::to_long(x.at("e_den"), "e_den");
        }
        if (x.contains("horizontal_contained")) {
            e.horizontal_contained = x.at("horizontal_contained").get<bool>();
        }
        e.note = x.value("note", std::string());
        Integer p;
        require(p.set_str(k, 10) == 0 && p > 1, ErrorKind::invalid_input, "certificate keys are primes");
        c.entries[p] = e;
    }
    return c;
}

// ---------------------------------------------------------------------------
// Coefficient files

inline json expansions_to_json(const std::vector<ConjugateExpansion> &ex, const DenominatorCertificate &cert, long prec, long n)
{
    json conj = json::array();
    for (const auto &e : ex) {
        json coeffs = json::array();
        for (std::size_t l = 0; l < e.scaled.size(); ++l) {
            json b = io::ball_to_json(e.scaled[l]);
            b["l"] = l;
            coeffs.push_back(b);
        }
        conj.push_back({{"form", e.form}, {"q_terms", e.q_terms}, {"scaled", coeffs}});
    }
    json div = json::array();
    for (long l = 0; l <= n; ++l) {
        div.push_back(to_string(cert.C(l + 1)));
    }
    return {{"schema", kSchema}, {"kind", "coefficients"}, {"precision", prec}, {"n", n}, {"C_sym", cert.symbolic()},
            {"divisors", div}, {"conjugates", conj}};
}

struct CoefficientFile
{
    long precision = 0;
    std::vector<std::vector<ComplexBall>> scaled;  // [conjugate][l]
    std::vector<Integer> divisors;                 // C^[l+1]
};

inline CoefficientFile expansions_from_json(const json &j)
{
    io::check_schema(j, "coefficient file");
    CoefficientFile f;
    f.precision = io::to_long(j.at("precision"), "precision");
    f.divisors = io::integers(j.at("divisors"), "divisors");
    for (const auto &c : j.at("conjugates")) {
        std::vector<ComplexBall> v;
        for (const auto &b : c.at("scaled")) {
            v.push_back(io::ball_from_json(b, f.precision));
        }
        require(v.size() == f.divisors.size(), ErrorKind::invalid_input, "coefficient count does not match the divisor list");
        f.scaled.push_back(std::move(v));
    }
    return f;
}

inline json recovered_to_json(const GaloisData &gal, const std::vector<RecoveredCoefficient> &rc, const std::string &c_sym)
{
    json coeffs = json::array();
    for (const auto &c : rc) {
        coeffs.push_back({{"l", c.l},
                          {"scaled", io::strings(c.scaled.coords())},
                          {"divisor", to_string(c.divisor)},
                          {"value", io::strings(c.value.coords())},
                          {"residual", io::residual_string(c.residual)}});
    }
    return {{"schema", kSchema}, {"kind", "exact_coefficients"}, {"field", io::strings(gal.L->coeffs())}, {"C_sym", c_sym}, {"coefficients", coeffs}};
}

/// Recovery from a coefficient file: c_l = (scaled exact value) / C^[l+1] using the recorded divisors.
inline std::vector<RecoveredCoefficient> recover_file(const GaloisData &gal, const CoefficientFile &f, double tolerance = 0)
{
    DenominatorCertificate none;
    auto rc = recover_all(gal, f.scaled, none, f.precision, tolerance);
    for (auto &c : rc) {
        c.divisor = f.divisors[static_cast<std::size_t>(c.l)];
        Rational inv(Integer(1), c.divisor);
        c.value = c.scaled * inv;
    }
    return rc;
}

inline void write_json(const json &j, const std::string &path)
{
    std::string text = j.dump(2) + "\n";
    if (path.empty() || path == "-") {
        std::fwrite(text.data(), 1, text.size(), stdout);
        return;
    }
    std::ofstream out(path);
    require(out.good(), ErrorKind::invalid_input, "cannot write " + path);
    out << text;
}

} // namespace cmexp

#endif
