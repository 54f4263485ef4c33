#include <iostream>
#include <map>

#include <CLI11.hpp>

#include <cmexp/config.hpp>

using namespace cmexp;

namespace
{

int exit_code(ErrorKind k)
{
    switch (k) {
    case ErrorKind::out_of_scope:
        return 2;
    case ErrorKind::precision:
    case ErrorKind::resource:
        return 3;
    case ErrorKind::ambiguous_rounding:
        return 4;
    default:
        return 1;
    }
}

struct Options
{
    std::string config;
    std::string out;
    std::string certificate;
    std::string coefficients;
    long prec = 0;
    long n = -1;
    unsigned jobs = 1;
    double tolerance = 0;
};

JobConfig load(const Options &o)
{
    JobConfig job = load_job(o.config);
    if (o.prec > 0) {
        job.precision = o.prec;
    }
    if (o.n >= 0) {
        job.n = o.n;
    }
    job.validate();
    return job;
}

int cmd_denominator(const Options &o)
{
    JobConfig job = load(o);
    auto cert = certify(job.context(), o.jobs);
    write_json(certificate_to_json(cert), o.out);
    return 0;
}

int cmd_expand(const Options &o)
{
    JobConfig job = load(o);
    DenominatorCertificate cert;
    if (!o.certificate.empty()) {
        cert = certificate_from_json(io::read_file(o.certificate));
    }
    auto ex = expand_all(job, cert, job.precision, o.jobs);
    write_json(expansions_to_json(ex, cert, job.precision, job.n), o.out);
    return 0;
}

int cmd_recover(const Options &o)
{
    JobConfig job = load(o);
    require(!o.coefficients.empty(), ErrorKind::invalid_input, "recover needs --coefficients");
    json cj = io::read_file(o.coefficients);
    auto file = expansions_from_json(cj);
    auto rc = recover_file(job.galois, file, o.tolerance);
    write_json(recovered_to_json(job.galois, rc, cj.value("C_sym", std::string("1"))), o.out);
    return 0;
}

int cmd_pipeline(const Options &o)
{
    JobConfig job = load(o);
    auto res = run_pipeline(job, o.jobs);
    json j = recovered_to_json(job.galois, res.coefficients, res.certificate.symbolic());
    j["certificate"] = certificate_to_json(res.certificate);
    j["precision"] = job.precision;
    j["n"] = job.n;
    write_json(j, o.out);
    return 0;
}

int cmd_newton(const Options &o)
{
    json j = io::read_file(o.config);
    const long p = io::to_long(j.at("p"), "p");
    const int m = static_cast<int>(j.contains("m") ? io::to_long(j.at("m"), "m") : 1);
    const long digits = j.contains("digits") ? io::to_long(j.at("digits"), "digits") : 16;
    WeierstrassModel<Rational> model;
    if (j.contains("a")) {
        auto a = io::rationals(j.at("a"), "a");
        require(a.size() == 5, ErrorKind::invalid_input, "a = [a1, a2, a3, a4, a6]");
        model = {a[0], a[1], a[2], a[3], a[4]};
    } else {
        model = model_from_j(io::to_rational(j.at("j"), "j"));
    }
    auto good = good_reduction_model(to_padic(model, Integer(p), 1, digits), p);
    auto f = FormalGroupLaw<PadicElement>::from_model(good.model, static_cast<std::size_t>(p * p + 2));
    auto vb = v_vert_details(f, p, m);
    json out;
    out["schema"] = kSchema;
    out["kind"] = "newton";
    out["p"] = p;
    out["e_p"] = good.e_p;
    out["height"] = vb.height;
    out["v_vert"] = to_string(vb.value);
    if (vb.r) {
        out["r"] = to_string(*vb.r);
    }
    if (vb.polygon) {
        json verts = json::array();
        for (const auto &[x, y] : vb.polygon->vertices()) {
            verts.push_back({x, to_string(y)});
        }
        out["vertices"] = verts;
        json slopes = json::array();
        for (const auto &s : vb.polygon->slopes()) {
            slopes.push_back(to_string(s));
        }
        out["slopes"] = slopes;
    }
    write_json(out, o.out);
    return 0;
}

int cmd_cosets(const Options &o)
{
    JobConfig job = load(o);
    auto ctx = job.context();
    auto cosets = enumerate_cosets(*job.h, job.budget);
    json out;
    out["schema"] = kSchema;
    out["kind"] = "cosets";
    out["N"] = job.level;
    out["H_order"] = job.h->size();
    out["cosets"] = cosets.size();
    json primes = json::object();
    for (const auto &[p, e] : factor(Integer(job.level))) {
        ReductionContext rc;
        rc.p = p.get_si();
        rc.m = static_cast<int>(e);
        rc.type = cm_reduction_type(ctx, rc.p);
        std::map<long, long> multiset;
        for (const auto &c : enumerate_double_cosets(job.h, {}, job.budget)) {
            ++multiset[ram_index(c, rc, job.budget)];
        }
        json ms = json::object();
        for (const auto &[k, v] : multiset) {
            ms[std::to_string(k)] = v;
        }
        DoubleCoset base(job.h, job.g, {});
        auto fb = fiber(base, rc, job.budget);
        primes[to_string(p)] = {{"m", e},
                                {"reduction", rc.type == ReductionType::ordinary ? "ordinary" : "supersingular"},
                                {"ram_index_multiset", ms},
                                {"ram_index", fb.members.size()},
                                {"a_action_matters", fb.a_action_matters},
                                {"e_den", e_den(base, rc, job.budget)}};
    }
    out["primes"] = primes;
    write_json(out, o.out);
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"cmexp: expansions of cusp forms at CM points with certified denominators"};
    app.require_subcommand(1);
    Options o;
    auto common = [&](CLI::App *s, bool stages) {
        s->add_option("--config", o.config, "job configuration (JSON)")->required()->check(CLI::ExistingFile);
        s->add_option("--out", o.out, "output file (default: stdout)");
        if (stages) {
            s->add_option("--prec", o.prec, "working precision in bits (overrides the config)");
            s->add_option("--n", o.n, "truncation order: coefficients c_0 .. c_n (overrides the config)");
            s->add_option("--jobs", o.jobs, "parallelism degree")->check(CLI::PositiveNumber);
        }
    };
    auto *den = app.add_subcommand("denominator", "write the denominator certificate");
    common(den, true);
    auto *exp = app.add_subcommand("expand", "expand at every conjugate basepoint and rescale by C^[l+1]");
    common(exp, true);
    exp->add_option("--certificate", o.certificate, "certificate from `denominator` (default: C = 1)")->check(CLI::ExistingFile);
    auto *rec = app.add_subcommand("recover", "recover exact coefficients from an expansion file");
    common(rec, false);
    rec->add_option("--coefficients", o.coefficients, "output of `expand`")->required()->check(CLI::ExistingFile);
    rec->add_option("--tolerance", o.tolerance, "extra radius allowed in the re-embedding check");
    auto *pipe = app.add_subcommand("pipeline", "denominator, expand and recover in one run");
    common(pipe, true);
    auto *newton = app.add_subcommand("newton", "debug: Newton polygon of [p](T) for a curve {p, j | a, m, digits}");
    common(newton, false);
    auto *cos = app.add_subcommand("cosets", "debug: cosets of H and ramification indices at the primes dividing N");
    common(cos, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    try {
        if (*den) {
            return cmd_denominator(o);
        }
        if (*exp) {
            return cmd_expand(o);
        }
        if (*rec) {
            return cmd_recover(o);
        }
        if (*pipe) {
            return cmd_pipeline(o);
        }
        if (*newton) {
            return cmd_newton(o);
        }
        return cmd_cosets(o);
    } catch (const Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception &e) {
        std::cerr << "error: malformed input: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
