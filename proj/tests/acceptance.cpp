// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <cmexp/config.hpp>
#include <cmexp/quaternion.hpp>

using namespace cmexp;

namespace
{

/// Collects failed checks; the first few are reported.
struct Check
{
    std::vector<std::string> failures;
    void operator()(bool ok, const std::string &what)
    {
        if (!ok) {
            failures.push_back(what);
        }
    }
};

std::string str(long x)
{
    return std::to_string(x);
}

// ---------------------------------------------------------------------------
// 1. solver against the direct series oracle

std::vector<std::vector<Rational>> series_oracle(const std::vector<Rational> &a, std::size_t n)
{
    TruncSeries<Rational> t(n + 1, Rational(0)), dt(n + 1, Rational(0));
    for (std::size_t k = 1; k <= n + 1; ++k) {
        if (k <= n) {
            t[k] = a[k - 1];
        }
        dt[k - 1] = a[k - 1] * static_cast<long>(k);
    }
    std::vector<std::vector<Rational>> m(n + 1, std::vector<Rational>(n + 1, Rational(0)));
    TruncSeries<Rational> pw(n + 1, Rational(0));
    pw[0] = 1;
    for (std::size_t j = 0; j <= n; ++j) {
        auto col = ts::mul(pw, dt);
        for (std::size_t l = 0; l <= n; ++l) {
            m[l][j] = col[l];
        }
        pw = ts::mul(pw, t);
    }
    return m;
}

void solver_oracle(Check &check)
{
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<long> ua(-6, 6), ub(-30, 30), un(0, 16), uq(1, 9);
    for (int it = 0; it < 200; ++it) {
        auto n = static_cast<std::size_t>(un(rng));
        std::vector<Rational> a, b;
        for (std::size_t k = 0; k <= n; ++k) {
            a.push_back(ratio(ua(rng), uq(rng)));
            b.push_back(ratio(ub(rng), uq(rng)));
        }
        if (a[0] == 0) {
            a[0] = 1;
        }
        auto m = build_M(a, n);
        auto oracle = series_oracle(a, n);
        check(m == oracle, "build_M differs from the series oracle, n = " + str(static_cast<long>(n)));
        auto c = solve_coeffs(CoeffSystem<Rational>{a, b, n});
        for (std::size_t l = 0; l <= n; ++l) {
            Rational s = 0;
            for (std::size_t j = 0; j <= l; ++j) {
                s += oracle[l][j] * c[j];
            }
            check(s == b[l], "recomposition fails at l = " + str(static_cast<long>(l)));
        }
    }
}

// ---------------------------------------------------------------------------
// 2, 3. Newton polygons of [p](T)

void multiplicative_group(Check &check)
{
    for (long p : {5L, 7L, 11L}) {
        std::vector<std::vector<Rational>> c(2, std::vector<Rational>(2, Rational(0)));
        c[1][0] = c[0][1] = c[1][1] = 1;
        auto f = FormalGroupLaw<Rational>::from_coefficients(Rational(0), static_cast<std::size_t>(p + 3), c);
        auto poly = newton_polygon(valuation_points(mult_by(f, p), Integer(p)));
        check(poly.vertices().size() == 2 && poly.has_vertex(1, Rational(1)) && poly.has_vertex(p, Rational(0)), "vertices at p = " + str(p));
        check(poly.largest_slope() == ratio(1, p - 1), "slope at p = " + str(p));
        check(v_vert_bound(f, p, 1) == ratio(1, p - 1), "ordinary bound at p = " + str(p));
    }
}

void supersingular_polygon(Check &check)
{
    const long p = 7;
    // a_7 = p + 1 - #E(F_7) for y^2 = x^3 + x
    long points = 1;
    for (long x = 0; x < p; ++x) {
        for (long y = 0; y < p; ++y) {
            points += mod(y * y - x * x * x - x, p) == 0;
        }
    }
    check(p + 1 - points == 0, "a_7 = " + str(p + 1 - points));
    WeierstrassModel<Rational> e{Rational(0), Rational(0), Rational(0), Rational(1), Rational(0)};
    std::optional<VerticalBound> previous;
    for (auto [digits, terms] : {std::pair{12L, 51UL}, std::pair{24L, 102UL}}) {
        auto f = FormalGroupLaw<PadicElement>::from_model(to_padic(e, Integer(p), 1, digits), terms);
        auto d = v_vert_details(f, p, 1);
        check(formal_height(f, p) == 2 && d.height == 2, "height");
        if (!d.r || !d.polygon) {
            check(false, "no polygon");
            return;
        }
        check(d.polygon->has_vertex_at(1) && d.polygon->has_vertex_at(49), "vertices at 1 and 49");
        check(*d.r >= 0 && *d.r <= 1, "r in [0, 1]");
        check(d.value == (1 - *d.r) / 42, "v_vert = (1 - r)/42");
        auto pts = valuation_points(mult_by(f, p), Integer(p));
        check(d.polygon->is_lower_convex_hull_of(pts), "convexity");
        if (previous) {
            check(previous->value == d.value && previous->polygon->vertices() == d.polygon->vertices(), "stable under precision doubling");
        }
        previous = d;
    }
}

// ---------------------------------------------------------------------------
// 4, 5. cosets and fibers

void coset_fibers(Check &check)
{
    auto h = std::make_shared<const SubgroupH>(SubgroupH::borel(5));
    check(enumerate_cosets(*h).size() == 6, "6 cosets");
    std::vector<ModMatrix> a{ModMatrix::identity(5), -ModMatrix::identity(5)};
    ReductionContext ctx{5, 1, ReductionType::ordinary, {}, {1, 0}};
    std::multiset<long> e;
    std::set<ReducedStructure> fibers;
    for (const auto &c : enumerate_double_cosets(h, a)) {
        e.insert(ram_index(c, ctx));
        fibers.insert(pr_star(c, ctx));
        check(e_den(c, ctx) == 5, "e_den = 5");
    }
    check(e == std::multiset<long>{1, 5, 5, 5, 5, 5}, "ram_index multiset");
    check(fibers.size() == 2, "two fibers");
}

void order_six_example(Check &check)
{
    const long n = 7;
    std::vector<ModMatrix> gens{-ModMatrix::identity(n)};
    for (long d = 1; d < n; ++d) {
        gens.emplace_back(n, 1, 0, 0, d);
    }
    auto h = std::make_shared<const SubgroupH>(n, gens);
    h->validate();
    ModMatrix tau = tau_matrix(n, 1, 1);
    auto afp = automorphism_set(JClass::zero, tau, n);
    check(afp.size() == 6, "A has order 6");
    ModMatrix g = ModMatrix::identity(n), alpha = tau;
    check(!h->conjugate_contains(g, alpha), "alpha outside g^-1 H g");
    std::vector<ModMatrix> a{ModMatrix::identity(n), -ModMatrix::identity(n)};
    ReductionContext ctx{5, 0, ReductionType::supersingular, afp, {1, 0}};
    DoubleCoset c(h, g, a);
    auto f = fiber(c, ctx);
    std::vector<DoubleCoset> want{DoubleCoset(h, g, a), DoubleCoset(h, g * alpha, a), DoubleCoset(h, g * alpha * alpha, a)};
    bool same = f.members.size() == want.size();
    for (const auto &x : want) {
        same = same && std::find(f.members.begin(), f.members.end(), x) != f.members.end();
    }
    check(same, "preimage is {Hg, Hg alpha, Hg alpha^2}");
    check(ram_index(c, ctx) == 3, "ram_index = 3");
}

// ---------------------------------------------------------------------------
// 6. Kodaira table

void kodaira_table(Check &check)
{
    const long p = 5;
    auto pw = [](long e) { return to_long(pow(Integer(5), static_cast<unsigned long>(e))); };
    struct Case
    {
        long a4, a6, delta;
        int ep;
    };
    std::vector<Case> cases{{0, p, 2, 6}, {p, 0, 3, 4}, {0, pw(2), 4, 3}, {pw(2), pw(3), 6, 2}, {0, pw(4), 8, 3}, {pw(3), 0, 9, 4}, {0, pw(5), 10, 6}};
    for (const auto &c : cases) {
        WeierstrassModel<Rational> e{Rational(0), Rational(0), Rational(0), Rational(c.a4), Rational(c.a6)};
        auto g = good_reduction_model(to_padic(e, Integer(p), 1, 30), p);
        check(g.delta_min == c.delta, "nu(Delta_min) = " + str(c.delta));
        check(g.e_p == c.ep && c.ep == 12 / static_cast<int>(gcd64(12, c.delta)), "e_p at nu(Delta) = " + str(c.delta));
        check(g.model.disc().valuation_digits() == 0, "good reduction after base change, nu = " + str(c.delta));
    }
}

// ---------------------------------------------------------------------------
// 7. quaternion brute force

bool satisfies(const Relation &rel, const ModMatrix &t, const ModMatrix &x, long n)
{
    auto md = [n](const Integer &v) { return to_long(mod(v, Integer(n))); };
    ModMatrix id = ModMatrix::identity(n);
    return md(rel[0]) * (t * x) == md(rel[1]) * id + md(rel[2]) * t + md(rel[3]) * x + md(rel[4]) * (x * t);
}

std::vector<ModMatrix> brute_force(const std::vector<Relation> &rels, JClass j0, const ModMatrix &t, long n)
{
    auto [fr, fs] = f_j0(j0);
    std::vector<ModMatrix> out;
    for (std::uint64_t code = 0; code < static_cast<std::uint64_t>(n * n * n * n); ++code) {
        auto x = ModMatrix::from_code(n, code);
        if (x.trace() != mod(-fr, n) || x.det() != mod(fs, n)) {
            continue;
        }
        bool ok = true;
        for (const auto &r : rels) {
            ok = ok && satisfies(r, t, x, n);
        }
        if (ok) {
            out.push_back(x);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void quaternion_brute_force(Check &check)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<long> dr(-4, 4), ds(1, 20);
    for (long p : {7L, 11L}) {
        for (long n : {5L, 7L}) {
            for (JClass j0 : {JClass::zero, JClass::k1728}) {
                auto o = (j0 == JClass::zero && p % 3 == 1) ? maximal_order(p) : maximal_order_for(p, j0);
                auto us = solve_char_poly(o, j0);
                std::vector<ModMatrix> cent_cache;
                int found = 0;
                while (found < 20) {
                    long r = dr(rng), s = ds(rng);
                    if (r * r - 4 * s >= 0) {
                        continue;
                    }
                    auto taus = embed_tau_all(o, r, s);
                    if (taus.empty()) {
                        continue;
                    }
                    ++found;
                    ModMatrix t = tau_matrix(n, r, s);
                    const std::string at = " (p, N, r, s) = (" + str(p) + ", " + str(n) + ", " + str(r) + ", " + str(s) + ")";
                    for (const auto &tq : taus) {
                        for (const auto &u : us) {
                            auto rels = relation_kernel(tq, u);
                            check(undetermined_coeffs(rels, j0, t, n) == brute_force(rels, j0, t, n), "solution set" + at);
                        }
                    }
                    auto m = m_j0(o, r, s, n, j0);
                    for (std::uint64_t code = 0; code < static_cast<std::uint64_t>(n * n * n * n); ++code) {
                        auto c = ModMatrix::from_code(n, code);
                        if (!c.invertible() || !(c * t == t * c)) {
                            continue;
                        }
                        std::set<ModMatrix> conj;
                        for (const auto &x : m.set) {
                            conj.insert(c * x * c.inverse());
                        }
                        check(std::vector<ModMatrix>(conj.begin(), conj.end()) == m.set, "centralizer invariance" + at);
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 8. recovery round trip

void recovery_round_trip(Check &check)
{
    const long prec = 128;
    const Rational eps(Integer(1), Integer("1000000000000000000000000000000"));
    auto zeta7_over_k = [] {
        GaloisData g;
        g.L = make_field(cyclotomic_polynomial(7));
        auto z = NumberFieldElement::generator(g.L);
        g.k_poly = {Integer(2), Integer(1), Integer(1)};
        g.k_gen = (z + z.pow(2) + z.pow(4)).coords();
        g.sigma = {linalg::identity(6), GaloisData::matrix_from_image(g.L, z.pow(2)), GaloisData::matrix_from_image(g.L, z.pow(4))};
        g.abelian = abelian_structure(g.cayley());
        return g;
    };
    auto gauss_over_itself = [] {
        GaloisData g;
        g.L = make_field({Integer(1), Integer(0), Integer(1)});
        g.k_poly = {Integer(1), Integer(0), Integer(1)};
        g.k_gen = {Rational(0), Rational(1)};
        g.sigma = {linalg::identity(2)};
        g.abelian = abelian_structure(g.cayley());
        return g;
    };
    std::vector<std::pair<std::string, GaloisData>> inst{{"Q(sqrt2)/Q", quadratic_galois(2)},  {"Q(i)/Q", quadratic_galois(-1)},
                                                         {"Q(zeta5)/Q", cyclotomic_galois(5)}, {"Q(zeta7)/Q", cyclotomic_galois(7)},
                                                         {"Q(i)/Q(i)", gauss_over_itself()},   {"Q(zeta7)/Q(sqrt-7)", zeta7_over_k()}};
    for (auto &[name, gal] : inst) {
        gal.validate();
        auto nb = build_normal_basis(gal, prec);
        std::mt19937_64 rng(2024);
        std::uniform_int_distribution<long> u(-1000000, 1000000), shift(-1000, 1000);
        int failures = 0, mismatches = 0;
        for (int it = 0; it < 1000; ++it) {
            std::vector<Rational> c(gal.L->degree());
            for (auto &x : c) {
                x = u(rng);
            }
            NumberFieldElement x(gal.L, c);
            std::vector<ComplexBall> w;
            for (std::size_t j = 0; j < gal.d(); ++j) {
                auto b = nb.embed(gal.apply(j, x));
                b = b + ComplexBall(b.prec(), eps * ratio(shift(rng), 1000), eps * ratio(shift(rng), 1000));
                b.inflate(2 * eps.get_d());
                w.push_back(b);
            }
            try {
                auto r = recover_integer(nb, w, gal);
                failures += !(r.value == x);
                if (gal.abelian) {
                    mismatches += !(recover_abelian(nb, w, gal).value == r.value);
                }
            } catch (const Error &) {
                ++failures;
            }
        }
        check(failures == 0, name + ": " + str(failures) + " failures");
        check(mismatches == 0, name + ": " + str(mismatches) + " abelian mismatches");
    }
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> u(-1000000, 1000000);
    for (const auto &dims : std::vector<std::vector<long>>{{4}, {6}, {2, 2}, {2, 4}, {2, 2, 4}, {3, 6}}) {
        long size = 1;
        for (long d : dims) {
            size *= d;
        }
        auto rnd = [&] {
            std::vector<ComplexBall> a;
            for (long i = 0; i < size; ++i) {
                a.emplace_back(prec, ratio(u(rng), 1000), ratio(u(rng), 1000));
            }
            return a;
        };
        auto a = rnd(), b = rnd();
        auto back = dft(dft(a, dims, false, prec), dims, true, prec);
        auto lhs = dft(group_convolution(a, b, dims), dims, false, prec);
        auto fa = dft(a, dims, false, prec), fb = dft(b, dims, false, prec);
        for (std::size_t k = 0; k < a.size(); ++k) {
            check((back[k] - a[k]).abs_upper().to_double() < 1e-25, "DFT inverse residual");
            auto rhs = fa[k] * fb[k];
            check((lhs[k] - rhs).abs_upper().to_double() / (1 + rhs.abs_upper().to_double()) < 1e-25, "convolution residual");
        }
    }
}

// ---------------------------------------------------------------------------
// 9, 10. pipeline

const std::filesystem::path kJobs = CMEXP_JOBS_DIR;

std::string dump_run(const JobConfig &job, const PipelineResult &r)
{
    return recovered_to_json(job.galois, r.coefficients, r.certificate.symbolic()).dump(2) + certificate_to_json(r.certificate).dump(2) +
           expansions_to_json(r.expansions, r.certificate, job.precision, job.n).dump(2);
}

void end_to_end(Check &check)
{
    auto job = load_job(kJobs / "x0_5_disc_m11.json");
    check(job.level == 5 && job.n == 10 && job.discriminant() == -11, "job shape");
    auto a = run_pipeline(job);
    auto oracle = synthetic_coefficients(*job.form.j_polynomial, job.j_e.coords()[0], job.n);
    for (const auto &c : a.coefficients) {
        const std::string at = " at l = " + str(c.l);
        check(c.residual < 1e-10, "residual" + at);
        check(c.scaled.is_integral(), "integrality" + at);
        check(c.value.coords()[0] == oracle[static_cast<std::size_t>(c.l)], "exact value" + at);
    }
    job.precision *= 2;
    auto b = run_pipeline(job);
    check(a.coefficients.size() == b.coefficients.size(), "coefficient count at doubled precision");
    for (std::size_t l = 0; l < std::min(a.coefficients.size(), b.coefficients.size()); ++l) {
        check(a.coefficients[l].scaled == b.coefficients[l].scaled, "doubled precision changes l = " + str(static_cast<long>(l)));
    }
}

void monotone_and_deterministic(Check &check)
{
    for (const char *name : {"x0_5_disc_m7.json", "x0_5_disc_m11.json"}) {
        auto job = load_job(kJobs / name);
        auto r1 = run_pipeline(job);
        auto r2 = run_pipeline(job, 4);
        for (long n = 0; n <= 50; ++n) {
            check(r1.certificate.C(n + 1) % r1.certificate.C(n) == 0, std::string(name) + ": C^[n] does not divide C^[n+1], n = " + str(n));
        }
        check(dump_run(job, r1) == dump_run(job, r2), std::string(name) + ": outputs differ across reruns");
    }
}

} // namespace

int main()
{
    struct Criterion
    {
        int id;
        std::string name;
        double limit;
        std::function<void(Check &)> run;
    };
    std::vector<Criterion> all{{1, "solver oracle, 200 exact systems", 10, solver_oracle},
                               {2, "multiplicative formal group polygon", 1, multiplicative_group},
                               {3, "supersingular polygon of y^2 = x^3 + x at 7", 30, supersingular_polygon},
                               {4, "coset fibers for N = 5 Borel", 5, coset_fibers},
                               {5, "order-6 automorphism example", 1, order_six_example},
                               {6, "Kodaira table", 1, kodaira_table},
                               {7, "quaternion brute-force equivalence", 60, quaternion_brute_force},
                               {8, "recovery round trip and DFT residuals", 60, recovery_round_trip},
                               {9, "end-to-end integrality", 600, end_to_end},
                               {10, "certificate monotonicity and determinism", 600, monotone_and_deterministic}};
    int failed = 0;
    for (const auto &c : all) {
        Check check;
        auto start = std::chrono::steady_clock::now();
        try {
            c.run(check);
        } catch (const std::exception &e) {
            check(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        check(secs < c.limit, "runtime above " + std::to_string(static_cast<long>(c.limit)) + " s");
        bool ok = check.failures.empty();
        failed += !ok;
        std::printf("%s %2d  %-48s %8.2f s\n", ok ? "PASS" : "FAIL", c.id, c.name.c_str(), secs);
        for (std::size_t i = 0; i < std::min<std::size_t>(check.failures.size(), 5); ++i) {
            std::printf("        %s\n", check.failures[i].c_str());
        }
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed == 0 ? 0 : 1;
}
