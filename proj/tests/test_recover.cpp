#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include <cmexp/recover.hpp>

using namespace cmexp;

namespace
{

constexpr long kPrec = 128;

std::vector<ComplexBall> conjugates(const NormalBasis &nb, const GaloisData &gal, const NumberFieldElement &x)
{
    std::vector<ComplexBall> w;
    for (std::size_t j = 0; j < gal.d(); ++j) {
        w.push_back(nb.embed(gal.apply(j, x)));
    }
    return w;
}

/// Shift each midpoint by at most eps in each coordinate and widen the radius to cover the shift.
std::vector<ComplexBall> perturb(std::vector<ComplexBall> w, std::mt19937_64 &rng, const Rational &eps)
{
    std::uniform_int_distribution<long> u(-1000, 1000);
    for (auto &b : w) {
        b = b + ComplexBall(b.prec(), eps * ratio(u(rng), 1000), eps * ratio(u(rng), 1000));
        b.inflate(2 * eps.get_d());
    }
    return w;
}

NumberFieldElement random_element(const FieldPtr &f, std::mt19937_64 &rng, long bound)
{
    std::uniform_int_distribution<long> u(-bound, bound);
    std::vector<Rational> c(f->degree());
    for (auto &x : c) {
        x = u(rng);
    }
    return NumberFieldElement(f, c);
}

/// Q(zeta_7) over K = Q(sqrt -7), Gal = <zeta -> zeta^2>.
GaloisData zeta7_over_sqrt_m7()
{
    GaloisData g;
    g.L = make_field(cyclotomic_polynomial(7));
    auto z = NumberFieldElement::generator(g.L);
    auto eta = z + z.pow(2) + z.pow(4);
    g.k_poly = {Integer(2), Integer(1), Integer(1)};
    g.k_gen = eta.coords();
    g.sigma = {linalg::identity(6), GaloisData::matrix_from_image(g.L, z.pow(2)), GaloisData::matrix_from_image(g.L, z.pow(4))};
    g.abelian = abelian_structure(g.cayley());
    return g;
}

/// Q(i) over itself.
GaloisData gaussian_over_itself()
{
    GaloisData g;
    g.L = make_field({Integer(1), Integer(0), Integer(1)});
    g.k_poly = {Integer(1), Integer(0), Integer(1)};
    g.k_gen = {Rational(0), Rational(1)};
    g.sigma = {linalg::identity(2)};
    return g;
}

std::vector<std::pair<std::string, GaloisData>> round_trip_instances()
{
    return {{"Q(sqrt2)/Q", quadratic_galois(2)},
            {"Q(i)/Q", quadratic_galois(-1)},
            {"Q(zeta5)/Q", cyclotomic_galois(5)},
            {"Q(zeta7)/Q", cyclotomic_galois(7)},
            {"Q(i)/Q(i)", gaussian_over_itself()},
            {"Q(zeta7)/Q(sqrt-7)", zeta7_over_sqrt_m7()}};
}

ComplexBall det2(const BallMatrix &a)
{
    return a[0][0] * a[1][1] - a[0][1] * a[1][0];
}

} // namespace

TEST(BuildNormalBasis, Examples)
{
    auto q2 = quadratic_galois(2);
    auto nb = build_normal_basis(q2, kPrec);
    auto th = NumberFieldElement::generator(q2.L);
    auto one = NumberFieldElement(q2.L, Rational(1));
    EXPECT_EQ(nb.alpha, one + th);
    EXPECT_EQ(nb.D, 2);

    GaloisData triv;
    triv.L = rational_field();
    triv.sigma = {linalg::identity(1)};
    auto nt = build_normal_basis(triv, kPrec);
    EXPECT_EQ(nt.alpha, NumberFieldElement(triv.L, Rational(1)));
    EXPECT_EQ(nt.D, 1);
    ASSERT_EQ(nt.a.size(), 1u);
    EXPECT_TRUE(nt.a[0][0].contains(Rational(1)));

    // A = [[a, sigma a], [sigma a, a]] for a = 1 + i: det = a^2 - (sigma a)^2 = +-4i.
    auto qi = quadratic_galois(-1);
    auto ni = build_normal_basis(qi, kPrec);
    EXPECT_EQ(ni.alpha, NumberFieldElement(qi.L, Rational(1)) + NumberFieldElement::generator(qi.L));
    ComplexBall det = det2(ni.a);
    EXPECT_FALSE(det.contains_zero());
    EXPECT_TRUE(det.contains(Rational(0), Rational(4)) || det.contains(Rational(0), Rational(-4)));
}

TEST(BuildNormalBasis, DenominatorCoversTheRingOfIntegers)
{
    // Every power-basis vector must have coordinates in (1/D) O_K on the normal basis.
    for (auto &[name, gal] : round_trip_instances()) {
        auto nb = build_normal_basis(gal, kPrec);
        auto th = NumberFieldElement::generator(gal.L);
        for (unsigned long e = 0; e < gal.L->degree(); ++e) {
            auto x = th.pow(e);
            auto w = conjugates(nb, gal, x);
            EXPECT_EQ(recover_integer(nb, w, gal).value, x) << name << " theta^" << e;
        }
    }
}

TEST(IndexBound, DedekindCriterion)
{
    // Z[sqrt 5] has index 2 in the maximal order; Z[sqrt 2], Z[i], Z[zeta_m] are maximal.
    EXPECT_EQ(index_bound(make_field({Integer(-5), Integer(0), Integer(1)})), 2);
    EXPECT_EQ(index_bound(make_field({Integer(-2), Integer(0), Integer(1)})), 1);
    EXPECT_EQ(index_bound(make_field({Integer(1), Integer(0), Integer(1)})), 1);
    EXPECT_EQ(index_bound(make_field(cyclotomic_polynomial(5))), 1);
    EXPECT_EQ(index_bound(make_field(cyclotomic_polynomial(7))), 1);
    // x^2 - 12: Z[2 sqrt 3] has index 2 in Z[sqrt 3]; disc 48 = 2^4 3, bound 2^2.
    EXPECT_EQ(index_bound(make_field({Integer(-12), Integer(0), Integer(1)})), 4);
    EXPECT_EQ(poly_discriminant(make_field(cyclotomic_polynomial(5))), 125);
    EXPECT_EQ(poly_discriminant(make_field(cyclotomic_polynomial(7))), -16807);
}

TEST(Cyclotomic, Polynomials)
{
    EXPECT_EQ(cyclotomic_polynomial(1), (std::vector<Integer>{-1, 1}));
    EXPECT_EQ(cyclotomic_polynomial(4), (std::vector<Integer>{1, 0, 1}));
    EXPECT_EQ(cyclotomic_polynomial(6), (std::vector<Integer>{1, -1, 1}));
    EXPECT_EQ(cyclotomic_polynomial(12), (std::vector<Integer>{1, 0, -1, 0, 1}));
}

TEST(RecoverInteger, Examples)
{
    auto gal = quadratic_galois(2);
    auto nb = build_normal_basis(gal, kPrec);
    auto th = NumberFieldElement::generator(gal.L);
    auto gamma = NumberFieldElement(gal.L, Rational(3)) + th * Rational(2);
    std::mt19937_64 rng(1);
    auto w = perturb(conjugates(nb, gal, gamma), rng, Rational(Integer(1), Integer("100000000000000000000")));
    auto r = recover_integer(nb, w, gal);
    EXPECT_EQ(r.value, gamma);
    EXPECT_LT(r.residual, 1e-19);
    EXPECT_EQ(recover_abelian(nb, w, gal).value, gamma);

    auto zero = NumberFieldElement(gal.L);
    EXPECT_EQ(recover_integer(nb, conjugates(nb, gal, zero), gal).value, zero);

    // Galois-fixed element: equals the rounding of w_0.
    auto seven = NumberFieldElement(gal.L, Rational(7));
    auto w7 = perturb(conjugates(nb, gal, seven), rng, ratio(1, 1000000));
    auto r7 = recover_integer(nb, w7, gal);
    EXPECT_EQ(r7.value, seven);
    EXPECT_EQ(floor_of(w7[0].re().to_rational() + ratio(1, 2)), 7);
    EXPECT_EQ(recover_abelian(nb, w7, gal).value, seven);
}

TEST(RecoverInteger, Errors)
{
    auto gal = quadratic_galois(2);
    auto nb = build_normal_basis(gal, kPrec);
    auto th = NumberFieldElement::generator(gal.L);
    auto w = conjugates(nb, gal, th);
    // wide balls: two lattice points in reach
    auto wide = w;
    for (auto &b : wide) {
        b.inflate(2.0);
    }
    try {
        recover_integer(nb, wide, gal);
        ADD_FAILURE() << "expected ambiguous rounding";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ambiguous_rounding);
        EXPECT_NE(std::string(e.what()).find("need radius"), std::string::npos);
    }
    // a tight ball off the conjugate: rounding succeeds, re-embedding fails
    auto off = w;
    off[1] = off[1] + ComplexBall(kPrec, ratio(1, 10000000000LL));
    try {
        recover_integer(nb, off, gal);
        ADD_FAILURE() << "expected verification failure";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::inconsistent_input);
    }
    EXPECT_THROW(recover_integer(nb, {w[0]}, gal), Error);
}

TEST(RecoverInteger, PrecisionLaw)
{
    // Radii below max_input_radius() always round; the bound scales with D ||A^-1||.
    for (auto &[name, gal] : round_trip_instances()) {
        auto nb = build_normal_basis(gal, kPrec);
        EXPECT_GT(nb.max_input_radius(), 0) << name;
        std::mt19937_64 rng(7);
        auto x = random_element(gal.L, rng, 1000);
        auto w = conjugates(nb, gal, x);
        Rational eps = Rational(nb.max_input_radius()) / 4;
        EXPECT_EQ(recover_integer(nb, perturb(w, rng, eps), gal).value, x) << name;
    }
}

TEST(GaloisData, Validation)
{
    auto g = quadratic_galois(2);
    EXPECT_NO_THROW(g.validate());
    auto bad = g;
    bad.sigma[1][0][0] = 2;
    EXPECT_THROW(bad.validate(), Error);
    auto noid = g;
    std::swap(noid.sigma[0], noid.sigma[1]);
    EXPECT_THROW(noid.validate(), Error);
    auto kq = zeta7_over_sqrt_m7();
    EXPECT_NO_THROW(kq.validate());
    // zeta -> zeta^3 moves sqrt(-7)
    auto moved = kq;
    auto z = NumberFieldElement::generator(moved.L);
    moved.sigma[1] = GaloisData::matrix_from_image(moved.L, z.pow(3));
    EXPECT_THROW(moved.validate(), Error);
    auto real_k = kq;
    real_k.k_poly = {Integer(-2), Integer(0), Integer(1)};
    EXPECT_THROW(real_k.validate(), Error);
}

TEST(SmithForm, Examples)
{
    auto diag = [](std::vector<long> d) {
        std::vector<std::vector<Integer>> m;
        for (std::size_t i = 0; i < d.size(); ++i) {
            std::vector<Integer> r(d.size(), 0);
            r[i] = d[i];
            m.push_back(r);
        }
        return m;
    };
    EXPECT_EQ(smith_form(diag({2, 3}), 2).invariants, (std::vector<Integer>{6}));
    EXPECT_EQ(smith_form(diag({2, 4}), 2).invariants, (std::vector<Integer>{2, 4}));
    EXPECT_EQ(smith_form(diag({2, 2, 4}), 3).invariants, (std::vector<Integer>{2, 2, 4}));
    EXPECT_EQ(smith_form(diag({4, 2, 2}), 3).invariants, (std::vector<Integer>{2, 2, 4}));
    // the generator of Z/2 + Z/3 has order 6
    auto s = smith_form(diag({2, 3}), 2);
    ASSERT_EQ(s.generators.size(), 1u);
    const auto &g = s.generators[0];
    long ord = std::lcm(2 / std::gcd(2L, mod(g[0], Integer(2)).get_si()), 3 / std::gcd(3L, mod(g[1], Integer(3)).get_si()));
    EXPECT_EQ(ord, 6);
    // free part
    EXPECT_EQ(smith_form({{Integer(2), Integer(0)}}, 2).invariants, (std::vector<Integer>{2, 0}));
}

TEST(SmithForm, MinorGcdsOnRandomMatrices)
{
    // d_1 = gcd of entries, d_1 d_2 d_3 = |det|.
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long> u(-20, 20);
    for (int it = 0; it < 200; ++it) {
        std::vector<std::vector<Integer>> m(3, std::vector<Integer>(3));
        QMatrix q = linalg::zeros(3, 3);
        Integer g = 0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                m[i][j] = u(rng);
                q[i][j] = m[i][j];
                g = gcd(g, m[i][j]);
            }
        }
        Rational det = linalg::det(q);
        if (det == 0) {
            continue;
        }
        auto s = smith_form(m, 3);
        Integer prod = 1;
        for (const auto &x : s.invariants) {
            prod *= x;
        }
        for (std::size_t i = 1; i < s.invariants.size(); ++i) {
            EXPECT_EQ(s.invariants[i] % s.invariants[i - 1], 0);
        }
        EXPECT_EQ(Rational(prod), abs(det));
        Integer d1 = s.invariants.size() == 3 ? s.invariants[0] : Integer(1);
        EXPECT_EQ(d1, g);
    }
}

TEST(AbelianStructure, UnitGroups)
{
    EXPECT_EQ(cyclotomic_galois(5).abelian->invariants, (std::vector<long>{4}));
    EXPECT_EQ(cyclotomic_galois(5).abelian->generators, (std::vector<std::size_t>{1}));
    EXPECT_EQ(cyclotomic_galois(7).abelian->invariants, (std::vector<long>{6}));
    EXPECT_EQ(cyclotomic_galois(8).abelian->invariants, (std::vector<long>{2, 2}));
    EXPECT_EQ(cyclotomic_galois(8).abelian->generators, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(cyclotomic_galois(15).abelian->invariants, (std::vector<long>{2, 4}));
    // S_3 as permutations of {0,1,2}
    std::vector<std::array<int, 3>> perms{{0, 1, 2}, {1, 0, 2}, {0, 2, 1}, {2, 1, 0}, {1, 2, 0}, {2, 0, 1}};
    std::vector<std::vector<std::size_t>> t(6, std::vector<std::size_t>(6));
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            std::array<int, 3> c{};
            for (int x = 0; x < 3; ++x) {
                c[x] = perms[i][perms[j][x]];
            }
            t[i][j] = static_cast<std::size_t>(std::find(perms.begin(), perms.end(), c) - perms.begin());
        }
    }
    EXPECT_THROW(abelian_structure(t), Error);
}

TEST(Dft, Examples)
{
    std::vector<ComplexBall> x{ComplexBall(kPrec, Rational(3)), ComplexBall(kPrec, Rational(5))};
    auto f = dft(x, {2}, false, kPrec);
    EXPECT_TRUE(f[0].contains(Rational(8)));
    EXPECT_TRUE(f[1].contains(Rational(-2)));
    std::vector<ComplexBall> delta(4, ComplexBall(kPrec));
    delta[0] = ComplexBall(kPrec, 1L);
    for (const auto &y : dft(delta, {2, 2}, false, kPrec)) {
        EXPECT_TRUE(y.contains(Rational(1)));
    }
    // constant array: transform supported at index 0
    std::vector<ComplexBall> c(6, ComplexBall(kPrec, Rational(2), Rational(1)));
    auto fc = dft(c, {6}, false, kPrec);
    EXPECT_TRUE(fc[0].contains(Rational(12), Rational(6)));
    for (std::size_t m = 1; m < 6; ++m) {
        EXPECT_TRUE(fc[m].contains(Rational(0)));
        EXPECT_LT(fc[m].abs_upper().to_double(), 1e-30);
    }
}

TEST(Dft, InverseAndConvolutionResiduals)
{
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long> u(-1000000, 1000000);
    for (const auto &dims : std::vector<std::vector<long>>{{2}, {4}, {6}, {2, 2}, {2, 4}, {2, 2, 4}, {3, 6}}) {
        long size = 1;
        for (long d : dims) {
            size *= d;
        }
        auto rnd = [&] {
            std::vector<ComplexBall> a;
            for (long i = 0; i < size; ++i) {
                a.emplace_back(kPrec, ratio(u(rng), 1000), ratio(u(rng), 1000));
            }
            return a;
        };
        auto a = rnd(), b = rnd();
        auto back = dft(dft(a, dims, false, kPrec), dims, true, kPrec);
        auto lhs = dft(group_convolution(a, b, dims), dims, false, kPrec);
        auto fa = dft(a, dims, false, kPrec), fb = dft(b, dims, false, kPrec);
        for (long i = 0; i < size; ++i) {
            auto k = static_cast<std::size_t>(i);
            EXPECT_TRUE(back[k].overlaps(a[k]));
            EXPECT_LT((back[k] - a[k]).abs_upper().to_double(), 1e-25);
            auto rhs = fa[k] * fb[k];
            EXPECT_TRUE(lhs[k].overlaps(rhs));
            EXPECT_LT((lhs[k] - rhs).abs_upper().to_double() / (1 + rhs.abs_upper().to_double()), 1e-25);
        }
    }
}

TEST(RecoverAbelian, Zeta5RoundTrip)
{
    auto gal = cyclotomic_galois(5);
    auto nb = build_normal_basis(gal, kPrec);
    std::mt19937_64 rng(5);
    for (int it = 0; it < 50; ++it) {
        auto x = random_element(gal.L, rng, 1000000);
        auto w = perturb(conjugates(nb, gal, x), rng, Rational(Integer(1), Integer("1000000000000000000000000000000")));
        EXPECT_EQ(recover_abelian(nb, w, gal).value, x);
    }
    // all conjugates equal: the recovered element lies in K
    std::vector<ComplexBall> same(4, ComplexBall(kPrec, Rational(-9)));
    EXPECT_EQ(recover_abelian(nb, same, gal).value, NumberFieldElement(gal.L, Rational(-9)));
}

TEST(Recover, ThousandSampleRoundTripBothPaths)
{
    auto start = std::chrono::steady_clock::now();
    const Rational eps = Rational(Integer(1), Integer("1000000000000000000000000000000"));
    for (auto &[name, gal] : round_trip_instances()) {
        auto nb = build_normal_basis(gal, kPrec);
        std::mt19937_64 rng(2024);
        int failures = 0, mismatches = 0;
        for (int it = 0; it < 1000; ++it) {
            auto x = random_element(gal.L, rng, 1000000);
            auto w = perturb(conjugates(nb, gal, x), rng, eps);
            auto r = recover_integer(nb, w, gal);
            failures += !(r.value == x);
            if (gal.abelian) {
                mismatches += !(recover_abelian(nb, w, gal).value == r.value);
            }
        }
        EXPECT_EQ(failures, 0) << name;
        EXPECT_EQ(mismatches, 0) << name;
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 60.0);
}
