#include <gtest/gtest.h>

#include <cmexp/denominators.hpp>

using namespace cmexp;

namespace
{

BasepointContext context(long n, std::shared_ptr<const SubgroupH> h, long r, long s, long j)
{
    BasepointContext c;
    c.n = n;
    c.h = std::move(h);
    c.g = ModMatrix::identity(n);
    c.r = r;
    c.s = s;
    c.j_e = NumberFieldElement(rational_field(), Rational(j));
    c.small_primes = SmallPrimePolicy::conservative;
    return c;
}

const TaggedPrime &find(const std::vector<TaggedPrime> &v, long p)
{
    for (const auto &t : v) {
        if (t.p == p) {
            return t;
        }
    }
    throw std::runtime_error("prime not found");
}

} // namespace

TEST(RelevantPrimes, Examples)
{
    auto q = rational_field();
    auto a = relevant_primes(5, NumberFieldElement(q, Rational(3)));
    ASSERT_EQ(a.size(), 3u);
    EXPECT_EQ(a[0].p, 3);
    EXPECT_EQ(a[1].p, 5);
    EXPECT_EQ(a[2].p, 23);
    EXPECT_TRUE(a[1].divides_n && a[1].divides_j1728 && !a[1].divides_j);
    EXPECT_EQ(a[1].tags(), "N,j-1728");
    EXPECT_TRUE(a[0].divides_j && a[0].divides_j1728);
    auto b = relevant_primes(1, NumberFieldElement(q, Rational(1729)));
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0].p, 7);
    EXPECT_EQ(b[1].p, 13);
    EXPECT_EQ(b[2].p, 19);
    EXPECT_THROW(relevant_primes(5, NumberFieldElement(q, Rational(0))), Error);
    EXPECT_THROW(relevant_primes(5, NumberFieldElement(q, Rational(1728))), Error);
}

TEST(RelevantPrimes, EmptyWhenEverythingIsAUnit)
{
    // j^2 - 1728 j - 1 = 0 makes j (j - 1728) = 1.
    auto f = make_field({Integer(-1), Integer(-1728), Integer(1)});
    auto j = NumberFieldElement::generator(f);
    EXPECT_EQ(j.norm(), -1);
    EXPECT_EQ(j_minus(j, 1728).norm() * j.norm(), 1);
    EXPECT_TRUE(relevant_primes(1, j).empty());
}

TEST(MaxValuation, MatchesNormAndKnownValues)
{
    auto q = rational_field();
    EXPECT_EQ(max_valuation(NumberFieldElement(q, Rational(-3375)), 5), 3);
    EXPECT_EQ(max_valuation(NumberFieldElement(q, Rational(-3375)), 3), 3);
    EXPECT_EQ(max_valuation(NumberFieldElement(q, Rational(-5103)), 3), 6);
    // sqrt 7 at 7: both conjugates have valuation 1/2.
    auto f = make_field({Integer(-7), Integer(0), Integer(1)});
    auto s = NumberFieldElement::generator(f);
    EXPECT_EQ(max_valuation(s, 7), ratio(1, 2));
    // 3 + sqrt 2 at 7: norm 7, 7 splits in Q(sqrt 2): one conjugate has valuation 1.
    auto g = make_field({Integer(-2), Integer(0), Integer(1)});
    auto x = NumberFieldElement(g, {Rational(3), Rational(1)});
    EXPECT_EQ(x.norm(), 7);
    EXPECT_EQ(max_valuation(x, 7), 1);
    EXPECT_EQ(max_valuation(x * x, 7), 2);
    // sum of the valuations of the conjugates equals nu(Norm): check with a cubic
    auto c = make_field({Integer(-5), Integer(0), Integer(0), Integer(1)});
    auto t = NumberFieldElement::generator(c);
    EXPECT_EQ(max_valuation(t, 5), ratio(1, 3));
    EXPECT_EQ(max_valuation(t + NumberFieldElement(c, Rational(5)), 5), ratio(1, 3));
}

TEST(VDen, VerticalOnlyOrdinaryAtFive)
{
    // D = -11 (r = -1, s = 3), j = -32768; 5 splits in Q(sqrt -11), 5 does not divide j (j - 1728).
    auto ctx = context(5, std::make_shared<const SubgroupH>(SubgroupH::borel(5)), -1, 3, -32768);
    auto primes = relevant_primes(5, ctx.j_e);
    auto e = v_den_for_prime(find(primes, 5), ctx);
    EXPECT_EQ(cm_reduction_type(ctx, 5), ReductionType::ordinary);
    EXPECT_EQ(e.v_a, 0);
    ASSERT_TRUE(e.e_den && e.v_d_vert);
    EXPECT_EQ(*e.e_den, 5);
    EXPECT_EQ(*e.v_d_vert, ratio(1, 4));
    EXPECT_EQ(e.r, ratio(5, 4));
    EXPECT_EQ(e.provenance, Provenance::vertical);
}

TEST(VDen, HorizontalContainedAndNotContained)
{
    // Same point, prime 7: nu_7(j - 1728) = 2 and 7 is supersingular for j = 1728.
    auto full = context(5, std::make_shared<const SubgroupH>(SubgroupH::full(5)), -1, 3, -32768);
    auto primes = relevant_primes(5, full.j_e);
    auto e = v_den_for_prime(find(primes, 7), full);
    EXPECT_EQ(e.v_a, 2);
    ASSERT_TRUE(e.horizontal_contained);
    EXPECT_TRUE(*e.horizontal_contained);
    EXPECT_EQ(e.r, 0);

    auto borel = context(5, std::make_shared<const SubgroupH>(SubgroupH::borel(5)), -1, 3, -32768);
    auto m = m_j0(maximal_order_for(7, JClass::k1728), -1, 3, 5, JClass::k1728);
    ASSERT_FALSE(m.set.empty());
    bool upper = std::all_of(m.set.begin(), m.set.end(), [](const ModMatrix &x) { return x.c() == 0; });
    auto b = v_den_for_prime(find(primes, 7), borel);
    ASSERT_TRUE(b.horizontal_contained);
    EXPECT_EQ(*b.horizontal_contained, upper);
    EXPECT_FALSE(upper);
    EXPECT_EQ(b.r, 2);
    EXPECT_EQ(b.provenance, Provenance::horizontal);
    // v_den dominates both pieces
    for (const auto &x : {e, b}) {
        EXPECT_GE(x.r, x.vertical);
    }
}

TEST(VDen, CombinedPrimeKeepsTheLargerValue)
{
    // D = -7, j = -3375 = -3^3 5^3 at N = 5: 5 divides N and j.
    auto ctx = context(5, std::make_shared<const SubgroupH>(SubgroupH::borel(5)), -1, 2, -3375);
    auto primes = relevant_primes(5, ctx.j_e);
    auto e = v_den_for_prime(find(primes, 5), ctx);
    EXPECT_EQ(e.v_a, 3);
    ASSERT_TRUE(e.v_d_vert);
    EXPECT_GE(e.r, e.vertical);
    EXPECT_TRUE(e.r == e.vertical || e.r == 3);
    EXPECT_GE(e.r, 0);
}

TEST(VDen, SmallPrimePolicy)
{
    auto ctx = context(5, std::make_shared<const SubgroupH>(SubgroupH::borel(5)), -1, 2, -3375);
    auto primes = relevant_primes(5, ctx.j_e);
    auto e = v_den_for_prime(find(primes, 3), ctx);
    EXPECT_EQ(e.r, 6); // nu_3(j - 1728) = nu_3(-5103) = 6
    ctx.small_primes = SmallPrimePolicy::reject;
    try {
        v_den_for_prime(find(primes, 3), ctx);
        FAIL();
    } catch (const Error &err) {
        EXPECT_EQ(err.kind(), ErrorKind::out_of_scope);
    }
}

TEST(Certify, ExamplesAndMonotonicity)
{
    auto ctx = context(5, std::make_shared<const SubgroupH>(SubgroupH::borel(5)), -1, 3, -32768);
    auto c1 = certify(ctx, 1);
    auto c4 = certify(ctx, 4);
    ASSERT_EQ(c1.entries.size(), 4u); // 2, 5, 7, 11
    EXPECT_EQ(c1.symbolic(), c4.symbolic());
    EXPECT_EQ(c1.entries.at(5).r, ratio(5, 4));
    for (long n = 0; n <= 50; ++n) {
        EXPECT_EQ(Integer(c1.C(n + 1) % c1.C(n)), 0);
    }
    for (const auto &[p, e] : c1.entries) {
        EXPECT_GE(e.r, 0);
    }
    // N = 1 with a unit j (j - 1728): no primes, C = 1.
    BasepointContext unit;
    unit.n = 1;
    unit.h = std::make_shared<const SubgroupH>(SubgroupH::full(1));
    unit.g = ModMatrix::identity(1);
    unit.r = -1;
    unit.s = 3;
    unit.j_e = NumberFieldElement::generator(make_field({Integer(-1), Integer(-1728), Integer(1)}));
    auto c = certify(unit);
    EXPECT_TRUE(c.entries.empty());
    EXPECT_EQ(c.C(7), 1);
    // validation
    auto bad = ctx;
    bad.n = 6;
    EXPECT_THROW(certify(bad), Error);
}
