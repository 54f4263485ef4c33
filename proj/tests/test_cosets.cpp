#include <gtest/gtest.h>

#include <map>
#include <random>

#include <cmexp/cosets.hpp>

using namespace cmexp;

namespace
{

// Plain integer product reduced at the end.
ModMatrix naive_mul(const ModMatrix &x, const ModMatrix &y)
{
    long n = x.modulus();
    return {n, x.a() * y.a() + x.b() * y.c(), x.a() * y.b() + x.b() * y.d(), x.c() * y.a() + x.d() * y.c(), x.c() * y.b() + x.d() * y.d()};
}

std::vector<ModMatrix> brute_automorphisms(const ModMatrix &tau, long n, bool k1728)
{
    ModMatrix id = ModMatrix::identity(n), zero(n, 0, 0, 0, 0);
    std::vector<ModMatrix> out{id, -id};
    for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(n * n * n * n); ++c) {
        ModMatrix x = ModMatrix::from_code(n, c);
        ModMatrix fx = k1728 ? x * x + id : x * x + x + id;
        if (fx == zero && x * tau == tau * x && !x.is_scalar()) {
            out.push_back(x);
            if (!k1728) {
                out.push_back(-x);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SubgroupPtr pm_diagonal(long n)
{
    std::vector<ModMatrix> g{-ModMatrix::identity(n)};
    for (long d = 1; d < n; ++d) {
        if (gcd64(d, n) == 1) {
            g.emplace_back(n, 1, 0, 0, d);
        }
    }
    return std::make_shared<const SubgroupH>(n, g);
}

} // namespace

TEST(ModMatrix, Examples)
{
    ModMatrix g(5, 0, 1, 4, 0);
    EXPECT_EQ(matmul_modN(g, g), ModMatrix(5, 4, 0, 0, 4));
    EXPECT_EQ(matmul_modN(ModMatrix::identity(5), g), g);
    ModMatrix h(7, 2, 3, 1, 4);
    EXPECT_EQ(h * h.inverse(), ModMatrix::identity(7));
    EXPECT_THROW(matmul_modN(g, h), Error);
}

TEST(ModMatrix, MultiplicationMatchesNaiveAndIsAssociative)
{
    std::mt19937_64 rng(11);
    for (long n : {5L, 7L, 12L, 25L, 35L}) {
        std::uniform_int_distribution<long> d(0, n - 1);
        for (int t = 0; t < 200; ++t) {
            ModMatrix x(n, d(rng), d(rng), d(rng), d(rng)), y(n, d(rng), d(rng), d(rng), d(rng)), z(n, d(rng), d(rng), d(rng), d(rng));
            EXPECT_EQ(x * y, naive_mul(x, y));
            EXPECT_EQ((x * y) * z, x * (y * z));
            EXPECT_EQ(ModMatrix::from_code(n, x.code()), x);
            EXPECT_EQ(x.invertible(), gcd64(x.det(), n) == 1);
        }
    }
}

TEST(Cosets, CountsForFullBorelAndPlusMinus)
{
    EXPECT_EQ(gl2_order(5), 480u);
    EXPECT_EQ(enumerate_cosets(SubgroupH::full(5)).size(), 1u);
    EXPECT_EQ(enumerate_cosets(SubgroupH::borel(5)).size(), 6u);
    SubgroupH pm(5, {-ModMatrix::identity(5)});
    EXPECT_EQ(enumerate_cosets(pm).size(), 240u);
    EXPECT_THROW(enumerate_cosets(pm, 100), Error);
}

TEST(Cosets, ValidationRejectsBadSubgroups)
{
    SubgroupH::borel(5).validate();
    SubgroupH no_minus(5, {{5, 1, 1, 0, 1}, {5, 2, 0, 0, 1}});
    EXPECT_THROW(no_minus.validate(), Error);
    SubgroupH det_small(5, {-ModMatrix::identity(5), {5, 1, 1, 0, 1}});
    EXPECT_THROW(det_small.validate(), Error);
}

TEST(Automorphisms, GenericIsPlusMinusIdentity)
{
    auto a = automorphism_set(JClass::generic, tau_matrix(5, 1, 2), 5);
    ASSERT_EQ(a.size(), 2u);
}

TEST(Automorphisms, MatchBruteForce)
{
    for (long n : {5L, 7L, 11L, 13L}) {
        ModMatrix t4 = tau_matrix(n, 0, 1);
        auto a4 = automorphism_set(JClass::k1728, t4, n);
        EXPECT_EQ(a4, brute_automorphisms(t4, n, true)) << n;
        EXPECT_EQ(a4.size(), 4u);
        ModMatrix t3 = tau_matrix(n, 1, 1);
        auto a3 = automorphism_set(JClass::zero, t3, n);
        EXPECT_EQ(a3, brute_automorphisms(t3, n, false)) << n;
        EXPECT_EQ(a3.size(), 6u);
    }
    auto a = automorphism_set(JClass::k1728, ModMatrix(5, 0, 1, 4, 0), 5);
    std::vector<ModMatrix> expect{ModMatrix::identity(5), -ModMatrix::identity(5), ModMatrix(5, 0, 1, 4, 0), ModMatrix(5, 0, 4, 1, 0)};
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(a, expect);
}

TEST(Automorphisms, OutputsAreGroups)
{
    for (long n : {5L, 7L, 25L}) {
        for (auto [jc, r, s] : {std::tuple{JClass::k1728, 0L, 1L}, std::tuple{JClass::zero, 1L, 1L}, std::tuple{JClass::k1728, 0L, 4L}, std::tuple{JClass::zero, 1L, 7L}}) {
            auto a = automorphism_set(jc, tau_matrix(n, r, s), n);
            EXPECT_EQ(group_from(n, a), a);
            EXPECT_TRUE(std::binary_search(a.begin(), a.end(), ModMatrix::identity(n)));
            EXPECT_EQ(a.size(), jc == JClass::k1728 ? 4u : 6u);
        }
    }
}

TEST(Automorphisms, InconsistentCmDataIsRejected)
{
    // Discriminant -7 admits no fourth root of unity over Z[tau].
    EXPECT_THROW(automorphism_set(JClass::k1728, tau_matrix(11, -1, 2), 11), Error);
}

TEST(PrStar, BorelOrdinaryFibers)
{
    auto h = std::make_shared<const SubgroupH>(SubgroupH::borel(5));
    std::vector<ModMatrix> a{ModMatrix::identity(5), -ModMatrix::identity(5)};
    ReductionContext ctx{5, 1, ReductionType::ordinary, {}, {1, 0}};
    auto cosets = enumerate_double_cosets(h, a);
    ASSERT_EQ(cosets.size(), 6u);
    std::multiset<long> e;
    std::map<ReducedStructure, long> groups;
    for (const auto &c : cosets) {
        e.insert(ram_index(c, ctx));
        groups[pr_star(c, ctx)] += 1;
        EXPECT_EQ(e_den(c, ctx), 5);
    }
    EXPECT_EQ(e, (std::multiset<long>{1, 5, 5, 5, 5, 5}));
    ASSERT_EQ(groups.size(), 2u);
    // The canonical point: Borel line equals the kernel line.
    DoubleCoset canon(h, ModMatrix::identity(5), a);
    EXPECT_EQ(ram_index(canon, ctx), 1);
}

TEST(PrStar, SupersingularPrimePowerLevelIsTrivial)
{
    auto h = std::make_shared<const SubgroupH>(SubgroupH::borel(5));
    std::vector<ModMatrix> a{ModMatrix::identity(5), -ModMatrix::identity(5)};
    ReductionContext ctx{5, 1, ReductionType::supersingular, {}, {1, 0}};
    for (const auto &c : enumerate_double_cosets(h, a)) {
        EXPECT_EQ(ram_index(c, ctx), 6);
        EXPECT_EQ(e_den(c, ctx), 6);
    }
}

TEST(PrStar, LeftInvarianceAndKernelOrder)
{
    auto h = std::make_shared<const SubgroupH>(SubgroupH::borel(5));
    std::vector<ModMatrix> a{ModMatrix::identity(5), -ModMatrix::identity(5)};
    ReductionContext ctx{5, 1, ReductionType::ordinary, {}, {1, 0}};
    ModMatrix g(5, 1, 2, 3, 4);
    auto base = pr_star(DoubleCoset(h, g, a), ctx);
    for (const auto &x : h->elements()) {
        EXPECT_EQ(pr_star(DoubleCoset(h, x * g, a), ctx), base);
    }
    ctx.kernel = {0, 5};
    EXPECT_THROW(pr_star(DoubleCoset(h, g, a), ctx), Error);
}

TEST(PrStar, ExtraAutomorphismsTripleTheFiber)
{
    const long n = 7;
    auto h = pm_diagonal(n);
    h->validate();
    ModMatrix tau = tau_matrix(n, 1, 1);
    auto afp = automorphism_set(JClass::zero, tau, n);
    ASSERT_EQ(afp.size(), 6u);
    ModMatrix alpha = tau;
    ModMatrix g = ModMatrix::identity(n);
    ASSERT_FALSE(h->conjugate_contains(g, alpha));
    std::vector<ModMatrix> a{ModMatrix::identity(n), -ModMatrix::identity(n)};
    ReductionContext ctx{5, 0, ReductionType::supersingular, afp, {1, 0}};
    DoubleCoset c(h, g, a);
    auto f = fiber(c, ctx);
    ASSERT_EQ(f.members.size(), 3u);
    std::vector<DoubleCoset> expect{DoubleCoset(h, g, a), DoubleCoset(h, g * alpha, a), DoubleCoset(h, g * alpha * alpha, a)};
    for (const auto &x : expect) {
        EXPECT_NE(std::find(f.members.begin(), f.members.end(), x), f.members.end());
    }
    EXPECT_EQ(ram_index(c, ctx), 3);
}

TEST(PrStar, FiberPartitionForSmallLevels)
{
    for (long n : {5L, 7L, 11L, 13L}) {
        std::vector<SubgroupPtr> subgroups{std::make_shared<const SubgroupH>(SubgroupH::borel(n)), pm_diagonal(n)};
        for (const auto &h : subgroups) {
            std::vector<ModMatrix> a{ModMatrix::identity(n), -ModMatrix::identity(n)};
            auto all = enumerate_double_cosets(h, a);
            for (auto type : {ReductionType::ordinary, ReductionType::supersingular}) {
                ReductionContext ctx{n, 1, type, {}, {1, 0}};
                std::map<ReducedStructure, long> groups;
                for (const auto &c : all) {
                    groups[pr_star(c, ctx)] += 1;
                }
                long total = 0;
                // Spot-check the fiber counting entry points on a few cosets.
                for (std::size_t i = 0; i < all.size(); i += std::max<std::size_t>(1, all.size() / 4)) {
                    long e = ram_index(all[i], ctx);
                    EXPECT_EQ(e, groups[pr_star(all[i], ctx)]);
                    EXPECT_GE(e_den(all[i], ctx), e);
                }
                for (const auto &[k, v] : groups) {
                    total += v;
                }
                EXPECT_EQ(total, static_cast<long>(all.size()));
            }
        }
    }
}
