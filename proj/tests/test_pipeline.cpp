#include <gtest/gtest.h>

#include <unistd.h>

#include <fstream>

#include <cmexp/config.hpp>

using namespace cmexp;

namespace
{

JobConfig job(const std::string &name)
{
    return load_job(std::filesystem::path(CMEXP_JOBS_DIR) / name);
}

std::vector<Integer> p_of(const JobConfig &j)
{
    return *j.form.j_polynomial;
}

void expect_oracle(const JobConfig &j, const PipelineResult &res)
{
    auto oracle = synthetic_coefficients(p_of(j), j.j_e.coords()[0], j.n);
    ASSERT_EQ(res.coefficients.size(), static_cast<std::size_t>(j.n + 1));
    for (const auto &c : res.coefficients) {
        EXPECT_EQ(c.value.coords()[0], oracle[static_cast<std::size_t>(c.l)]) << "l = " << c.l;
        EXPECT_EQ(c.scaled.coords()[0], oracle[static_cast<std::size_t>(c.l)] * c.divisor);
        EXPECT_TRUE(c.scaled.is_integral());
        EXPECT_LT(c.residual, 1e-10);
    }
}

} // namespace

TEST(SyntheticCoefficients, BinomialShift)
{
    // P(j) = j^2: g(t) = (t + j_E)^2.
    auto c = synthetic_coefficients({Integer(0), Integer(0), Integer(1)}, Rational(-3375), 3);
    ASSERT_EQ(c.size(), 4u);
    EXPECT_EQ(c[0], Rational(Integer(3375) * 3375));
    EXPECT_EQ(c[1], Rational(-6750));
    EXPECT_EQ(c[2], Rational(1));
    EXPECT_EQ(c[3], Rational(0));
}

TEST(Pipeline, SyntheticJobsMatchOracleAtTwoPrecisions)
{
    for (const char *name : {"x0_5_disc_m7.json", "x0_5_disc_m11.json"}) {
        auto j = job(name);
        auto a = run_pipeline(j);
        expect_oracle(j, a);
        j.precision *= 2;
        auto b = run_pipeline(j);
        expect_oracle(j, b);
        for (std::size_t l = 0; l < a.coefficients.size(); ++l) {
            EXPECT_EQ(a.coefficients[l].value, b.coefficients[l].value);
        }
    }
}

TEST(Pipeline, DeterministicJsonAcrossRunsAndJobCounts)
{
    auto j = job("x0_5_disc_m11.json");
    auto dump = [&](unsigned jobs) {
        auto r = run_pipeline(j, jobs);
        return recovered_to_json(j.galois, r.coefficients, r.certificate.symbolic()).dump(2) + certificate_to_json(r.certificate).dump(2) +
               expansions_to_json(r.expansions, r.certificate, j.precision, j.n).dump(2);
    };
    auto first = dump(1);
    EXPECT_EQ(first, dump(1));
    EXPECT_EQ(first, dump(4));
}

TEST(Pipeline, LowPrecisionIsAmbiguousNeverWrong)
{
    auto j = job("x0_5_disc_m7.json");
    auto oracle = synthetic_coefficients(p_of(j), j.j_e.coords()[0], j.n);
    int refused = 0;
    for (long prec : {64L, 96L, 128L, 160L, 192L, 256L, 320L}) {
        j.precision = prec;
        try {
            auto r = run_pipeline(j);
            for (const auto &c : r.coefficients) {
                EXPECT_EQ(c.value.coords()[0], oracle[static_cast<std::size_t>(c.l)]) << prec;
            }
        } catch (const Error &e) {
            EXPECT_TRUE(e.kind() == ErrorKind::ambiguous_rounding || e.kind() == ErrorKind::precision) << e.what();
            ++refused;
        }
    }
    EXPECT_GT(refused, 0);
}

TEST(Pipeline, ZeroFormGivesZeros)
{
    auto j = job("x0_5_disc_m11.json");
    j.form.j_polynomial = std::vector<Integer>{Integer(0)};
    j.n = 0;
    auto r = run_pipeline(j);
    ASSERT_EQ(r.coefficients.size(), 1u);
    EXPECT_EQ(r.coefficients[0].value.coords()[0], 0);
    j.n = 4;
    for (const auto &c : run_pipeline(j).coefficients) {
        EXPECT_EQ(c.value.coords()[0], 0);
    }
}

TEST(Expand, RadiiShrinkUnderDoubledPrecision)
{
    auto j = job("x0_5_disc_m7.json");
    DenominatorCertificate none;
    for (long prec : {256L, 512L}) {
        auto lo = expand_all(j, none, prec)[0];
        auto hi = expand_all(j, none, 2 * prec)[0];
        for (std::size_t l = 0; l < lo.c.size(); ++l) {
            // radius(2p) <= radius(p) * 2^{-p/2}
            EXPECT_LE(std::log2(hi.c[l].radius()), std::log2(lo.c[l].radius()) - static_cast<double>(prec) / 2) << l;
        }
    }
}

TEST(Expand, BallsContainTheExactCoefficients)
{
    auto j = job("x0_5_disc_m11.json");
    auto oracle = synthetic_coefficients(p_of(j), j.j_e.coords()[0], j.n);
    DenominatorCertificate none;
    auto ex = expand_all(j, none, 256)[0];
    for (std::size_t l = 0; l < ex.c.size(); ++l) {
        ComplexBall exact(Real(400, oracle[l]), Real(400, 0L), Real(400, 0L));
        EXPECT_TRUE(ex.c[l].overlaps(exact)) << l;
    }
}

TEST(Json, BallRoundTripIsExact)
{
    auto j = job("x0_5_disc_m7.json");
    DenominatorCertificate none;
    auto ex = expand_all(j, none, 256);
    for (const auto &b : ex[0].c) {
        auto back = io::ball_from_json(io::ball_to_json(b), 256);
        EXPECT_EQ(back.re().str(), b.re().str());
        EXPECT_EQ(back.im().str(), b.im().str());
        EXPECT_GE(back.radius(), b.radius());
        EXPECT_EQ(io::ball_to_json(back), io::ball_to_json(b));
    }
}

TEST(Json, CertificateRoundTripAndMonotonicity)
{
    for (const char *name : {"x0_5_disc_m7.json", "x0_5_disc_m11.json"}) {
        auto c = certify(job(name).context());
        auto j = certificate_to_json(c);
        auto back = certificate_from_json(j);
        EXPECT_EQ(certificate_to_json(back), j);
        for (long n = 0; n <= 50; ++n) {
            EXPECT_EQ(back.C(n), c.C(n));
            EXPECT_EQ(Integer(c.C(n + 1) % c.C(n)), 0) << name << " n = " << n;
        }
    }
}

TEST(Json, CoefficientFileRecoversLikeThePipeline)
{
    auto j = job("x0_5_disc_m7.json");
    auto r = run_pipeline(j);
    auto file = expansions_from_json(expansions_to_json(r.expansions, r.certificate, j.precision, j.n));
    auto rc = recover_file(j.galois, file);
    ASSERT_EQ(rc.size(), r.coefficients.size());
    for (std::size_t l = 0; l < rc.size(); ++l) {
        EXPECT_EQ(rc[l].value, r.coefficients[l].value);
        EXPECT_EQ(rc[l].divisor, r.coefficients[l].divisor);
    }
}

TEST(Config, Validation)
{
    auto base = io::read_file(std::filesystem::path(CMEXP_JOBS_DIR) / "x0_5_disc_m7.json");
    EXPECT_NO_THROW(job_from_json(base).validate());
    auto expect_invalid = [](json j) {
        try {
            job_from_json(j).validate();
            ADD_FAILURE() << j.dump();
        } catch (const Error &e) {
            EXPECT_EQ(e.kind(), ErrorKind::invalid_input) << e.what();
        }
    };
    auto j = base;
    j["H"] = {{"generators", {{1, 0, 0, 1}, {4, 0, 0, 4}}}}; // det misses most of (Z/5)^*
    expect_invalid(j);
    j = base;
    j["N"] = 6;
    expect_invalid(j);
    j = base;
    j["precision"] = 16;
    expect_invalid(j);
    j = base;
    j["schema"] = "cm-expand/0";
    expect_invalid(j);
    j = base;
    j["conjugates"] = {{1, -1, 3}}; // discriminant -11, not -7
    expect_invalid(j);
    j = base;
    j["j_E"] = "1728";
    try {
        job_from_json(j).validate();
        certify(job_from_json(j).context());
        ADD_FAILURE();
    } catch (const Error &e) {
        EXPECT_NE(e.kind(), ErrorKind::internal);
    }
}

TEST(Config, ExplicitCoefficientFileMatchesSyntheticForm)
{
    auto base = io::read_file(std::filesystem::path(CMEXP_JOBS_DIR) / "x0_5_disc_m11.json");
    auto synth = job_from_json(base);
    auto series = detail::synthetic_form(*synth.form.j_polynomial, 700);
    json coeffs = json::array();
    for (std::size_t i = 0; i < series.coeffs.size(); ++i) {
        ASSERT_EQ(series.coeffs[i].get_den(), 1);
        auto c = to_string(series.coeffs[i].get_num());
        // alternate plain integers and Z[zeta_5] coordinate arrays
        coeffs.push_back(i % 2 ? json(c) : json({c, "0", "0", "0"}));
    }
    auto dir = std::filesystem::temp_directory_path() / ("cmexp_form_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "form.json") << json({{"offset", series.offset}, {"coeffs", coeffs}}).dump();
    base["cusp_form"] = {{"file", "form.json"}};
    auto j = job_from_json(base, dir);
    EXPECT_FALSE(j.form.synthetic());
    EXPECT_EQ(j.form.offset, series.offset);
    auto r = run_pipeline(j);
    auto oracle = synthetic_coefficients(*synth.form.j_polynomial, j.j_e.coords()[0], j.n);
    for (const auto &c : r.coefficients) {
        EXPECT_EQ(c.value.coords()[0], oracle[static_cast<std::size_t>(c.l)]) << c.l;
    }
    std::filesystem::remove_all(dir);
}
