#include <gtest/gtest.h>

#include <cmath>

#include "paveinput/data_adapter.hpp"
#include "paveinput/input_model.hpp"
#include "paveinput/synth_oracle.hpp"

using namespace paveinput;
using namespace paveinput::synth;

namespace {
ScenarioFeatures scenario(const std::string& name) {
    for (auto& [n, f] : reference_scenarios())
        if (n == name) return f;
    throw std::runtime_error("no scenario " + name);
}
} // namespace

TEST(TrueMoments, ReferenceScenarios) {
    const auto s1 = true_moments(scenario("S1"));
    const auto s2 = true_moments(scenario("S2"));
    const auto s3 = true_moments(scenario("S3"));
    EXPECT_NEAR(s3.mu, 85.68, 0.005);
    EXPECT_NEAR(s1.mu, 50.87, 0.005);
    EXPECT_DOUBLE_EQ(s1.sigma, 8.0);
    EXPECT_GT(s3.mu, s2.mu);
    EXPECT_GT(s2.mu, s1.mu);
}

TEST(TrueMoments, AllReferenceInput) {
    auto m = true_moments(ScenarioFeatures{});
    EXPECT_DOUBLE_EQ(m.mu, 90.0);
    EXPECT_DOUBLE_EQ(m.sigma, 2.5);
}

TEST(TrueMoments, SigmaFloor) {
    ScenarioFeatures f;
    f.spreader = 1.0;
    f.paver_age = 0.0;
    EXPECT_DOUBLE_EQ(true_moments(f).sigma, 1.5);
    // Outside the generator ranges the floor still holds.
    f.paver_age = 0.0;
    f.congestion = 0.0;
    EXPECT_GE(true_moments(f).sigma, kSigmaFloor);
}

TEST(TrueMoments, GridSweepStaysInRange) {
    const FeatureRanges r;
    const int steps = 4;
    auto lin = [&](double lo, double hi, int i) { return lo + (hi - lo) * i / steps; };
    double mu_lo = 1e9, mu_hi = -1e9, sg_lo = 1e9, sg_hi = -1e9;
    for (int a = 0; a <= steps; ++a)
        for (int c = 0; c <= 1; ++c)
            for (int s = 0; s <= 1; ++s)
                for (int t = 0; t <= steps; ++t)
                    for (int h = 0; h <= steps; ++h)
                        for (int sl = 0; sl <= steps; ++sl)
                            for (int cu = 0; cu <= steps; ++cu)
                                for (int age = 0; age <= 10; ++age) {
                                    ScenarioFeatures f;
                                    f.slump = lin(r.slump_lo, r.slump_hi, a);
                                    f.congestion = c;
                                    f.spreader = s;
                                    f.temperature = lin(r.temp_lo, r.temp_hi, t);
                                    f.humidity = lin(r.humidity_lo, r.humidity_hi, h);
                                    f.slope = lin(r.slope_lo, r.slope_hi, sl);
                                    f.curvature = lin(r.curvature_lo, r.curvature_hi, cu);
                                    f.paver_age = 0.5 * age;
                                    auto m = true_moments(f);
                                    mu_lo = std::min(mu_lo, m.mu);
                                    mu_hi = std::max(mu_hi, m.mu);
                                    sg_lo = std::min(sg_lo, m.sigma);
                                    sg_hi = std::max(sg_hi, m.sigma);
                                }
    EXPECT_GE(mu_lo, 30.0);
    EXPECT_LE(mu_hi, 110.0);
    EXPECT_GE(sg_lo, 1.0);
    EXPECT_LE(sg_hi, 9.0);
}

TEST(GeneratePaving, Deterministic) {
    EXPECT_EQ(generate_paving_dataset(300, 4), generate_paving_dataset(300, 4));
    EXPECT_NE(generate_paving_dataset(300, 4), generate_paving_dataset(300, 5));
}

TEST(GeneratePaving, SchemaAndRanges) {
    auto t = generate_paving_dataset(500, 6, true);
    ASSERT_EQ(t.column_count(), 12u);
    for (std::size_t c = 0; c < kRecordColumns.size(); ++c) EXPECT_EQ(t.column_names[c], kRecordColumns[c]);
    EXPECT_EQ(t.column_names[10], "MuStar");
    EXPECT_EQ(t.column_names[11], "SigmaStar");
    const auto age = t.index_of("PaverAge");
    const auto slump = t.index_of("Slump");
    for (const auto& r : t.rows) {
        EXPECT_EQ(std::fmod(*r[age] * 2.0, 1.0), 0.0);
        EXPECT_GE(*r[age], 0.0);
        EXPECT_LE(*r[age], 5.0);
        EXPECT_GE(*r[slump], 2.5);
        EXPECT_LE(*r[slump], 5.0);
    }
    EXPECT_NO_THROW(t.validate());
    EXPECT_EQ(generate_paving_dataset(10, 1).column_count(), 10u);
}

TEST(GeneratePaving, ResidualsMatchTruth) {
    auto t = generate_paving_dataset(4000, 2024, true);
    const auto y = t.index_of("Productivity"), mu = t.index_of("MuStar"), sg = t.index_of("SigmaStar");
    std::vector<double> raw, standardized;
    for (const auto& r : t.rows) {
        raw.push_back(*r[y] - *r[mu]);
        standardized.push_back(raw.back() / *r[sg]);
    }
    EXPECT_LT(std::abs(stats::mean(raw)), 0.3);
    EXPECT_LT(std::abs(stats::mean(standardized)), 0.05);
    const double sd = stats::population_stddev(standardized);
    EXPECT_GE(sd, 0.97);
    EXPECT_LE(sd, 1.03);
}

TEST(GeneratePaving, TruthMatchesFeatures) {
    auto t = generate_paving_dataset(200, 3, true);
    for (const auto& r : t.rows) {
        std::array<double, 9> v{};
        for (std::size_t j = 0; j < 9; ++j) v[j] = *r[t.index_of(kFeatureColumns[j])];
        auto m = true_moments(ScenarioFeatures::from_array(v));
        EXPECT_EQ(m.mu, *r[10]);
        EXPECT_EQ(m.sigma, *r[11]);
    }
}

TEST(GeneratePaving, ReloadsCleanly) {
    auto t = generate_paving_dataset(406, 1);
    auto back = parse_csv(to_csv(t));
    EXPECT_EQ(back, t);
    // No missing cells; fencing may flag tails but drops nothing under flag_only.
    auto r = clean(back, CleanPolicy{});
    EXPECT_EQ(r.table, back);
    for (const auto& c : r.report.columns) {
        EXPECT_EQ(c.missing, 0u);
        EXPECT_EQ(c.imputed, 0u);
    }
}

TEST(WeatherMixture, SingleCondition) {
    auto s = generate_weather_mixture(500, 3, {{"dry", 20.0, 1.0, 1.0}});
    for (auto l : s.label) EXPECT_EQ(l, 0u);
}

TEST(WeatherMixture, InvalidSpec) {
    EXPECT_THROW(generate_weather_mixture(10, 1, {{"a", 1.0, 1.0, 0.6}, {"b", 2.0, 1.0, 0.6}}), DataError);
    EXPECT_THROW(generate_weather_mixture(10, 1, {{"a", 1.0, 0.0, 1.0}}), DataError);
    EXPECT_THROW(generate_weather_mixture(10, 1, {}), DataError);
}

TEST(WeatherMixture, LawOfTotalVariance) {
    auto s = generate_weather_mixture(30000, 17);
    auto pooled = pooled_fit(s.duration);
    EXPECT_NEAR(pooled.variance, 28.0, 0.05 * 28.0);
    for (std::size_t k = 0; k < s.conditions.size(); ++k) {
        auto xs = s.of(k);
        const double sd = pooled_fit(xs).stddev();
        EXPECT_GE(sd, 1.9) << s.conditions[k];
        EXPECT_LE(sd, 2.1) << s.conditions[k];
        // Multinomial counts near one third each.
        EXPECT_NEAR(static_cast<double>(xs.size()) / 30000.0, 1.0 / 3.0, 0.015);
    }
}

TEST(WeatherMixture, Deterministic) {
    auto a = generate_weather_mixture(100, 5);
    auto b = generate_weather_mixture(100, 5);
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.duration, b.duration);
    EXPECT_EQ(samples_to_csv(a), samples_to_csv(b));
}
