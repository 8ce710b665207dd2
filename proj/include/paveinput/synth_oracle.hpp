#pragma once
// Synthetic road-paving data with closed-form conditional moments, plus the
// weather-conditioned hauling-duration mixture. Every coefficient below is an
// invented constant chosen so that (a) the reference scenarios order as
// S3 > S2 > S1 in mean productivity and (b) the noise level varies strongly
// with the operation condition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "paveinput/error.hpp"
#include "paveinput/io.hpp"
#include "paveinput/random.hpp"
#include "paveinput/record_table.hpp"
#include "paveinput/schema.hpp"

namespace paveinput::synth {

struct TrueMoments {
    double mu = 0.0;    // m3/hr
    double sigma = 0.0; // m3/hr
};

inline constexpr double kSigmaFloor = 1.0;

inline TrueMoments true_moments(const ScenarioFeatures& x) {
    const double dt = x.temperature - 20.0;
    const double mu = 90.0 - 4.5 * x.paver_age - 8.0 * x.congestion + 7.0 * x.spreader + 2.5 * (x.slump - 4.0) -
                      0.045 * dt * dt - 0.06 * (x.humidity - 70.0) - 1.5 * std::abs(x.slope) -
                      800.0 * std::abs(x.curvature);
    const double sigma =
        std::max(kSigmaFloor, 2.5 + 0.7 * x.paver_age + 2.0 * x.congestion - 1.0 * x.spreader);
    return {mu, sigma};
}

/// Feature ranges of the generator.
struct FeatureRanges {
    double slump_lo = 2.5, slump_hi = 5.0;
    double p_congestion = 0.5;
    double p_spreader = 0.3;
    double air_lo = 3.8, air_hi = 5.0;
    double temp_lo = 2.0, temp_hi = 32.0;
    double humidity_lo = 50.0, humidity_hi = 95.0;
    double slope_lo = -4.0, slope_hi = 4.0;
    double curvature_lo = -0.002, curvature_hi = 0.002;
    double age_lo = 0.0, age_hi = 5.0;
};

inline ScenarioFeatures draw_features(Rng& rng, const FeatureRanges& r = {}) {
    ScenarioFeatures f;
    f.slump = rng.uniform(r.slump_lo, r.slump_hi);
    f.congestion = rng.bernoulli(r.p_congestion) ? 1.0 : 0.0;
    f.spreader = rng.bernoulli(r.p_spreader) ? 1.0 : 0.0;
    f.air_entrainment = rng.uniform(r.air_lo, r.air_hi);
    f.temperature = rng.uniform(r.temp_lo, r.temp_hi);
    f.humidity = rng.uniform(r.humidity_lo, r.humidity_hi);
    f.slope = rng.uniform(r.slope_lo, r.slope_hi);
    f.curvature = rng.uniform(r.curvature_lo, r.curvature_hi);
    f.paver_age = std::round(2.0 * rng.uniform(r.age_lo, r.age_hi)) / 2.0;
    return f;
}

/// Rows in record-schema column order; with `include_truth` the table also
/// carries MuStar and SigmaStar.
inline RecordTable generate_paving_dataset(std::size_t n, std::uint64_t seed, bool include_truth = false) {
    require(n >= 1, "dataset size must be at least 1");
    RecordTable t;
    for (auto name : kRecordColumns) {
        t.column_names.emplace_back(name);
        t.column_kinds.push_back(schema_kind(name));
    }
    if (include_truth) {
        for (auto name : {kMuStarColumn, kSigmaStarColumn}) {
            t.column_names.emplace_back(name);
            t.column_kinds.push_back(ColumnKind::numeric);
        }
    }
    Rng rng(seed);
    t.rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto f = draw_features(rng);
        const auto m = true_moments(f);
        const double y = rng.normal(m.mu, m.sigma);
        std::vector<Cell> row;
        row.reserve(t.column_count());
        row.emplace_back(y);
        for (double v : f.to_array()) row.emplace_back(v);
        if (include_truth) {
            row.emplace_back(m.mu);
            row.emplace_back(m.sigma);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

/// The three reference operation conditions (best, medium, worst).
inline std::vector<std::pair<std::string, ScenarioFeatures>> reference_scenarios() {
    return {
        {"S1", ScenarioFeatures::from_array({4.5, 1, 0, 4.5, 6.5, 84.6, 0.0000, 0.001, 5.0})},
        {"S2", ScenarioFeatures::from_array({4.3, 1, 0, 4.2, 21.8, 86.0, -3.4952, 0.001, 2.5})},
        {"S3", ScenarioFeatures::from_array({3.0, 0, 1, 4.5, 7.7, 60.1, 1.2028, -0.001, 0.0})},
    };
}

// ---------------------------------------------------------------- weather mixture

struct MixtureComponentSpec {
    std::string label;
    double mean = 0.0;   // minutes
    double stddev = 1.0; // minutes
    double weight = 1.0;
};

using MixtureSpec = std::vector<MixtureComponentSpec>;

inline MixtureSpec default_weather_spec() {
    return {{"rainy", 30.0, 2.0, 1.0 / 3.0}, {"windy", 24.0, 2.0, 1.0 / 3.0}, {"sunny", 18.0, 2.0, 1.0 / 3.0}};
}

inline void validate(const MixtureSpec& spec) {
    require(!spec.empty(), "mixture spec has no conditions");
    double w = 0.0;
    for (const auto& c : spec) {
        require(!c.label.empty(), "mixture condition needs a label");
        require(std::isfinite(c.mean), "mixture mean must be finite");
        require(c.stddev > 0.0, "mixture std must be positive");
        require(c.weight > 0.0, "mixture weights must be positive");
        w += c.weight;
    }
    require(std::abs(w - 1.0) <= 1e-9, "mixture weights must sum to 1");
}

struct LabeledSamples {
    std::vector<std::string> conditions;
    std::vector<std::size_t> label; // index into conditions
    std::vector<double> duration;   // minutes

    std::size_t size() const { return duration.size(); }

    std::vector<double> of(std::size_t condition) const {
        std::vector<double> out;
        for (std::size_t i = 0; i < size(); ++i)
            if (label[i] == condition) out.push_back(duration[i]);
        return out;
    }
};

inline LabeledSamples generate_weather_mixture(std::size_t n, std::uint64_t seed,
                                               const MixtureSpec& spec = default_weather_spec()) {
    require(n >= 1, "sample count must be at least 1");
    validate(spec);
    LabeledSamples out;
    for (const auto& c : spec) out.conditions.push_back(c.label);
    Rng rng(seed);
    out.label.reserve(n);
    out.duration.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        std::size_t k = 0;
        double cum = spec[0].weight;
        while (u >= cum && k + 1 < spec.size()) cum += spec[++k].weight;
        out.label.push_back(k);
        out.duration.push_back(rng.normal(spec[k].mean, spec[k].stddev));
    }
    return out;
}

inline std::string samples_to_csv(const LabeledSamples& s) {
    std::string out = "condition,duration\n";
    for (std::size_t i = 0; i < s.size(); ++i) out += s.conditions[s.label[i]] + ',' + format_double(s.duration[i]) + '\n';
    return out;
}

} // namespace paveinput::synth
