#pragma once
// Gaussian simulation input models: derivation from a trained network,
// sampling, confidence intervals, coverage validation and the pooled-fit
// baseline.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "paveinput/data_adapter.hpp"
#include "paveinput/error.hpp"
#include "paveinput/hetnet.hpp"
#include "paveinput/io.hpp"
#include "paveinput/random.hpp"
#include "paveinput/schema.hpp"
#include "paveinput/stats.hpp"

namespace paveinput {

struct GaussianInputModel {
    double mean = 0.0;
    double variance = 0.0;

    double stddev() const { return std::sqrt(variance); }

    void validate() const {
        require(std::isfinite(mean) && std::isfinite(variance), "input model moments must be finite");
        require(variance >= 0.0, "input model variance must be non-negative");
    }

    friend bool operator==(const GaussianInputModel&, const GaussianInputModel&) = default;
};

/// Maps a normalized network output back to physical units:
/// mean = mu * std_y + mean_y, variance = exp(s) * std_y^2.
inline GaussianInputModel to_physical(const hetnet::Prediction& p, const NormalizationStats& stats) {
    if (!std::isfinite(p.mu) || !std::isfinite(p.log_var))
        throw NumericalError("network produced a non-finite output");
    GaussianInputModel m{stats.denormalize_target(p.mu),
                         std::exp(p.log_var) * stats.target_stddev * stats.target_stddev};
    if (!std::isfinite(m.mean) || !std::isfinite(m.variance))
        throw NumericalError("derived input model is not finite");
    return m;
}

/// Input model for a raw (physical-unit) feature vector.
inline GaussianInputModel derive(const hetnet::NetworkParams& params, std::span<const double> raw_features,
                                 const NormalizationStats& stats) {
    const auto z = stats.normalize_features(raw_features);
    return to_physical(hetnet::forward(params, z), stats);
}

inline GaussianInputModel derive(const hetnet::NetworkParams& params, const ScenarioFeatures& features,
                                 const NormalizationStats& stats) {
    features.validate();
    require(stats.has_record_schema(), "model was not trained on the nine-attribute record schema");
    const auto raw = features.to_array();
    return derive(params, std::span<const double>(raw), stats);
}

inline std::vector<double> sample(const GaussianInputModel& model, std::uint64_t seed, std::size_t n) {
    model.validate();
    require(n >= 1, "sample count must be at least 1");
    Rng rng(seed);
    const double sd = model.stddev();
    std::vector<double> out(n);
    for (auto& v : out) v = rng.normal(model.mean, sd);
    return out;
}

/// Two-sided standard-normal quantile for the supported interval levels.
inline double z_value(double level) {
    constexpr std::array<std::pair<double, double>, 3> table{{{0.90, 1.6449}, {0.95, 1.9600}, {0.99, 2.5758}}};
    for (auto [lvl, z] : table)
        if (std::abs(level - lvl) < 1e-12) return z;
    throw DataError("unsupported interval level " + format_double(level) + " (supported: 0.90, 0.95, 0.99)");
}

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

inline Interval confidence_interval(const GaussianInputModel& model, double level) {
    model.validate();
    const double half = z_value(level) * model.stddev();
    return {model.mean - half, model.mean + half};
}

struct CoverageRow {
    std::size_t row_id = 0;
    double observed = 0.0;
    double mean = 0.0;
    double sigma = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    bool covered = false;
};

struct CoverageReport {
    double level = 0.95;
    std::vector<CoverageRow> rows;
    double coverage_fraction = 0.0;
};

/// Builds the report from per-row models; `observed` in physical units.
inline CoverageReport coverage_from_models(std::span<const GaussianInputModel> models,
                                           std::span<const double> observed, double level,
                                           std::span<const std::size_t> row_ids = {}) {
    require(!models.empty(), "coverage needs a non-empty test set");
    require(models.size() == observed.size(), "models and observations differ in length");
    z_value(level);
    CoverageReport rep;
    rep.level = level;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto ci = confidence_interval(models[i], level);
        CoverageRow r;
        r.row_id = row_ids.empty() ? i : row_ids[i];
        r.observed = observed[i];
        r.mean = models[i].mean;
        r.sigma = models[i].stddev();
        r.lower = ci.lower;
        r.upper = ci.upper;
        r.covered = ci.lower <= r.observed && r.observed <= ci.upper;
        hits += r.covered ? 1 : 0;
        rep.rows.push_back(r);
    }
    rep.coverage_fraction = static_cast<double>(hits) / static_cast<double>(rep.rows.size());
    return rep;
}

/// Predicted models for every row of an (already normalized) dataset.
inline std::vector<GaussianInputModel> predict_all(const hetnet::NetworkParams& params, const NormalizationStats& stats,
                                                   const Dataset& ds) {
    hetnet::Workspace ws(params);
    std::vector<GaussianInputModel> out;
    out.reserve(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(to_physical(ws.forward(params, ds.features.row(i)), stats));
    return out;
}

inline CoverageReport coverage(const hetnet::NetworkParams& params, const NormalizationStats& stats,
                               const Dataset& test, double level) {
    require(test.size() >= 1, "coverage needs a non-empty test set");
    const auto models = predict_all(params, stats, test);
    std::vector<double> observed(test.size());
    for (std::size_t i = 0; i < test.size(); ++i) observed[i] = stats.denormalize_target(test.target[i]);
    return coverage_from_models(models, observed, level, test.row_ids);
}

inline std::string coverage_to_csv(const CoverageReport& rep) {
    std::string out = "observed,mu,sigma,lo,hi,covered\n";
    for (const auto& r : rep.rows) {
        out += format_double(r.observed) + ',' + format_double(r.mean) + ',' + format_double(r.sigma) + ',' +
               format_double(r.lower) + ',' + format_double(r.upper) + ',' + (r.covered ? "1" : "0") + '\n';
    }
    return out;
}

/// Population mean and variance.
inline GaussianInputModel pooled_fit(std::span<const double> samples) {
    require(!samples.empty(), "pooled fit needs at least one sample");
    return {stats::mean(samples), stats::population_variance(samples)};
}

struct WeightedModel {
    std::string label;
    double weight = 0.0;
    GaussianInputModel model;
};

struct MixtureComparison {
    GaussianInputModel pooled;
    std::vector<WeightedModel> components;
    std::vector<double> variance_ratios; // pooled variance / component variance
};

/// Moments of the mixture by the law of total variance.
inline MixtureComparison compare_pooled_vs_conditioned(const std::vector<WeightedModel>& components) {
    require(!components.empty(), "mixture needs at least one component");
    double wsum = 0.0;
    for (const auto& c : components) {
        require(c.weight > 0.0, "mixture weights must be positive");
        c.model.validate();
        wsum += c.weight;
    }
    require(std::abs(wsum - 1.0) <= 1e-9, "mixture weights must sum to 1");

    MixtureComparison mc;
    mc.components = components;
    double mean = 0.0;
    for (const auto& c : components) mean += c.weight * c.model.mean;
    double within = 0.0, between = 0.0;
    for (const auto& c : components) {
        within += c.weight * c.model.variance;
        between += c.weight * (c.model.mean - mean) * (c.model.mean - mean);
    }
    mc.pooled = {mean, within + between};
    for (const auto& c : components)
        mc.variance_ratios.push_back(c.model.variance > 0.0 ? mc.pooled.variance / c.model.variance
                                                            : std::numeric_limits<double>::infinity());
    return mc;
}

inline std::string mixture_to_csv(const MixtureComparison& mc) {
    std::string out = "component,weight,mean,variance,pooled_variance_ratio\n";
    out += "pooled,1," + format_double(mc.pooled.mean) + ',' + format_double(mc.pooled.variance) + ",1\n";
    for (std::size_t k = 0; k < mc.components.size(); ++k) {
        const auto& c = mc.components[k];
        out += (c.label.empty() ? "component" + std::to_string(k + 1) : c.label) + ',' + format_double(c.weight) +
               ',' + format_double(c.model.mean) + ',' + format_double(c.model.variance) + ',' +
               format_double(mc.variance_ratios[k]) + '\n';
    }
    return out;
}

} // namespace paveinput
