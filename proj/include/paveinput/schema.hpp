#pragma once
// Road-paving operation record schema: productivity plus the nine
// operation-condition attributes, in the canonical column order.

#include <array>
#include <cmath>
#include <string>
#include <string_view>

#include "paveinput/error.hpp"

namespace paveinput {

inline constexpr std::string_view kTargetColumn = "Productivity";

inline constexpr std::array<std::string_view, 9> kFeatureColumns = {
    "Slump", "Congestion", "Spreader", "AirEntrainment", "Temperature",
    "Humidity", "Slope", "Curvature", "PaverAge"};

inline constexpr std::array<std::string_view, 10> kRecordColumns = {
    "Productivity", "Slump", "Congestion", "Spreader", "AirEntrainment",
    "Temperature", "Humidity", "Slope", "Curvature", "PaverAge"};

// Ground-truth columns that synthetic data may carry; never used as features.
inline constexpr std::string_view kMuStarColumn = "MuStar";
inline constexpr std::string_view kSigmaStarColumn = "SigmaStar";

inline bool is_indicator_column(std::string_view name) {
    return name == "Congestion" || name == "Spreader";
}

inline bool is_truth_column(std::string_view name) {
    return name == kMuStarColumn || name == kSigmaStarColumn;
}

/// One operation condition. Units: slump cm, air entrainment %, temperature
/// degC, humidity %, slope %, curvature 1/m, paver age years.
struct ScenarioFeatures {
    double slump = 4.0;
    double congestion = 0.0;
    double spreader = 0.0;
    double air_entrainment = 4.5;
    double temperature = 20.0;
    double humidity = 70.0;
    double slope = 0.0;
    double curvature = 0.0;
    double paver_age = 0.0;

    /// Values in kFeatureColumns order.
    std::array<double, 9> to_array() const {
        return {slump,    congestion, spreader,  air_entrainment, temperature,
                humidity, slope,      curvature, paver_age};
    }

    static ScenarioFeatures from_array(const std::array<double, 9>& v) {
        ScenarioFeatures f;
        f.slump = v[0];
        f.congestion = v[1];
        f.spreader = v[2];
        f.air_entrainment = v[3];
        f.temperature = v[4];
        f.humidity = v[5];
        f.slope = v[6];
        f.curvature = v[7];
        f.paver_age = v[8];
        f.validate();
        return f;
    }

    void validate() const {
        for (double v : to_array()) require(std::isfinite(v), "scenario feature is not finite");
        require(congestion == 0.0 || congestion == 1.0, "congestion must be 0 or 1");
        require(spreader == 0.0 || spreader == 1.0, "spreader must be 0 or 1");
        require(humidity >= 0.0 && humidity <= 100.0, "humidity must lie in [0, 100]");
        require(air_entrainment >= 0.0, "air entrainment must be non-negative");
        require(paver_age >= 0.0, "paver age must be non-negative");
    }
};

} // namespace paveinput
