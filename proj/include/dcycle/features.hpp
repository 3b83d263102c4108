#pragma once

#include <dcycle/error.hpp>
#include <dcycle/format.hpp>
#include <dcycle/segmentation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

inline constexpr std::size_t kFeatureCount = 12;

/// Column symbols in canonical order; also the feature CSV header.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureSymbols{
    "T", "T_i", "T_a", "T_d", "T_e", "S", "V_max", "V_m", "V_mr", "V_s", "a_a", "a_d"};

/// Kinematic parameters of one micro-trip.
struct FeatureVector {
    double duration = 0;      // T, s
    double idle_time = 0;     // T_i, s
    double accel_time = 0;    // T_a, s
    double decel_time = 0;    // T_d, s
    double cruise_time = 0;   // T_e, s
    double distance = 0;      // S, km
    double max_speed = 0;     // V_max, km/h
    double mean_speed = 0;    // V_m, km/h
    double running_speed = 0; // V_mr, km/h (idle excluded)
    double speed_std = 0;     // V_s, km/h
    double mean_accel = 0;    // a_a, m/s²
    double mean_decel = 0;    // a_d, m/s²

    std::array<double, kFeatureCount> values() const {
        return {duration,   idle_time,     accel_time, decel_time, cruise_time, distance,
                max_speed, mean_speed, running_speed, speed_std,  mean_accel,  mean_decel};
    }

    static FeatureVector from_values(const std::array<double, kFeatureCount>& x) {
        return {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8], x[9], x[10], x[11]};
    }
};

/// Core computation with states and per-sample accelerations supplied.
inline FeatureVector compute_features(std::span<const double> speeds,
                                      std::span<const StateLabel> states,
                                      std::span<const double> accels) {
    if (speeds.empty() || speeds.size() != states.size() || speeds.size() != accels.size())
        throw ValidationError("feature input series must be nonempty and of equal length");

    const auto c = census(states);
    FeatureVector f;
    f.duration = static_cast<double>(speeds.size());
    f.idle_time = static_cast<double>(c[StateLabel::Idle]);
    f.accel_time = static_cast<double>(c[StateLabel::Accel]);
    f.decel_time = static_cast<double>(c[StateLabel::Decel]);
    f.cruise_time = static_cast<double>(c[StateLabel::Cruise]);
    if (f.duration == f.idle_time) throw DegenerateError("segment has no moving samples");

    const double sum = std::accumulate(speeds.begin(), speeds.end(), 0.0);
    f.distance = sum / 3600.0;
    f.max_speed = *std::max_element(speeds.begin(), speeds.end());
    f.mean_speed = sum / f.duration;
    f.running_speed = 3600.0 * f.distance / (f.duration - f.idle_time);

    if (speeds.size() > 1) {
        double ss = 0.0;
        for (double v : speeds) ss += (v - f.mean_speed) * (v - f.mean_speed);
        f.speed_std = std::sqrt(ss / (f.duration - 1.0));
    }

    double acc_sum = 0.0, dec_sum = 0.0;
    for (std::size_t t = 0; t < states.size(); ++t) {
        if (states[t] == StateLabel::Accel) acc_sum += accels[t];
        if (states[t] == StateLabel::Decel) dec_sum += accels[t];
    }
    if (f.accel_time > 0) f.mean_accel = acc_sum / f.accel_time;
    if (f.decel_time > 0) f.mean_decel = dec_sum / f.decel_time;
    return f;
}

inline FeatureVector compute_features(const MicroTrip& trip) {
    return compute_features(trip.speeds, trip.states, trip.accels);
}

inline std::vector<FeatureVector> compute_features(std::span<const MicroTrip> trips) {
    std::vector<FeatureVector> out;
    out.reserve(trips.size());
    for (const auto& trip : trips) out.push_back(compute_features(trip));
    return out;
}

/// n x 12 matrix, rows in segment order.
struct FeatureMatrix {
    std::vector<FeatureVector> rows;

    std::size_t size() const { return rows.size(); }
};

inline FeatureMatrix assemble_matrix(std::vector<FeatureVector> vectors) {
    if (vectors.size() < 2)
        throw InsufficientDataError("feature matrix needs at least 2 segments, got " +
                                    std::to_string(vectors.size()));
    return FeatureMatrix{std::move(vectors)};
}

inline std::string format_feature_table(std::span<const FeatureVector> rows) {
    std::string out = "seg_id";
    for (auto sym : kFeatureSymbols) {
        out += ',';
        out += sym;
    }
    out += '\n';
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out += std::to_string(i);
        for (double x : rows[i].values()) {
            out += ',';
            out += format_number(x);
        }
        out += '\n';
    }
    return out;
}

}  // namespace dcycle
