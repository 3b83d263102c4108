#pragma once

#include <dcycle/trace.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

enum class StateLabel : std::uint8_t { Idle, Accel, Decel, Cruise };

inline constexpr std::array<StateLabel, 4> kAllStates{StateLabel::Idle, StateLabel::Accel,
                                                      StateLabel::Decel, StateLabel::Cruise};

inline std::string_view to_string(StateLabel s) {
    switch (s) {
        case StateLabel::Idle: return "idle";
        case StateLabel::Accel: return "accel";
        case StateLabel::Decel: return "decel";
        case StateLabel::Cruise: return "cruise";
    }
    return "?";
}

struct SegmentationConfig {
    double idle_eps = 0.5;          // km/h
    double accel_threshold = 0.15;  // m/s²
    std::size_t min_duration_s = 20;
    bool require_all_states = true;
};

/// Forward-difference acceleration in m/s² for a 1 Hz series. The last
/// sample repeats the final difference; a single sample gets 0.
inline std::vector<double> forward_accel(std::span<const double> v) {
    std::vector<double> a(v.size(), 0.0);
    if (v.size() < 2) return a;
    for (std::size_t t = 0; t + 1 < v.size(); ++t) a[t] = (v[t + 1] - v[t]) / kKmhPerMs;
    a.back() = a[v.size() - 2];
    return a;
}

inline StateLabel classify(double v, double a, const SegmentationConfig& cfg) {
    if (v <= cfg.idle_eps) return StateLabel::Idle;
    if (a > cfg.accel_threshold) return StateLabel::Accel;
    if (a < -cfg.accel_threshold) return StateLabel::Decel;
    return StateLabel::Cruise;
}

inline std::vector<StateLabel> label_states(std::span<const double> speeds,
                                            const SegmentationConfig& cfg = {}) {
    const auto a = forward_accel(speeds);
    std::vector<StateLabel> labels(speeds.size());
    for (std::size_t t = 0; t < speeds.size(); ++t) labels[t] = classify(speeds[t], a[t], cfg);
    return labels;
}

inline std::vector<StateLabel> label_states(const SpeedTrace& trace,
                                            const SegmentationConfig& cfg = {}) {
    const auto v = trace.speeds();
    return label_states(std::span<const double>(v), cfg);
}

/// An idle-to-idle slice of a cleaned trace. `accels` are taken from the
/// full trace, so the last sample's value looks ahead to the next idle onset.
struct MicroTrip {
    std::string trace_id;
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    std::int64_t start_t = 0;
    std::vector<double> speeds;
    std::vector<StateLabel> states;
    std::vector<double> accels;

    std::size_t duration() const { return end - start; }
};

struct StateCensus {
    std::array<std::size_t, 4> counts{};

    std::size_t operator[](StateLabel s) const { return counts[static_cast<std::size_t>(s)]; }
    bool has_all() const {
        for (auto c : counts)
            if (c == 0) return false;
        return true;
    }
};

inline StateCensus census(std::span<const StateLabel> states) {
    StateCensus c;
    for (auto s : states) ++c.counts[static_cast<std::size_t>(s)];
    return c;
}

/// Cuts a trace into micro-trips. Each starts at an idle onset and ends just
/// before the next idle onset; short segments, segments missing a driving
/// state (unless disabled) and the unterminated tail are dropped.
inline std::vector<MicroTrip> divide_microtrips(const SpeedTrace& trace,
                                                std::span<const StateLabel> labels,
                                                const SegmentationConfig& cfg = {}) {
    const auto speeds = trace.speeds();
    const auto accels = forward_accel(speeds);

    std::vector<std::size_t> onsets;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (labels[t] == StateLabel::Idle && (t == 0 || labels[t - 1] != StateLabel::Idle))
            onsets.push_back(t);
    }

    std::vector<MicroTrip> trips;
    for (std::size_t k = 0; k + 1 < onsets.size(); ++k) {
        const std::size_t b = onsets[k];
        const std::size_t e = onsets[k + 1];
        if (e - b < cfg.min_duration_s) continue;
        const std::span<const StateLabel> seg = labels.subspan(b, e - b);
        if (cfg.require_all_states && !census(seg).has_all()) continue;

        MicroTrip trip;
        trip.trace_id = trace.source_id;
        trip.start = b;
        trip.end = e;
        trip.start_t = trace.records[b].t;
        trip.speeds.assign(speeds.begin() + static_cast<std::ptrdiff_t>(b),
                           speeds.begin() + static_cast<std::ptrdiff_t>(e));
        trip.states.assign(seg.begin(), seg.end());
        trip.accels.assign(accels.begin() + static_cast<std::ptrdiff_t>(b),
                           accels.begin() + static_cast<std::ptrdiff_t>(e));
        trips.push_back(std::move(trip));
    }
    return trips;
}

inline std::vector<MicroTrip> segment_traces(std::span<const SpeedTrace> traces,
                                             const SegmentationConfig& cfg = {}) {
    std::vector<MicroTrip> all;
    for (const auto& trace : traces) {
        const auto labels = label_states(trace, cfg);
        for (auto& trip : divide_microtrips(trace, labels, cfg)) all.push_back(std::move(trip));
    }
    return all;
}

/// CSV `trace_id,seg_id,start_s,duration_s`; seg_id is the index in `trips`.
inline std::string format_manifest(std::span<const MicroTrip> trips) {
    std::string out = "trace_id,seg_id,start_s,duration_s\n";
    for (std::size_t i = 0; i < trips.size(); ++i) {
        out += trips[i].trace_id + ',' + std::to_string(i) + ',' +
               std::to_string(trips[i].start_t) + ',' + std::to_string(trips[i].duration()) + '\n';
    }
    return out;
}

}  // namespace dcycle
