#pragma once

#include <dcycle/error.hpp>
#include <dcycle/format.hpp>
#include <dcycle/log.hpp>
#include <dcycle/segmentation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

inline constexpr std::size_t kIndicatorCount = 8;
inline constexpr std::array<std::string_view, kIndicatorCount> kIndicatorSymbols{
    "V_m", "V_mr", "a_a", "a_d", "p_i", "p_a", "p_d", "p_e"};

/// Pooled corpus indicators; proportions are state-time fractions.
struct IndicatorSet {
    double mean_speed = 0;     // km/h
    double running_speed = 0;  // km/h
    double mean_accel = 0;     // m/s²
    double mean_decel = 0;     // m/s²
    double p_idle = 0;
    double p_accel = 0;
    double p_decel = 0;
    double p_cruise = 0;

    std::array<double, kIndicatorCount> values() const {
        return {mean_speed, running_speed, mean_accel, mean_decel,
                p_idle,     p_accel,       p_decel,    p_cruise};
    }
    friend bool operator==(const IndicatorSet&, const IndicatorSet&) = default;
};

namespace detail {

struct IndicatorAccumulator {
    double speed_sum = 0;
    std::size_t samples = 0;
    std::array<std::size_t, 4> state_counts{};
    double accel_sum = 0;
    double decel_sum = 0;

    void add(std::span<const double> v, std::span<const StateLabel> s, std::span<const double> a) {
        for (std::size_t t = 0; t < v.size(); ++t) {
            speed_sum += v[t];
            ++samples;
            ++state_counts[static_cast<std::size_t>(s[t])];
            if (s[t] == StateLabel::Accel) accel_sum += a[t];
            if (s[t] == StateLabel::Decel) decel_sum += a[t];
        }
    }

    IndicatorSet finish() const {
        if (samples == 0) throw InsufficientDataError("indicators need at least one sample");
        const auto count = [&](StateLabel st) {
            return static_cast<double>(state_counts[static_cast<std::size_t>(st)]);
        };
        const double n = static_cast<double>(samples);
        const double moving = n - count(StateLabel::Idle);

        IndicatorSet out;
        out.mean_speed = speed_sum / n;
        out.running_speed = moving > 0 ? speed_sum / moving : 0.0;
        out.mean_accel = count(StateLabel::Accel) > 0 ? accel_sum / count(StateLabel::Accel) : 0.0;
        out.mean_decel = count(StateLabel::Decel) > 0 ? decel_sum / count(StateLabel::Decel) : 0.0;
        out.p_idle = count(StateLabel::Idle) / n;
        out.p_accel = count(StateLabel::Accel) / n;
        out.p_decel = count(StateLabel::Decel) / n;
        out.p_cruise = count(StateLabel::Cruise) / n;
        return out;
    }
};

}  // namespace detail

/// Indicators over micro-trips, using the states and accelerations recorded
/// at segmentation time.
inline IndicatorSet corpus_indicators(std::span<const MicroTrip> trips) {
    detail::IndicatorAccumulator acc;
    for (const auto& trip : trips) acc.add(trip.speeds, trip.states, trip.accels);
    return acc.finish();
}

/// Indicators over free-standing series, each labelled on its own.
inline IndicatorSet corpus_indicators(std::span<const std::vector<double>> series,
                                      const SegmentationConfig& cfg = {}) {
    detail::IndicatorAccumulator acc;
    for (const auto& v : series) {
        const auto states = label_states(std::span<const double>(v), cfg);
        const auto accels = forward_accel(v);
        acc.add(v, states, accels);
    }
    return acc.finish();
}

struct DifferenceRates {
    std::array<std::optional<double>, kIndicatorCount> rates{};
    double average = 0.0;
    std::size_t defined = 0;
};

inline constexpr double kRateDenominatorFloor = 1e-9;

/// Relative error of each cycle indicator against the source. Indicators
/// whose source value is (near) zero are left undefined and skipped in the
/// average.
inline DifferenceRates difference_rates(const IndicatorSet& cycle, const IndicatorSet& source) {
    const auto c = cycle.values();
    const auto s = source.values();
    DifferenceRates out;
    double sum = 0.0;
    for (std::size_t k = 0; k < kIndicatorCount; ++k) {
        if (std::abs(s[k]) <= kRateDenominatorFloor) {
            log::warn("difference rate for " + std::string(kIndicatorSymbols[k]) +
                      " undefined: source value is zero");
            continue;
        }
        out.rates[k] = std::abs(c[k] - s[k]) / std::abs(s[k]);
        sum += *out.rates[k];
        ++out.defined;
    }
    if (out.defined > 0) out.average = sum / static_cast<double>(out.defined);
    return out;
}

// ------------------------------------------------------------------- SAPD

struct SapdBins {
    double speed_width = 2.0;             // km/h
    std::optional<double> speed_max;      // defaults to ceil(max speed)
    double accel_min = -4.0;              // m/s²
    double accel_max = 4.0;
    double accel_width = 0.2;
};

/// Joint speed/acceleration probability table; mass[i][j] covers speed bin i
/// and acceleration bin j.
struct SapdHistogram {
    std::vector<double> v_edges;
    std::vector<double> a_edges;
    std::vector<std::vector<double>> mass;
};

namespace detail {

inline std::vector<double> make_edges(double lo, double width, std::size_t bins) {
    std::vector<double> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) e[i] = lo + width * static_cast<double>(i);
    return e;
}

inline std::size_t bin_of(double x, double lo, double width, std::size_t bins) {
    const double pos = std::floor((x - lo) / width);
    if (!(pos > 0.0)) return 0;
    return std::min(static_cast<std::size_t>(pos), bins - 1);
}

}  // namespace detail

inline SapdHistogram sapd_histogram(std::span<const std::vector<double>> series,
                                    const SapdBins& bins = {}) {
    double vmax = 0.0;
    std::size_t samples = 0;
    for (const auto& s : series) {
        samples += s.size();
        for (double v : s) vmax = std::max(vmax, v);
    }
    if (samples == 0) throw InsufficientDataError("SAPD histogram needs samples");

    const double v_top = bins.speed_max.value_or(std::ceil(vmax));
    const auto nv = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(v_top / bins.speed_width)));
    const auto na = static_cast<std::size_t>(
        std::llround((bins.accel_max - bins.accel_min) / bins.accel_width));

    SapdHistogram h;
    h.v_edges = detail::make_edges(0.0, bins.speed_width, nv);
    h.a_edges = detail::make_edges(bins.accel_min, bins.accel_width, na);
    h.mass.assign(nv, std::vector<double>(na, 0.0));

    const double unit = 1.0 / static_cast<double>(samples);
    for (const auto& s : series) {
        const auto a = forward_accel(s);
        for (std::size_t t = 0; t < s.size(); ++t) {
            const auto i = detail::bin_of(s[t], 0.0, bins.speed_width, nv);
            const auto j = detail::bin_of(a[t], bins.accel_min, bins.accel_width, na);
            h.mass[i][j] += unit;
        }
    }
    return h;
}

inline SapdHistogram sapd_histogram(const std::vector<double>& series, const SapdBins& bins = {}) {
    return sapd_histogram(std::span<const std::vector<double>>(&series, 1), bins);
}

/// Total-variation distance between two histograms on identical bins.
inline double sapd_distance(const SapdHistogram& h1, const SapdHistogram& h2) {
    if (h1.v_edges != h2.v_edges || h1.a_edges != h2.a_edges)
        throw ValidationError("SAPD histograms have different bin edges");
    double s = 0.0;
    for (std::size_t i = 0; i < h1.mass.size(); ++i)
        for (std::size_t j = 0; j < h1.mass[i].size(); ++j) s += std::abs(h1.mass[i][j] - h2.mass[i][j]);
    return 0.5 * s;
}

inline std::string format_sapd(const SapdHistogram& h) {
    std::string out = "v_lo,v_hi,a_lo,a_hi,mass\n";
    for (std::size_t i = 0; i < h.mass.size(); ++i)
        for (std::size_t j = 0; j < h.mass[i].size(); ++j)
            out += format_number(h.v_edges[i]) + ',' + format_number(h.v_edges[i + 1]) + ',' +
                   format_number(h.a_edges[j]) + ',' + format_number(h.a_edges[j + 1]) + ',' +
                   format_number(h.mass[i][j]) + '\n';
    return out;
}

}  // namespace dcycle
