#pragma once

#include <dcycle/clean.hpp>
#include <dcycle/error.hpp>
#include <dcycle/rng.hpp>
#include <dcycle/trace.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

struct Range {
    double lo = 0.0;
    double hi = 0.0;

    double mid() const { return 0.5 * (lo + hi); }
    double width() const { return hi - lo; }
    bool valid() const { return lo <= hi; }
};

/// A family of micro-trips with shared speed and duration statistics.
/// `seg_duration` covers the moving part; idle time is drawn separately.
struct RegimeSpec {
    std::string name;
    Range v_peak;        // km/h
    Range seg_duration;  // s
    Range idle;          // s
    std::size_t count = 1;
    std::optional<Range> ramp_accel;  // m/s², overrides GenConfig::ramp_accel
};

struct AnomalyRates {
    double accel_spike = 0.0;
    double gps_zero = 0.0;
    double time_gap = 0.0;
    double long_park = 0.0;

    bool any() const { return accel_spike > 0 || gps_zero > 0 || time_gap > 0 || long_park > 0; }
};

struct GenConfig {
    std::vector<RegimeSpec> regimes;
    AnomalyRates anomaly_rates;
    std::uint64_t seed = 42;
    std::string source_id = "synthetic";

    Range ramp_accel{0.8, 2.5};      // m/s²
    double cruise_jitter = 0.3;      // max km/h change per cruise sample
    double cruise_wander = 2.0;      // max km/h excursion from the peak
    Range spike_kmh{20.0, 26.0};     // single-sample jump
    Range gap_s{2.0, 30.0};          // timestamp step at an injected gap
    Range park_s{320.0, 600.0};      // injected parked run length
    double lat0 = 26.07;
    double lon0 = 119.30;

    /// Acceptance baseline: three regimes of 50 micro-trips, 5 % anomaly
    /// rates. Speed rises from urban to highway, while ramp rate and idle
    /// share follow a different order (urban trips idle long and pull away
    /// gently, suburban ones idle briefly and accelerate hard), so the
    /// regimes are separated along more than one direction. Every segment
    /// lasts about 500 s, so three of them make a 1500 s cycle.
    static GenConfig fixture() {
        GenConfig cfg;
        cfg.seed = 42;
        cfg.source_id = "fixture";
        cfg.regimes = {
            {"urban", {14.0, 26.0}, {430.0, 450.0}, {40.0, 60.0}, 50, Range{0.5, 0.7}},
            {"suburban", {40.0, 50.0}, {480.0, 500.0}, {5.0, 15.0}, 50, Range{1.4, 1.8}},
            {"highway", {72.0, 88.0}, {475.0, 495.0}, {25.0, 35.0}, 50, Range{0.9, 1.2}},
        };
        cfg.anomaly_rates = {0.05, 0.05, 0.05, 0.05};
        return cfg;
    }

    static std::size_t ramp_length(double v_peak, double accel) {
        return static_cast<std::size_t>(std::ceil(v_peak / kKmhPerMs / accel));
    }

    void validate() const {
        if (regimes.empty()) throw ConfigError("generator needs at least one regime");
        auto prob = [](double p, std::string_view what) {
            if (!(p >= 0.0 && p <= 1.0))
                throw ConfigError(std::string(what) + " rate must lie in [0, 1]");
        };
        prob(anomaly_rates.accel_spike, "accel_spike");
        prob(anomaly_rates.gps_zero, "gps_zero");
        prob(anomaly_rates.time_gap, "time_gap");
        prob(anomaly_rates.long_park, "long_park");
        auto check_ramp = [](const Range& a) {
            if (!a.valid() || !(a.lo > 0.15) || a.hi > 3.0)
                throw ConfigError("ramp_accel must lie within (0.15, 3] m/s²");
        };
        check_ramp(ramp_accel);
        if (!(spike_kmh.lo > 16.2) || spike_kmh.hi >= 27.0 || !spike_kmh.valid())
            throw ConfigError("spike_kmh must lie within (16.2, 27) km/h");
        if (!(gap_s.lo >= 2.0) || !gap_s.valid()) throw ConfigError("gap_s must be >= 2");
        if (!(park_s.lo > 300.0) || !park_s.valid()) throw ConfigError("park_s must exceed 300");

        for (const auto& r : regimes) {
            if (!r.v_peak.valid() || !r.seg_duration.valid() || !r.idle.valid())
                throw ConfigError("regime '" + r.name + "' has an empty range");
            if (r.count == 0) throw ConfigError("regime '" + r.name + "' needs count >= 1");
            if (r.idle.lo < 1.0) throw ConfigError("regime '" + r.name + "' idle must be >= 1 s");
            if (r.v_peak.lo < 2.0 * cruise_wander + 2.0)
                throw ConfigError("regime '" + r.name + "' peak speed too low for cruise wander");
            const Range& acc = r.ramp_accel.value_or(ramp_accel);
            check_ramp(acc);
            const auto up = ramp_length(r.v_peak.hi, acc.lo);
            const auto down = ramp_length(r.v_peak.hi + cruise_wander, acc.lo);
            if (r.seg_duration.lo < static_cast<double>(up + down + 2))
                throw ConfigError("regime '" + r.name + "': peak " + std::to_string(r.v_peak.hi) +
                                  " km/h unreachable within " + std::to_string(r.seg_duration.lo) +
                                  " s");
        }
    }
};

struct PlantedSegment {
    std::size_t start = 0;         // record index of the opening idle sample
    std::size_t duration = 0;      // idle + moving samples
    std::size_t regime = 0;
    std::size_t idle = 0;          // opening idle length
    std::size_t cruise_begin = 0;  // record index range of the cruise phase
    std::size_t cruise_end = 0;
    std::int64_t start_t = 0;
    std::int64_t motion_t = 0;     // timestamp of the first moving sample

    std::size_t motion_start() const { return start + idle; }
};

enum class AnomalyKind { AccelSpike, GpsZero, TimeGap, LongPark };

inline std::string_view to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::AccelSpike: return "accel_spike";
        case AnomalyKind::GpsZero: return "gps_zero";
        case AnomalyKind::TimeGap: return "time_gap";
        case AnomalyKind::LongPark: return "long_park";
    }
    return "?";
}

struct Anomaly {
    AnomalyKind kind = AnomalyKind::AccelSpike;
    std::size_t index = 0;  // record index in the emitted trace
    std::int64_t t = 0;
    double magnitude = 0.0;  // km/h jump, gap seconds or parked seconds
    std::size_t segment = 0;
};

struct GroundTruth {
    std::vector<std::string> regime_names;
    std::vector<PlantedSegment> segments;
    std::vector<Anomaly> anomalies;

    std::size_t count(AnomalyKind k) const {
        return static_cast<std::size_t>(std::count_if(
            anomalies.begin(), anomalies.end(), [&](const Anomaly& a) { return a.kind == k; }));
    }

    /// Cleaning counts implied by the injection log. Each dropped GPS record
    /// also opens one timestamp gap.
    CleanReport expected_report() const {
        CleanReport r;
        r.gps_dropped = count(AnomalyKind::GpsZero);
        r.gaps_split = count(AnomalyKind::TimeGap) + count(AnomalyKind::GpsZero);
        r.accel_corrected = count(AnomalyKind::AccelSpike);
        r.parkings_dropped = count(AnomalyKind::LongPark);
        return r;
    }

    /// Regime of the planted segment whose motion starts at `t`.
    std::optional<std::size_t> regime_at_motion(std::int64_t t) const {
        for (const auto& s : segments)
            if (s.motion_t == t) return s.regime;
        return std::nullopt;
    }
};

struct Corpus {
    SpeedTrace trace;
    GroundTruth truth;
};

namespace detail {

inline double clamped_normal(Rng& rng, const Range& r) {
    if (r.width() == 0.0) return r.lo;
    return std::clamp(rng.normal(r.mid(), r.width() / 6.0), r.lo, r.hi);
}

inline std::size_t clamped_count(Rng& rng, const Range& r) {
    return static_cast<std::size_t>(std::llround(clamped_normal(rng, r)));
}

}  // namespace detail

/// Anomaly-free corpus: idle, linear ramp up, jittered cruise, linear ramp
/// down, repeated for every planted segment in shuffled regime order, then a
/// closing idle run.
inline Corpus generate_clean_corpus(const GenConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);

    std::vector<std::size_t> order;
    for (std::size_t r = 0; r < cfg.regimes.size(); ++r)
        order.insert(order.end(), cfg.regimes[r].count, r);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    Corpus corpus;
    corpus.trace.source_id = cfg.source_id;
    for (const auto& r : cfg.regimes) corpus.truth.regime_names.push_back(r.name);

    auto& recs = corpus.trace.records;
    double odometer = 0.0;  // km, drives a synthetic longitude drift
    auto emit = [&](double v) {
        odometer += v / 3600.0;
        const auto t = static_cast<std::int64_t>(recs.size());
        recs.push_back({t, v, cfg.lat0, cfg.lon0 + 0.01 * odometer});
    };
    auto emit_idle = [&](std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) emit(0.0);
    };

    for (auto r : order) {
        const auto& spec = cfg.regimes[r];
        const auto idle = std::max<std::size_t>(1, detail::clamped_count(rng, spec.idle));
        const double v_peak = detail::clamped_normal(rng, spec.v_peak);
        const auto moving = detail::clamped_count(rng, spec.seg_duration);
        const Range& acc = spec.ramp_accel.value_or(cfg.ramp_accel);
        const double a_up = detail::clamped_normal(rng, acc);
        const double a_down = detail::clamped_normal(rng, acc);
        const auto n_up = GenConfig::ramp_length(v_peak, a_up);
        const auto n_down = GenConfig::ramp_length(v_peak + cfg.cruise_wander, a_down);
        const auto cruise = moving - n_up - (n_down - 1);

        PlantedSegment seg;
        seg.start = recs.size();
        seg.start_t = static_cast<std::int64_t>(seg.start);
        seg.regime = r;
        seg.idle = idle;
        seg.duration = idle + moving;
        seg.motion_t = static_cast<std::int64_t>(seg.start + idle);

        emit_idle(idle);
        for (std::size_t k = 1; k <= n_up; ++k)
            emit(v_peak * static_cast<double>(k) / static_cast<double>(n_up));

        seg.cruise_begin = recs.size();
        double v = v_peak;
        for (std::size_t k = 0; k < cruise; ++k) {
            v = std::clamp(v + rng.uniform(-cfg.cruise_jitter, cfg.cruise_jitter),
                           v_peak - cfg.cruise_wander, v_peak + cfg.cruise_wander);
            emit(v);
        }
        seg.cruise_end = recs.size();

        const double v_end = v;
        for (std::size_t k = 1; k < n_down; ++k)
            emit(v_end * static_cast<double>(n_down - k) / static_cast<double>(n_down));

        corpus.truth.segments.push_back(seg);
    }
    const auto& last = cfg.regimes[order.empty() ? 0 : order.back()];
    emit_idle(std::max<std::size_t>(1, detail::clamped_count(rng, last.idle)));
    return corpus;
}

/// Plants the cleaning anomalies into an anomaly-free corpus. Per segment:
/// a speed spike inside the cruise phase, and at most one structural anomaly
/// (GPS zero stamp, timestamp gap or parked run, tried in that order) at the
/// second sample of the opening idle run. That spot keeps the previous trip's
/// closing idle onset and costs the next trip at most two idle seconds, so
/// the cleaned segments still look like their regime. Every placement is
/// logged.
inline Corpus inject_anomalies(const Corpus& clean, const GenConfig& cfg) {
    cfg.validate();
    if (!cfg.anomaly_rates.any()) return clean;
    Rng rng(cfg.seed ^ 0x9E3779B97F4A7C15ULL);

    struct Plan {
        std::optional<double> spike;
        std::size_t spike_at = 0;
        std::optional<AnomalyKind> structural;
        double structural_size = 0.0;
        std::size_t structural_at = 0;
    };
    const auto& segs = clean.truth.segments;
    std::vector<Plan> plans(segs.size());
    const auto& rates = cfg.anomaly_rates;

    for (std::size_t i = 0; i < segs.size(); ++i) {
        const auto& s = segs[i];
        auto& p = plans[i];
        const bool spike = rng.bernoulli(rates.accel_spike);
        const double jump = rng.uniform(cfg.spike_kmh.lo, cfg.spike_kmh.hi);
        const double u = rng.uniform();
        const bool gps = rng.bernoulli(rates.gps_zero);
        const bool gap = rng.bernoulli(rates.time_gap);
        const double gap_len = std::round(rng.uniform(cfg.gap_s.lo, cfg.gap_s.hi));
        const bool park = rng.bernoulli(rates.long_park);
        const double park_len = std::round(rng.uniform(cfg.park_s.lo, cfg.park_s.hi));

        const std::size_t cruise_len = s.cruise_end - s.cruise_begin;
        if (spike && cruise_len >= 3) {
            p.spike = jump;
            p.spike_at = s.cruise_begin + 1 +
                         std::min(cruise_len - 3, static_cast<std::size_t>(u * static_cast<double>(cruise_len - 2)));
        }
        if (s.idle >= 3) {
            p.structural_at = s.start + 1;
            if (gps) {
                p.structural = AnomalyKind::GpsZero;
            } else if (gap) {
                p.structural = AnomalyKind::TimeGap;
                p.structural_size = gap_len;
            } else if (park) {
                p.structural = AnomalyKind::LongPark;
                p.structural_size = park_len;
            }
        }
    }

    // Events keyed by clean record index.
    std::vector<std::optional<std::size_t>> plan_at(clean.trace.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        if (plans[i].spike) plan_at[plans[i].spike_at] = i;
        if (plans[i].structural) plan_at[plans[i].structural_at] = i;
    }

    Corpus out;
    out.trace.source_id = clean.trace.source_id;
    out.truth.regime_names = clean.truth.regime_names;

    const auto& src = clean.trace.records;
    std::vector<std::size_t> out_index(src.size());
    std::int64_t t_shift = 0;  // extra seconds so far
    for (std::size_t i = 0; i < src.size(); ++i) {
        Record rec = src[i];
        if (plan_at[i]) {
            const auto seg = *plan_at[i];
            const auto& p = plans[seg];
            if (p.structural && p.structural_at == i) {
                const auto kind = *p.structural;
                if (kind == AnomalyKind::TimeGap)
                    t_shift += static_cast<std::int64_t>(p.structural_size) - 1;
                out.truth.anomalies.push_back(
                    {kind, out.trace.size(), rec.t + t_shift, p.structural_size, seg});
                if (kind == AnomalyKind::GpsZero) {
                    rec.lat = 0.0;
                    rec.lon = 0.0;
                } else if (kind == AnomalyKind::LongPark) {
                    for (std::size_t k = 0; k < static_cast<std::size_t>(p.structural_size); ++k) {
                        Record parked = rec;
                        parked.v = 0.0;
                        parked.t = rec.t + t_shift;
                        out.trace.records.push_back(parked);
                        ++t_shift;
                    }
                }
            }
            if (p.spike && p.spike_at == i) {
                rec.v += *p.spike;
                out.truth.anomalies.push_back(
                    {AnomalyKind::AccelSpike, out.trace.size(), rec.t + t_shift, *p.spike, seg});
            }
        }
        rec.t += t_shift;
        out_index[i] = out.trace.size();
        out.trace.records.push_back(rec);
    }

    for (const auto& c : segs) {
        PlantedSegment s = c;
        const auto motion = out_index[c.motion_start()];
        s.start = out_index[c.start];
        s.idle = motion - s.start;
        s.duration = out_index[c.start + c.duration - 1] + 1 - s.start;
        s.cruise_begin = out_index[c.cruise_begin];
        s.cruise_end = out_index[c.cruise_end - 1] + 1;
        s.start_t = out.trace.records[s.start].t;
        s.motion_t = out.trace.records[motion].t;
        out.truth.segments.push_back(s);
    }
    return out;
}

inline Corpus generate_corpus(const GenConfig& cfg) {
    auto clean = generate_clean_corpus(cfg);
    if (!cfg.anomaly_rates.any()) return clean;
    return inject_anomalies(clean, cfg);
}

}  // namespace dcycle
