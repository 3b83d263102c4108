#pragma once

#include <dcycle/error.hpp>
#include <dcycle/trace.hpp>

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dcycle {

struct BoundingBox {
    double lat_min = -90.0;
    double lat_max = 90.0;
    double lon_min = -180.0;
    double lon_max = 180.0;

    bool contains(double lat, double lon) const {
        return lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max;
    }
};

struct CleanConfig {
    double accel_max = 4.5;   // m/s²
    double decel_min = -7.5;  // m/s²
    double idle_eps = 0.5;    // km/h; v <= idle_eps counts as stationary
    std::size_t idle_cap_s = 180;
    std::size_t park_s = 300;
    std::size_t burr_max_s = 10;
    double burr_max_kmh = 10.0;
    std::size_t max_passes = 10;
    std::optional<BoundingBox> bbox;  // optional study-area filter
};

struct CleanReport {
    std::size_t gps_dropped = 0;
    std::size_t gaps_split = 0;
    std::size_t accel_corrected = 0;
    std::size_t burrs_zeroed = 0;
    std::size_t idle_truncations = 0;
    std::size_t parkings_dropped = 0;

    CleanReport& operator+=(const CleanReport& o) {
        gps_dropped += o.gps_dropped;
        gaps_split += o.gaps_split;
        accel_corrected += o.accel_corrected;
        burrs_zeroed += o.burrs_zeroed;
        idle_truncations += o.idle_truncations;
        parkings_dropped += o.parkings_dropped;
        return *this;
    }
    friend bool operator==(const CleanReport&, const CleanReport&) = default;
};

/// Half-open index range [begin, end).
struct Run {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t length() const { return end - begin; }
};

/// Maximal runs of samples satisfying `pred`.
template <class Pred>
std::vector<Run> find_runs(const std::vector<Record>& records, Pred pred) {
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < records.size()) {
        if (!pred(records[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < records.size() && pred(records[j])) ++j;
        runs.push_back({i, j});
        i = j;
    }
    return runs;
}

inline std::vector<Run> idle_runs(const SpeedTrace& trace, double idle_eps) {
    return find_runs(trace.records, [&](const Record& r) { return r.v <= idle_eps; });
}

inline std::pair<SpeedTrace, std::size_t> drop_gps_invalid(SpeedTrace trace,
                                                          const CleanConfig& cfg = {}) {
    const auto before = trace.records.size();
    std::erase_if(trace.records, [&](const Record& r) {
        if (!r.has_coords()) return false;
        if (*r.lat == 0.0 && *r.lon == 0.0) return true;
        return cfg.bbox && !cfg.bbox->contains(*r.lat, *r.lon);
    });
    return {std::move(trace), before - trace.records.size()};
}

/// Splits wherever consecutive timestamps differ by more than 1 s.
inline std::vector<SpeedTrace> split_on_gaps(const SpeedTrace& trace) {
    std::vector<SpeedTrace> out;
    if (trace.empty()) return out;
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
        if (trace.records[i].t <= trace.records[i - 1].t)
            throw ValidationError("timestamps not strictly increasing at record " +
                                  std::to_string(i) + " of " + trace.source_id);
    }
    out.push_back({trace.source_id, {trace.records.front()}});
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
        if (trace.records[i].t - trace.records[i - 1].t > 1)
            out.push_back({trace.source_id, {}});
        out.back().records.push_back(trace.records[i]);
    }
    return out;
}

/// Deletes every stationary run longer than `park_s` and splits there.
inline std::pair<std::vector<SpeedTrace>, std::size_t> drop_long_parking(
    const SpeedTrace& trace, const CleanConfig& cfg = {}) {
    std::vector<SpeedTrace> out;
    std::size_t dropped = 0;
    std::size_t cursor = 0;
    auto emit = [&](std::size_t begin, std::size_t end) {
        if (end <= begin) return;
        SpeedTrace piece{trace.source_id, {}};
        piece.records.assign(trace.records.begin() + static_cast<std::ptrdiff_t>(begin),
                             trace.records.begin() + static_cast<std::ptrdiff_t>(end));
        out.push_back(std::move(piece));
    };
    for (const auto& run : idle_runs(trace, cfg.idle_eps)) {
        if (run.length() <= cfg.park_s) continue;
        emit(cursor, run.begin);
        cursor = run.end;
        ++dropped;
    }
    emit(cursor, trace.records.size());
    return {std::move(out), dropped};
}

/// Keeps only the final `idle_cap_s` samples of every longer stationary run.
/// Later records are re-stamped so the trace stays contiguous at 1 Hz.
inline std::pair<SpeedTrace, std::size_t> truncate_long_idle(const SpeedTrace& trace,
                                                            const CleanConfig& cfg = {}) {
    std::vector<bool> removed(trace.records.size(), false);
    std::size_t truncations = 0;
    for (const auto& run : idle_runs(trace, cfg.idle_eps)) {
        if (run.length() <= cfg.idle_cap_s) continue;
        std::fill(removed.begin() + static_cast<std::ptrdiff_t>(run.begin),
                  removed.begin() + static_cast<std::ptrdiff_t>(run.end - cfg.idle_cap_s), true);
        ++truncations;
    }
    if (truncations == 0) return {trace, 0};

    SpeedTrace out{trace.source_id, {}};
    for (std::size_t i = 0; i < trace.records.size(); ++i) {
        if (removed[i]) continue;
        Record r = trace.records[i];
        if (!out.records.empty()) r.t = out.records.back().t + 1;
        out.records.push_back(r);
    }
    return {std::move(out), truncations};
}

/// Zeroes short, slow moving runs enclosed by stationary samples.
inline std::pair<SpeedTrace, std::size_t> zero_burrs(SpeedTrace trace,
                                                    const CleanConfig& cfg = {}) {
    auto& recs = trace.records;
    std::size_t zeroed = 0;
    const auto moving = find_runs(recs, [&](const Record& r) { return r.v > cfg.idle_eps; });
    for (const auto& run : moving) {
        if (run.begin == 0 || run.end == recs.size()) continue;
        if (run.length() >= cfg.burr_max_s) continue;
        const bool slow = std::all_of(recs.begin() + static_cast<std::ptrdiff_t>(run.begin),
                                      recs.begin() + static_cast<std::ptrdiff_t>(run.end),
                                      [&](const Record& r) { return r.v < cfg.burr_max_kmh; });
        if (!slow) continue;
        for (std::size_t i = run.begin; i < run.end; ++i) recs[i].v = 0.0;
        ++zeroed;
    }
    return {std::move(trace), zeroed};
}

namespace detail {

// Clamped values land this far (km/h) inside the feasible band so the
// resulting difference passes an exact comparison.
inline constexpr double kClampMargin = 1e-9;

struct AccelBand {
    double up;    // max km/h increase per sample
    double down;  // most negative km/h change per sample

    explicit AccelBand(const CleanConfig& cfg)
        : up(cfg.accel_max * kKmhPerMs), down(cfg.decel_min * kKmhPerMs) {}

    bool violates(double dv) const { return dv > up || dv < down; }

    double clamp_after(double prev, double v) const {
        const double lo = std::max(0.0, prev + down + kClampMargin);
        const double hi = prev + up - kClampMargin;
        return std::clamp(v, lo, hi);
    }

    double clamp_before(double next, double v) const {
        const double lo = std::max(0.0, next - up + kClampMargin);
        const double hi = next - down - kClampMargin;
        return std::clamp(v, lo, hi);
    }
};

}  // namespace detail

/// Replaces acceleration outliers by the mean of their neighbours, sweeping
/// until no violation remains or `max_passes` is reached. End samples, which
/// lack one neighbour, are clamped instead. If the pass cap is hit, a final
/// forward clamp enforces the band on every pair. Returns the number of
/// distinct samples modified.
inline std::pair<SpeedTrace, std::size_t> correct_accel_outliers(SpeedTrace trace,
                                                                const CleanConfig& cfg = {}) {
    auto& recs = trace.records;
    const std::size_t n = recs.size();
    if (n < 2) return {std::move(trace), 0};

    const detail::AccelBand band(cfg);
    std::vector<bool> touched(n, false);
    auto dv = [&](std::size_t t) { return recs[t].v - recs[t - 1].v; };

    bool clean = false;
    for (std::size_t pass = 0; pass < cfg.max_passes && !clean; ++pass) {
        clean = true;
        // A violating first pair whose second sample agrees with its own
        // successor points at the first sample as the outlier.
        if (band.violates(dv(1)) && (n == 2 || !band.violates(dv(2)))) {
            recs[0].v = band.clamp_before(recs[1].v, recs[0].v);
            touched[0] = true;
            clean = false;
        }
        for (std::size_t t = 1; t < n; ++t) {
            if (!band.violates(dv(t))) continue;
            if (t + 1 < n)
                recs[t].v = (recs[t + 1].v + recs[t - 1].v) / 2.0;
            else
                recs[t].v = band.clamp_after(recs[t - 1].v, recs[t].v);
            touched[t] = true;
            clean = false;
        }
    }

    for (std::size_t t = 1; t < n; ++t) {
        if (!band.violates(dv(t))) continue;
        recs[t].v = band.clamp_after(recs[t - 1].v, recs[t].v);
        touched[t] = true;
    }
    return {std::move(trace), static_cast<std::size_t>(std::count(touched.begin(), touched.end(), true))};
}

struct CleanResult {
    std::vector<SpeedTrace> traces;
    CleanReport report;
};

/// Full cleaning of one raw trace: GPS filter, gap split, then parking,
/// idle, burr and acceleration passes repeated until none of them changes
/// anything (so the whole operation is idempotent). Output pieces are named
/// `<source_id>_<k>`.
inline CleanResult clean_trace(const SpeedTrace& raw, const CleanConfig& cfg = {}) {
    constexpr std::size_t kMaxRounds = 8;

    CleanResult result;
    auto [filtered, gps_dropped] = drop_gps_invalid(raw, cfg);
    result.report.gps_dropped = gps_dropped;

    auto work = split_on_gaps(filtered);
    if (!work.empty()) result.report.gaps_split = work.size() - 1;

    for (std::size_t round = 0; round < kMaxRounds; ++round) {
        CleanReport delta;
        std::vector<SpeedTrace> next;
        for (const auto& piece : work) {
            auto [parts, parked] = drop_long_parking(piece, cfg);
            delta.parkings_dropped += parked;
            for (auto& part : parts) {
                auto [truncated, cut] = truncate_long_idle(part, cfg);
                auto [deburred, burrs] = zero_burrs(std::move(truncated), cfg);
                auto [corrected, fixed] = correct_accel_outliers(std::move(deburred), cfg);
                delta.idle_truncations += cut;
                delta.burrs_zeroed += burrs;
                delta.accel_corrected += fixed;
                next.push_back(std::move(corrected));
            }
        }
        work = std::move(next);
        result.report += delta;
        if (delta == CleanReport{}) break;
    }

    for (std::size_t k = 0; k < work.size(); ++k) {
        work[k].source_id = raw.source_id + "_" + std::to_string(k);
        result.traces.push_back(std::move(work[k]));
    }
    return result;
}

inline CleanResult clean_traces(std::span<const SpeedTrace> raws, const CleanConfig& cfg = {}) {
    CleanResult all;
    for (const auto& raw : raws) {
        auto one = clean_trace(raw, cfg);
        all.report += one.report;
        for (auto& t : one.traces) all.traces.push_back(std::move(t));
    }
    return all;
}

}  // namespace dcycle
