#pragma once

#include <dcycle/clean.hpp>
#include <dcycle/clustering.hpp>
#include <dcycle/error.hpp>
#include <dcycle/evaluation.hpp>
#include <dcycle/pca.hpp>
#include <dcycle/segmentation.hpp>
#include <dcycle/synthesis.hpp>
#include <dcycle/synthgen.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace dcycle {

using Json = nlohmann::ordered_json;

struct MeanShiftConfig {
    std::optional<double> bandwidth;  // estimated from the scores when unset
    BandwidthRule bandwidth_rule = BandwidthRule::Percentile;
    double bandwidth_quantile = 0.20;
    std::size_t bandwidth_pairs = 1000;
    Kernel kernel = Kernel::Flat;
    double shift_tol_frac = 1e-4;
    std::size_t max_iter = 500;
    double merge_frac = 0.5;
};

struct KMeansConfig {
    std::size_t k = 3;
    std::uint64_t seed = 42;  // recorded for provenance; initialization is deterministic
    std::size_t max_iter = 300;
};

/// Every tunable of the pipeline. Defaults are the standard thresholds.
struct PipelineConfig {
    std::uint64_t seed = 42;
    CleanConfig clean;
    SegmentationConfig segmentation;
    PcaConfig pca;
    MeanShiftConfig mean_shift;
    KMeansConfig kmeans;
    std::size_t abnormal_min_size = 3;
    SynthesisConfig synthesis;
    SapdBins sapd;

    void validate() const {
        auto positive = [](double x, const char* what) {
            if (!(x > 0.0)) throw ConfigError(std::string(what) + " must be positive");
        };
        positive(clean.accel_max, "clean.accel_max");
        positive(-clean.decel_min, "-clean.decel_min");
        positive(clean.idle_eps, "clean.idle_eps");
        positive(static_cast<double>(clean.idle_cap_s), "clean.idle_cap_s");
        positive(static_cast<double>(clean.park_s), "clean.park_s");
        positive(static_cast<double>(clean.burr_max_s), "clean.burr_max_s");
        positive(clean.burr_max_kmh, "clean.burr_max_kmh");
        positive(segmentation.idle_eps, "segmentation.idle_eps");
        positive(segmentation.accel_threshold, "segmentation.accel_threshold");
        positive(static_cast<double>(segmentation.min_duration_s), "segmentation.min_duration_s");
        positive(pca.cum_threshold, "pca.cum_threshold");
        positive(pca.eig_threshold, "pca.eig_threshold");
        if (mean_shift.bandwidth) positive(*mean_shift.bandwidth, "mean_shift.bandwidth");
        if (!(mean_shift.merge_frac > 0.0 && mean_shift.merge_frac < 1.0))
            throw ConfigError("mean_shift.merge_frac must lie in (0, 1)");
        positive(static_cast<double>(kmeans.k), "kmeans.k");
        positive(static_cast<double>(abnormal_min_size), "abnormal_min_size");
        positive(synthesis.target_s, "synthesis.target_s");
        positive(synthesis.window_s, "synthesis.window_s");
        positive(sapd.speed_width, "sapd.speed_width");
        positive(sapd.accel_width, "sapd.accel_width");
        if (!(sapd.accel_max > sapd.accel_min)) throw ConfigError("sapd acceleration range is empty");
    }
};

// ------------------------------------------------------------- enum names

inline std::string to_json_name(BandwidthRule r) {
    return r == BandwidthRule::Percentile ? "percentile" : "mean_fraction";
}
inline std::string to_json_name(Kernel k) { return k == Kernel::Flat ? "flat" : "gaussian"; }

inline BandwidthRule parse_bandwidth_rule(const std::string& s) {
    if (s == "percentile") return BandwidthRule::Percentile;
    if (s == "mean_fraction") return BandwidthRule::MeanFraction;
    throw ConfigError("unknown bandwidth_rule '" + s + "'");
}
inline Kernel parse_kernel(const std::string& s) {
    if (s == "flat") return Kernel::Flat;
    if (s == "gaussian") return Kernel::Gaussian;
    throw ConfigError("unknown kernel '" + s + "'");
}
inline DeviationNorm parse_deviation_norm(const std::string& s) {
    if (s == "relative") return DeviationNorm::Relative;
    if (s == "zscore") return DeviationNorm::ZScore;
    throw ConfigError("unknown deviation_norm '" + s + "'");
}

// ------------------------------------------------------- config <-> JSON

inline Json to_json(const PipelineConfig& c) {
    Json j;
    j["seed"] = c.seed;
    j["clean"] = {{"accel_max", c.clean.accel_max},
                  {"decel_min", c.clean.decel_min},
                  {"idle_eps", c.clean.idle_eps},
                  {"idle_cap_s", c.clean.idle_cap_s},
                  {"park_s", c.clean.park_s},
                  {"burr_max_s", c.clean.burr_max_s},
                  {"burr_max_kmh", c.clean.burr_max_kmh},
                  {"max_passes", c.clean.max_passes}};
    if (c.clean.bbox) {
        j["clean"]["bbox"] = {{"lat_min", c.clean.bbox->lat_min},
                              {"lat_max", c.clean.bbox->lat_max},
                              {"lon_min", c.clean.bbox->lon_min},
                              {"lon_max", c.clean.bbox->lon_max}};
    } else {
        j["clean"]["bbox"] = nullptr;
    }
    j["segmentation"] = {{"idle_eps", c.segmentation.idle_eps},
                         {"accel_threshold", c.segmentation.accel_threshold},
                         {"min_duration_s", c.segmentation.min_duration_s},
                         {"require_all_states", c.segmentation.require_all_states}};
    j["pca"] = {{"cum_threshold", c.pca.cum_threshold},
                {"eig_threshold", c.pca.eig_threshold},
                {"drop_constant", c.pca.drop_constant}};
    const auto& ms = c.mean_shift;
    j["mean_shift"] = {{"bandwidth", ms.bandwidth ? Json(*ms.bandwidth) : Json(nullptr)},
                       {"bandwidth_rule", to_json_name(ms.bandwidth_rule)},
                       {"bandwidth_quantile", ms.bandwidth_quantile},
                       {"bandwidth_pairs", ms.bandwidth_pairs},
                       {"kernel", to_json_name(ms.kernel)},
                       {"shift_tol_frac", ms.shift_tol_frac},
                       {"max_iter", ms.max_iter},
                       {"merge_frac", ms.merge_frac}};
    j["kmeans"] = {{"k", c.kmeans.k}, {"seed", c.kmeans.seed}, {"max_iter", c.kmeans.max_iter}};
    j["abnormal_min_size"] = c.abnormal_min_size;
    j["synthesis"] = {{"target_s", c.synthesis.target_s},
                      {"window_s", c.synthesis.window_s},
                      {"deviation_norm", std::string(to_string(c.synthesis.deviation_norm))},
                      {"idle_eps", c.synthesis.idle_eps}};
    j["sapd"] = {{"speed_width", c.sapd.speed_width},
                 {"speed_max", c.sapd.speed_max ? Json(*c.sapd.speed_max) : Json(nullptr)},
                 {"accel_min", c.sapd.accel_min},
                 {"accel_max", c.sapd.accel_max},
                 {"accel_width", c.sapd.accel_width}};
    return j;
}

namespace detail {

template <class T>
void read(const Json& obj, const char* key, T& out) {
    if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) return;
    try {
        out = obj[key].get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config key '") + key + "': " + e.what());
    }
}

template <class T>
void read(const Json& obj, const char* key, std::optional<T>& out) {
    if (!obj.is_object() || !obj.contains(key)) return;
    if (obj[key].is_null()) {
        out.reset();
        return;
    }
    T value{};
    read(obj, key, value);
    out = value;
}

inline const Json& section(const Json& j, const char* key) {
    static const Json empty = Json::object();
    return j.is_object() && j.contains(key) ? j[key] : empty;
}

}  // namespace detail

/// Missing keys keep their defaults.
inline PipelineConfig config_from_json(const Json& j) {
    using detail::read;
    using detail::section;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");

    PipelineConfig c;
    read(j, "seed", c.seed);
    c.kmeans.seed = c.seed;

    const auto& cl = section(j, "clean");
    read(cl, "accel_max", c.clean.accel_max);
    read(cl, "decel_min", c.clean.decel_min);
    read(cl, "idle_eps", c.clean.idle_eps);
    read(cl, "idle_cap_s", c.clean.idle_cap_s);
    read(cl, "park_s", c.clean.park_s);
    read(cl, "burr_max_s", c.clean.burr_max_s);
    read(cl, "burr_max_kmh", c.clean.burr_max_kmh);
    read(cl, "max_passes", c.clean.max_passes);
    if (cl.contains("bbox") && !cl["bbox"].is_null()) {
        BoundingBox b;
        read(cl["bbox"], "lat_min", b.lat_min);
        read(cl["bbox"], "lat_max", b.lat_max);
        read(cl["bbox"], "lon_min", b.lon_min);
        read(cl["bbox"], "lon_max", b.lon_max);
        c.clean.bbox = b;
    }

    const auto& sg = section(j, "segmentation");
    read(sg, "idle_eps", c.segmentation.idle_eps);
    read(sg, "accel_threshold", c.segmentation.accel_threshold);
    read(sg, "min_duration_s", c.segmentation.min_duration_s);
    read(sg, "require_all_states", c.segmentation.require_all_states);

    const auto& pc = section(j, "pca");
    read(pc, "cum_threshold", c.pca.cum_threshold);
    read(pc, "eig_threshold", c.pca.eig_threshold);
    read(pc, "drop_constant", c.pca.drop_constant);

    const auto& ms = section(j, "mean_shift");
    read(ms, "bandwidth", c.mean_shift.bandwidth);
    std::string name;
    if (ms.contains("bandwidth_rule")) {
        read(ms, "bandwidth_rule", name);
        c.mean_shift.bandwidth_rule = parse_bandwidth_rule(name);
    }
    read(ms, "bandwidth_quantile", c.mean_shift.bandwidth_quantile);
    read(ms, "bandwidth_pairs", c.mean_shift.bandwidth_pairs);
    if (ms.contains("kernel")) {
        read(ms, "kernel", name);
        c.mean_shift.kernel = parse_kernel(name);
    }
    read(ms, "shift_tol_frac", c.mean_shift.shift_tol_frac);
    read(ms, "max_iter", c.mean_shift.max_iter);
    read(ms, "merge_frac", c.mean_shift.merge_frac);

    const auto& km = section(j, "kmeans");
    read(km, "k", c.kmeans.k);
    read(km, "seed", c.kmeans.seed);
    read(km, "max_iter", c.kmeans.max_iter);

    read(j, "abnormal_min_size", c.abnormal_min_size);

    const auto& sy = section(j, "synthesis");
    read(sy, "target_s", c.synthesis.target_s);
    read(sy, "window_s", c.synthesis.window_s);
    if (sy.contains("deviation_norm")) {
        read(sy, "deviation_norm", name);
        c.synthesis.deviation_norm = parse_deviation_norm(name);
    }
    read(sy, "idle_eps", c.synthesis.idle_eps);

    const auto& sa = section(j, "sapd");
    read(sa, "speed_width", c.sapd.speed_width);
    read(sa, "speed_max", c.sapd.speed_max);
    read(sa, "accel_min", c.sapd.accel_min);
    read(sa, "accel_max", c.sapd.accel_max);
    read(sa, "accel_width", c.sapd.accel_width);

    c.validate();
    return c;
}

// --------------------------------------------------- generator <-> JSON

inline Json to_json(const Range& r) { return Json::array({r.lo, r.hi}); }

inline Range range_from_json(const Json& j, const char* what) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ConfigError(std::string(what) + " must be a [lo, hi] pair");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Json to_json(const GenConfig& g) {
    Json j;
    j["seed"] = g.seed;
    j["source_id"] = g.source_id;
    Json regimes = Json::array();
    for (const auto& r : g.regimes) {
        Json jr = {{"name", r.name},
                   {"v_peak_range", to_json(r.v_peak)},
                   {"seg_duration_range", to_json(r.seg_duration)},
                   {"idle_range", to_json(r.idle)},
                   {"count", r.count}};
        if (r.ramp_accel) jr["ramp_accel"] = to_json(*r.ramp_accel);
        regimes.push_back(jr);
    }
    j["regimes"] = regimes;
    j["anomaly_rates"] = {{"accel_spike", g.anomaly_rates.accel_spike},
                          {"gps_zero", g.anomaly_rates.gps_zero},
                          {"time_gap", g.anomaly_rates.time_gap},
                          {"long_park", g.anomaly_rates.long_park}};
    j["ramp_accel"] = to_json(g.ramp_accel);
    j["cruise_jitter"] = g.cruise_jitter;
    j["cruise_wander"] = g.cruise_wander;
    j["spike_kmh"] = to_json(g.spike_kmh);
    j["gap_s"] = to_json(g.gap_s);
    j["park_s"] = to_json(g.park_s);
    return j;
}

inline GenConfig gen_config_from_json(const Json& j) {
    using detail::read;
    if (!j.is_object()) throw ConfigError("generator config must be a JSON object");
    GenConfig g = GenConfig::fixture();
    read(j, "seed", g.seed);
    read(j, "source_id", g.source_id);
    if (j.contains("regimes")) {
        g.regimes.clear();
        for (const auto& r : j["regimes"]) {
            RegimeSpec spec;
            read(r, "name", spec.name);
            spec.v_peak = range_from_json(r.value("v_peak_range", Json()), "v_peak_range");
            spec.seg_duration =
                range_from_json(r.value("seg_duration_range", Json()), "seg_duration_range");
            spec.idle = range_from_json(r.value("idle_range", Json()), "idle_range");
            read(r, "count", spec.count);
            if (r.contains("ramp_accel"))
                spec.ramp_accel = range_from_json(r["ramp_accel"], "ramp_accel");
            g.regimes.push_back(spec);
        }
    }
    const auto& ar = detail::section(j, "anomaly_rates");
    read(ar, "accel_spike", g.anomaly_rates.accel_spike);
    read(ar, "gps_zero", g.anomaly_rates.gps_zero);
    read(ar, "time_gap", g.anomaly_rates.time_gap);
    read(ar, "long_park", g.anomaly_rates.long_park);
    if (j.contains("ramp_accel")) g.ramp_accel = range_from_json(j["ramp_accel"], "ramp_accel");
    read(j, "cruise_jitter", g.cruise_jitter);
    read(j, "cruise_wander", g.cruise_wander);
    if (j.contains("spike_kmh")) g.spike_kmh = range_from_json(j["spike_kmh"], "spike_kmh");
    if (j.contains("gap_s")) g.gap_s = range_from_json(j["gap_s"], "gap_s");
    if (j.contains("park_s")) g.park_s = range_from_json(j["park_s"], "park_s");
    g.validate();
    return g;
}

}  // namespace dcycle
