#pragma once

#include <dcycle/config.hpp>
#include <dcycle/format.hpp>

#include <string>
#include <vector>

// JSON and CSV renderings of stage outputs. All floating values are
// rounded to kSignificantDigits before serialization.

namespace dcycle {

namespace detail {

inline Json num(double x) { return round_significant(x); }

inline Json nums(const auto& xs) {
    Json a = Json::array();
    for (double x : xs) a.push_back(num(x));
    return a;
}

}  // namespace detail

inline Json to_json(const CleanReport& r) {
    return {{"gps_dropped", r.gps_dropped},         {"gaps_split", r.gaps_split},
            {"accel_corrected", r.accel_corrected}, {"burrs_zeroed", r.burrs_zeroed},
            {"idle_truncations", r.idle_truncations}, {"parkings_dropped", r.parkings_dropped}};
}

inline CleanReport clean_report_from_json(const Json& j) {
    CleanReport r;
    r.gps_dropped = j.at("gps_dropped").get<std::size_t>();
    r.gaps_split = j.at("gaps_split").get<std::size_t>();
    r.accel_corrected = j.at("accel_corrected").get<std::size_t>();
    r.burrs_zeroed = j.at("burrs_zeroed").get<std::size_t>();
    r.idle_truncations = j.at("idle_truncations").get<std::size_t>();
    r.parkings_dropped = j.at("parkings_dropped").get<std::size_t>();
    return r;
}

/// Eigen spectrum and the loading matrix, one row per feature and one
/// column per component.
inline Json to_json(const PcaModel& m) {
    using detail::num;
    using detail::nums;
    Json j;
    j["features"] = m.feature_names;
    j["means"] = nums(m.means);
    j["stds"] = nums(m.stds);
    j["eigenvalues"] = nums(m.eigenvalues);
    j["rates"] = nums(m.rates);
    j["cumulative"] = nums(m.cumulative);
    j["k"] = m.selection.k;
    j["k_cumulative"] = m.selection.k_cumulative;
    j["k_eigen"] = m.selection.k_eigen;
    j["cumulative_shortfall"] = m.selection.cumulative_shortfall;
    j["loadings_shape"] = {m.loadings.rows(), m.loadings.cols()};
    j["loadings"] = nums(m.loadings.data());
    return j;
}

inline Json assignment_json(const ClusterAssignment& a, const Json& params) {
    using detail::nums;
    Json j;
    j["method"] = std::string(to_string(a.method));
    j["params"] = params;
    if (a.method == ClusterMethod::MeanShift) j["bandwidth"] = detail::num(a.bandwidth);
    j["cluster_count"] = a.cluster_count();
    j["sizes"] = a.sizes();
    Json abnormal = Json::array();
    for (bool b : a.abnormal) abnormal.push_back(b);
    j["abnormal"] = abnormal;
    Json modes = Json::array();
    for (const auto& m : a.modes) modes.push_back(nums(m));
    j["modes"] = modes;
    return j;
}

inline std::string format_cluster_csv(const ClusterAssignment& a) {
    std::string out = "seg_id,cluster,abnormal\n";
    for (std::size_t i = 0; i < a.labels.size(); ++i)
        out += std::to_string(i) + ',' + std::to_string(a.labels[i]) + ',' +
               (a.abnormal[a.labels[i]] ? "1" : "0") + '\n';
    return out;
}

inline Json to_json(const DrivingCycle& c) {
    Json segs = Json::array();
    for (const auto& p : c.provenance)
        segs.push_back({{"seg_id", p.seg_id},
                        {"cluster", p.cluster_id},
                        {"deviation", detail::num(p.deviation)},
                        {"offset_s", p.offset},
                        {"length_s", p.length}});
    return {{"duration_s", c.duration()}, {"general_cluster", c.general_cluster}, {"segments", segs}};
}

inline Json to_json(const IndicatorSet& s) {
    Json j;
    const auto v = s.values();
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        j[std::string(kIndicatorSymbols[k])] = detail::num(v[k]);
    return j;
}

inline Json to_json(const DifferenceRates& r) {
    Json rates;
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        rates[std::string(kIndicatorSymbols[k])] =
            r.rates[k] ? detail::num(*r.rates[k]) : Json(nullptr);
    return {{"rates", rates}, {"average", detail::num(r.average)}, {"defined", r.defined}};
}

inline Json to_json(const GroundTruth& g) {
    Json segs = Json::array();
    for (const auto& s : g.segments)
        segs.push_back({{"start", s.start},
                        {"duration", s.duration},
                        {"regime", s.regime},
                        {"idle", s.idle},
                        {"cruise_begin", s.cruise_begin},
                        {"cruise_end", s.cruise_end},
                        {"start_t", s.start_t},
                        {"motion_t", s.motion_t}});
    Json anomalies = Json::array();
    for (const auto& a : g.anomalies)
        anomalies.push_back({{"kind", std::string(to_string(a.kind))},
                             {"index", a.index},
                             {"t", a.t},
                             {"magnitude", detail::num(a.magnitude)},
                             {"segment", a.segment}});
    Json counts;
    for (auto k : {AnomalyKind::AccelSpike, AnomalyKind::GpsZero, AnomalyKind::TimeGap,
                   AnomalyKind::LongPark})
        counts[std::string(to_string(k))] = g.count(k);
    return {{"regimes", g.regime_names},
            {"segments", segs},
            {"anomalies", anomalies},
            {"counts", counts},
            {"expected_clean_report", to_json(g.expected_report())}};
}

inline GroundTruth ground_truth_from_json(const Json& j) {
    GroundTruth g;
    g.regime_names = j.at("regimes").get<std::vector<std::string>>();
    for (const auto& s : j.at("segments")) {
        PlantedSegment p;
        p.start = s.at("start").get<std::size_t>();
        p.duration = s.at("duration").get<std::size_t>();
        p.regime = s.at("regime").get<std::size_t>();
        p.idle = s.at("idle").get<std::size_t>();
        p.cruise_begin = s.at("cruise_begin").get<std::size_t>();
        p.cruise_end = s.at("cruise_end").get<std::size_t>();
        p.start_t = s.at("start_t").get<std::int64_t>();
        p.motion_t = s.at("motion_t").get<std::int64_t>();
        g.segments.push_back(p);
    }
    for (const auto& a : j.at("anomalies")) {
        Anomaly an;
        const auto kind = a.at("kind").get<std::string>();
        if (kind == "accel_spike") an.kind = AnomalyKind::AccelSpike;
        else if (kind == "gps_zero") an.kind = AnomalyKind::GpsZero;
        else if (kind == "time_gap") an.kind = AnomalyKind::TimeGap;
        else if (kind == "long_park") an.kind = AnomalyKind::LongPark;
        else throw ValidationError("unknown anomaly kind '" + kind + "'");
        an.index = a.at("index").get<std::size_t>();
        an.t = a.at("t").get<std::int64_t>();
        an.magnitude = a.at("magnitude").get<double>();
        an.segment = a.at("segment").get<std::size_t>();
        g.anomalies.push_back(an);
    }
    return g;
}

}  // namespace dcycle
