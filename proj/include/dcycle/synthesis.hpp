#pragma once

#include <dcycle/clustering.hpp>
#include <dcycle/error.hpp>
#include <dcycle/features.hpp>
#include <dcycle/log.hpp>
#include <dcycle/segmentation.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

struct ClusterProfile {
    std::size_t cluster_id = 0;
    std::array<double, kFeatureCount> mean_features{};
    std::array<double, kFeatureCount> std_features{};  // n-1 divisor, 0 for singletons
    std::size_t size = 0;
    double total_duration = 0.0;
};

/// Per-cluster feature means over non-abnormal clusters, in cluster order.
inline std::vector<ClusterProfile> cluster_profiles(const ClusterAssignment& a,
                                                    std::span<const FeatureVector> features) {
    if (features.size() != a.labels.size())
        throw ValidationError("feature count does not match assignment");

    std::vector<ClusterProfile> out;
    for (std::size_t c = 0; c < a.cluster_count(); ++c) {
        if (c < a.abnormal.size() && a.abnormal[c]) continue;
        const auto members = a.members(c);
        if (members.empty()) continue;

        ClusterProfile p;
        p.cluster_id = c;
        p.size = members.size();
        for (auto i : members) {
            const auto v = features[i].values();
            for (std::size_t k = 0; k < kFeatureCount; ++k) p.mean_features[k] += v[k];
            p.total_duration += features[i].duration;
        }
        for (auto& m : p.mean_features) m /= static_cast<double>(p.size);
        if (p.size > 1) {
            for (auto i : members) {
                const auto v = features[i].values();
                for (std::size_t k = 0; k < kFeatureCount; ++k)
                    p.std_features[k] += (v[k] - p.mean_features[k]) * (v[k] - p.mean_features[k]);
            }
            for (auto& s : p.std_features) s = std::sqrt(s / static_cast<double>(p.size - 1));
        }
        out.push_back(p);
    }
    if (out.empty()) throw SynthesisError("no non-abnormal cluster available for synthesis");
    return out;
}

enum class DeviationNorm {
    Relative,  // |x - mu| / (|mu| + eps)
    ZScore,    // |x - mu| / (sigma + eps)
};

inline std::string_view to_string(DeviationNorm n) {
    return n == DeviationNorm::Relative ? "relative" : "zscore";
}

inline constexpr double kDeviationEps = 1e-9;

/// Summed normalized distance of a segment's features from its cluster mean.
inline double segment_deviation(const FeatureVector& fv, const ClusterProfile& profile,
                                DeviationNorm norm = DeviationNorm::Relative,
                                double eps = kDeviationEps) {
    const auto x = fv.values();
    double d = 0.0;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
        const double scale = norm == DeviationNorm::Relative ? std::abs(profile.mean_features[k])
                                                              : profile.std_features[k];
        d += std::abs(x[k] - profile.mean_features[k]) / (scale + eps);
    }
    return d;
}

struct RankedSegment {
    std::size_t seg_id = 0;
    double deviation = 0.0;
};

struct RankedCluster {
    std::size_t cluster_id = 0;
    std::vector<RankedSegment> segments;  // ascending deviation, ties by seg_id
};

inline std::vector<RankedCluster> rank_segments(const ClusterAssignment& a,
                                                std::span<const FeatureVector> features,
                                                std::span<const ClusterProfile> profiles,
                                                DeviationNorm norm = DeviationNorm::Relative) {
    std::vector<RankedCluster> out;
    for (const auto& p : profiles) {
        RankedCluster rc{p.cluster_id, {}};
        for (auto i : a.members(p.cluster_id))
            rc.segments.push_back({i, segment_deviation(features[i], p, norm)});
        std::sort(rc.segments.begin(), rc.segments.end(),
                  [](const RankedSegment& x, const RankedSegment& y) {
                      if (x.deviation != y.deviation) return x.deviation < y.deviation;
                      return x.seg_id < y.seg_id;
                  });
        out.push_back(std::move(rc));
    }
    return out;
}

struct ProvenanceEntry {
    std::size_t seg_id = 0;
    std::size_t cluster_id = 0;
    double deviation = 0.0;
    std::size_t offset = 0;  // first sample of this segment in the cycle
    std::size_t length = 0;  // samples contributed, closing zero included
};

struct DrivingCycle {
    std::vector<double> speeds;
    std::vector<ProvenanceEntry> provenance;
    std::size_t general_cluster = 0;

    std::size_t duration() const { return speeds.size(); }
};

struct SynthesisConfig {
    double target_s = 1500.0;
    double window_s = 60.0;
    DeviationNorm deviation_norm = DeviationNorm::Relative;
    double idle_eps = 0.5;
};

/// Cluster with the most segments; ties go to the lower cluster id.
inline std::size_t general_cluster(std::span<const RankedCluster> ranked) {
    if (ranked.empty()) throw SynthesisError("no clusters to synthesize from");
    const RankedCluster* best = &ranked.front();
    for (const auto& rc : ranked) {
        if (rc.segments.size() > best->segments.size() ||
            (rc.segments.size() == best->segments.size() && rc.cluster_id < best->cluster_id))
            best = &rc;
    }
    return best->cluster_id;
}

/// Builds the cycle: the best-ranked segment of every non-general cluster,
/// then general-cluster segments in rank order until the duration reaches
/// target - window, skipping any that would pass target + window. Segments
/// are laid out by (cluster id, deviation); a zero sample closes any segment
/// whose last speed is above idle.
inline DrivingCycle assemble_cycle(std::span<const RankedCluster> ranked,
                                   std::span<const MicroTrip> trips,
                                   const SynthesisConfig& cfg = {}) {
    const std::size_t general = general_cluster(ranked);
    const double lo = cfg.target_s - cfg.window_s;
    const double hi = cfg.target_s + cfg.window_s;

    auto contribution = [&](std::size_t seg_id) {
        const auto& trip = trips[seg_id];
        return trip.speeds.size() + (trip.speeds.back() > cfg.idle_eps ? 1 : 0);
    };

    std::vector<ProvenanceEntry> chosen;
    std::size_t total = 0;
    for (const auto& rc : ranked) {
        if (rc.cluster_id == general || rc.segments.empty()) continue;
        const auto& top = rc.segments.front();
        chosen.push_back({top.seg_id, rc.cluster_id, top.deviation, 0, contribution(top.seg_id)});
        total += chosen.back().length;
    }
    if (static_cast<double>(total) > hi)
        log::warn("special-cluster representatives alone exceed the target window (" +
                  std::to_string(total) + " s)");

    for (const auto& rc : ranked) {
        if (rc.cluster_id != general) continue;
        for (const auto& seg : rc.segments) {
            if (static_cast<double>(total) >= lo) break;
            const auto len = contribution(seg.seg_id);
            if (static_cast<double>(total + len) > hi) continue;
            chosen.push_back({seg.seg_id, rc.cluster_id, seg.deviation, 0, len});
            total += len;
        }
    }
    if (static_cast<double>(total) < lo) throw ShortfallError(total, lo);

    std::sort(chosen.begin(), chosen.end(), [](const ProvenanceEntry& x, const ProvenanceEntry& y) {
        if (x.cluster_id != y.cluster_id) return x.cluster_id < y.cluster_id;
        if (x.deviation != y.deviation) return x.deviation < y.deviation;
        return x.seg_id < y.seg_id;
    });

    DrivingCycle cycle;
    cycle.general_cluster = general;
    for (auto& entry : chosen) {
        const auto& trip = trips[entry.seg_id];
        entry.offset = cycle.speeds.size();
        cycle.speeds.insert(cycle.speeds.end(), trip.speeds.begin(), trip.speeds.end());
        if (trip.speeds.back() > cfg.idle_eps) cycle.speeds.push_back(0.0);
        cycle.provenance.push_back(entry);
    }
    return cycle;
}

inline std::string format_cycle(const DrivingCycle& cycle) {
    std::string out = "t_s,v_kmh\n";
    for (std::size_t t = 0; t < cycle.speeds.size(); ++t)
        out += std::to_string(t) + ',' + format_number(cycle.speeds[t]) + '\n';
    return out;
}

}  // namespace dcycle
