#pragma once

#include <dcycle/clean.hpp>
#include <dcycle/clustering.hpp>
#include <dcycle/config.hpp>
#include <dcycle/evaluation.hpp>
#include <dcycle/features.hpp>
#include <dcycle/pca.hpp>
#include <dcycle/report.hpp>
#include <dcycle/segmentation.hpp>
#include <dcycle/synthesis.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dcycle {

enum class Stage { Clean, Segment, Features, Pca, Cluster, Build, Evaluate };

inline constexpr std::array<std::string_view, 7> kStageNames{
    "clean", "segment", "features", "pca", "cluster", "build", "evaluate"};

inline std::string_view to_string(Stage s) { return kStageNames[static_cast<std::size_t>(s)]; }

inline std::optional<Stage> parse_stage(std::string_view name) {
    for (std::size_t i = 0; i < kStageNames.size(); ++i)
        if (kStageNames[i] == name) return static_cast<Stage>(i);
    return std::nullopt;
}

struct MethodSelection {
    bool mean_shift = true;
    bool kmeans = true;

    static std::optional<MethodSelection> parse(std::string_view s) {
        if (s == "mean-shift") return MethodSelection{true, false};
        if (s == "kmeans") return MethodSelection{false, true};
        if (s == "both") return MethodSelection{true, true};
        return std::nullopt;
    }
};

/// A stage failed; `stage()` names it.
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& what)
        : Error("stage '" + std::string(to_string(stage)) + "' failed: " + what), stage_(stage) {}

    Stage stage() const noexcept { return stage_; }

private:
    Stage stage_;
};

struct MethodOutputs {
    ClusterAssignment assignment;
    std::optional<DrivingCycle> cycle;
    std::optional<IndicatorSet> indicators;
    std::optional<DifferenceRates> rates;
    std::optional<SapdHistogram> sapd;
    std::optional<double> sapd_distance;
};

struct PipelineState {
    CleanResult clean;
    std::vector<MicroTrip> trips;
    std::vector<FeatureVector> features;
    std::optional<PcaFit> pca;
    std::optional<MethodOutputs> mean_shift;
    std::optional<MethodOutputs> kmeans;
    std::optional<IndicatorSet> source_indicators;
    std::optional<SapdHistogram> source_sapd;
};

/// Writes artifact files under a root directory, creating parents.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const { return root_; }

    void write(const std::filesystem::path& rel, std::string_view content) const {
        const auto path = root_ / rel;
        std::filesystem::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("write failed for " + path.string());
    }

    void write_json(const std::filesystem::path& rel, const Json& j) const {
        write(rel, j.dump(2) + "\n");
    }

private:
    std::filesystem::path root_;
};

namespace detail {

inline std::string file_safe(std::string s) {
    for (auto& ch : s)
        if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' || ch == '.'))
            ch = '_';
    return s;
}

inline Json mean_shift_params_json(const PipelineConfig& c, double h) {
    const auto& ms = c.mean_shift;
    return {{"bandwidth", num(h)},
            {"bandwidth_source", ms.bandwidth ? "config" : "estimated"},
            {"bandwidth_rule", to_json_name(ms.bandwidth_rule)},
            {"bandwidth_quantile", num(ms.bandwidth_quantile)},
            {"kernel", to_json_name(ms.kernel)},
            {"shift_tol_frac", num(ms.shift_tol_frac)},
            {"max_iter", ms.max_iter},
            {"merge_frac", num(ms.merge_frac)},
            {"seed", c.seed},
            {"abnormal_min_size", c.abnormal_min_size}};
}

inline Json kmeans_params_json(const PipelineConfig& c) {
    return {{"k", c.kmeans.k},
            {"seed", c.kmeans.seed},
            {"max_iter", c.kmeans.max_iter},
            {"abnormal_min_size", c.abnormal_min_size}};
}

template <class F>
auto run_stage(Stage s, F&& body) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(s, e.what());
    }
}

}  // namespace detail

/// Runs the stages up to and including `last`. When `writer` is given,
/// each stage writes its artifacts as soon as it completes, so a failure
/// leaves the earlier stages' files in place.
inline PipelineState run_pipeline(std::span<const SpeedTrace> inputs, const PipelineConfig& cfg,
                                  MethodSelection methods, Stage last = Stage::Evaluate,
                                  const ArtifactWriter* writer = nullptr) {
    PipelineState st;
    const auto reached = [&](Stage s) { return static_cast<int>(last) >= static_cast<int>(s); };

    if (writer) writer->write_json("config.json", to_json(cfg));

    detail::run_stage(Stage::Clean, [&] {
        st.clean = clean_traces(inputs, cfg.clean);
        if (writer) {
            writer->write_json("clean/clean_report.json", to_json(st.clean.report));
            for (const auto& t : st.clean.traces)
                writer->write("clean/" + detail::file_safe(t.source_id) + ".csv", format_trace(t));
        }
        return 0;
    });
    if (!reached(Stage::Segment)) return st;

    detail::run_stage(Stage::Segment, [&] {
        st.trips = segment_traces(st.clean.traces, cfg.segmentation);
        if (writer) writer->write("segments.csv", format_manifest(st.trips));
        return 0;
    });
    if (!reached(Stage::Features)) return st;

    detail::run_stage(Stage::Features, [&] {
        st.features = compute_features(st.trips);
        if (writer) writer->write("features.csv", format_feature_table(st.features));
        return 0;
    });
    if (!reached(Stage::Pca)) return st;

    detail::run_stage(Stage::Pca, [&] {
        st.pca = fit_pca(assemble_matrix(st.features), cfg.pca);
        if (writer) writer->write_json("pca.json", to_json(st.pca->model));
        return 0;
    });
    if (!reached(Stage::Cluster)) return st;

    detail::run_stage(Stage::Cluster, [&] {
        const Matrix& scores = st.pca->scores;
        if (methods.mean_shift) {
            const double h = cfg.mean_shift.bandwidth.value_or(estimate_bandwidth(
                scores, cfg.seed,
                {cfg.mean_shift.bandwidth_rule, cfg.mean_shift.bandwidth_quantile,
                 cfg.mean_shift.bandwidth_pairs}));
            MeanShiftParams p;
            p.bandwidth = h;
            p.kernel = cfg.mean_shift.kernel;
            p.shift_tol_frac = cfg.mean_shift.shift_tol_frac;
            p.max_iter = cfg.mean_shift.max_iter;
            p.merge_frac = cfg.mean_shift.merge_frac;
            st.mean_shift.emplace();
            st.mean_shift->assignment = flag_abnormal(mean_shift(scores, p), cfg.abnormal_min_size);
            if (writer) {
                writer->write("clusters/mean_shift.csv", format_cluster_csv(st.mean_shift->assignment));
                writer->write_json("clusters/mean_shift.json",
                                   assignment_json(st.mean_shift->assignment,
                                                   detail::mean_shift_params_json(cfg, h)));
            }
        }
        if (methods.kmeans) {
            auto km = kmeans(scores, cfg.kmeans.k, cfg.kmeans.max_iter);
            st.kmeans.emplace();
            st.kmeans->assignment = flag_abnormal(std::move(km.assignment), cfg.abnormal_min_size);
            if (writer) {
                writer->write("clusters/kmeans.csv", format_cluster_csv(st.kmeans->assignment));
                writer->write_json("clusters/kmeans.json",
                                   assignment_json(st.kmeans->assignment, detail::kmeans_params_json(cfg)));
            }
        }
        return 0;
    });
    if (!reached(Stage::Build)) return st;

    detail::run_stage(Stage::Build, [&] {
        auto build = [&](MethodOutputs& m, std::string_view name) {
            const auto profiles = cluster_profiles(m.assignment, st.features);
            const auto ranked = rank_segments(m.assignment, st.features, profiles,
                                              cfg.synthesis.deviation_norm);
            m.cycle = assemble_cycle(ranked, st.trips, cfg.synthesis);
            if (writer) {
                const std::string base = "cycles/" + std::string(name);
                writer->write(base + ".csv", format_cycle(*m.cycle));
                writer->write_json(base + ".json", to_json(*m.cycle));
            }
        };
        if (st.mean_shift) build(*st.mean_shift, "mean_shift");
        if (st.kmeans) build(*st.kmeans, "kmeans");
        return 0;
    });
    if (!reached(Stage::Evaluate)) return st;

    detail::run_stage(Stage::Evaluate, [&] {
        st.source_indicators = corpus_indicators(st.trips);

        std::vector<std::vector<double>> source_series;
        for (const auto& t : st.trips) source_series.push_back(t.speeds);

        SapdBins bins = cfg.sapd;
        if (!bins.speed_max) {
            double vmax = 0.0;
            for (const auto& s : source_series)
                for (double v : s) vmax = std::max(vmax, v);
            for (const auto* m : {&st.mean_shift, &st.kmeans})
                if (*m && (*m)->cycle)
                    for (double v : (*m)->cycle->speeds) vmax = std::max(vmax, v);
            bins.speed_max = std::ceil(vmax);
        }
        st.source_sapd = sapd_histogram(source_series, bins);

        Json report;
        report["indicators"]["source"] = to_json(*st.source_indicators);
        auto evaluate = [&](MethodOutputs& m, const std::string& name) {
            const std::vector<std::vector<double>> series{m.cycle->speeds};
            m.indicators = corpus_indicators(series, cfg.segmentation);
            m.rates = difference_rates(*m.indicators, *st.source_indicators);
            m.sapd = sapd_histogram(series, bins);
            m.sapd_distance = sapd_distance(*m.sapd, *st.source_sapd);
            report["indicators"][name + "_cycle"] = to_json(*m.indicators);
            report["difference_rates"][name] = to_json(*m.rates);
            report["average_difference_rate"][name] = detail::num(m.rates->average);
            report["sapd_distance"][name] = detail::num(*m.sapd_distance);
            report["cycle_duration_s"][name] = m.cycle->duration();
            if (writer) writer->write("sapd/" + name + ".csv", format_sapd(*m.sapd));
        };
        if (st.mean_shift) evaluate(*st.mean_shift, "mean_shift");
        if (st.kmeans) evaluate(*st.kmeans, "kmeans");
        report["source_segments"] = st.trips.size();
        if (writer) {
            writer->write("sapd/source.csv", format_sapd(*st.source_sapd));
            writer->write_json("evaluation.json", report);
        }
        return 0;
    });
    return st;
}

}  // namespace dcycle
