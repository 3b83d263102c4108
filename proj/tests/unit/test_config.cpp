#include <catch_amalgamated.hpp>

#include <dcycle/config.hpp>

using namespace dcycle;

TEST_CASE("pipeline defaults are the standard thresholds") {
    const PipelineConfig c;
    CHECK(c.clean.accel_max == 4.5);
    CHECK(c.clean.decel_min == -7.5);
    CHECK(c.clean.idle_eps == 0.5);
    CHECK(c.clean.idle_cap_s == 180);
    CHECK(c.clean.park_s == 300);
    CHECK(c.clean.burr_max_s == 10);
    CHECK(c.clean.burr_max_kmh == 10.0);
    CHECK(c.segmentation.accel_threshold == 0.15);
    CHECK(c.segmentation.min_duration_s == 20);
    CHECK(c.pca.cum_threshold == 0.80);
    CHECK(c.pca.eig_threshold == 1.0);
    CHECK(c.abnormal_min_size == 3);
    CHECK(c.synthesis.target_s == 1500.0);
    CHECK(c.synthesis.window_s == 60.0);
    CHECK(c.kmeans.k == 3);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("pipeline config JSON round trip") {
    PipelineConfig c;
    c.seed = 9;
    c.mean_shift.bandwidth = 1.25;
    c.mean_shift.kernel = Kernel::Gaussian;
    c.kmeans.k = 4;
    c.synthesis.deviation_norm = DeviationNorm::ZScore;
    c.clean.bbox = BoundingBox{25.0, 27.0, 118.0, 120.0};
    const auto j = to_json(c);
    const auto back = config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.mean_shift.bandwidth == 1.25);
    CHECK(back.kmeans.k == 4);
}

TEST_CASE("partial configs fall back to defaults") {
    const auto c = config_from_json(Json::parse(R"({"kmeans": {"k": 5}})"));
    CHECK(c.kmeans.k == 5);
    CHECK(c.clean.park_s == 300);
}

TEST_CASE("bad config values are rejected") {
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"mean_shift": {"kernel": "box"}})")),
                    ConfigError);
    PipelineConfig c;
    c.mean_shift.merge_frac = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("generator config JSON round trip") {
    const auto g = GenConfig::fixture();
    const auto j = to_json(g);
    CHECK(to_json(gen_config_from_json(j)) == j);
    CHECK(gen_config_from_json(j).regimes[1].ramp_accel.has_value());
}
