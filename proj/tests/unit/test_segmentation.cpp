#include <catch_amalgamated.hpp>

#include <dcycle/segmentation.hpp>
#include <dcycle/synthgen.hpp>

using namespace dcycle;

namespace {

// idle, linear ramp up, flat cruise, linear ramp down
std::vector<double> trapezoid(std::size_t idle, double peak, std::size_t up, std::size_t cruise,
                              std::size_t down) {
    std::vector<double> v(idle, 0.0);
    for (std::size_t k = 1; k <= up; ++k) v.push_back(peak * k / up);
    v.insert(v.end(), cruise, peak);
    for (std::size_t k = 1; k < down; ++k) v.push_back(peak * (down - k) / down);
    return v;
}

}  // namespace

TEST_CASE("classify follows the idle and threshold rules") {
    const SegmentationConfig cfg;
    // 20 -> 21.8 km/h is 0.5 m/s²
    const auto a = forward_accel(std::vector<double>{20.0, 21.8});
    CHECK(classify(20.0, a[0], cfg) == StateLabel::Accel);
    CHECK(classify(0.0, 3.0, cfg) == StateLabel::Idle);
    CHECK(classify(0.5, 3.0, cfg) == StateLabel::Idle);

    // 30 -> 30.27 km/h: a = 0.27 / 3.6 = 0.075 m/s², inside ±0.15
    const double a_cruise = (30.27 - 30.0) / 3.6;
    CHECK(std::abs(a_cruise - 0.075) < 1e-12);
    CHECK(classify(30.0, a_cruise, cfg) == StateLabel::Cruise);
    CHECK(classify(30.0, -0.2, cfg) == StateLabel::Decel);
    CHECK(classify(30.0, 0.15, cfg) == StateLabel::Cruise);
    CHECK(classify(30.0, -0.15, cfg) == StateLabel::Cruise);
}

TEST_CASE("forward_accel reuses the final difference") {
    const auto a = forward_accel(std::vector<double>{0.0, 3.6, 10.8});
    REQUIRE(a.size() == 3);
    CHECK(a[0] == Catch::Approx(1.0));
    CHECK(a[1] == Catch::Approx(2.0));
    CHECK(a[2] == a[1]);
    CHECK(forward_accel(std::vector<double>{5.0}) == std::vector<double>{0.0});
}

TEST_CASE("divide_microtrips keeps a canonical idle-to-idle segment") {
    auto v = trapezoid(5, 20.0, 5, 20, 10);  // 5 + 5 + 20 + 9 samples
    REQUIRE(v.size() == 39);
    v.insert(v.end(), 5, 0.0);  // the next idle run
    const auto t = make_trace(v);
    const auto trips = divide_microtrips(t, label_states(t));
    REQUIRE(trips.size() == 1);
    CHECK(trips[0].start == 0);
    CHECK(trips[0].duration() == 39);
    CHECK(trips[0].states.front() == StateLabel::Idle);
}

TEST_CASE("divide_microtrips drops short, incomplete and trailing segments") {
    // 15 s segment
    auto short_seg = trapezoid(3, 15.0, 3, 3, 7);
    short_seg.insert(short_seg.end(), 3, 0.0);
    auto t = make_trace(short_seg);
    CHECK(divide_microtrips(t, label_states(t)).empty());

    // 30 s with no cruise: ramp straight up and down
    std::vector<double> no_cruise(5, 0.0);
    for (int k = 1; k <= 12; ++k) no_cruise.push_back(2.0 * k);
    for (int k = 12; k >= 1; --k) no_cruise.push_back(2.0 * k - 1.0);
    no_cruise.push_back(0.0);
    no_cruise.insert(no_cruise.end(), 3, 0.0);
    t = make_trace(no_cruise);
    const auto labels = label_states(t);
    CHECK(divide_microtrips(t, labels).empty());
    SegmentationConfig keep_all;
    keep_all.require_all_states = false;
    CHECK(divide_microtrips(t, labels, keep_all).size() == 1);

    // no closing idle
    auto open_end = trapezoid(5, 30.0, 5, 40, 5);
    t = make_trace(open_end);
    CHECK(divide_microtrips(t, label_states(t)).empty());
}

TEST_CASE("divide_microtrips recovers planted segments exactly") {
    auto cfg = GenConfig::fixture();
    cfg.anomaly_rates = {};
    const auto corpus = generate_clean_corpus(cfg);
    const auto trips = divide_microtrips(corpus.trace, label_states(corpus.trace));
    REQUIRE(trips.size() == corpus.truth.segments.size());
    for (std::size_t i = 0; i < trips.size(); ++i) {
        CHECK(trips[i].start == corpus.truth.segments[i].start);
        CHECK(trips[i].duration() == corpus.truth.segments[i].duration);
    }
}

TEST_CASE("kept micro-trips satisfy the structural invariants") {
    auto cfg = GenConfig::fixture();
    const auto corpus = generate_corpus(cfg);
    const auto trips = divide_microtrips(corpus.trace, label_states(corpus.trace));
    REQUIRE_FALSE(trips.empty());
    std::size_t prev_end = 0;
    for (const auto& m : trips) {
        CHECK(m.start >= prev_end);
        prev_end = m.end;
        CHECK(m.duration() >= 20);
        CHECK(m.states.front() == StateLabel::Idle);
        CHECK(census(m.states).has_all());
        CHECK(m.speeds.size() == m.duration());
    }
}

TEST_CASE("format_manifest lists start time and duration") {
    auto v = trapezoid(5, 20.0, 5, 20, 10);
    v.insert(v.end(), 3, 0.0);
    auto t = make_trace(v, "a", 100);
    const auto trips = divide_microtrips(t, label_states(t));
    CHECK(format_manifest(trips) == "trace_id,seg_id,start_s,duration_s\na,0,100,39\n");
}
