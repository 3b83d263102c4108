#include <catch_amalgamated.hpp>

#include <dcycle/evaluation.hpp>
#include <dcycle/rng.hpp>

#include <cmath>

using namespace dcycle;

namespace {

SapdBins fixed_bins() {
    SapdBins b;
    b.speed_max = 100.0;
    return b;
}

std::vector<double> random_series(Rng& rng, std::size_t n) {
    std::vector<double> v{0.0};
    while (v.size() < n) v.push_back(std::max(0.0, v.back() + rng.uniform(-6.0, 6.0)));
    return v;
}

}  // namespace

TEST_CASE("indicators of a hand series") {
    // idle, accel at 1 m/s², cruise, decel, idle
    const std::vector<double> v{0, 0, 3.6, 7.2, 7.2, 7.2, 3.6, 0};
    const auto ind = corpus_indicators(std::vector<std::vector<double>>{v});
    // forward differences label I I A C C D D I
    CHECK(ind.p_idle == Catch::Approx(3.0 / 8));
    CHECK(ind.p_accel == Catch::Approx(1.0 / 8));
    CHECK(ind.p_cruise == Catch::Approx(2.0 / 8));
    CHECK(ind.p_decel == Catch::Approx(2.0 / 8));
    CHECK(ind.mean_speed == Catch::Approx(28.8 / 8));
    CHECK(ind.running_speed == Catch::Approx(28.8 / 5));
    CHECK(ind.mean_accel == Catch::Approx(1.0));
    CHECK(ind.mean_decel == Catch::Approx(-1.0));
    const auto vals = ind.values();
    CHECK(vals[4] + vals[5] + vals[6] + vals[7] == Catch::Approx(1.0));
}

TEST_CASE("indicators pool over series and ignore order") {
    Rng rng(3);
    const auto a = random_series(rng, 300);
    const auto b = random_series(rng, 200);
    const auto ab = corpus_indicators(std::vector<std::vector<double>>{a, b});
    const auto ba = corpus_indicators(std::vector<std::vector<double>>{b, a});
    for (std::size_t k = 0; k < kIndicatorCount; ++k)
        CHECK(ab.values()[k] == Catch::Approx(ba.values()[k]).epsilon(1e-12));
    const auto only_a = corpus_indicators(std::vector<std::vector<double>>{a});
    const auto only_b = corpus_indicators(std::vector<std::vector<double>>{b});
    CHECK(ab.mean_speed == Catch::Approx((only_a.mean_speed * 300 + only_b.mean_speed * 200) / 500));
    CHECK_THROWS_AS(corpus_indicators(std::vector<std::vector<double>>{}), InsufficientDataError);
}

TEST_CASE("difference rates") {
    IndicatorSet src, cyc;
    src.mean_speed = 20.0;
    cyc.mean_speed = 22.0;
    src.p_idle = 0.5;
    cyc.p_idle = 0.5;
    const auto r = difference_rates(cyc, src);
    REQUIRE(r.rates[0].has_value());
    CHECK(*r.rates[0] == Catch::Approx(0.10));
    CHECK(*r.rates[4] == 0.0);
    CHECK_FALSE(r.rates[1].has_value());
    CHECK(r.defined == 2);
    CHECK(r.average == Catch::Approx(0.05));

    const auto self = difference_rates(src, src);
    CHECK(self.average == 0.0);
}

TEST_CASE("SAPD of a constant series is a point mass") {
    const std::vector<double> v(50, 31.0);
    const auto h = sapd_histogram(v, fixed_bins());
    double total = 0.0, peak = 0.0;
    for (const auto& row : h.mass)
        for (double m : row) {
            total += m;
            peak = std::max(peak, m);
        }
    CHECK(total == Catch::Approx(1.0));
    CHECK(peak == Catch::Approx(1.0));
    CHECK(h.mass[15][20] == Catch::Approx(1.0));  // 30-32 km/h, 0-0.2 m/s²
}

TEST_CASE("SAPD mass sums to one and marginals follow the data") {
    std::vector<double> v(100, 10.0);
    v.insert(v.end(), 100, 50.0);
    const auto h = sapd_histogram(v, fixed_bins());
    double low = 0.0, high = 0.0, total = 0.0;
    for (double m : h.mass[5]) low += m;
    for (double m : h.mass[25]) high += m;
    for (const auto& row : h.mass)
        for (double m : row) total += m;
    CHECK(total == Catch::Approx(1.0));
    // the one jump sample sits in the 10 km/h row but in the clipped top accel bin
    CHECK(low == Catch::Approx(0.5));
    CHECK(high == Catch::Approx(0.5));
}

TEST_CASE("SAPD distance") {
    Rng rng(8);
    const auto a = sapd_histogram(random_series(rng, 500), fixed_bins());
    CHECK(sapd_distance(a, a) == 0.0);

    const auto lo = sapd_histogram(std::vector<double>(20, 5.0), fixed_bins());
    const auto hi = sapd_histogram(std::vector<double>(20, 80.0), fixed_bins());
    CHECK(sapd_distance(lo, hi) == Catch::Approx(1.0));

    SapdHistogram p{{0, 1, 2}, {0, 1, 2}, {{0.5, 0.0}, {0.5, 0.0}}};
    SapdHistogram q{{0, 1, 2}, {0, 1, 2}, {{0.5, 0.5}, {0.0, 0.0}}};
    CHECK(sapd_distance(p, q) == Catch::Approx(0.5));

    auto other = fixed_bins();
    other.speed_width = 5.0;
    CHECK_THROWS_AS(sapd_distance(lo, sapd_histogram(std::vector<double>(20, 5.0), other)),
                    ValidationError);
}

TEST_CASE("SAPD distance obeys the triangle inequality") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const auto x = sapd_histogram(random_series(rng, 200), fixed_bins());
        const auto y = sapd_histogram(random_series(rng, 200), fixed_bins());
        const auto z = sapd_histogram(random_series(rng, 200), fixed_bins());
        REQUIRE(sapd_distance(x, z) <= sapd_distance(x, y) + sapd_distance(y, z) + 1e-12);
        REQUIRE(sapd_distance(x, y) == Catch::Approx(sapd_distance(y, x)));
    }
}

TEST_CASE("format_sapd header") {
    const auto h = sapd_histogram(std::vector<double>{1.0, 1.0}, fixed_bins());
    const auto text = format_sapd(h);
    CHECK(text.rfind("v_lo,v_hi,a_lo,a_hi,mass\n", 0) == 0);
}
