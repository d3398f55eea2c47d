#include "qpmseg/stats.hpp"

#include "qpmseg/errors.hpp"
#include "test_helpers.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace qpmseg;
using namespace qpmseg::testing;

namespace {

PhaseImage image_from(const std::string& id, std::vector<float> samples) {
    const int n = static_cast<int>(samples.size());
    return PhaseImage(id, n, 1, std::move(samples), 1.0, 528.0);
}

ImageStats stats_named(const std::string& id, double background, double phase_min = 0.0) {
    ImageStats s;
    s.image_id = id;
    s.background = background;
    s.phase_min = phase_min;
    s.phase_max = std::max(background, 1.0);
    s.phase_mean = background;
    return s;
}

} // namespace

TEST_CASE("image_stats: constant image") {
    const ImageStats s = image_stats(flat_image("u", 8, 8, 0.3f), 0.01);
    CHECK(s.phase_min == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(s.phase_max == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(s.phase_mean == doctest::Approx(0.3).epsilon(1e-7));
    CHECK(s.background == doctest::Approx(0.3).epsilon(1e-7));
}

TEST_CASE("image_stats: all-zero image") {
    const ImageStats s = image_stats(flat_image("z", 4, 4, 0.0f), 0.01);
    CHECK(s.phase_min == 0.0);
    CHECK(s.phase_max == 0.0);
    CHECK(s.phase_mean == 0.0);
    CHECK(s.background == 0.0);
}

TEST_CASE("image_stats: two-level sample set") {
    // 5 samples at 0.1 and 4 at 0.5: mode bin holds 0.1
    std::vector<float> samples{0.1f, 0.1f, 0.1f, 0.1f, 0.1f, 0.5f, 0.5f, 0.5f, 0.5f};
    const ImageStats s = image_stats(image_from("two", samples), 0.01);
    CHECK(s.phase_min == doctest::Approx(0.1).epsilon(1e-7));
    CHECK(s.phase_max == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(s.phase_mean == doctest::Approx((5 * 0.1 + 4 * 0.5) / 9.0).epsilon(1e-6));
    // background lands in the bin containing 0.1 (reported at the bin center)
    CHECK(std::abs(s.background - 0.1) <= 0.01);
}

TEST_CASE("image_stats: mode ties resolve toward the bin nearest the mean") {
    // bins at 0.1 and 0.5 tie with 4 samples each; the 0.45 sample pulls the
    // mean toward the upper bin
    std::vector<float> samples{0.1f, 0.1f, 0.1f, 0.1f, 0.5f, 0.5f, 0.5f, 0.5f, 0.45f};
    const ImageStats s = image_stats(image_from("tie", samples), 0.01);
    CHECK(s.background > 0.45);
}

TEST_CASE("image_stats is permutation-invariant and keeps c_b within range") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> value(-0.2f, 2.0f);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<float> samples(64);
        for (float& v : samples) v = value(rng);
        auto shuffled = samples;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);

        const ImageStats a = image_stats(image_from("a", samples), 0.01);
        const ImageStats b = image_stats(image_from("b", shuffled), 0.01);
        CHECK(a.phase_min == b.phase_min);
        CHECK(a.phase_max == b.phase_max);
        CHECK(a.phase_mean == doctest::Approx(b.phase_mean).epsilon(1e-12));
        CHECK(a.background == b.background);

        CHECK(a.background >= a.phase_min);
        CHECK(a.background <= a.phase_max);
    }
}

TEST_CASE("filter_artifact_images: homogeneous measurement keeps everything") {
    Config cfg;
    std::vector<ImageStats> all;
    for (int i = 0; i < 10; ++i) all.push_back(stats_named("img" + std::to_string(i), 0.05));
    const auto [kept, filtered] = filter_artifact_images(all, cfg);
    CHECK(kept.size() == 10);
    CHECK(filtered.empty());
}

TEST_CASE("filter_artifact_images: phase-wrap signature") {
    Config cfg;
    std::vector<ImageStats> all;
    for (int i = 0; i < 5; ++i) all.push_back(stats_named("ok" + std::to_string(i), 0.05));
    all.push_back(stats_named("wrapped", 0.05, -3.5));
    const auto [kept, filtered] = filter_artifact_images(all, cfg);
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].image_id == "wrapped");
    CHECK(kept.size() == 5);
}

TEST_CASE("filter_artifact_images: background outlier via median/MAD") {
    Config cfg; // background_sigma_factor = 3
    std::vector<ImageStats> all;
    for (int i = 0; i < 9; ++i) all.push_back(stats_named("ok" + std::to_string(i), 0.05));
    all.push_back(stats_named("bright", 0.50));
    const auto [kept, filtered] = filter_artifact_images(all, cfg);
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].image_id == "bright");
    // order of the kept images is preserved
    for (std::size_t i = 0; i < kept.size(); ++i) {
        CHECK(kept[i].image_id == "ok" + std::to_string(i));
    }
}

TEST_CASE("filter_artifact_images rejects an empty measurement") {
    Config cfg;
    CHECK_THROWS_AS(filter_artifact_images({}, cfg), EmptyMeasurementError);
}

TEST_CASE("measurement_threshold: hand-computed examples") {
    {
        const MeasurementStats m = measurement_threshold({stats_named("a", 0.05)});
        CHECK(m.background_mean == doctest::Approx(0.05).epsilon(1e-12));
        CHECK(m.threshold == doctest::Approx(0.10).epsilon(1e-12));
        CHECK(m.n_images == 1);
    }
    {
        const MeasurementStats m = measurement_threshold(
            {stats_named("a", 0.05), stats_named("b", 0.07), stats_named("c", 0.06)});
        CHECK(m.background_mean == doctest::Approx(0.06).epsilon(1e-12));
        CHECK(m.threshold == doctest::Approx(0.12).epsilon(1e-12));
    }
}

TEST_CASE("measurement_threshold: degenerate all-zero backgrounds") {
    CHECK_THROWS_AS(measurement_threshold({stats_named("a", 0.0), stats_named("b", 0.0)}),
                    DegenerateThresholdError);
    CHECK_THROWS_AS(measurement_threshold({}), EmptyMeasurementError);
}

TEST_CASE("measurement_threshold scales linearly and ignores image order") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> bg(0.01, 0.2);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<ImageStats> all;
        const int n = std::uniform_int_distribution<int>(1, 12)(rng);
        for (int i = 0; i < n; ++i) all.push_back(stats_named("i" + std::to_string(i), bg(rng)));

        const double t0 = measurement_threshold(all).threshold;

        auto shuffled = all;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(measurement_threshold(shuffled).threshold == doctest::Approx(t0).epsilon(1e-12));

        const double a = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
        auto scaled = all;
        for (ImageStats& s : scaled) s.background *= a;
        CHECK(measurement_threshold(scaled).threshold == doctest::Approx(a * t0).epsilon(1e-9));
    }
}
