#include "qpmseg/export.hpp"

#include "test_helpers.hpp"

#include <nlohmann/json.hpp>

#include <doctest.h>

#include <cstdlib>
#include <sstream>

using namespace qpmseg;
using namespace qpmseg::testing;

namespace {

FeatureRecord sample_record(bool with_nucleus) {
    FeatureRecord r;
    r.image_id = "img_0001";
    r.cell_id = "img_0001#001";
    r.centroid_um = {12.3456789012, 7.5};
    r.bbox = {3, 4, 20, 22};
    r.area_px = 250;
    r.area_um2 = 62.5;
    r.diameter_um = 10.0;
    r.perimeter_um = 28.9;
    r.scores = ShapeScores{0.91, 0.88, 0.95, 0.82};
    r.volume_um3 = 1.234567891;
    r.structure_count = with_nucleus ? 1 : 0;
    if (with_nucleus) {
        NucleusFeatures n;
        n.diameter_um = 4.0;
        n.area_um2 = 11.0;
        n.circularity = 0.9;
        n.roundness = 0.85;
        n.offset_um = 0.4;
        n.area_ratio = 0.176;
        n.volume_ratio = 0.2;
        n.volume_um3 = 0.2469;
        n.max_density_um = 0.21;
        n.mean_density_um = 0.15;
        n.candidate_count = 1;
        r.nucleus = n;
    } else {
        r.internal_skipped = true;
    }
    return r;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

} // namespace

TEST_CASE("features_csv: header-only file for zero cells") {
    const std::string csv = features_csv({});
    CHECK(csv.find("image_id,cell_id,") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("features_csv: one row per record, empty nucleus fields when absent") {
    const std::string csv = features_csv({sample_record(true), sample_record(false)});
    std::stringstream ss(csv);
    std::string header, row_full, row_bare;
    std::getline(ss, header);
    std::getline(ss, row_full);
    std::getline(ss, row_bare);

    const auto cols = split(header, ',');
    const auto full = split(row_full, ',');
    CHECK(cols.size() == full.size());

    // nucleus columns are empty in the bare row
    const std::string bare_with_sentinel = row_bare + "|";
    const auto bare = split(bare_with_sentinel, ',');
    const std::size_t nucleus_col =
        std::find(cols.begin(), cols.end(), "nucleus_diameter_um") - cols.begin();
    CHECK(bare[nucleus_col].empty());

    // flags as 0/1
    CHECK(full.back() == "0"); // internal_skipped
    CHECK(split(row_bare, ',').back() == "1");
}

TEST_CASE("features_csv numbers round-trip at 9 significant digits") {
    const FeatureRecord r = sample_record(true);
    const std::string csv = features_csv({r});
    std::stringstream ss(csv);
    std::string header, row;
    std::getline(ss, header);
    std::getline(ss, row);
    const auto cols = split(header, ',');
    const auto vals = split(row, ',');

    auto field = [&](const std::string& name) {
        const std::size_t i = std::find(cols.begin(), cols.end(), name) - cols.begin();
        return std::strtod(vals[i].c_str(), nullptr);
    };
    CHECK(field("centroid_x_um") ==
          doctest::Approx(r.centroid_um.x).epsilon(1e-9));
    CHECK(field("volume_um3") == doctest::Approx(r.volume_um3).epsilon(1e-9));
    CHECK(field("nucleus_volume_um3") == doctest::Approx(r.nucleus->volume_um3).epsilon(1e-9));
}

TEST_CASE("features_jsonl parses back with nested nucleus") {
    const std::string jsonl = features_jsonl({sample_record(true), sample_record(false)});
    std::stringstream ss(jsonl);
    std::string line1, line2;
    std::getline(ss, line1);
    std::getline(ss, line2);

    const auto j1 = nlohmann::json::parse(line1);
    CHECK(j1.at("image_id") == "img_0001");
    CHECK(j1.at("nucleus").is_object());
    CHECK(j1.at("nucleus").at("candidate_count") == 1);

    const auto j2 = nlohmann::json::parse(line2);
    CHECK(j2.at("nucleus").is_null());
    CHECK(j2.at("internal_skipped") == true);
}

TEST_CASE("stats_csv marks filtered images") {
    MeasurementStats stats;
    ImageStats a;
    a.image_id = "a";
    a.phase_min = -0.1;
    a.phase_max = 1.5;
    a.phase_mean = 0.2;
    a.background = 0.1;
    ImageStats b = a;
    b.image_id = "b";
    stats.per_image = {a, b};
    stats.filtered_ids = {"b"};

    const std::string csv = stats_csv(stats);
    std::stringstream ss(csv);
    std::string header, row_a, row_b;
    std::getline(ss, header);
    std::getline(ss, row_a);
    std::getline(ss, row_b);
    CHECK(header ==
          "image_id,phase_min_rad,phase_max_rad,phase_mean_rad,background_rad,filtered");
    CHECK(row_a.back() == '0');
    CHECK(row_b.back() == '1');
}
