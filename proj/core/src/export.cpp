#include "qpmseg/export.hpp"

#include "qpmseg/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace qpmseg {

namespace {

using nlohmann::json;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

const char* kColumns[] = {
    "image_id",
    "cell_id",
    "centroid_x_um",
    "centroid_y_um",
    "bbox_x_min_px",
    "bbox_y_min_px",
    "bbox_x_max_px",
    "bbox_y_max_px",
    "area_px",
    "area_um2",
    "diameter_um",
    "perimeter_um",
    "circularity",
    "roundness",
    "polygonality",
    "ellipticity",
    "volume_um3",
    "negative_volume_fraction",
    "internal_structure_count",
    "nucleus_diameter_um",
    "nucleus_area_um2",
    "nucleus_circularity",
    "nucleus_roundness",
    "nucleus_offset_um",
    "nucleus_area_ratio",
    "nucleus_volume_ratio",
    "nucleus_volume_um3",
    "structures_in_nucleus",
    "nucleus_max_density_um",
    "nucleus_mean_density_um",
    "nucleus_candidate_count",
    "border",
    "abnormal_or_aggregate",
    "internal_skipped",
};

} // namespace

std::string features_csv(const std::vector<FeatureRecord>& records) {
    std::string out;
    for (std::size_t i = 0; i < std::size(kColumns); ++i) {
        if (i) out += ',';
        out += kColumns[i];
    }
    out += '\n';

    for (const FeatureRecord& r : records) {
        std::vector<std::string> fields;
        fields.reserve(std::size(kColumns));
        fields.push_back(r.image_id);
        fields.push_back(r.cell_id);
        fields.push_back(num(r.centroid_um.x));
        fields.push_back(num(r.centroid_um.y));
        fields.push_back(std::to_string(r.bbox.x_min));
        fields.push_back(std::to_string(r.bbox.y_min));
        fields.push_back(std::to_string(r.bbox.x_max));
        fields.push_back(std::to_string(r.bbox.y_max));
        fields.push_back(std::to_string(r.area_px));
        fields.push_back(num(r.area_um2));
        fields.push_back(num(r.diameter_um));
        fields.push_back(num(r.perimeter_um));
        if (r.scores) {
            fields.push_back(num(r.scores->circularity));
            fields.push_back(num(r.scores->roundness));
            fields.push_back(num(r.scores->polygonality));
            fields.push_back(num(r.scores->ellipticity));
        } else {
            fields.insert(fields.end(), 4, "");
        }
        fields.push_back(num(r.volume_um3));
        fields.push_back(num(r.negative_volume_fraction));
        fields.push_back(std::to_string(r.structure_count));
        if (r.nucleus) {
            const NucleusFeatures& n = *r.nucleus;
            fields.push_back(num(n.diameter_um));
            fields.push_back(num(n.area_um2));
            fields.push_back(n.circularity ? num(*n.circularity) : "");
            fields.push_back(n.roundness ? num(*n.roundness) : "");
            fields.push_back(num(n.offset_um));
            fields.push_back(num(n.area_ratio));
            fields.push_back(num(n.volume_ratio));
            fields.push_back(num(n.volume_um3));
            fields.push_back(std::to_string(n.structures_inside));
            fields.push_back(num(n.max_density_um));
            fields.push_back(num(n.mean_density_um));
            fields.push_back(std::to_string(n.candidate_count));
        } else {
            fields.insert(fields.end(), 12, "");
        }
        fields.push_back(r.border ? "1" : "0");
        fields.push_back(r.abnormal_or_aggregate ? "1" : "0");
        fields.push_back(r.internal_skipped ? "1" : "0");

        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out += ',';
            out += fields[i];
        }
        out += '\n';
    }
    return out;
}

std::string features_jsonl(const std::vector<FeatureRecord>& records) {
    std::string out;
    for (const FeatureRecord& r : records) {
        json j{{"image_id", r.image_id},
               {"cell_id", r.cell_id},
               {"centroid_x_um", r.centroid_um.x},
               {"centroid_y_um", r.centroid_um.y},
               {"bbox_px", {r.bbox.x_min, r.bbox.y_min, r.bbox.x_max, r.bbox.y_max}},
               {"area_px", r.area_px},
               {"area_um2", r.area_um2},
               {"diameter_um", r.diameter_um},
               {"perimeter_um", r.perimeter_um},
               {"volume_um3", r.volume_um3},
               {"negative_volume_fraction", r.negative_volume_fraction},
               {"internal_structure_count", r.structure_count},
               {"border", r.border},
               {"abnormal_or_aggregate", r.abnormal_or_aggregate},
               {"internal_skipped", r.internal_skipped}};
        if (r.scores) {
            j["scores"] = {{"circularity", r.scores->circularity},
                           {"roundness", r.scores->roundness},
                           {"polygonality", r.scores->polygonality},
                           {"ellipticity", r.scores->ellipticity}};
        } else {
            j["scores"] = nullptr;
        }
        if (r.nucleus) {
            const NucleusFeatures& n = *r.nucleus;
            json jn{{"diameter_um", n.diameter_um},
                    {"area_um2", n.area_um2},
                    {"offset_um", n.offset_um},
                    {"area_ratio", n.area_ratio},
                    {"volume_ratio", n.volume_ratio},
                    {"volume_um3", n.volume_um3},
                    {"structures_in_nucleus", n.structures_inside},
                    {"max_density_um", n.max_density_um},
                    {"mean_density_um", n.mean_density_um},
                    {"candidate_count", n.candidate_count}};
            jn["circularity"] = n.circularity ? json(*n.circularity) : json(nullptr);
            jn["roundness"] = n.roundness ? json(*n.roundness) : json(nullptr);
            j["nucleus"] = std::move(jn);
        } else {
            j["nucleus"] = nullptr;
        }
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::string stats_csv(const MeasurementStats& stats) {
    std::string out = "image_id,phase_min_rad,phase_max_rad,phase_mean_rad,background_rad,filtered\n";
    for (const ImageStats& s : stats.per_image) {
        const bool filtered = std::find(stats.filtered_ids.begin(), stats.filtered_ids.end(),
                                        s.image_id) != stats.filtered_ids.end();
        out += s.image_id;
        out += ',';
        out += num(s.phase_min);
        out += ',';
        out += num(s.phase_max);
        out += ',';
        out += num(s.phase_mean);
        out += ',';
        out += num(s.background);
        out += ',';
        out += filtered ? "1" : "0";
        out += '\n';
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path.string());
}

} // namespace qpmseg
