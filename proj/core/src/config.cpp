#include "qpmseg/config.hpp"

#include "qpmseg/errors.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <optional>

namespace qpmseg {

namespace {

using nlohmann::json;

std::optional<double> env_double(const char* name) {
    const char* raw = std::getenv(name);
    if (raw == nullptr || *raw == '\0') return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(raw, &end);
    if (end == raw || *end != '\0') {
        throw ConfigError(std::string("environment variable ") + name + " is not a number: " + raw);
    }
    return v;
}

} // namespace

void Config::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("config: ") + what);
    };
    require(r_min_um >= 0.0, "r_min_um must be >= 0");
    require(d_internal_min_um > 0.0, "d_internal_min_um must be > 0");
    require(min_structure_px > 0, "min_structure_px must be > 0");
    require(histogram_bin_width_rad > 0.0, "histogram_bin_width_rad must be > 0");
    require(gradient_factor > 0.0, "gradient_factor must be > 0");
    require(gradient_boundary_fraction >= 0.0 && gradient_boundary_fraction <= 1.0,
            "gradient_boundary_fraction must be in [0, 1]");
    require(background_sigma_factor > 0.0, "background_sigma_factor must be > 0");
}

Config load_config_file(const std::filesystem::path& path, Config base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");

    for (const auto& [key, value] : doc.items()) {
        if (key == "r_min_um") base.r_min_um = value.get<double>();
        else if (key == "d_internal_min_um") base.d_internal_min_um = value.get<double>();
        else if (key == "min_structure_px") base.min_structure_px = value.get<int>();
        else if (key == "histogram_bin_width_rad") base.histogram_bin_width_rad = value.get<double>();
        else if (key == "gradient_factor") base.gradient_factor = value.get<double>();
        else if (key == "gradient_boundary_fraction") base.gradient_boundary_fraction = value.get<double>();
        else if (key == "background_sigma_factor") base.background_sigma_factor = value.get<double>();
        else throw ConfigError("config file: unknown key '" + key + "'");
    }
    base.validate();
    return base;
}

Config apply_env_overrides(Config base) {
    if (auto v = env_double("QPMSEG_R_MIN_UM")) base.r_min_um = *v;
    if (auto v = env_double("QPMSEG_D_INTERNAL_MIN_UM")) base.d_internal_min_um = *v;
    if (auto v = env_double("QPMSEG_MIN_STRUCTURE_PX")) base.min_structure_px = static_cast<int>(*v);
    if (auto v = env_double("QPMSEG_HISTOGRAM_BIN_WIDTH_RAD")) base.histogram_bin_width_rad = *v;
    if (auto v = env_double("QPMSEG_GRADIENT_FACTOR")) base.gradient_factor = *v;
    if (auto v = env_double("QPMSEG_GRADIENT_BOUNDARY_FRACTION")) base.gradient_boundary_fraction = *v;
    if (auto v = env_double("QPMSEG_BACKGROUND_SIGMA_FACTOR")) base.background_sigma_factor = *v;
    base.validate();
    return base;
}

} // namespace qpmseg
