#pragma once

#include "qpmseg/features.hpp"
#include "qpmseg/stats.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace qpmseg {

/// Fixed CSV column order; units are part of the header names. Numbers are
/// printed with 9 significant digits, flags as 0/1, absent nucleus fields
/// stay empty.
std::string features_csv(const std::vector<FeatureRecord>& records);

/// One JSON object per line, same fields as the CSV with the nucleus block
/// nested (null when absent).
std::string features_jsonl(const std::vector<FeatureRecord>& records);

/// Per-image statistics dump: id, min, max, mean, background, filtered flag.
std::string stats_csv(const MeasurementStats& stats);

void write_text_file(const std::filesystem::path& path, const std::string& content);

} // namespace qpmseg
