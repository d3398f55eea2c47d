#pragma once

#include <CLI11.hpp>

namespace qpmseg::cli {

// Exit codes shared by all subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerateThreshold = 3;
inline constexpr int kExitNoImages = 4;

void register_segment(CLI::App& app, int& exit_code);
void register_phantom(CLI::App& app, int& exit_code);

} // namespace qpmseg::cli
