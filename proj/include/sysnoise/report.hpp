#pragma once

#include <filesystem>
#include <string>

#include "sysnoise/noise_pipeline.hpp"

namespace sysnoise::report {

/// Three-column regression table: coefficient with stars over the standard
/// error in parentheses, error rows first, then lags, constant and fit
/// statistics.
[[nodiscard]] std::string render_table(const pipeline::NoiseReport& report);

/// Every report field plus the run manifest and resolved config, as JSON.
[[nodiscard]] std::string render_json(const pipeline::NoiseReport& report);

/// Long-format plot data with columns series,index,label,value,lower,upper.
/// Series "volume" has one row per trade date; series "pacf" one row per
/// lag with lower/upper set to -bound/+bound.
[[nodiscard]] std::string render_plot_data(const pipeline::NoiseReport& report);

struct Sinks {
    std::filesystem::path table;
    std::filesystem::path json;
    std::filesystem::path plot_data;

    /// table.txt, report.json and plot_data.csv under `dir`.
    [[nodiscard]] static Sinks in_directory(const std::filesystem::path& dir);
};

/// Writes all three files. Throws std::runtime_error naming the path on
/// failure.
void emit_report(const pipeline::NoiseReport& report, const Sinks& sinks);

}  // namespace sysnoise::report
