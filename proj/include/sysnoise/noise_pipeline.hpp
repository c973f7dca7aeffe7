#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sysnoise/econometrics.hpp"
#include "sysnoise/market_data.hpp"
#include "sysnoise/pricing_errors.hpp"

namespace sysnoise::pipeline {

enum class LagMode {
    pooled,  // lag across the sorted per-contract rows (n = rows - k)
    daily,   // aggregate to one row per trade date first
};

[[nodiscard]] const char* to_string(LagMode mode) noexcept;
[[nodiscard]] std::optional<LagMode> parse_lag_mode(std::string_view text) noexcept;

struct ModelSet {
    bool bs_only = true;   // model (1)
    bool baw_only = true;  // model (2)
    bool combined = true;  // model (3)
};

inline constexpr std::size_t kPaperArOrder = 22;

struct PipelineConfig {
    std::filesystem::path options_path;
    std::filesystem::path treasury_path;
    std::filesystem::path closes_path;
    market::OptionColumns option_columns;
    std::string closes_date_column = "date";
    std::string closes_value_column = "close";
    char delimiter = ',';
    std::size_t volatility_window = market::kDefaultVolatilityWindow;
    double outlier_threshold = errors::kDefaultOutlierThreshold;
    double dividend_yield = 0.0;
    LagMode lag_mode = LagMode::pooled;
    std::optional<std::size_t> ar_order = kPaperArOrder;  // nullopt selects by PACF
    std::size_t max_pacf_lag = 30;
    ModelSet models;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on ar_order == 0, window < 2 or threshold <= 0.
    void validate() const;
};

/// Row counts through one stage. rows_in == rows_out + sum(dropped).
struct StageCount {
    std::string stage;
    std::size_t rows_in = 0;
    std::size_t rows_out = 0;
    std::map<std::string, std::size_t> dropped;

    [[nodiscard]] std::size_t dropped_total() const;
    [[nodiscard]] bool reconciles() const;
};

struct Manifest {
    std::vector<StageCount> stages;
    std::size_t ar_order_used = 0;
    bool ar_order_auto = false;
    std::optional<std::size_t> pacf_selected_order;
    std::size_t regression_observations = 0;
    std::size_t error_rows = 0;               // rows carrying both errors
    std::size_t error_model_observations = 0; // rows x 2 models
    std::string noise_share_formula;
    std::string rate_matching = "linear interpolation in maturity across the 11 tenors";
    std::string day_count = "calendar/365 for T; sqrt(252) annualisation on daily log returns";
    std::vector<std::string> notes;

    [[nodiscard]] const StageCount* stage(const std::string& name) const;
};

/// Aborted stage, with the counts reached so far.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& message, Manifest so_far);

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    [[nodiscard]] const Manifest& manifest() const noexcept { return manifest_; }

private:
    std::string stage_;
    Manifest manifest_;
};

struct Dataset {
    econometrics::AnalysisTable table;   // in lag order
    std::vector<errors::ErrorRecord> errors;  // retained rows, sorted (date, contract)
    std::vector<market::Diagnostic> skipped;  // row-level exclusions with reasons
    Manifest manifest;
};

/// Ingest, activity filter, parameter derivation, pricing, outlier drop,
/// sort by (trade date, contract) and, in daily mode, aggregation.
[[nodiscard]] Dataset build_dataset(const PipelineConfig& config);

/// Same as build_dataset but from already-open streams.
[[nodiscard]] Dataset build_dataset(const PipelineConfig& config, std::istream& options,
                                    std::istream& treasury, std::istream& closes);

/// Per-trade-date mean volume and mean errors.
[[nodiscard]] econometrics::AnalysisTable aggregate_daily(const econometrics::AnalysisTable& pooled);

struct ModelResults {
    std::optional<econometrics::RegressionResult> bs_only;
    std::optional<econometrics::RegressionResult> baw_only;
    std::optional<econometrics::RegressionResult> combined;
};

/// Models (1) x_bs, (2) x_baw, (3) both, each on the same k logged lags.
[[nodiscard]] ModelResults run_models(const econometrics::AnalysisTable& table, std::size_t k,
                                      ModelSet models = {});

struct NoiseShare {
    double point = 0.0;   // |phi_bs mean(x_bs) + phi_baw mean(x_baw)|
    double low = 0.0;
    double high = 0.0;
    double signed_effect = 0.0;
    double standard_error = 0.0;
    bool clamped = false;  // raw lower bound was negative and was reported as 0
};

inline constexpr const char* kNoiseShareFormula =
    "|phi_bs*mean(x_bs) + phi_baw*mean(x_baw)| from the combined model; 95% interval "
    "by the delta method on the coefficient covariance with error means fixed";

/// Share of log-volume attributable to pricing errors at their mean values.
/// Throws std::invalid_argument if `combined` lacks x_bs, x_baw or a
/// covariance matrix.
[[nodiscard]] NoiseShare estimate_noise_share(const econometrics::RegressionResult& combined,
                                              const errors::SeriesStats& bs_stats,
                                              const errors::SeriesStats& baw_stats);

/// Alternative reading: |phi_(1) mean(x_bs) + phi_(2) mean(x_baw)| with
/// each coefficient taken from its own marginal model.
[[nodiscard]] double marginal_models_share(const econometrics::RegressionResult& bs_only,
                                           const econometrics::RegressionResult& baw_only,
                                           const errors::SeriesStats& bs_stats,
                                           const errors::SeriesStats& baw_stats);

struct VolumePoint {
    Date date;
    double volume = 0.0;  // mean per contract on that date
};

struct NoiseReport {
    PipelineConfig config;
    Manifest manifest;
    ModelResults models;
    errors::SeriesStats bs_stats;
    errors::SeriesStats baw_stats;
    std::vector<std::string> vif_names;
    std::vector<double> vifs;
    econometrics::AdfResult adf;
    econometrics::PacfResult pacf;
    std::optional<NoiseShare> noise_share;
    std::optional<double> marginal_share;
    std::vector<VolumePoint> daily_volume;
};

/// Full analysis: dataset, PACF (and order selection when ar_order is
/// auto), ADF on log volume, VIFs of the combined design, the three models
/// and the noise share.
[[nodiscard]] NoiseReport run_analysis(const PipelineConfig& config);
[[nodiscard]] NoiseReport analyse_dataset(const PipelineConfig& config, Dataset dataset);

}  // namespace sysnoise::pipeline
