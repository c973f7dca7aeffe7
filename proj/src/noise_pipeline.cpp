#include "sysnoise/noise_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_map>

namespace sysnoise::pipeline {

namespace {

std::ifstream open_input(const std::filesystem::path& path, const char* what,
                         const Manifest& so_far) {
    std::ifstream in(path);
    if (!in) {
        throw PipelineError("ingest", std::string("cannot open ") + what + " file: " + path.string(),
                            so_far);
    }
    return in;
}

std::vector<double> column(const econometrics::AnalysisTable& table, double econometrics::AnalysisRow::*field) {
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& r : table.rows) {
        out.push_back(r.*field);
    }
    return out;
}

std::vector<double> log_volume(const econometrics::AnalysisTable& table) {
    std::vector<double> out = column(table, &econometrics::AnalysisRow::volume);
    for (double& v : out) {
        v = std::log(v);
    }
    return out;
}

}  // namespace

const char* to_string(LagMode mode) noexcept {
    return mode == LagMode::pooled ? "pooled-replication" : "daily-aggregate";
}

std::optional<LagMode> parse_lag_mode(std::string_view text) noexcept {
    if (text == "pooled" || text == "pooled-replication") {
        return LagMode::pooled;
    }
    if (text == "daily" || text == "daily-aggregate") {
        return LagMode::daily;
    }
    return std::nullopt;
}

void PipelineConfig::validate() const {
    if (ar_order && *ar_order == 0) {
        throw std::invalid_argument("ar order must be at least 1 when fixed");
    }
    if (volatility_window < 2) {
        throw std::invalid_argument("volatility window must be at least 2");
    }
    if (!(outlier_threshold > 0.0)) {
        throw std::invalid_argument("outlier threshold must be positive");
    }
    if (!(dividend_yield >= 0.0) || !std::isfinite(dividend_yield)) {
        throw std::invalid_argument("dividend yield must be non-negative");
    }
    if (max_pacf_lag == 0) {
        throw std::invalid_argument("max PACF lag must be at least 1");
    }
    if (!models.bs_only && !models.baw_only && !models.combined) {
        throw std::invalid_argument("model set is empty");
    }
}

std::size_t StageCount::dropped_total() const {
    std::size_t total = 0;
    for (const auto& [reason, count] : dropped) {
        total += count;
    }
    return total;
}

bool StageCount::reconciles() const { return rows_in == rows_out + dropped_total(); }

const StageCount* Manifest::stage(const std::string& name) const {
    for (const auto& s : stages) {
        if (s.stage == name) {
            return &s;
        }
    }
    return nullptr;
}

namespace {
std::string with_counts(const std::string& stage, const std::string& message, const Manifest& m) {
    std::string text = stage + ": " + message;
    if (!m.stages.empty()) {
        text += " (rows so far:";
        for (const auto& s : m.stages) {
            text += " " + s.stage + "=" + std::to_string(s.rows_out);
        }
        text += ")";
    }
    return text;
}
}  // namespace

PipelineError::PipelineError(std::string stage, const std::string& message, Manifest so_far)
    : std::runtime_error(with_counts(stage, message, so_far)), stage_(std::move(stage)),
      manifest_(std::move(so_far)) {}

Dataset build_dataset(const PipelineConfig& config) {
    config.validate();
    Manifest empty;
    auto options = open_input(config.options_path, "options", empty);
    auto treasury = open_input(config.treasury_path, "treasury", empty);
    auto closes = open_input(config.closes_path, "closes", empty);
    return build_dataset(config, options, treasury, closes);
}

Dataset build_dataset(const PipelineConfig& config, std::istream& options_in,
                      std::istream& treasury_in, std::istream& closes_in) {
    config.validate();
    Dataset out;
    Manifest& manifest = out.manifest;
    manifest.noise_share_formula = kNoiseShareFormula;

    // ingest
    market::IngestResult<market::OptionRecord> chain;
    market::IngestResult<market::TreasuryCurveDay> curves;
    market::IngestResult<market::ClosePoint> closes;
    try {
        chain = market::load_option_records(options_in, config.option_columns, config.delimiter);
    } catch (const std::exception& e) {
        throw PipelineError("ingest", std::string("options: ") + e.what(), manifest);
    }
    StageCount ingest{"ingest", chain.rows_read, chain.rows.size(), {}};
    for (const auto& d : chain.diagnostics) {
        ++ingest.dropped[market::to_string(d.issue)];
    }
    manifest.stages.push_back(ingest);
    if (chain.rows.empty()) {
        throw PipelineError("ingest", "no option records (rows read: " +
                                          std::to_string(chain.rows_read) + ")",
                            manifest);
    }
    try {
        curves = market::load_treasury_curves(treasury_in, config.delimiter);
    } catch (const std::exception& e) {
        throw PipelineError("ingest", std::string("treasury: ") + e.what(), manifest);
    }
    try {
        closes = market::load_closes(closes_in, config.closes_date_column,
                                     config.closes_value_column, config.delimiter);
    } catch (const std::exception& e) {
        throw PipelineError("ingest", std::string("closes: ") + e.what(), manifest);
    }
    if (!curves.diagnostics.empty()) {
        manifest.notes.push_back("treasury rows rejected: " +
                                 std::to_string(curves.diagnostics.size()));
    }
    if (!closes.diagnostics.empty()) {
        manifest.notes.push_back("close rows rejected: " + std::to_string(closes.diagnostics.size()));
    }

    // activity filter
    auto active = market::filter_active(chain.rows);
    manifest.stages.push_back({"activity_filter", chain.rows.size(), active.size(),
                               {{"zero volume or open interest", chain.rows.size() - active.size()}}});

    // parameters and pricing
    std::sort(closes.rows.begin(), closes.rows.end(),
              [](const auto& a, const auto& b) { return a.date < b.date; });
    std::vector<market::VolatilityPoint> vol_points;
    try {
        vol_points = market::trailing_volatility(closes.rows, config.volatility_window);
    } catch (const std::exception& e) {
        throw PipelineError("pricing", std::string("volatility: ") + e.what(), manifest);
    }
    std::unordered_map<Date::rep, double> sigma_on;
    for (const auto& v : vol_points) {
        sigma_on[v.date.time_since_epoch().count()] = v.sigma;
    }
    const market::TreasuryHistory history(std::move(curves.rows));

    StageCount pricing_stage{"pricing", active.size(), 0, {}};
    std::vector<errors::ErrorRecord> priced;
    priced.reserve(active.size());
    std::size_t line = 0;
    for (const auto& rec : active) {
        ++line;
        auto skip = [&](market::RowIssue issue, const std::string& reason) {
            ++pricing_stage.dropped[reason];
            out.skipped.push_back({line, issue, reason});
        };
        const double tte = market::time_to_expiry(rec.trade_date, rec.expiration_date);
        if (tte <= 0.0) {
            skip(market::RowIssue::expired_before_trade, "zero time to expiry");
            continue;
        }
        const auto sig = sigma_on.find(rec.trade_date.time_since_epoch().count());
        if (sig == sigma_on.end()) {
            skip(market::RowIssue::bad_number, "no trailing volatility");
            continue;
        }
        if (!(sig->second > 0.0)) {
            skip(market::RowIssue::bad_number, "degenerate volatility");
            continue;
        }
        const auto* curve = history.curve_on(rec.trade_date);
        if (curve == nullptr) {
            skip(market::RowIssue::missing_tenor, "no treasury curve");
            continue;
        }
        const pricing::MarketParams params{rec.underlying_close,
                                           market::rate_for_maturity(*curve, tte),
                                           config.dividend_yield, sig->second};
        try {
            priced.push_back(errors::compute_errors(rec, params));
        } catch (const errors::ContractPricingError& e) {
            skip(market::RowIssue::bad_number, "pricing failure");
            manifest.notes.push_back(e.what());
        }
    }
    pricing_stage.rows_out = priced.size();
    manifest.stages.push_back(pricing_stage);

    // outliers
    auto filtered = errors::drop_outliers(priced, config.outlier_threshold);
    manifest.stages.push_back({"outliers", priced.size(), filtered.retained.size(),
                               {{"|error| above threshold", filtered.dropped}}});
    out.errors = std::move(filtered.retained);
    std::stable_sort(out.errors.begin(), out.errors.end(), [](const auto& a, const auto& b) {
        if (a.trade_date != b.trade_date) {
            return a.trade_date < b.trade_date;
        }
        return a.key < b.key;
    });
    manifest.error_rows = out.errors.size();
    manifest.error_model_observations = 2 * out.errors.size();

    econometrics::AnalysisTable pooled;
    pooled.rows.reserve(out.errors.size());
    for (const auto& e : out.errors) {
        pooled.rows.push_back({e.trade_date, e.key, static_cast<double>(e.volume), e.x_bs, e.x_baw});
    }
    if (config.lag_mode == LagMode::daily) {
        out.table = aggregate_daily(pooled);
        manifest.stages.push_back({"daily_aggregation", pooled.rows.size(), out.table.rows.size(),
                                   {{"merged into trade-date means",
                                     pooled.rows.size() - out.table.rows.size()}}});
    } else {
        out.table = std::move(pooled);
    }
    return out;
}

econometrics::AnalysisTable aggregate_daily(const econometrics::AnalysisTable& pooled) {
    econometrics::AnalysisTable out;
    std::size_t i = 0;
    while (i < pooled.rows.size()) {
        const Date day = pooled.rows[i].trade_date;
        double vol = 0.0;
        double bs = 0.0;
        double baw = 0.0;
        std::size_t count = 0;
        for (; i < pooled.rows.size() && pooled.rows[i].trade_date == day; ++i) {
            vol += pooled.rows[i].volume;
            bs += pooled.rows[i].x_bs;
            baw += pooled.rows[i].x_baw;
            ++count;
        }
        const double n = static_cast<double>(count);
        out.rows.push_back({day, {}, vol / n, bs / n, baw / n});
    }
    return out;
}

ModelResults run_models(const econometrics::AnalysisTable& table, std::size_t k, ModelSet models) {
    ModelResults out;
    if (models.bs_only) {
        out.bs_only = econometrics::fit_noise_model(table, k, {true, false});
    }
    if (models.baw_only) {
        out.baw_only = econometrics::fit_noise_model(table, k, {false, true});
    }
    if (models.combined) {
        out.combined = econometrics::fit_noise_model(table, k, {true, true});
    }
    return out;
}

NoiseShare estimate_noise_share(const econometrics::RegressionResult& combined,
                                const errors::SeriesStats& bs_stats,
                                const errors::SeriesStats& baw_stats) {
    const auto i_bs = combined.index_of("x_bs");
    const auto i_baw = combined.index_of("x_baw");
    if (!i_bs || !i_baw) {
        throw std::invalid_argument("noise share needs the combined model with x_bs and x_baw");
    }
    const auto p = static_cast<Eigen::Index>(combined.names.size());
    if (combined.covariance.rows() != p || combined.covariance.cols() != p) {
        throw std::invalid_argument("noise share needs the coefficient covariance matrix");
    }
    const auto a = static_cast<Eigen::Index>(*i_bs);
    const auto b = static_cast<Eigen::Index>(*i_baw);
    const double m_bs = bs_stats.mean;
    const double m_baw = baw_stats.mean;
    const double effect = combined.coefficients(a) * m_bs + combined.coefficients(b) * m_baw;
    const double variance = m_bs * m_bs * combined.covariance(a, a) +
                            m_baw * m_baw * combined.covariance(b, b) +
                            2.0 * m_bs * m_baw * combined.covariance(a, b);
    const double se = std::sqrt(std::max(variance, 0.0));

    NoiseShare out;
    out.signed_effect = effect;
    out.standard_error = se;
    out.point = std::abs(effect);
    const double half_width = 1.96 * se;
    const double raw_low = out.point - half_width;
    out.high = out.point + half_width;
    out.clamped = raw_low < 0.0;
    out.low = std::max(raw_low, 0.0);
    return out;
}

double marginal_models_share(const econometrics::RegressionResult& bs_only,
                             const econometrics::RegressionResult& baw_only,
                             const errors::SeriesStats& bs_stats,
                             const errors::SeriesStats& baw_stats) {
    return std::abs(bs_only.coefficient("x_bs") * bs_stats.mean +
                    baw_only.coefficient("x_baw") * baw_stats.mean);
}

NoiseReport run_analysis(const PipelineConfig& config) {
    return analyse_dataset(config, build_dataset(config));
}

NoiseReport analyse_dataset(const PipelineConfig& config, Dataset dataset) {
    NoiseReport report;
    report.config = config;
    report.manifest = std::move(dataset.manifest);
    Manifest& manifest = report.manifest;
    const auto& table = dataset.table;
    const std::size_t n = table.rows.size();

    if (n < 4) {
        throw PipelineError("analysis", "too few rows for analysis: " + std::to_string(n), manifest);
    }

    try {
        const auto x_bs = column(table, &econometrics::AnalysisRow::x_bs);
        const auto x_baw = column(table, &econometrics::AnalysisRow::x_baw);
        report.bs_stats = errors::descriptive_stats(x_bs);
        report.baw_stats = errors::descriptive_stats(x_baw);
    } catch (const std::exception& e) {
        throw PipelineError("statistics", e.what(), manifest);
    }

    // daily volume series for plotting
    for (const auto& r : aggregate_daily(table).rows) {
        report.daily_volume.push_back({r.trade_date, r.volume});
    }

    const auto log_v = log_volume(table);
    const std::size_t pacf_cap = (n - 2) / 2;
    std::size_t pacf_lag = std::max(config.max_pacf_lag, config.ar_order.value_or(0));
    if (pacf_lag > pacf_cap) {
        manifest.notes.push_back("PACF max lag reduced from " + std::to_string(pacf_lag) + " to " +
                                 std::to_string(pacf_cap) + " by series length");
        pacf_lag = pacf_cap;
    }
    try {
        report.pacf = econometrics::pacf(log_v, pacf_lag);
    } catch (const std::exception& e) {
        throw PipelineError("pacf", e.what(), manifest);
    }
    manifest.pacf_selected_order = econometrics::select_ar_order(report.pacf);

    std::size_t k = 0;
    if (config.ar_order) {
        k = *config.ar_order;
    } else {
        manifest.ar_order_auto = true;
        k = *manifest.pacf_selected_order;
        if (k == 0) {
            k = 1;
            manifest.notes.push_back("no significant PACF lag; using AR order 1");
        }
    }
    manifest.ar_order_used = k;
    if (n < k + 2) {
        throw PipelineError("lag_construction",
                            "need at least " + std::to_string(k + 2) + " rows, have " +
                                std::to_string(n),
                            manifest);
    }
    manifest.regression_observations = n - k;
    manifest.stages.push_back(
        {"lag_construction", n, n - k, {{"incomplete lag window", k}}});

    try {
        report.adf = econometrics::adf_test(log_v, k, false);
    } catch (const std::exception& e) {
        throw PipelineError("adf", e.what(), manifest);
    }

    try {
        auto design = econometrics::noise_model_design(table, k, {true, true});
        report.vif_names.assign(design.names.begin() + 1, design.names.end());
        const econometrics::Matrix regressors =
            design.design.rightCols(design.design.cols() - 1);
        report.vifs = econometrics::vif(regressors, report.vif_names);
    } catch (const econometrics::CollinearityError& e) {
        manifest.notes.push_back(std::string("VIF unavailable: ") + e.what());
        report.vif_names.clear();
    } catch (const std::exception& e) {
        throw PipelineError("vif", e.what(), manifest);
    }

    try {
        report.models = run_models(table, k, config.models);
    } catch (const std::exception& e) {
        throw PipelineError("regression", e.what(), manifest);
    }

    if (report.models.combined) {
        report.noise_share =
            estimate_noise_share(*report.models.combined, report.bs_stats, report.baw_stats);
    } else {
        manifest.notes.push_back("combined model not fitted; noise share not estimated");
    }
    if (report.models.bs_only && report.models.baw_only) {
        report.marginal_share = marginal_models_share(*report.models.bs_only,
                                                      *report.models.baw_only, report.bs_stats,
                                                      report.baw_stats);
    }
    return report;
}

}  // namespace sysnoise::pipeline
