#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sysnoise/dates.hpp"
#include "sysnoise/pricing_errors.hpp"

namespace sysnoise::econometrics {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// The design matrix is rank deficient. columns() names the regressors that
/// are linear combinations of the others.
class CollinearityError : public std::runtime_error {
public:
    explicit CollinearityError(std::vector<std::string> columns);

    [[nodiscard]] const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::vector<std::string> columns_;
};

struct RegressionResult {
    std::vector<std::string> names;
    Vector coefficients;
    Vector standard_errors;
    Vector t_statistics;
    Vector p_values;  // two-sided, Student-t with residual_df
    Matrix covariance;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double f_statistic = 0.0;
    double f_p_value = 0.0;
    int f_df1 = 0;
    int f_df2 = 0;
    double residual_std_error = 0.0;
    int residual_df = 0;
    std::size_t n_observations = 0;
    double residual_sum_of_squares = 0.0;
    bool has_intercept = false;

    [[nodiscard]] std::optional<std::size_t> index_of(const std::string& name) const;
    /// Throws std::out_of_range for unknown names.
    [[nodiscard]] double coefficient(const std::string& name) const;
    [[nodiscard]] double standard_error(const std::string& name) const;
    [[nodiscard]] double p_value(const std::string& name) const;
};

/// Ordinary least squares through a column-pivoted Householder QR, with
/// classical homoskedastic inference. `design` must carry its own intercept
/// column if one is wanted; a constant non-zero column is recognised as the
/// intercept for R^2 and the F test. Missing names default to x0, x1, ...
/// Throws std::invalid_argument for non-finite entries or rows <= columns.
[[nodiscard]] RegressionResult ols_fit(const Matrix& design, const Vector& response,
                                       std::vector<std::string> names = {});

// --- partial autocorrelation ---------------------------------------------

struct PacfResult {
    std::vector<double> values;  // values[j - 1] is the lag-j partial autocorrelation
    double significance_bound = 0.0;  // 1.96 / sqrt(n)
    std::size_t n = 0;
};

/// Lag-j value is the last slope of an OLS AR(j) fit with intercept, for
/// j = 1..max_lag. Needs at least 2 * max_lag + 2 observations so the
/// largest fit has more rows than coefficients; throws std::domain_error
/// otherwise.
[[nodiscard]] PacfResult pacf(std::span<const double> series, std::size_t max_lag);

/// Largest lag whose |value| strictly exceeds the bound; 0 if none does.
[[nodiscard]] std::size_t select_ar_order(const PacfResult& pacf);

// --- augmented Dickey-Fuller --------------------------------------------

enum class PBound { at_most_1pct, interpolated, at_least_10pct };

[[nodiscard]] const char* to_string(PBound bound) noexcept;

struct AdfResult {
    double statistic = 0.0;
    std::size_t lag_order = 0;
    bool includes_trend = false;
    PBound p_bound = PBound::interpolated;
    double p_value = 0.0;  // 0.01 / 0.10 at the table edges
    std::array<double, 3> critical_values{};  // 1%, 5%, 10%
    bool reject_unit_root_at_5pct = false;
    std::size_t n_observations = 0;
};

/// Dickey-Fuller critical values (1%, 5%, 10%) for a given regression sample
/// size, linearly interpolated between tabulated sizes.
[[nodiscard]] std::array<double, 3> adf_critical_values(std::size_t n_observations,
                                                        bool include_trend);

/// Regresses dV_t on [1, V_{t-1}, (t), dV_{t-1} .. dV_{t-p}] and reports the
/// t-ratio on V_{t-1}. H0: unit root; HA: stationary.
[[nodiscard]] AdfResult adf_test(std::span<const double> series, std::size_t lag_order,
                                 bool include_trend = false);

// --- variance inflation -------------------------------------------------

/// VIF_j = 1 / (1 - R^2_j) of column j on the others plus an intercept,
/// read off the diagonal of the inverse correlation matrix. `regressors`
/// must not include an intercept. Throws CollinearityError on exact
/// dependence (including a constant column).
[[nodiscard]] std::vector<double> vif(const Matrix& regressors,
                                      const std::vector<std::string>& names = {});

// --- volume model -------------------------------------------------------

/// One analysis row, already in lag order.
struct AnalysisRow {
    Date trade_date;
    errors::ContractKey key;  // default key in daily-aggregate mode
    double volume = 0.0;
    double x_bs = 0.0;
    double x_baw = 0.0;
};

struct AnalysisTable {
    std::vector<AnalysisRow> rows;
};

struct ErrorColumns {
    bool bs = true;
    bool baw = true;
};

struct NoiseDesign {
    Matrix design;
    Vector response;
    std::vector<std::string> names;
};

/// Response log(V_t) for t = k..rows-1; regressors const, lag1..lagk
/// (logged), then x_bs and/or x_baw untransformed.
[[nodiscard]] NoiseDesign noise_model_design(const AnalysisTable& table, std::size_t k,
                                             ErrorColumns columns);

/// OLS fit of the log-volume AR(k) model with pricing-error shocks.
/// n_observations == rows - k.
[[nodiscard]] RegressionResult fit_noise_model(const AnalysisTable& table, std::size_t k,
                                               ErrorColumns columns);

/// Significance stars at the 10/5/1 percent levels.
[[nodiscard]] std::string significance_stars(double p_value);

}  // namespace sysnoise::econometrics
