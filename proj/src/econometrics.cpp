#include "sysnoise/econometrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace sysnoise::econometrics {

namespace {

constexpr double kRankThreshold = 1e-10;

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) {
            out += ", ";
        }
        out += s;
    }
    return out;
}

double two_sided_t_p(double t, int df) {
    if (df <= 0 || std::isnan(t)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double f_upper_p(double f, int df1, int df2) {
    if (df1 <= 0 || df2 <= 0 || std::isnan(f)) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isinf(f)) {
        return 0.0;
    }
    const boost::math::fisher_f dist(df1, df2);
    return boost::math::cdf(boost::math::complement(dist, std::max(f, 0.0)));
}

bool is_intercept_column(const Matrix& x, Eigen::Index col) {
    const double v = x(0, col);
    return v != 0.0 && (x.col(col).array() == v).all();
}

// Column-pivoted QR of the unit-norm-scaled design. Throws CollinearityError
// naming the pivoted-out columns when rank deficient.
struct ScaledQr {
    Eigen::ColPivHouseholderQR<Matrix> qr;
    Vector scale;
};

ScaledQr factorise(const Matrix& x, const std::vector<std::string>& names) {
    ScaledQr out;
    out.scale = x.colwise().norm().transpose();
    std::vector<std::string> zero_cols;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (out.scale(j) == 0.0) {
            zero_cols.push_back(names[static_cast<std::size_t>(j)]);
        }
    }
    if (!zero_cols.empty()) {
        throw CollinearityError(zero_cols);
    }
    const Matrix scaled = x * out.scale.cwiseInverse().asDiagonal();
    out.qr.setThreshold(kRankThreshold);
    out.qr.compute(scaled);
    const Eigen::Index rank = out.qr.rank();
    if (rank < x.cols()) {
        std::vector<std::string> dependent;
        const auto& perm = out.qr.colsPermutation().indices();
        for (Eigen::Index i = rank; i < x.cols(); ++i) {
            dependent.push_back(names[static_cast<std::size_t>(perm(i))]);
        }
        std::sort(dependent.begin(), dependent.end());
        throw CollinearityError(dependent);
    }
    return out;
}

// (Xs^T Xs)^{-1} in original column order, for the scaled design.
Matrix scaled_inverse_gram(const ScaledQr& f) {
    const Eigen::Index p = f.qr.cols();
    const Matrix r = f.qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
    const Matrix r_inv =
        r.triangularView<Eigen::Upper>().solve(Matrix::Identity(p, p));
    const Matrix perm_cov = r_inv * r_inv.transpose();
    const auto& perm = f.qr.colsPermutation();
    return perm * perm_cov * perm.transpose();
}

std::vector<std::string> default_names(std::vector<std::string> names, Eigen::Index cols) {
    if (names.empty()) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            names.push_back("x" + std::to_string(j));
        }
    }
    if (static_cast<Eigen::Index>(names.size()) != cols) {
        throw std::invalid_argument("ols_fit: names size does not match design columns");
    }
    return names;
}

}  // namespace

CollinearityError::CollinearityError(std::vector<std::string> columns)
    : std::runtime_error("design is rank deficient; dependent columns: " + join(columns)),
      columns_(std::move(columns)) {}

std::optional<std::size_t> RegressionResult::index_of(const std::string& name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - names.begin());
}

double RegressionResult::coefficient(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) {
        throw std::out_of_range("no regressor named " + name);
    }
    return coefficients(static_cast<Eigen::Index>(*i));
}

double RegressionResult::standard_error(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) {
        throw std::out_of_range("no regressor named " + name);
    }
    return standard_errors(static_cast<Eigen::Index>(*i));
}

double RegressionResult::p_value(const std::string& name) const {
    const auto i = index_of(name);
    if (!i) {
        throw std::out_of_range("no regressor named " + name);
    }
    return p_values(static_cast<Eigen::Index>(*i));
}

RegressionResult ols_fit(const Matrix& design, const Vector& response,
                         std::vector<std::string> names) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    if (response.size() != n) {
        throw std::invalid_argument("ols_fit: response length does not match design rows");
    }
    if (p == 0 || n <= p) {
        throw std::invalid_argument("ols_fit: need more rows than columns");
    }
    if (!design.allFinite() || !response.allFinite()) {
        throw std::invalid_argument("ols_fit: non-finite entry in design or response");
    }

    RegressionResult out;
    out.names = default_names(std::move(names), p);
    const ScaledQr f = factorise(design, out.names);

    const Vector beta_scaled = f.qr.solve(response);
    out.coefficients = beta_scaled.cwiseQuotient(f.scale);
    const Vector residuals = response - design * out.coefficients;
    out.residual_sum_of_squares = residuals.squaredNorm();
    out.n_observations = static_cast<std::size_t>(n);
    out.residual_df = static_cast<int>(n - p);

    const double sigma2 = out.residual_sum_of_squares / out.residual_df;
    out.residual_std_error = std::sqrt(sigma2);
    const Vector inv_scale = f.scale.cwiseInverse();
    out.covariance =
        sigma2 * inv_scale.asDiagonal() * scaled_inverse_gram(f) * inv_scale.asDiagonal();
    out.standard_errors = out.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    out.t_statistics = out.coefficients.cwiseQuotient(out.standard_errors);
    out.p_values.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        out.p_values(j) = two_sided_t_p(out.t_statistics(j), out.residual_df);
    }

    for (Eigen::Index j = 0; j < p; ++j) {
        if (is_intercept_column(design, j)) {
            out.has_intercept = true;
            break;
        }
    }
    const double tss = out.has_intercept
                           ? (response.array() - response.mean()).matrix().squaredNorm()
                           : response.squaredNorm();
    out.r_squared = tss > 0.0 ? 1.0 - out.residual_sum_of_squares / tss : 0.0;
    const int model_df = static_cast<int>(out.has_intercept ? p - 1 : p);
    const double denom_n = out.has_intercept ? static_cast<double>(n - 1) : static_cast<double>(n);
    out.adjusted_r_squared = 1.0 - (1.0 - out.r_squared) * denom_n / out.residual_df;
    out.f_df1 = model_df;
    out.f_df2 = out.residual_df;
    if (model_df > 0) {
        out.f_statistic = ((tss - out.residual_sum_of_squares) / model_df) / sigma2;
        out.f_p_value = f_upper_p(out.f_statistic, model_df, out.residual_df);
    } else {
        out.f_statistic = std::numeric_limits<double>::quiet_NaN();
        out.f_p_value = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

PacfResult pacf(std::span<const double> series, std::size_t max_lag) {
    if (max_lag == 0) {
        throw std::domain_error("pacf: max_lag must be at least 1");
    }
    if (series.size() < 2 * max_lag + 2) {
        throw std::domain_error("pacf: series too short for max_lag " + std::to_string(max_lag));
    }
    const std::size_t n = series.size();
    PacfResult out;
    out.n = n;
    out.significance_bound = 1.96 / std::sqrt(static_cast<double>(n));
    out.values.reserve(max_lag);
    for (std::size_t j = 1; j <= max_lag; ++j) {
        const auto rows = static_cast<Eigen::Index>(n - j);
        Matrix x(rows, static_cast<Eigen::Index>(j + 1));
        Vector y(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t t = j + static_cast<std::size_t>(r);
            y(r) = series[t];
            x(r, 0) = 1.0;
            for (std::size_t lag = 1; lag <= j; ++lag) {
                x(r, static_cast<Eigen::Index>(lag)) = series[t - lag];
            }
        }
        const RegressionResult fit = ols_fit(x, y);
        out.values.push_back(fit.coefficients(static_cast<Eigen::Index>(j)));
    }
    return out;
}

std::size_t select_ar_order(const PacfResult& result) {
    for (std::size_t j = result.values.size(); j > 0; --j) {
        if (std::abs(result.values[j - 1]) > result.significance_bound) {
            return j;
        }
    }
    return 0;
}

const char* to_string(PBound bound) noexcept {
    switch (bound) {
        case PBound::at_most_1pct: return "p<=0.01";
        case PBound::interpolated: return "interpolated";
        case PBound::at_least_10pct: return "p>=0.10";
    }
    return "unknown";
}

std::array<double, 3> adf_critical_values(std::size_t n_observations, bool include_trend) {
    // Dickey-Fuller tau distributions (Fuller 1976), the last row standing in
    // for the asymptotic values.
    static constexpr std::array<double, 6> sizes = {25, 50, 100, 250, 500, 100000};
    static constexpr std::array<std::array<double, 3>, 6> constant_only = {{
        {-3.75, -3.00, -2.63},
        {-3.58, -2.93, -2.60},
        {-3.51, -2.89, -2.58},
        {-3.46, -2.88, -2.57},
        {-3.44, -2.87, -2.57},
        {-3.43, -2.86, -2.57},
    }};
    static constexpr std::array<std::array<double, 3>, 6> with_trend = {{
        {-4.38, -3.60, -3.24},
        {-4.15, -3.50, -3.18},
        {-4.04, -3.45, -3.15},
        {-3.99, -3.43, -3.13},
        {-3.98, -3.42, -3.13},
        {-3.96, -3.41, -3.12},
    }};
    const auto& table = include_trend ? with_trend : constant_only;
    const double n = static_cast<double>(n_observations);
    if (n <= sizes.front()) {
        return table.front();
    }
    if (n >= sizes.back()) {
        return table.back();
    }
    std::size_t hi = 1;
    while (sizes[hi] < n) {
        ++hi;
    }
    const double w = (n - sizes[hi - 1]) / (sizes[hi] - sizes[hi - 1]);
    std::array<double, 3> out{};
    for (std::size_t c = 0; c < 3; ++c) {
        out[c] = (1.0 - w) * table[hi - 1][c] + w * table[hi][c];
    }
    return out;
}

AdfResult adf_test(std::span<const double> series, std::size_t lag_order, bool include_trend) {
    const std::size_t extra = include_trend ? 1 : 0;
    const std::size_t coefficients = 2 + extra + lag_order;
    // rows = n - 1 - lag_order must exceed the coefficient count
    if (series.size() < lag_order + 3 || series.size() - 1 - lag_order <= coefficients) {
        throw std::domain_error("adf_test: series too short for lag order " +
                                std::to_string(lag_order));
    }
    const std::size_t n = series.size();
    const auto rows = static_cast<Eigen::Index>(n - 1 - lag_order);
    Matrix x(rows, static_cast<Eigen::Index>(coefficients));
    Vector y(rows);
    std::vector<std::string> names = {"const", "level_lag1"};
    if (include_trend) {
        names.emplace_back("trend");
    }
    for (std::size_t i = 1; i <= lag_order; ++i) {
        names.push_back("diff_lag" + std::to_string(i));
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = lag_order + 1 + static_cast<std::size_t>(r);
        y(r) = series[t] - series[t - 1];
        Eigen::Index c = 0;
        x(r, c++) = 1.0;
        x(r, c++) = series[t - 1];
        if (include_trend) {
            x(r, c++) = static_cast<double>(t);
        }
        for (std::size_t i = 1; i <= lag_order; ++i) {
            x(r, c++) = series[t - i] - series[t - i - 1];
        }
    }
    const RegressionResult fit = ols_fit(x, y, names);

    AdfResult out;
    out.statistic = fit.t_statistics(1);
    out.lag_order = lag_order;
    out.includes_trend = include_trend;
    out.n_observations = static_cast<std::size_t>(rows);
    out.critical_values = adf_critical_values(out.n_observations, include_trend);
    const auto& cv = out.critical_values;
    if (out.statistic <= cv[0]) {
        out.p_bound = PBound::at_most_1pct;
        out.p_value = 0.01;
    } else if (out.statistic >= cv[2]) {
        out.p_bound = PBound::at_least_10pct;
        out.p_value = 0.10;
    } else if (out.statistic <= cv[1]) {
        out.p_value = 0.01 + 0.04 * (out.statistic - cv[0]) / (cv[1] - cv[0]);
    } else {
        out.p_value = 0.05 + 0.05 * (out.statistic - cv[1]) / (cv[2] - cv[1]);
    }
    out.reject_unit_root_at_5pct = out.statistic < cv[1];
    return out;
}

std::vector<double> vif(const Matrix& regressors, const std::vector<std::string>& names_in) {
    const Eigen::Index n = regressors.rows();
    const Eigen::Index p = regressors.cols();
    if (p < 2) {
        throw std::invalid_argument("vif: need at least two regressors");
    }
    if (n <= p + 1) {
        throw std::invalid_argument("vif: need more rows than regressors plus intercept");
    }
    if (!regressors.allFinite()) {
        throw std::invalid_argument("vif: non-finite entry");
    }
    const std::vector<std::string> names = default_names(names_in, p);
    const Matrix centred = regressors.rowwise() - regressors.colwise().mean();
    // after unit-norm scaling inside factorise, Xs^T Xs is the correlation matrix
    const ScaledQr f = factorise(centred, names);
    const Matrix inv_corr = scaled_inverse_gram(f);
    std::vector<double> out(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        out[static_cast<std::size_t>(j)] = inv_corr(j, j);
    }
    return out;
}

NoiseDesign noise_model_design(const AnalysisTable& table, std::size_t k, ErrorColumns columns) {
    if (k == 0) {
        throw std::invalid_argument("noise model: lag order must be at least 1");
    }
    const std::size_t n = table.rows.size();
    if (n < k + 2) {
        throw std::invalid_argument("noise model: need at least k + 2 rows");
    }
    std::vector<double> log_v(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(table.rows[i].volume >= 1.0)) {
            throw std::invalid_argument("noise model: volumes must be >= 1 for the log transform");
        }
        log_v[i] = std::log(table.rows[i].volume);
    }

    NoiseDesign out;
    out.names.emplace_back("const");
    for (std::size_t lag = 1; lag <= k; ++lag) {
        out.names.push_back("lag" + std::to_string(lag));
    }
    if (columns.bs) {
        out.names.emplace_back("x_bs");
    }
    if (columns.baw) {
        out.names.emplace_back("x_baw");
    }
    const auto rows = static_cast<Eigen::Index>(n - k);
    out.design.resize(rows, static_cast<Eigen::Index>(out.names.size()));
    out.response.resize(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const std::size_t t = k + static_cast<std::size_t>(r);
        out.response(r) = log_v[t];
        Eigen::Index c = 0;
        out.design(r, c++) = 1.0;
        for (std::size_t lag = 1; lag <= k; ++lag) {
            out.design(r, c++) = log_v[t - lag];
        }
        if (columns.bs) {
            out.design(r, c++) = table.rows[t].x_bs;
        }
        if (columns.baw) {
            out.design(r, c++) = table.rows[t].x_baw;
        }
    }
    return out;
}

RegressionResult fit_noise_model(const AnalysisTable& table, std::size_t k,
                                 ErrorColumns columns) {
    NoiseDesign d = noise_model_design(table, k, columns);
    return ols_fit(d.design, d.response, std::move(d.names));
}

std::string significance_stars(double p_value) {
    if (!(p_value < 0.10)) {
        return "";
    }
    if (p_value < 0.01) {
        return "***";
    }
    return p_value < 0.05 ? "**" : "*";
}

}  // namespace sysnoise::econometrics
