#include "sysnoise/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sysnoise/delimited.hpp"
#include "sysnoise/random.hpp"

namespace sysnoise::report {

namespace {

using econometrics::RegressionResult;
using nlohmann::ordered_json;
using pipeline::NoiseReport;

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    std::string s = buf;
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') {
        s.erase(0, 1);
    }
    return s;
}

std::string with_commas(const std::string& number) {
    const auto dot = number.find('.');
    std::string whole = number.substr(0, dot);
    const std::string rest = dot == std::string::npos ? "" : number.substr(dot);
    const bool negative = !whole.empty() && whole.front() == '-';
    if (negative) {
        whole.erase(0, 1);
    }
    std::string grouped;
    for (std::size_t i = 0; i < whole.size(); ++i) {
        if (i > 0 && (whole.size() - i) % 3 == 0) {
            grouped += ',';
        }
        grouped += whole[i];
    }
    return (negative ? "-" : "") + grouped + rest;
}

struct Cell {
    std::string estimate;
    std::string error;
};

struct Row {
    std::string label;
    std::array<Cell, 3> cells;
};

Cell coefficient_cell(const std::optional<RegressionResult>& model, const std::string& name) {
    if (!model) {
        return {};
    }
    const auto idx = model->index_of(name);
    if (!idx) {
        return {};
    }
    const auto i = static_cast<Eigen::Index>(*idx);
    return {fixed(model->coefficients(i), 3) + econometrics::significance_stars(model->p_values(i)),
            "(" + fixed(model->standard_errors(i), 3) + ")"};
}

std::array<const std::optional<RegressionResult>*, 3> columns(const NoiseReport& r) {
    return {&r.models.bs_only, &r.models.baw_only, &r.models.combined};
}

ordered_json to_json(const RegressionResult& m) {
    ordered_json j;
    j["names"] = m.names;
    auto vec = [](const econometrics::Vector& v) {
        return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["coefficients"] = vec(m.coefficients);
    j["standard_errors"] = vec(m.standard_errors);
    j["t_statistics"] = vec(m.t_statistics);
    j["p_values"] = vec(m.p_values);
    ordered_json cov = ordered_json::array();
    for (Eigen::Index r = 0; r < m.covariance.rows(); ++r) {
        std::vector<double> row(static_cast<std::size_t>(m.covariance.cols()));
        for (Eigen::Index c = 0; c < m.covariance.cols(); ++c) {
            row[static_cast<std::size_t>(c)] = m.covariance(r, c);
        }
        cov.push_back(row);
    }
    j["covariance"] = std::move(cov);
    j["r_squared"] = m.r_squared;
    j["adjusted_r_squared"] = m.adjusted_r_squared;
    j["f_statistic"] = m.f_statistic;
    j["f_p_value"] = m.f_p_value;
    j["f_df"] = {m.f_df1, m.f_df2};
    j["residual_std_error"] = m.residual_std_error;
    j["residual_df"] = m.residual_df;
    j["n_observations"] = m.n_observations;
    j["residual_sum_of_squares"] = m.residual_sum_of_squares;
    return j;
}

ordered_json to_json(const errors::SeriesStats& s) {
    ordered_json j;
    j["n"] = s.n;
    j["mean"] = s.mean;
    j["sd"] = s.sd_defined ? ordered_json(s.sd) : ordered_json(nullptr);
    j["min"] = s.min;
    j["max"] = s.max;
    return j;
}

ordered_json to_json(const pipeline::PipelineConfig& c) {
    ordered_json j;
    j["options_path"] = c.options_path.generic_string();
    j["treasury_path"] = c.treasury_path.generic_string();
    j["closes_path"] = c.closes_path.generic_string();
    const auto& oc = c.option_columns;
    j["option_columns"] = {{"trade_date", oc.trade_date}, {"expiration", oc.expiration},
                           {"type", oc.type},             {"strike", oc.strike},
                           {"bid", oc.bid},               {"ask", oc.ask},
                           {"volume", oc.volume},         {"open_interest", oc.open_interest},
                           {"underlying_close", oc.underlying_close}};
    j["closes_date_column"] = c.closes_date_column;
    j["closes_value_column"] = c.closes_value_column;
    j["delimiter"] = std::string(1, c.delimiter);
    j["volatility_window"] = c.volatility_window;
    j["outlier_threshold"] = c.outlier_threshold;
    j["dividend_yield"] = c.dividend_yield;
    j["lag_mode"] = pipeline::to_string(c.lag_mode);
    j["ar_order"] = c.ar_order ? ordered_json(*c.ar_order) : ordered_json("auto");
    j["max_pacf_lag"] = c.max_pacf_lag;
    j["models"] = {{"bs_only", c.models.bs_only},
                   {"baw_only", c.models.baw_only},
                   {"combined", c.models.combined}};
    j["seed"] = c.seed;
    return j;
}

ordered_json to_json(const pipeline::Manifest& m) {
    ordered_json j;
    ordered_json stages = ordered_json::array();
    for (const auto& s : m.stages) {
        ordered_json dropped = ordered_json::object();
        for (const auto& [reason, count] : s.dropped) {
            dropped[reason] = count;
        }
        stages.push_back({{"stage", s.stage},
                          {"rows_in", s.rows_in},
                          {"rows_out", s.rows_out},
                          {"dropped", std::move(dropped)},
                          {"reconciles", s.reconciles()}});
    }
    j["stages"] = std::move(stages);
    j["ar_order_used"] = m.ar_order_used;
    j["ar_order_auto"] = m.ar_order_auto;
    j["pacf_selected_order"] =
        m.pacf_selected_order ? ordered_json(*m.pacf_selected_order) : ordered_json(nullptr);
    j["regression_observations"] = m.regression_observations;
    j["error_rows"] = m.error_rows;
    j["error_model_observations"] = m.error_model_observations;
    j["noise_share_formula"] = m.noise_share_formula;
    j["rate_matching"] = m.rate_matching;
    j["day_count"] = m.day_count;
    j["rng"] = kRngAlgorithm;
    j["notes"] = m.notes;
    return j;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw std::runtime_error("failed writing output file: " + path.string());
    }
}

}  // namespace

std::string render_table(const NoiseReport& report) {
    const auto models = columns(report);
    std::vector<Row> rows;
    rows.push_back({"Black-Scholes Errors", {}});
    rows.push_back({"Barone-Whaley Errors", {}});
    for (std::size_t c = 0; c < 3; ++c) {
        rows[0].cells[c] = coefficient_cell(*models[c], "x_bs");
        rows[1].cells[c] = coefficient_cell(*models[c], "x_baw");
    }
    for (std::size_t lag = 1; lag <= report.manifest.ar_order_used; ++lag) {
        Row row{"Lag " + std::to_string(lag), {}};
        for (std::size_t c = 0; c < 3; ++c) {
            row.cells[c] = coefficient_cell(*models[c], "lag" + std::to_string(lag));
        }
        rows.push_back(std::move(row));
    }
    Row constant{"Constant", {}};
    for (std::size_t c = 0; c < 3; ++c) {
        constant.cells[c] = coefficient_cell(*models[c], "const");
    }
    rows.push_back(std::move(constant));

    std::vector<std::pair<std::string, std::array<std::string, 3>>> stats = {
        {"Observations", {}}, {"R2", {}}, {"Adjusted R2", {}},
        {"Residual Std. Error", {}}, {"F Statistic", {}}};
    for (std::size_t c = 0; c < 3; ++c) {
        if (!*models[c]) {
            continue;
        }
        const auto& m = **models[c];
        stats[0].second[c] = with_commas(std::to_string(m.n_observations));
        stats[1].second[c] = fixed(m.r_squared, 3);
        stats[2].second[c] = fixed(m.adjusted_r_squared, 3);
        stats[3].second[c] =
            fixed(m.residual_std_error, 3) + " (df = " + std::to_string(m.residual_df) + ")";
        stats[4].second[c] = with_commas(fixed(m.f_statistic, 3)) +
                             econometrics::significance_stars(m.f_p_value) + " (df = " +
                             std::to_string(m.f_df1) + "; " + std::to_string(m.f_df2) + ")";
    }

    std::size_t label_width = 0;
    std::array<std::size_t, 3> width{3, 3, 3};
    for (const auto& r : rows) {
        label_width = std::max(label_width, r.label.size());
        for (std::size_t c = 0; c < 3; ++c) {
            width[c] = std::max({width[c], r.cells[c].estimate.size(), r.cells[c].error.size()});
        }
    }
    for (const auto& [label, cells] : stats) {
        label_width = std::max(label_width, label.size());
        for (std::size_t c = 0; c < 3; ++c) {
            width[c] = std::max(width[c], cells[c].size());
        }
    }

    std::ostringstream out;
    auto line = [&](const std::string& label, const std::array<std::string, 3>& cells) {
        std::string text = label + std::string(label_width - label.size(), ' ');
        for (std::size_t c = 0; c < 3; ++c) {
            text += "  " + std::string(width[c] - cells[c].size(), ' ') + cells[c];
        }
        while (!text.empty() && text.back() == ' ') {
            text.pop_back();
        }
        out << text << '\n';
    };
    std::size_t total = label_width;
    for (auto w : width) {
        total += w + 2;
    }
    const std::string rule(total, '-');

    out << "Autoregressive-" << report.manifest.ar_order_used
        << " model of log volume (lags are logged)\n";
    out << "Lags taken over: " << pipeline::to_string(report.config.lag_mode) << "\n";
    out << rule << '\n';
    line("", {"(1)", "(2)", "(3)"});
    out << rule << '\n';
    for (const auto& r : rows) {
        line(r.label, {r.cells[0].estimate, r.cells[1].estimate, r.cells[2].estimate});
        line("", {r.cells[0].error, r.cells[1].error, r.cells[2].error});
    }
    out << rule << '\n';
    for (const auto& [label, cells] : stats) {
        line(label, cells);
    }
    out << rule << '\n';
    out << "Notes: ***Significant at the 1 percent level.\n"
           "       **Significant at the 5 percent level.\n"
           "       *Significant at the 10 percent level.\n";
    if (report.noise_share) {
        const auto& s = *report.noise_share;
        out << "\nNoise share of volume: " << fixed(100.0 * s.point, 2) << "% (95% CI "
            << fixed(100.0 * s.low, 2) << "% to " << fixed(100.0 * s.high, 2) << "%"
            << (s.clamped ? ", lower bound clamped at 0" : "") << ")\n";
    }
    if (report.marginal_share) {
        out << "Marginal-models share: " << fixed(100.0 * *report.marginal_share, 2) << "%\n";
    }
    return out.str();
}

std::string render_json(const NoiseReport& report) {
    ordered_json j;
    j["config"] = to_json(report.config);
    j["manifest"] = to_json(report.manifest);
    ordered_json models;
    const char* keys[] = {"bs_only", "baw_only", "combined"};
    const auto cols = columns(report);
    for (std::size_t c = 0; c < 3; ++c) {
        models[keys[c]] = *cols[c] ? to_json(**cols[c]) : ordered_json(nullptr);
    }
    j["models"] = std::move(models);
    j["error_stats"] = {{"x_bs", to_json(report.bs_stats)}, {"x_baw", to_json(report.baw_stats)}};
    ordered_json vif = ordered_json::object();
    for (std::size_t i = 0; i < report.vif_names.size() && i < report.vifs.size(); ++i) {
        vif[report.vif_names[i]] = report.vifs[i];
    }
    j["vif"] = std::move(vif);
    const auto& a = report.adf;
    j["adf"] = {{"statistic", a.statistic},
                {"lag_order", a.lag_order},
                {"includes_trend", a.includes_trend},
                {"p_value", a.p_value},
                {"p_bound", econometrics::to_string(a.p_bound)},
                {"critical_values",
                 {{"1%", a.critical_values[0]}, {"5%", a.critical_values[1]}, {"10%", a.critical_values[2]}}},
                {"reject_unit_root_at_5pct", a.reject_unit_root_at_5pct},
                {"n_observations", a.n_observations}};
    j["pacf"] = {{"values", report.pacf.values},
                 {"significance_bound", report.pacf.significance_bound},
                 {"n", report.pacf.n}};
    if (report.noise_share) {
        const auto& s = *report.noise_share;
        j["noise_share"] = {{"point", s.point},
                            {"low", s.low},
                            {"high", s.high},
                            {"signed_effect", s.signed_effect},
                            {"standard_error", s.standard_error},
                            {"clamped", s.clamped}};
    } else {
        j["noise_share"] = nullptr;
    }
    j["marginal_models_share"] =
        report.marginal_share ? ordered_json(*report.marginal_share) : ordered_json(nullptr);
    return j.dump(2) + "\n";
}

std::string render_plot_data(const NoiseReport& report) {
    std::ostringstream out;
    out << "series,index,label,value,lower,upper\n";
    for (std::size_t i = 0; i < report.daily_volume.size(); ++i) {
        const auto& p = report.daily_volume[i];
        out << "volume," << i + 1 << ',' << format_iso_date(p.date) << ','
            << io::format_double(p.volume) << ",,\n";
    }
    const double bound = report.pacf.significance_bound;
    for (std::size_t j = 0; j < report.pacf.values.size(); ++j) {
        out << "pacf," << j + 1 << ",lag" << j + 1 << ',' << io::format_double(report.pacf.values[j])
            << ',' << io::format_double(-bound) << ',' << io::format_double(bound) << '\n';
    }
    return out.str();
}

Sinks Sinks::in_directory(const std::filesystem::path& dir) {
    return {dir / "table.txt", dir / "report.json", dir / "plot_data.csv"};
}

void emit_report(const NoiseReport& report, const Sinks& sinks) {
    write_file(sinks.table, render_table(report));
    write_file(sinks.json, render_json(report));
    write_file(sinks.plot_data, render_plot_data(report));
}

}  // namespace sysnoise::report
