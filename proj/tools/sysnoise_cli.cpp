// sysnoise: option pricing, pricing-error volume analysis and synthetic markets.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sysnoise/delimited.hpp"
#include "sysnoise/econometrics.hpp"
#include "sysnoise/noise_pipeline.hpp"
#include "sysnoise/pricing_models.hpp"
#include "sysnoise/report.hpp"
#include "sysnoise/synthetic_market.hpp"

namespace {

using namespace sysnoise;

constexpr int kExitFailure = 1;

std::string default_out_dir() {
    const char* env = std::getenv("SYSNOISE_OUT_DIR");
    return env != nullptr && *env != '\0' ? env : ".";
}

void print_resolved(const CLI::App& app) {
    std::cerr << "# resolved config\n" << app.config_to_str(true, false) << "#\n";
}

// --- price ----------------------------------------------------------------

struct PriceArgs {
    std::string type = "call";
    std::string style = "auto";
    std::string model = "bs";
    double spot = 0.0;
    double strike = 0.0;
    double rate = 0.0;
    double div_yield = 0.0;
    double sigma = 0.0;
    double tte = 0.0;
    int steps = 10000;
};

void add_price(CLI::App& app, PriceArgs& a) {
    auto* cmd = app.add_subcommand("price", "Price one option with BS, BAW or a CRR tree");
    cmd->add_option("--model", a.model, "Pricing model")->check(CLI::IsMember({"bs", "baw", "crr"}));
    cmd->add_option("--type", a.type, "Option type")->check(CLI::IsMember({"call", "put"}));
    cmd->add_option("--style", a.style,
                    "Exercise style; auto means european for bs and american otherwise")
        ->check(CLI::IsMember({"auto", "european", "american"}));
    cmd->add_option("--spot", a.spot, "Underlying price")->required();
    cmd->add_option("--strike", a.strike, "Strike price")->required();
    cmd->add_option("--rate", a.rate, "Continuously compounded risk-free rate");
    cmd->add_option("--div-yield", a.div_yield, "Continuous dividend yield");
    cmd->add_option("--sigma", a.sigma, "Annualised volatility")->required();
    cmd->add_option("--tte", a.tte, "Time to expiry in years")->required();
    cmd->add_option("--steps", a.steps, "CRR tree steps")->check(CLI::PositiveNumber);
}

int run_price(const CLI::App& cmd, const PriceArgs& a) {
    print_resolved(cmd);
    const auto type = a.type == "call" ? pricing::OptionType::call : pricing::OptionType::put;
    auto style = pricing::ExerciseStyle::american;
    if (a.style == "european" || (a.style == "auto" && a.model == "bs")) {
        style = pricing::ExerciseStyle::european;
    }
    if (a.model == "baw" && style == pricing::ExerciseStyle::european) {
        throw CLI::ValidationError("--style", "baw prices american exercise only");
    }
    const pricing::OptionContractSpec spec{type, style, a.strike, a.tte};
    const pricing::MarketParams params{a.spot, a.rate, a.div_yield, a.sigma};
    try {
        pricing::validate(spec);
        pricing::validate(params);
    } catch (const std::exception& e) {
        throw CLI::ValidationError("price", e.what());
    }

    std::cout << std::fixed << std::setprecision(6);
    if (a.model == "bs") {
        std::cout << "price: " << pricing::bs_price(pricing::european_twin(spec), params) << '\n';
    } else if (a.model == "crr") {
        std::cout << "price: " << pricing::crr_binomial_price(spec, params, a.steps) << '\n';
    } else {
        const auto eval = pricing::baw_evaluate(spec, params);
        std::cout << "price: " << eval.price << '\n';
        const auto& im = eval.intermediates;
        if (std::isfinite(im.critical_price)) {
            std::cout << "critical_price: " << im.critical_price << '\n';
        } else {
            std::cout << "critical_price: inf\n";
        }
        std::cout << "iterations: " << im.iterations_used << '\n';
    }
    return 0;
}

// --- analyze --------------------------------------------------------------

struct AnalyzeArgs {
    pipeline::PipelineConfig config;
    std::string delimiter = ",";
    std::string lag_mode = "pooled";
    std::string ar_order = std::to_string(pipeline::kPaperArOrder);
    std::vector<std::string> models = {"bs", "baw", "combined"};
    std::string out_dir = default_out_dir();
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
    auto& c = a.config;
    auto& oc = c.option_columns;
    auto* cmd = app.add_subcommand("analyze", "Price an option chain and fit the volume models");
    cmd->add_option("--options", c.options_path, "Option chain file")->required();
    cmd->add_option("--treasury", c.treasury_path, "Treasury par-yield curve file")->required();
    cmd->add_option("--closes", c.closes_path, "Underlying closing prices file")->required();
    cmd->add_option("--col-trade-date", oc.trade_date, "Option chain column: trade date");
    cmd->add_option("--col-expiration", oc.expiration, "Option chain column: expiration date");
    cmd->add_option("--col-type", oc.type, "Option chain column: call/put");
    cmd->add_option("--col-strike", oc.strike, "Option chain column: strike");
    cmd->add_option("--col-bid", oc.bid, "Option chain column: bid");
    cmd->add_option("--col-ask", oc.ask, "Option chain column: ask");
    cmd->add_option("--col-volume", oc.volume, "Option chain column: volume");
    cmd->add_option("--col-open-interest", oc.open_interest, "Option chain column: open interest");
    cmd->add_option("--col-underlying-close", oc.underlying_close,
                    "Option chain column: underlying close");
    cmd->add_option("--closes-date-column", c.closes_date_column, "Closes file date column");
    cmd->add_option("--closes-value-column", c.closes_value_column, "Closes file price column");
    cmd->add_option("--delimiter", a.delimiter, "Field delimiter for all inputs")
        ->check([](const std::string& s) {
            return s.size() == 1 || s == "\\t" ? std::string{} : "delimiter must be one character";
        });
    cmd->add_option("--vol-window", c.volatility_window, "Trailing volatility window (days)")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000}));
    cmd->add_option("--outlier-threshold", c.outlier_threshold, "Drop rows with |error| above this")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--div-yield", c.dividend_yield, "Continuous dividend yield")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--lag-mode", a.lag_mode, "Lag rows pooled per contract or per trade date")
        ->check(CLI::IsMember({"pooled", "daily"}));
    cmd->add_option("--ar-order", a.ar_order, "AR order, or auto to select by PACF")
        ->check([](const std::string& s) {
            if (s == "auto") {
                return std::string{};
            }
            const auto k = io::parse_int(s);
            return k && *k >= 1 ? std::string{} : "must be a positive integer or auto";
        });
    cmd->add_option("--max-pacf-lag", c.max_pacf_lag, "Largest PACF lag")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--models", a.models, "Models to fit")
        ->check(CLI::IsMember({"bs", "baw", "combined"}))
        ->delimiter(',');
    cmd->add_option("--seed", c.seed, "Random seed (recorded in the manifest)");
    cmd->add_option("--out-dir", a.out_dir, "Output directory (default from SYSNOISE_OUT_DIR)");
}

int run_analyze(const CLI::App& cmd, AnalyzeArgs& a) {
    print_resolved(cmd);
    auto& c = a.config;
    c.delimiter = a.delimiter == "\\t" ? '\t' : a.delimiter.front();
    c.lag_mode = *pipeline::parse_lag_mode(a.lag_mode);
    c.ar_order = a.ar_order == "auto"
                     ? std::nullopt
                     : std::optional<std::size_t>(static_cast<std::size_t>(*io::parse_int(a.ar_order)));
    c.models = {false, false, false};
    for (const auto& m : a.models) {
        (m == "bs" ? c.models.bs_only : m == "baw" ? c.models.baw_only : c.models.combined) = true;
    }

    pipeline::NoiseReport result;
    try {
        result = pipeline::run_analysis(c);
    } catch (const pipeline::PipelineError& e) {
        std::cerr << "error: stage " << e.stage() << ": " << e.what() << '\n';
        return kExitFailure;
    }
    for (const auto& s : result.manifest.stages) {
        std::cerr << "stage " << s.stage << ": " << s.rows_in << " -> " << s.rows_out << '\n';
    }
    std::cerr << "ar order used: " << result.manifest.ar_order_used
              << (result.manifest.ar_order_auto ? " (PACF-selected)" : "") << '\n';

    std::filesystem::create_directories(a.out_dir);
    const auto sinks = report::Sinks::in_directory(a.out_dir);
    report::emit_report(result, sinks);
    std::cout << report::render_table(result);
    std::cout << "wrote " << sinks.table.string() << ", " << sinks.json.string() << ", "
              << sinks.plot_data.string() << '\n';
    return 0;
}

// --- synth ----------------------------------------------------------------

struct SynthArgs {
    synthetic::SynthConfig config;
    double target_share = -1.0;
    std::string out_dir = default_out_dir();
};

void add_synth(CLI::App& app, SynthArgs& a) {
    auto& c = a.config;
    auto* cmd = app.add_subcommand("synth", "Write a synthetic option market with planted effects");
    cmd->add_option("--seed", c.seed, "Random seed");
    cmd->add_option("--days", c.option_days, "Trading days with quoted options")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--vol-window", c.volatility_window, "Volatility window (days of history)")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000}));
    cmd->add_option("--spot", c.spot, "Initial underlying price")->check(CLI::PositiveNumber);
    cmd->add_option("--sigma", c.sigma, "GBM volatility")->check(CLI::PositiveNumber);
    cmd->add_option("--drift", c.drift, "GBM drift");
    cmd->add_option("--phi-bs", c.phi_bs, "Planted BS error coefficient");
    cmd->add_option("--phi-baw", c.phi_baw, "Planted BAW error coefficient");
    cmd->add_option("--target-share", a.target_share,
                    "Solve phi-bs for this noise share (negative disables)");
    cmd->add_option("--out-dir", a.out_dir, "Output directory (default from SYSNOISE_OUT_DIR)");
}

int run_synth(const CLI::App& cmd, SynthArgs& a) {
    print_resolved(cmd);
    if (a.target_share >= 0.0) {
        a.config.target_share = a.target_share;
    }
    const auto market = synthetic::synthesize_market(a.config);
    synthetic::write_synthetic_market(market, a.out_dir);
    std::cout << "wrote " << market.truth.option_rows << " option rows to " << a.out_dir << '\n'
              << "planted share: " << market.truth.planted_share << '\n';
    return 0;
}

// --- pacf / adf -----------------------------------------------------------

struct SeriesArgs {
    std::string input;
    std::string column = "volume";
    bool log = false;
    std::size_t lag = 1;
    bool trend = false;
};

void add_series_options(CLI::App* cmd, SeriesArgs& a) {
    cmd->add_option("--input", a.input, "Delimited file holding the series")->required();
    cmd->add_option("--column", a.column, "Column to read");
    cmd->add_flag("--log", a.log, "Take natural logs first");
}

std::vector<double> read_series(const SeriesArgs& a) {
    std::ifstream in(a.input);
    if (!in) {
        throw std::runtime_error("cannot open input file: " + a.input);
    }
    io::DelimitedReader reader(in, ',');
    const auto col = reader.require(a.column);
    std::vector<double> out;
    while (auto fields = reader.next()) {
        const auto v = col < fields->size() ? io::parse_double((*fields)[col]) : std::nullopt;
        if (!v) {
            throw io::FormatError(reader.line(), "bad value in column " + a.column);
        }
        if (a.log && !(*v > 0.0)) {
            throw io::FormatError(reader.line(), "non-positive value in column " + a.column + " cannot be logged");
        }
        out.push_back(a.log ? std::log(*v) : *v);
    }
    return out;
}

int run_pacf(const CLI::App& cmd, const SeriesArgs& a) {
    print_resolved(cmd);
    const auto series = read_series(a);
    const auto result = econometrics::pacf(series, a.lag);
    std::cout << "lag,pacf,significant\n";
    for (std::size_t j = 0; j < result.values.size(); ++j) {
        std::cout << j + 1 << ',' << io::format_double(result.values[j]) << ','
                  << (std::abs(result.values[j]) > result.significance_bound ? "yes" : "no") << '\n';
    }
    std::cout << "bound: " << io::format_double(result.significance_bound) << '\n'
              << "selected order: " << econometrics::select_ar_order(result) << '\n';
    return 0;
}

int run_adf(const CLI::App& cmd, const SeriesArgs& a) {
    print_resolved(cmd);
    const auto series = read_series(a);
    const auto r = econometrics::adf_test(series, a.lag, a.trend);
    std::cout << "statistic: " << io::format_double(r.statistic) << '\n'
              << "lag order: " << r.lag_order << '\n'
              << "observations: " << r.n_observations << '\n'
              << "critical values (1%, 5%, 10%): " << r.critical_values[0] << ", "
              << r.critical_values[1] << ", " << r.critical_values[2] << '\n'
              << "p-value: " << r.p_value << " (" << econometrics::to_string(r.p_bound) << ")\n"
              << "unit root rejected at 5%: " << (r.reject_unit_root_at_5pct ? "yes" : "no") << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Systematic-noise analysis of option volume"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.set_config("--config", "", "TOML/INI file with flag values; command line wins");

    PriceArgs price;
    AnalyzeArgs analyze;
    SynthArgs synth;
    SeriesArgs pacf_args;
    SeriesArgs adf_args;
    pacf_args.lag = 30;

    add_price(app, price);
    add_analyze(app, analyze);
    add_synth(app, synth);

    auto* pacf_cmd = app.add_subcommand("pacf", "Partial autocorrelations of a series");
    add_series_options(pacf_cmd, pacf_args);
    pacf_cmd->add_option("--max-lag", pacf_args.lag, "Largest lag")->check(CLI::PositiveNumber);

    auto* adf_cmd = app.add_subcommand("adf", "Augmented Dickey-Fuller unit-root test");
    add_series_options(adf_cmd, adf_args);
    adf_cmd->add_option("--lag", adf_args.lag, "Lagged differences")->check(CLI::NonNegativeNumber);
    adf_cmd->add_flag("--trend", adf_args.trend, "Include a linear time trend");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (auto* cmd = app.get_subcommand("price"); cmd->parsed()) {
            return run_price(*cmd, price);
        }
        if (auto* cmd = app.get_subcommand("analyze"); cmd->parsed()) {
            return run_analyze(*cmd, analyze);
        }
        if (auto* cmd = app.get_subcommand("synth"); cmd->parsed()) {
            return run_synth(*cmd, synth);
        }
        if (pacf_cmd->parsed()) {
            return run_pacf(*pacf_cmd, pacf_args);
        }
        return run_adf(*adf_cmd, adf_args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}
