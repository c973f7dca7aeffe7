#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "sysnoise/noise_pipeline.hpp"
#include "sysnoise/synthetic_market.hpp"

using namespace sysnoise;
using namespace sysnoise::pipeline;

namespace {

Dataset dataset_from(const synthetic::SyntheticMarket& m, const PipelineConfig& config) {
    std::istringstream options(m.options_csv);
    std::istringstream treasury(m.treasury_csv);
    std::istringstream closes(m.closes_csv);
    return build_dataset(config, options, treasury, closes);
}

econometrics::RegressionResult combined_stub(double phi_bs, double phi_baw, double var_bs,
                                             double var_baw, double cov) {
    econometrics::RegressionResult r;
    r.names = {"const", "lag1", "x_bs", "x_baw"};
    r.coefficients = econometrics::Vector::Zero(4);
    r.coefficients(2) = phi_bs;
    r.coefficients(3) = phi_baw;
    r.covariance = econometrics::Matrix::Zero(4, 4);
    r.covariance(2, 2) = var_bs;
    r.covariance(3, 3) = var_baw;
    r.covariance(2, 3) = r.covariance(3, 2) = cov;
    return r;
}

errors::SeriesStats stats_with_mean(double mean) {
    errors::SeriesStats s;
    s.n = 10;
    s.mean = mean;
    return s;
}

}  // namespace

TEST_CASE("config validation") {
    PipelineConfig c;
    CHECK_NOTHROW(c.validate());
    c.ar_order = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.ar_order = std::nullopt;
    CHECK_NOTHROW(c.validate());
    c.volatility_window = 1;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK(parse_lag_mode("daily") == LagMode::daily);
    CHECK(parse_lag_mode("pooled-replication") == LagMode::pooled);
    CHECK_FALSE(parse_lag_mode("weekly").has_value());
}

TEST_CASE("build_dataset on a synthetic market") {
    synthetic::SynthConfig sc;
    sc.option_days = 34;  // about 1,000 active rows
    const auto market = synthetic::synthesize_market(sc);
    PipelineConfig config;
    const auto ds = dataset_from(market, config);

    SUBCASE("every stage reconciles") {
        REQUIRE(ds.manifest.stages.size() >= 4);
        std::size_t previous = ds.manifest.stages.front().rows_in;
        for (const auto& s : ds.manifest.stages) {
            CHECK(s.reconciles());
            CHECK(s.rows_in == previous);
            previous = s.rows_out;
        }
        CHECK(ds.manifest.stage("ingest")->rows_in == market.truth.option_rows);
        CHECK(ds.manifest.stage("ingest")->dropped.at("crossed quote") == sc.crossed_rows);
        CHECK(ds.manifest.stage("activity_filter")->rows_out == market.truth.active_rows);
        CHECK(ds.table.rows.size() == market.truth.active_rows);
        CHECK(ds.manifest.error_model_observations == 2 * ds.manifest.error_rows);
    }
    SUBCASE("rows are in (date, contract) order") {
        for (std::size_t i = 1; i < ds.errors.size(); ++i) {
            const auto& a = ds.errors[i - 1];
            const auto& b = ds.errors[i];
            CHECK((a.trade_date < b.trade_date || (a.trade_date == b.trade_date && a.key < b.key)));
        }
    }
    SUBCASE("daily mode aggregates per date") {
        PipelineConfig daily = config;
        daily.lag_mode = LagMode::daily;
        const auto dd = dataset_from(market, daily);
        std::set<Date::rep> dates;
        for (const auto& e : ds.errors) {
            dates.insert(e.trade_date.time_since_epoch().count());
        }
        CHECK(dd.table.rows.size() == dates.size());
        CHECK(dd.manifest.stage("daily_aggregation")->reconciles());
        double first_day = 0.0;
        std::size_t count = 0;
        for (const auto& e : ds.errors) {
            if (e.trade_date == ds.errors.front().trade_date) {
                first_day += static_cast<double>(e.volume);
                ++count;
            }
        }
        CHECK(dd.table.rows.front().volume == doctest::Approx(first_day / static_cast<double>(count)));
    }
}

TEST_CASE("build_dataset failures") {
    const auto market = synthetic::synthesize_market({});
    PipelineConfig config;

    SUBCASE("empty options file aborts at ingest") {
        std::istringstream options("trade_date,expiration,type,strike,bid,ask,volume,open_interest,underlying_close\n");
        std::istringstream treasury(market.treasury_csv);
        std::istringstream closes(market.closes_csv);
        try {
            (void)build_dataset(config, options, treasury, closes);
            FAIL("expected an ingest abort");
        } catch (const PipelineError& e) {
            CHECK(e.stage() == "ingest");
            REQUIRE(e.manifest().stage("ingest") != nullptr);
            CHECK(e.manifest().stage("ingest")->rows_out == 0);
        }
    }
    SUBCASE("missing file names the path") {
        config.options_path = "/nonexistent/options.csv";
        config.treasury_path = "/nonexistent/treasury.csv";
        config.closes_path = "/nonexistent/closes.csv";
        try {
            (void)build_dataset(config);
            FAIL("expected an ingest abort");
        } catch (const PipelineError& e) {
            CHECK(e.stage() == "ingest");
            CHECK(std::string(e.what()).find("/nonexistent/options.csv") != std::string::npos);
        }
    }
}

TEST_CASE("models and noise share") {
    SUBCASE("identical error columns fail model (3) only") {
        econometrics::AnalysisTable table;
        for (int i = 0; i < 100; ++i) {
            const double x = std::sin(i * 0.7);
            table.rows.push_back({Date{}, {}, 10.0 + 5.0 * std::cos(i * 1.3) + (i % 7), x, x});
        }
        CHECK_NOTHROW((void)run_models(table, 2, {true, true, false}));
        CHECK_THROWS_AS((void)run_models(table, 2), econometrics::CollinearityError);
    }
    SUBCASE("zero coefficients") {
        const auto share = estimate_noise_share(combined_stub(0, 0, 0, 0, 0), stats_with_mean(-0.978),
                                                stats_with_mean(-0.786));
        CHECK(share.point == 0.0);
        CHECK(share.low == 0.0);
        CHECK(share.high == 0.0);
    }
    SUBCASE("headline coefficients") {
        const auto share = estimate_noise_share(combined_stub(0.051, -0.024, 1.6e-5, 1.6e-5, 1.5e-5),
                                                stats_with_mean(-0.978), stats_with_mean(-0.786));
        CHECK(share.point == doctest::Approx(std::abs(0.051 * -0.978 + -0.024 * -0.786)).epsilon(1e-14));
        CHECK(std::abs(share.point - 0.0310) < 5e-5);
        CHECK(share.point > 0.017);
        CHECK(share.point < 0.045);
        CHECK(share.signed_effect < 0.0);
        CHECK(share.low <= share.point);
        CHECK(share.point <= share.high);
        const double var = 0.978 * 0.978 * 1.6e-5 + 0.786 * 0.786 * 1.6e-5 + 2 * 0.978 * 0.786 * 1.5e-5;
        CHECK(share.standard_error == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
    }
    SUBCASE("clamped lower bound") {
        const auto share = estimate_noise_share(combined_stub(0.001, 0.0, 1e-4, 1e-4, 0),
                                                stats_with_mean(1.0), stats_with_mean(1.0));
        CHECK(share.clamped);
        CHECK(share.low == 0.0);
        CHECK(share.high > share.point);
    }
    SUBCASE("missing pieces") {
        auto r = combined_stub(0.1, 0.1, 0, 0, 0);
        r.covariance = econometrics::Matrix();
        CHECK_THROWS_AS((void)estimate_noise_share(r, stats_with_mean(1), stats_with_mean(1)),
                        std::invalid_argument);
        r = combined_stub(0.1, 0.1, 0, 0, 0);
        r.names[3] = "other";
        CHECK_THROWS_AS((void)estimate_noise_share(r, stats_with_mean(1), stats_with_mean(1)),
                        std::invalid_argument);
    }
    SUBCASE("marginal-models reading") {
        auto one = combined_stub(0.027, 0.0, 0, 0, 0);
        auto two = combined_stub(0.0, 0.024, 0, 0, 0);
        const double share = marginal_models_share(one, two, stats_with_mean(-0.978), stats_with_mean(-0.786));
        CHECK(std::abs(share - 0.0453) < 5e-5);
    }
}

TEST_CASE("synthetic market") {
    synthetic::SynthConfig sc;
    sc.seed = 42;
    sc.option_days = 20;
    SUBCASE("same seed, same bytes") {
        const auto a = synthetic::synthesize_market(sc);
        const auto b = synthetic::synthesize_market(sc);
        CHECK(a.options_csv == b.options_csv);
        CHECK(a.treasury_csv == b.treasury_csv);
        CHECK(a.closes_csv == b.closes_csv);
        CHECK(synthetic::truth_json(a.truth) == synthetic::truth_json(b.truth));
        sc.seed = 43;
        CHECK(synthetic::synthesize_market(sc).options_csv != a.options_csv);
    }
    SUBCASE("target share is planted at the realised means") {
        sc.target_share = 0.03;
        sc.phi_baw = -0.024;
        const auto m = synthetic::synthesize_market(sc);
        CHECK(m.truth.planted_share == doctest::Approx(0.03).epsilon(1e-12));
        CHECK(m.truth.phi_bs * m.truth.mean_x_bs + m.truth.phi_baw * m.truth.mean_x_baw ==
              doctest::Approx(-0.03).epsilon(1e-12));
    }
    SUBCASE("null market") {
        sc.option_days = 60;
        const auto m = synthetic::synthesize_market(sc);
        PipelineConfig config;
        config.ar_order = 2;
        const auto report = analyse_dataset(config, dataset_from(m, config));
        const auto& bs = *report.models.bs_only;
        CHECK(std::abs(bs.coefficient("x_bs")) < 2 * bs.standard_error("x_bs"));
    }
    SUBCASE("planted AR lags are the significant ones") {
        std::size_t exact = 0;
        for (std::uint64_t seed = 1; seed <= 20; ++seed) {
            sc.seed = seed;
            sc.option_days = 60;
            const auto m = synthetic::synthesize_market(sc);
            PipelineConfig config;
            const auto ds = dataset_from(m, config);
            std::vector<double> log_v;
            for (const auto& r : ds.table.rows) {
                log_v.push_back(std::log(r.volume));
            }
            const auto p = econometrics::pacf(log_v, 3);
            const bool lag1 = std::abs(p.values[0]) > p.significance_bound;
            const bool lag2 = std::abs(p.values[1]) > p.significance_bound;
            const bool lag3 = std::abs(p.values[2]) > p.significance_bound;
            exact += lag1 && lag2 && !lag3 ? 1 : 0;
        }
        CHECK(exact >= 18);
    }
}
