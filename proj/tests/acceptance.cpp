// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            run every criterion
//   acceptance AC3 AC7    run only the named ones
//
// Exit status is non-zero if any selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sim.hpp"
#include "sysnoise/econometrics.hpp"
#include "sysnoise/noise_pipeline.hpp"
#include "sysnoise/pricing_models.hpp"
#include "sysnoise/random.hpp"
#include "sysnoise/report.hpp"
#include "sysnoise/synthetic_market.hpp"

using namespace sysnoise;
using pricing::ExerciseStyle;
using pricing::MarketParams;
using pricing::OptionContractSpec;
using pricing::OptionType;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 5 x 5 x 3 grid: S/K in {0.8..1.2}, sigma in {0.1..0.5}, T in {0.1, 0.5, 1}.
// Rates and carry are pinned at r = 0.08, d = 0.
constexpr double kStrike = 100.0;
constexpr double kGridRate = 0.08;

struct GridPoint {
    double spot;
    double sigma;
    double tte;
};

std::vector<GridPoint> grid() {
    std::vector<GridPoint> out;
    for (double m : {0.8, 0.9, 1.0, 1.1, 1.2}) {
        for (double sigma : {0.1, 0.2, 0.3, 0.4, 0.5}) {
            for (double t : {0.1, 0.5, 1.0}) {
                out.push_back({m * kStrike, sigma, t});
            }
        }
    }
    return out;
}

// --- pricing -------------------------------------------------------------

Outcome ac1() {
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::size_t points = 0;
    for (const auto& g : grid()) {
        const MarketParams p{g.spot, kGridRate, 0.0, g.sigma};
        for (auto type : {OptionType::call, OptionType::put}) {
            const OptionContractSpec spec{type, ExerciseStyle::european, kStrike, g.tte};
            worst = std::max(worst, std::abs(pricing::bs_price(spec, p) -
                                             pricing::crr_binomial_price(spec, p, 10000)));
            ++points;
        }
    }
    const MarketParams ref{100, 0.05, 0.0, 0.2};
    const OptionContractSpec call{OptionType::call, ExerciseStyle::european, 100, 1};
    const double bs = pricing::bs_price(call, ref);
    const double crr = pricing::crr_binomial_price(call, ref, 50000);
    const double quad = oracle::lognormal_expectation(true, 100, 100, 0.05, 0.0, 0.2, 1.0);
    const double elapsed = seconds_since(start);
    const bool pass = worst < 1e-2 && std::abs(bs - 10.4506) <= 1e-3 &&
                      std::abs(crr - 10.4506) <= 1e-3 && std::abs(quad - 10.4506) <= 1e-3 &&
                      elapsed < 60.0;
    return {pass, fmt("max |BS-CRR10k| = %.3g over %zu points (< 1e-2); BS %.6f, CRR50k %.6f, "
                      "quadrature %.6f (10.4506 +/- 1e-3); %.1fs (< 60s)",
                      worst, points, bs, crr, quad, elapsed)};
}

Outcome ac2() {
    double worst = 0.0;
    for (const auto& g : grid()) {
        const MarketParams p{g.spot, kGridRate, 0.0, g.sigma};
        const double american =
            pricing::baw_price({OptionType::call, ExerciseStyle::american, kStrike, g.tte}, p);
        const double european =
            pricing::bs_price({OptionType::call, ExerciseStyle::european, kStrike, g.tte}, p);
        worst = std::max(worst, std::abs(american - european));
    }
    return {worst <= 1e-12, fmt("max |BAW call - BS call| with zero dividends = %.3g (<= 1e-12)", worst)};
}

Outcome ac3() {
    double worst_rel = 0.0;
    double worst_residual = 0.0;
    std::size_t over = 0;
    GridPoint worst_at{};
    std::size_t points = 0;
    for (const auto& g : grid()) {
        const MarketParams p{g.spot, kGridRate, 0.0, g.sigma};
        const OptionContractSpec spec{OptionType::put, ExerciseStyle::american, kStrike, g.tte};
        const double baw = pricing::baw_price(spec, p);
        const double crr = pricing::crr_binomial_price(spec, p, 10000);
        const double rel = std::abs(baw - crr) / crr;
        if (rel >= 0.005) {
            ++over;
        }
        if (rel > worst_rel) {
            worst_rel = rel;
            worst_at = g;
        }
        const auto cp = pricing::baw_critical_price(spec, p);
        worst_residual = std::max(
            worst_residual, std::abs(pricing::baw_value_matching_residual(spec, p, cp.value)) / kStrike);
        ++points;
    }
    const bool pass = over == 0 && worst_residual < 1e-6;
    return {pass, fmt("BAW put vs CRR10k: %zu/%zu points at or above 0.5%% relative, worst %.2f%% "
                      "(S=%g sigma=%g T=%g); max residual/K = %.3g (< 1e-6)",
                      over, points, 100.0 * worst_rel, worst_at.spot, worst_at.sigma, worst_at.tte,
                      worst_residual)};
}

Outcome ac4() {
    GaussianSource rng(2024);
    std::size_t failures = 0;
    double worst_parity = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const MarketParams p{20.0 + 180.0 * rng.uniform(), 0.001 + 0.12 * rng.uniform(),
                             0.06 * rng.uniform(), 0.05 + 0.75 * rng.uniform()};
        const double k = 20.0 + 180.0 * rng.uniform();
        const double t = 0.01 + 3.0 * rng.uniform();
        const double c = pricing::bs_price({OptionType::call, ExerciseStyle::european, k, t}, p);
        const double q = pricing::bs_price({OptionType::put, ExerciseStyle::european, k, t}, p);
        const double parity = c - q - (p.spot * std::exp(-p.dividend_yield * t) - k * std::exp(-p.rate * t));
        worst_parity = std::max(worst_parity, std::abs(parity));
        for (auto type : {OptionType::call, OptionType::put}) {
            const double euro = type == OptionType::call ? c : q;
            const double amer = pricing::baw_price({type, ExerciseStyle::american, k, t}, p);
            const double intrinsic = pricing::intrinsic_value(type, p.spot, k);
            if (!(amer >= euro - 1e-12 && euro >= 0.0 && amer >= intrinsic - 1e-12)) {
                ++failures;
            }
        }
    }
    const bool pass = worst_parity <= 1e-10 && failures == 0;
    return {pass, fmt("1000 draws: max parity gap %.3g (<= 1e-10); %zu dominance/intrinsic violations",
                      worst_parity, failures)};
}

// --- econometrics --------------------------------------------------------

Outcome ac5() {
    GaussianSource rng(55);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 40 + static_cast<Eigen::Index>(rng.below(400));
        const Eigen::Index p = 2 + static_cast<Eigen::Index>(rng.below(8));
        Eigen::MatrixXd x(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            for (Eigen::Index j = 1; j < p; ++j) {
                x(i, j) = rng.normal(0.0, 0.5 + j);
            }
        }
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            y(i) = 1.0 + 0.2 * x.row(i).sum() + rng.normal();
        }
        const auto fit = econometrics::ols_fit(x, y);
        const Eigen::VectorXd beta = oracle::normal_equations(x, y);
        for (Eigen::Index j = 0; j < p; ++j) {
            worst = std::max(worst, std::abs(fit.coefficients(j) - beta(j)) /
                                        std::max(std::abs(beta(j)), 1e-300));
        }
    }

    Eigen::MatrixXd five(5, 2);
    five << 1, 0, 1, 1, 1, 2, 1, 3, 1, 4;
    Eigen::VectorXd five_y(5);
    five_y << 1, 2, 2, 4, 4;
    const auto hand = econometrics::ols_fit(five, five_y);
    const double hand_err = std::max(std::abs(hand.coefficients(0) - 1.0), std::abs(hand.coefficients(1) - 0.8));

    Eigen::MatrixXd two(4, 2);
    Eigen::VectorXd e1(4);
    Eigen::VectorXd e2(4);
    e1 << 0.5, -0.5, 0.5, -0.5;
    e2 << 0.5, 0.5, -0.5, -0.5;
    two.col(0) = e1;
    two.col(1) = 0.96 * e1 + std::sqrt(1.0 - 0.96 * 0.96) * e2;
    const auto v = econometrics::vif(two);
    const double closed_form = 1.0 / (1.0 - 0.96 * 0.96);
    const double vif_err = std::max(std::abs(v[0] - closed_form), std::abs(v[1] - closed_form));

    const bool pass = worst <= 1e-8 && hand_err <= 1e-12 && vif_err <= 1e-6 &&
                      std::abs(closed_form - 12.755) < 1e-3;
    return {pass, fmt("100 problems max relative gap vs normal equations %.3g (<= 1e-8); 5-point "
                      "fixture error %.3g (<= 1e-12); VIF %.9f vs %.9f (+/- 1e-6)",
                      worst, hand_err, v[0], closed_form)};
}

Outcome ac6() {
    const auto start = std::chrono::steady_clock::now();
    int noise_reject = 0;
    int walk_keep = 0;
    int ar3_selected = 0;
    int recovered = 0;
    const sim::PlantedVolume truth;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        noise_reject += econometrics::adf_test(sim::white_noise(100 + seed, 2000), 5).reject_unit_root_at_5pct;
        walk_keep += !econometrics::adf_test(sim::random_walk(200 + seed, 2000), 5).reject_unit_root_at_5pct;
        const auto ar3 = sim::ar_process(300 + seed, {0.4, 0.2, 0.15}, 20000);
        ar3_selected += econometrics::select_ar_order(econometrics::pacf(ar3, 4)) == 3;
        const auto table = sim::planted_table(400 + seed, 50000, truth);
        const auto fit = econometrics::fit_noise_model(table, 1, {true, false});
        recovered += std::abs(fit.coefficient("x_bs") - truth.phi_bs) < 2.0 * fit.standard_error("x_bs");
    }
    const double elapsed = seconds_since(start);
    const bool pass = noise_reject >= 19 && walk_keep >= 18 && ar3_selected >= 18 && recovered >= 18 &&
                      elapsed < 300.0;
    return {pass, fmt("ADF rejects iid %d/20 (>= 19), keeps random walk %d/20 (>= 18); PACF picks "
                      "AR(3) %d/20 (>= 18); planted x_bs within 2 se %d/20 (>= 18); %.1fs (< 300s)",
                      noise_reject, walk_keep, ar3_selected, recovered, elapsed)};
}

// --- end to end ------------------------------------------------------------

pipeline::Dataset dataset_from(const synthetic::SyntheticMarket& m, const pipeline::PipelineConfig& c) {
    std::istringstream options(m.options_csv);
    std::istringstream treasury(m.treasury_csv);
    std::istringstream closes(m.closes_csv);
    return pipeline::build_dataset(c, options, treasury, closes);
}

Outcome ac7() {
    int covered = 0;
    int null_quiet = 0;
    pipeline::PipelineConfig config;
    config.ar_order = 2;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        synthetic::SynthConfig planted;
        planted.seed = seed;
        planted.phi_baw = -0.024;
        planted.target_share = 0.03;
        const auto market = synthetic::synthesize_market(planted);
        const auto report = pipeline::analyse_dataset(config, dataset_from(market, config));
        const auto& share = *report.noise_share;
        covered += share.low <= 0.03 && 0.03 <= share.high;

        synthetic::SynthConfig null;
        null.seed = seed;
        const auto quiet = pipeline::analyse_dataset(config, dataset_from(synthetic::synthesize_market(null), config));
        null_quiet += quiet.models.bs_only->p_value("x_bs") >= 0.05 &&
                      quiet.models.baw_only->p_value("x_baw") >= 0.05;
    }
    return {covered >= 18 && null_quiet >= 18,
            fmt("planted 3%% share covered by the 95%% interval %d/20 (>= 18); null market error "
                "coefficients insignificant at 5%% %d/20 (>= 18)",
                covered, null_quiet)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome ac8() {
    const auto root = std::filesystem::temp_directory_path() / "sysnoise_acceptance_ac8";
    std::filesystem::remove_all(root);
    synthetic::SynthConfig sc;
    sc.seed = 8;
    synthetic::write_synthetic_market(synthetic::synthesize_market(sc), root / "input");
    pipeline::PipelineConfig config;
    config.options_path = root / "input" / "options.csv";
    config.treasury_path = root / "input" / "treasury.csv";
    config.closes_path = root / "input" / "closes.csv";
    config.ar_order = std::nullopt;
    std::vector<std::string> runs;
    for (const char* name : {"run1", "run2"}) {
        std::filesystem::create_directories(root / name);
        const auto sinks = report::Sinks::in_directory(root / name);
        report::emit_report(pipeline::run_analysis(config), sinks);
        runs.push_back(slurp(sinks.table) + '\x1e' + slurp(sinks.json) + '\x1e' + slurp(sinks.plot_data));
    }
    const bool same = runs[0] == runs[1] && !runs[0].empty();
    std::filesystem::remove_all(root);
    return {same, fmt("two analyze runs on the same inputs: %s (%zu bytes)",
                      same ? "byte-identical" : "DIFFER", runs[0].size())};
}

std::string replace_header(const std::string& csv, const std::string& header) {
    return header + csv.substr(csv.find('\n'));
}

Outcome ac9() {
    synthetic::SynthConfig sc;
    sc.seed = 9;
    auto market = synthetic::synthesize_market(sc);
    market.options_csv = replace_header(
        market.options_csv,
        "date,expiration,call.put,strike,bid,ask,volume,open.interest,adjusted.stock.close.price");
    market.treasury_csv = replace_header(
        market.treasury_csv, "date,X1.mo,X3.mo,X6.mo,X1.yr,X2.yr,X3.yr,X5.yr,X7.yr,X10.yr,X20.yr,X30.yr");

    pipeline::PipelineConfig config;
    config.option_columns.trade_date = "date";
    config.option_columns.type = "call.put";
    config.option_columns.open_interest = "open.interest";
    config.option_columns.underlying_close = "adjusted.stock.close.price";
    config.lag_mode = pipeline::LagMode::pooled;
    config.ar_order = pipeline::kPaperArOrder;
    const auto report = pipeline::analyse_dataset(config, dataset_from(market, config));
    const auto table = report::render_table(report);

    std::istringstream lines(table);
    int lag_rows = 0;
    bool header = false;
    bool constant = false;
    for (std::string l; std::getline(lines, l);) {
        lag_rows += l.rfind("Lag ", 0) == 0 && l.size() > 4 && std::isdigit(static_cast<unsigned char>(l[4]));
        header = header || (l.find("(1)") != std::string::npos && l.find("(2)") != std::string::npos &&
                            l.find("(3)") != std::string::npos);
        constant = constant || l.rfind("Constant", 0) == 0;
    }
    const bool stars = table.find("***Significant at the 1 percent level") != std::string::npos &&
                       table.find("**Significant at the 5 percent level") != std::string::npos &&
                       table.find("*Significant at the 10 percent level") != std::string::npos;

    bool conserved = !report.manifest.stages.empty();
    std::size_t previous = report.manifest.stages.front().rows_in;
    for (const auto& s : report.manifest.stages) {
        conserved = conserved && s.reconciles() && s.rows_in == previous;
        previous = s.rows_out;
    }
    const auto* activity = report.manifest.stage("activity_filter");
    const bool filtered = activity != nullptr && activity->rows_out == market.truth.active_rows;

    const std::size_t rows = report.manifest.error_rows;
    bool n_ok = report.manifest.regression_observations == rows - 22;
    for (const auto* m : {&report.models.bs_only, &report.models.baw_only, &report.models.combined}) {
        n_ok = n_ok && m->has_value() && (*m)->n_observations == rows - 22;
    }
    const bool pass = header && lag_rows == 22 && constant && stars && conserved && filtered && n_ok;
    return {pass, fmt("paper-schema fixture: 3 columns %s, %d lag rows (22), constant %s, stars %s; "
                      "stage conservation %s; n = %zu = %zu rows - 22 %s",
                      header ? "yes" : "no", lag_rows, constant ? "yes" : "no", stars ? "yes" : "no",
                      conserved && filtered ? "holds" : "BROKEN",
                      report.models.combined ? report.models.combined->n_observations : 0, rows,
                      n_ok ? "ok" : "MISMATCH")};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
        {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9},
    };
    std::set<std::string> only(argv + 1, argv + argc);
    for (const auto& name : only) {
        bool known = false;
        for (const auto& [n, fn] : criteria) {
            known = known || n == name;
        }
        if (!known) {
            std::cerr << "unknown criterion " << name << '\n';
            return 2;
        }
    }

    int failed = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && !only.count(name)) {
            continue;
        }
        Outcome outcome;
        try {
            outcome = run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        failed += outcome.pass ? 0 : 1;
        std::cout << name << ' ' << (outcome.pass ? "PASS" : "FAIL") << ": " << outcome.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
