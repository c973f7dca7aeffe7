#include "sysnoise/synthetic_market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "sysnoise/delimited.hpp"
#include "sysnoise/market_data.hpp"
#include "sysnoise/pricing_errors.hpp"
#include "sysnoise/random.hpp"

namespace sysnoise::synthetic {

namespace {

using namespace std::chrono;

// 2015-2016 average constant-maturity yields, percent.
constexpr std::array<double, market::kTenorCount> kMeanYieldsPct = {
    0.145, 0.186, 0.314, 0.468, 0.760, 1.014, 1.433, 1.763, 1.988, 2.383, 2.718};

constexpr std::array<double, 5> kMoneyness = {0.90, 0.95, 1.00, 1.05, 1.10};
constexpr double kStrikeStep = 5.0;
constexpr std::size_t kQuotedExpiries = 3;

std::vector<Date> business_days(Date start, std::size_t count) {
    std::vector<Date> out;
    for (Date d = start; out.size() < count; d += days{1}) {
        const weekday wd{d};
        if (wd != Saturday && wd != Sunday) {
            out.push_back(d);
        }
    }
    return out;
}

std::vector<Date> expiries_after(Date day, std::size_t count) {
    std::vector<Date> out;
    year_month ym = year_month_day{day}.year() / year_month_day{day}.month();
    while (out.size() < count) {
        const Date third_friday{ym / Friday[3]};
        if (third_friday > day) {
            out.push_back(third_friday);
        }
        ym += months{1};
    }
    return out;
}

double round_to(double value, double scale) { return std::round(value * scale) / scale; }

struct Quote {
    market::OptionRecord record;
    double x_bs = 0.0;
    double x_baw = 0.0;
    bool active = true;
};

}  // namespace

SyntheticMarket synthesize_market(const SynthConfig& config) {
    if (config.option_days == 0 || config.volatility_window < 2) {
        throw std::invalid_argument("synthesize_market: need option days and a window >= 2");
    }
    GaussianSource rng(config.seed);
    SyntheticMarket out;

    const auto dates = business_days(config.start, config.volatility_window + config.option_days);

    // closes: GBM, rounded to 4 decimals as a vendor file would be
    {
        std::ostringstream csv;
        csv << "date,close\n";
        const double dt = 1.0 / market::kTradingDaysPerYear;
        double s = config.spot;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            if (i > 0) {
                s *= std::exp((config.drift - 0.5 * config.sigma * config.sigma) * dt +
                              config.sigma * std::sqrt(dt) * rng.normal());
            }
            csv << format_iso_date(dates[i]) << ',' << io::format_double(round_to(s, 1e4)) << '\n';
        }
        out.closes_csv = csv.str();
    }

    // treasury: mean levels plus a common random-walk shift, some days missing
    {
        std::ostringstream csv;
        csv << "date";
        for (const char* label : market::kTenorLabels) {
            csv << ',' << label;
        }
        csv << '\n';
        double shift = 0.0;
        for (std::size_t i = 0; i < dates.size(); ++i) {
            shift += rng.normal(0.0, 0.01);
            std::array<double, market::kTenorCount> row{};
            for (std::size_t j = 0; j < row.size(); ++j) {
                row[j] = std::max(0.0, round_to(kMeanYieldsPct[j] + shift + rng.normal(0.0, 0.005), 1e3));
            }
            const bool gap = config.treasury_gap_every > 1 && i > 0 &&
                             i % config.treasury_gap_every == 0;
            if (gap) {
                continue;
            }
            csv << format_iso_date(dates[i]);
            for (double y : row) {
                csv << ',' << io::format_double(y);
            }
            csv << '\n';
        }
        out.treasury_csv = csv.str();
    }

    // read both back so prices use exactly what the pipeline will see
    std::istringstream closes_in(out.closes_csv);
    std::istringstream treasury_in(out.treasury_csv);
    const auto closes = market::load_closes(closes_in).rows;
    const market::TreasuryHistory history(market::load_treasury_curves(treasury_in).rows);
    const auto vols = market::trailing_volatility(closes, config.volatility_window);

    std::vector<Quote> quotes;
    for (std::size_t i = 0; i < vols.size(); ++i) {
        const Date day = vols[i].date;
        const double spot = closes[i + config.volatility_window].close;
        const auto* curve = history.curve_on(day);
        const auto expiries = expiries_after(day, kQuotedExpiries + 1);

        std::vector<double> strikes;
        for (double m : kMoneyness) {
            strikes.push_back(std::round(spot * m / kStrikeStep) * kStrikeStep);
        }
        strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());

        for (std::size_t e = 0; e < expiries.size(); ++e) {
            const bool extra = e == kQuotedExpiries;
            for (double strike : strikes) {
                for (auto type : {pricing::OptionType::call, pricing::OptionType::put}) {
                    Quote q;
                    q.active = !extra;
                    auto& r = q.record;
                    r.trade_date = day;
                    r.expiration_date = expiries[e];
                    r.option_type = type;
                    r.strike = strike;
                    r.underlying_close = spot;
                    const double tte = market::time_to_expiry(day, expiries[e]);
                    const pricing::MarketParams params{
                        spot, market::rate_for_maturity(*curve, tte), 0.0, vols[i].sigma};
                    const double model = pricing::baw_price(
                        {type, pricing::ExerciseStyle::american, strike, tte}, params);
                    const double mid = std::max(
                        model + config.mid_bias + rng.normal(0.0, config.mid_noise_sd), 0.05);
                    r.bid = std::max(0.0, round_to(mid - config.half_spread, 100.0));
                    r.ask = round_to(mid + config.half_spread, 100.0);
                    r.open_interest = 100 + static_cast<std::int64_t>(rng.below(5000));
                    const auto errs = errors::compute_errors(r, params);
                    q.x_bs = errs.x_bs;
                    q.x_baw = errs.x_baw;
                    quotes.push_back(q);
                }
            }
        }
    }

    std::sort(quotes.begin(), quotes.end(), [](const Quote& a, const Quote& b) {
        const auto& ra = a.record;
        const auto& rb = b.record;
        if (ra.trade_date != rb.trade_date) {
            return ra.trade_date < rb.trade_date;
        }
        const errors::ContractKey ka{ra.expiration_date, ra.strike, ra.option_type};
        const errors::ContractKey kb{rb.expiration_date, rb.strike, rb.option_type};
        return ka < kb;
    });

    Truth& truth = out.truth;
    truth.seed = config.seed;
    truth.volume_constant = config.volume_constant;
    truth.ar = config.ar;
    double sum_bs = 0.0;
    double sum_baw = 0.0;
    for (const auto& q : quotes) {
        if (q.active) {
            sum_bs += q.x_bs;
            sum_baw += q.x_baw;
            ++truth.active_rows;
        }
    }
    truth.mean_x_bs = sum_bs / static_cast<double>(truth.active_rows);
    truth.mean_x_baw = sum_baw / static_cast<double>(truth.active_rows);
    truth.phi_baw = config.phi_baw;
    truth.phi_bs = config.phi_bs;
    if (config.target_share) {
        truth.phi_bs = (-*config.target_share - config.phi_baw * truth.mean_x_baw) / truth.mean_x_bs;
    }
    truth.planted_share =
        std::abs(truth.phi_bs * truth.mean_x_bs + truth.phi_baw * truth.mean_x_baw);

    // volume recursion over the active rows in lag order
    double ar_sum = 0.0;
    for (double a : config.ar) {
        ar_sum += a;
    }
    const double stationary =
        (config.volume_constant + truth.phi_bs * truth.mean_x_bs + truth.phi_baw * truth.mean_x_baw) /
        (1.0 - ar_sum);
    std::vector<double> history_eta(config.ar.size(), stationary);  // most recent first
    const double extra_rate = std::clamp(
        config.inactive_fraction * static_cast<double>(kQuotedExpiries), 0.0, 1.0);
    std::size_t crossed_left = config.crossed_rows;
    std::vector<Quote> emitted;
    for (auto& q : quotes) {
        auto& r = q.record;
        if (q.active) {
            double eta = config.volume_constant + truth.phi_bs * q.x_bs + truth.phi_baw * q.x_baw +
                         rng.normal(0.0, config.volume_noise_sd);
            for (std::size_t j = 0; j < config.ar.size(); ++j) {
                eta += config.ar[j] * history_eta[j];
            }
            std::rotate(history_eta.rbegin(), history_eta.rbegin() + 1, history_eta.rend());
            if (!history_eta.empty()) {
                history_eta.front() = eta;
            }
            r.volume = std::max<std::int64_t>(1, std::llround(std::exp(eta)));
            emitted.push_back(q);
            continue;
        }
        if (crossed_left > 0) {
            --crossed_left;
            std::swap(r.bid, r.ask);
            r.ask = std::max(0.0, r.bid - 0.10);
            r.volume = 10;
            emitted.push_back(q);
            continue;
        }
        if (rng.uniform() < extra_rate) {
            const bool zero_volume = rng.uniform() < 0.5;
            r.volume = zero_volume ? 0 : 25;
            r.open_interest = zero_volume ? r.open_interest : 0;
            emitted.push_back(q);
        }
    }
    truth.option_rows = emitted.size();

    std::ostringstream csv;
    csv << "trade_date,expiration,type,strike,bid,ask,volume,open_interest,underlying_close\n";
    for (const auto& q : emitted) {
        const auto& r = q.record;
        csv << format_iso_date(r.trade_date) << ',' << format_iso_date(r.expiration_date) << ','
            << pricing::to_string(r.option_type) << ',' << io::format_double(r.strike) << ','
            << io::format_double(r.bid) << ',' << io::format_double(r.ask) << ',' << r.volume << ','
            << r.open_interest << ',' << io::format_double(r.underlying_close) << '\n';
    }
    out.options_csv = csv.str();
    return out;
}

std::string truth_json(const Truth& truth) {
    nlohmann::ordered_json j;
    j["seed"] = truth.seed;
    j["rng"] = kRngAlgorithm;
    j["phi_bs"] = truth.phi_bs;
    j["phi_baw"] = truth.phi_baw;
    j["volume_constant"] = truth.volume_constant;
    j["ar"] = truth.ar;
    j["mean_x_bs"] = truth.mean_x_bs;
    j["mean_x_baw"] = truth.mean_x_baw;
    j["planted_share"] = truth.planted_share;
    j["active_rows"] = truth.active_rows;
    j["option_rows"] = truth.option_rows;
    return j.dump(2) + "\n";
}

void write_synthetic_market(const SyntheticMarket& market, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    }
    const std::pair<const char*, const std::string*> files[] = {
        {"options.csv", &market.options_csv},
        {"treasury.csv", &market.treasury_csv},
        {"closes.csv", &market.closes_csv},
    };
    const std::string truth = truth_json(market.truth);
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream f(path, std::ios::binary);
        f << text;
        if (!f) {
            throw std::runtime_error("cannot write " + path.string());
        }
    };
    for (const auto& [name, text] : files) {
        write(dir / name, *text);
    }
    write(dir / "truth.json", truth);
}

}  // namespace sysnoise::synthetic
