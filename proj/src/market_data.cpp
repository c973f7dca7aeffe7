#include "sysnoise/market_data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace sysnoise::market {

namespace {

std::string lower(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<OptionType> parse_type(std::string_view text) {
    const std::string t = lower(io::trim(text));
    if (t == "call" || t == "c") {
        return OptionType::call;
    }
    if (t == "put" || t == "p") {
        return OptionType::put;
    }
    return std::nullopt;
}

// "X1.mo" -> "1mo", "X10.yr" -> "10yr"
std::string normalise_tenor_label(std::string_view header) {
    std::string out;
    for (char c : header) {
        if (c != '.' && c != '_' && c != ' ') {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!out.empty() && out.front() == 'x') {
        out.erase(out.begin());
    }
    return out;
}

}  // namespace

const char* to_string(RowIssue issue) noexcept {
    switch (issue) {
        case RowIssue::field_count: return "field count";
        case RowIssue::bad_date: return "bad date";
        case RowIssue::bad_type: return "bad option type";
        case RowIssue::bad_number: return "bad number";
        case RowIssue::crossed_quote: return "crossed quote";
        case RowIssue::negative_quote: return "negative quote";
        case RowIssue::negative_count: return "negative count";
        case RowIssue::expired_before_trade: return "expiration before trade date";
        case RowIssue::non_positive_strike: return "non-positive strike";
        case RowIssue::non_positive_close: return "non-positive underlying close";
        case RowIssue::missing_tenor: return "missing tenor";
    }
    return "unknown";
}

IngestResult<OptionRecord> load_option_records(std::istream& source, const OptionColumns& columns,
                                               char delimiter) {
    io::DelimitedReader reader(source, delimiter);
    const std::size_t c_trade = reader.require(columns.trade_date);
    const std::size_t c_exp = reader.require(columns.expiration);
    const std::size_t c_type = reader.require(columns.type);
    const std::size_t c_strike = reader.require(columns.strike);
    const std::size_t c_bid = reader.require(columns.bid);
    const std::size_t c_ask = reader.require(columns.ask);
    const std::size_t c_vol = reader.require(columns.volume);
    const std::size_t c_oi = reader.require(columns.open_interest);
    const std::size_t c_close = reader.require(columns.underlying_close);
    const std::size_t width = reader.header().size();

    IngestResult<OptionRecord> out;
    while (auto fields = reader.next()) {
        ++out.rows_read;
        auto reject = [&](RowIssue issue, std::string detail) {
            out.diagnostics.push_back({reader.line(), issue, std::move(detail)});
        };
        const auto& f = *fields;
        if (f.size() != width) {
            reject(RowIssue::field_count, "expected " + std::to_string(width) + " fields, got " +
                                              std::to_string(f.size()));
            continue;
        }
        const auto trade = parse_iso_date(io::trim(f[c_trade]));
        const auto expiry = parse_iso_date(io::trim(f[c_exp]));
        if (!trade || !expiry) {
            reject(RowIssue::bad_date, std::string(!trade ? f[c_trade] : f[c_exp]));
            continue;
        }
        const auto type = parse_type(f[c_type]);
        if (!type) {
            reject(RowIssue::bad_type, f[c_type]);
            continue;
        }
        const auto strike = io::parse_double(f[c_strike]);
        const auto bid = io::parse_double(f[c_bid]);
        const auto ask = io::parse_double(f[c_ask]);
        const auto close = io::parse_double(f[c_close]);
        const auto volume = io::parse_int(f[c_vol]);
        const auto oi = io::parse_int(f[c_oi]);
        if (!strike || !bid || !ask || !close || !volume || !oi) {
            reject(RowIssue::bad_number, "unparseable numeric field");
            continue;
        }
        if (*bid < 0.0 || *ask < 0.0) {
            reject(RowIssue::negative_quote, "bid " + f[c_bid] + " ask " + f[c_ask]);
            continue;
        }
        if (*ask < *bid) {
            reject(RowIssue::crossed_quote, "bid " + f[c_bid] + " > ask " + f[c_ask]);
            continue;
        }
        if (*volume < 0 || *oi < 0) {
            reject(RowIssue::negative_count, "volume or open interest below zero");
            continue;
        }
        if (*expiry < *trade) {
            reject(RowIssue::expired_before_trade, f[c_exp] + " < " + f[c_trade]);
            continue;
        }
        if (*strike <= 0.0) {
            reject(RowIssue::non_positive_strike, f[c_strike]);
            continue;
        }
        if (*close <= 0.0) {
            reject(RowIssue::non_positive_close, f[c_close]);
            continue;
        }
        out.rows.push_back(
            OptionRecord{*trade, *expiry, *type, *strike, *bid, *ask, *volume, *oi, *close});
    }
    return out;
}

std::vector<OptionRecord> filter_active(std::span<const OptionRecord> records) {
    std::vector<OptionRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out),
                 [](const OptionRecord& r) { return r.volume > 0 && r.open_interest > 0; });
    return out;
}

double mid_price(const OptionRecord& record) noexcept { return 0.5 * (record.bid + record.ask); }

double time_to_expiry(Date trade_date, Date expiration_date) noexcept {
    return static_cast<double>((expiration_date - trade_date).count()) / 365.0;
}

IngestResult<TreasuryCurveDay> load_treasury_curves(std::istream& source, char delimiter) {
    io::DelimitedReader reader(source, delimiter);
    const std::size_t c_date = reader.require("date");

    std::array<std::size_t, kTenorCount> c_tenor{};
    for (std::size_t t = 0; t < kTenorCount; ++t) {
        bool found = false;
        for (std::size_t i = 0; i < reader.header().size(); ++i) {
            if (normalise_tenor_label(reader.header()[i]) == kTenorLabels[t]) {
                c_tenor[t] = i;
                found = true;
                break;
            }
        }
        if (!found) {
            throw io::SchemaError(kTenorLabels[t]);
        }
    }
    const std::size_t width = reader.header().size();

    IngestResult<TreasuryCurveDay> out;
    while (auto fields = reader.next()) {
        ++out.rows_read;
        const auto& f = *fields;
        if (f.size() != width) {
            out.diagnostics.push_back({reader.line(), RowIssue::field_count, ""});
            continue;
        }
        const auto date = parse_iso_date(io::trim(f[c_date]));
        if (!date) {
            out.diagnostics.push_back({reader.line(), RowIssue::bad_date, f[c_date]});
            continue;
        }
        TreasuryCurveDay day{*date, {}};
        bool ok = true;
        for (std::size_t t = 0; t < kTenorCount && ok; ++t) {
            const auto y = io::parse_double(f[c_tenor[t]]);
            if (!y || *y < 0.0) {
                out.diagnostics.push_back({reader.line(), RowIssue::missing_tenor,
                                           std::string(kTenorLabels[t])});
                ok = false;
            } else {
                day.yields_pct[t] = *y;
            }
        }
        if (ok) {
            out.rows.push_back(day);
        }
    }
    return out;
}

double rate_for_maturity(const TreasuryCurveDay& curve, double time_to_expiry) {
    if (!(time_to_expiry > 0.0)) {
        throw std::invalid_argument("rate_for_maturity: time to expiry must be positive");
    }
    const auto& y = curve.yields_pct;
    if (time_to_expiry <= kTenorYears.front()) {
        return y.front() / 100.0;
    }
    if (time_to_expiry >= kTenorYears.back()) {
        return y.back() / 100.0;
    }
    const auto upper = std::upper_bound(kTenorYears.begin(), kTenorYears.end(), time_to_expiry);
    const auto hi = static_cast<std::size_t>(upper - kTenorYears.begin());
    const std::size_t lo = hi - 1;
    const double w = (time_to_expiry - kTenorYears[lo]) / (kTenorYears[hi] - kTenorYears[lo]);
    return ((1.0 - w) * y[lo] + w * y[hi]) / 100.0;
}

TreasuryHistory::TreasuryHistory(std::vector<TreasuryCurveDay> days) : days_(std::move(days)) {
    std::stable_sort(days_.begin(), days_.end(),
                     [](const auto& a, const auto& b) { return a.date < b.date; });
    // keep the last row seen for a duplicated date
    std::vector<TreasuryCurveDay> unique;
    for (const auto& d : days_) {
        if (!unique.empty() && unique.back().date == d.date) {
            unique.back() = d;
        } else {
            unique.push_back(d);
        }
    }
    days_ = std::move(unique);
}

const TreasuryCurveDay* TreasuryHistory::curve_on(Date date) const {
    const auto it = std::upper_bound(days_.begin(), days_.end(), date,
                                     [](Date d, const TreasuryCurveDay& c) { return d < c.date; });
    if (it == days_.begin()) {
        return nullptr;
    }
    return &*std::prev(it);
}

IngestResult<ClosePoint> load_closes(std::istream& source, const std::string& date_column,
                                     const std::string& close_column, char delimiter) {
    io::DelimitedReader reader(source, delimiter);
    const std::size_t c_date = reader.require(date_column);
    const std::size_t c_close = reader.require(close_column);
    const std::size_t width = reader.header().size();

    IngestResult<ClosePoint> out;
    while (auto fields = reader.next()) {
        ++out.rows_read;
        const auto& f = *fields;
        if (f.size() != width) {
            out.diagnostics.push_back({reader.line(), RowIssue::field_count, ""});
            continue;
        }
        const auto date = parse_iso_date(io::trim(f[c_date]));
        const auto close = io::parse_double(f[c_close]);
        if (!date) {
            out.diagnostics.push_back({reader.line(), RowIssue::bad_date, f[c_date]});
        } else if (!close) {
            out.diagnostics.push_back({reader.line(), RowIssue::bad_number, f[c_close]});
        } else if (*close <= 0.0) {
            out.diagnostics.push_back({reader.line(), RowIssue::non_positive_close, f[c_close]});
        } else {
            out.rows.push_back({*date, *close});
        }
    }
    return out;
}

std::vector<VolatilityPoint> trailing_volatility(std::span<const ClosePoint> closes,
                                                 std::size_t window) {
    if (window < 2) {
        throw std::invalid_argument("trailing_volatility: window must be at least 2");
    }
    for (std::size_t i = 0; i < closes.size(); ++i) {
        if (!(closes[i].close > 0.0)) {
            throw std::invalid_argument("trailing_volatility: closes must be positive");
        }
        if (i > 0 && !(closes[i - 1].date < closes[i].date)) {
            throw std::invalid_argument("trailing_volatility: closes must be strictly date-ordered");
        }
    }
    std::vector<VolatilityPoint> out;
    if (closes.size() <= window) {
        return out;
    }

    std::vector<double> returns(closes.size() - 1);
    for (std::size_t i = 1; i < closes.size(); ++i) {
        returns[i - 1] = std::log(closes[i].close / closes[i - 1].close);
    }
    const double annualise = std::sqrt(kTradingDaysPerYear);
    out.reserve(closes.size() - window);
    for (std::size_t end = window; end <= returns.size(); ++end) {
        const auto begin = end - window;
        double mean = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            mean += returns[i];
        }
        mean /= static_cast<double>(window);
        double ss = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            ss += (returns[i] - mean) * (returns[i] - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(window - 1));
        out.push_back({closes[end].date, sd * annualise});
    }
    return out;
}

}  // namespace sysnoise::market
