#include "sysnoise/pricing_errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sysnoise/delimited.hpp"

namespace sysnoise::errors {

using pricing::ExerciseStyle;
using pricing::OptionContractSpec;

std::string to_string(const ContractKey& key) {
    return format_iso_date(key.expiration) + " " + io::format_double(key.strike) + " " +
           pricing::to_string(key.type);
}

ContractPricingError::ContractPricingError(const ContractKey& key, Date trade_date,
                                           const std::string& cause)
    : std::runtime_error("pricing " + to_string(key) + " on " + format_iso_date(trade_date) +
                         ": " + cause) {}

ErrorRecord compute_errors(const market::OptionRecord& record,
                           const pricing::MarketParams& params) {
    const ContractKey key{record.expiration_date, record.strike, record.option_type};
    const OptionContractSpec american{
        record.option_type, ExerciseStyle::american, record.strike,
        market::time_to_expiry(record.trade_date, record.expiration_date)};

    ErrorRecord out;
    out.trade_date = record.trade_date;
    out.key = key;
    out.market_price = market::mid_price(record);
    out.volume = record.volume;
    try {
        out.bs_price = pricing::bs_price(pricing::european_twin(american), params);
        out.baw_price = pricing::baw_price(american, params);
    } catch (const std::exception& e) {
        throw ContractPricingError(key, record.trade_date, e.what());
    }
    out.x_bs = out.bs_price - out.market_price;
    out.x_baw = out.baw_price - out.market_price;
    return out;
}

OutlierFilterResult drop_outliers(std::span<const ErrorRecord> errors, double threshold) {
    if (!(threshold > 0.0)) {
        throw std::invalid_argument("drop_outliers: threshold must be positive");
    }
    OutlierFilterResult out;
    for (const auto& e : errors) {
        if (std::abs(e.x_bs) > threshold || std::abs(e.x_baw) > threshold) {
            ++out.dropped;
        } else {
            out.retained.push_back(e);
        }
    }
    return out;
}

SeriesStats descriptive_stats(std::span<const double> series) {
    if (series.empty()) {
        throw std::domain_error("descriptive_stats: empty series");
    }
    SeriesStats s;
    s.n = series.size();
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : series) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n >= 2) {
        double ss = 0.0;
        for (double v : series) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        s.sd_defined = true;
    }
    // summation rounding can push the mean a hair outside [min, max]
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

namespace {
constexpr const char* kErrorColumns[] = {"trade_date", "expiration", "strike",  "type",
                                         "market_price", "bs_price", "baw_price", "x_bs",
                                         "x_baw",      "volume"};
}

void write_error_records(std::ostream& out, std::span<const ErrorRecord> records,
                         char delimiter) {
    bool first = true;
    for (const char* c : kErrorColumns) {
        if (!first) {
            out << delimiter;
        }
        out << c;
        first = false;
    }
    out << '\n';
    for (const auto& r : records) {
        out << format_iso_date(r.trade_date) << delimiter << format_iso_date(r.key.expiration)
            << delimiter << io::format_double(r.key.strike) << delimiter
            << pricing::to_string(r.key.type) << delimiter << io::format_double(r.market_price)
            << delimiter << io::format_double(r.bs_price) << delimiter
            << io::format_double(r.baw_price) << delimiter << io::format_double(r.x_bs)
            << delimiter << io::format_double(r.x_baw) << delimiter << r.volume << '\n';
    }
}

std::vector<ErrorRecord> read_error_records(std::istream& in, char delimiter) {
    io::DelimitedReader reader(in, delimiter);
    std::size_t idx[std::size(kErrorColumns)];
    for (std::size_t i = 0; i < std::size(kErrorColumns); ++i) {
        idx[i] = reader.require(kErrorColumns[i]);
    }
    std::vector<ErrorRecord> out;
    while (auto fields = reader.next()) {
        const auto& f = *fields;
        if (f.size() != reader.header().size()) {
            throw io::FormatError(reader.line(), "field count mismatch");
        }
        const auto trade = parse_iso_date(io::trim(f[idx[0]]));
        const auto expiry = parse_iso_date(io::trim(f[idx[1]]));
        const auto type = io::trim(f[idx[3]]);
        std::optional<double> nums[6];
        for (int k = 0; k < 6; ++k) {
            nums[k] = io::parse_double(f[idx[k == 0 ? 2 : k + 3]]);
        }
        const auto volume = io::parse_int(f[idx[9]]);
        const bool nums_ok = std::all_of(std::begin(nums), std::end(nums),
                                         [](const auto& n) { return n.has_value(); });
        if (!trade || !expiry || !nums_ok || !volume || (type != "call" && type != "put")) {
            throw io::FormatError(reader.line(), "malformed error record");
        }
        ErrorRecord r;
        r.trade_date = *trade;
        r.key = {*expiry, *nums[0],
                 type == "call" ? pricing::OptionType::call : pricing::OptionType::put};
        r.market_price = *nums[1];
        r.bs_price = *nums[2];
        r.baw_price = *nums[3];
        r.x_bs = *nums[4];
        r.x_baw = *nums[5];
        r.volume = *volume;
        out.push_back(r);
    }
    return out;
}

}  // namespace sysnoise::errors
