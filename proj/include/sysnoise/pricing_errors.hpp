#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sysnoise/market_data.hpp"
#include "sysnoise/pricing_models.hpp"

namespace sysnoise::errors {

/// Contract identity used for ordering and for error messages.
struct ContractKey {
    Date expiration;
    double strike = 0.0;
    pricing::OptionType type = pricing::OptionType::call;

    friend auto operator<=>(const ContractKey&, const ContractKey&) = default;
};

[[nodiscard]] std::string to_string(const ContractKey& key);

/// Market row joined with both model prices. x_bs and x_baw are stored as
/// model minus market, so a model that under-prices yields a negative error.
struct ErrorRecord {
    Date trade_date;
    ContractKey key;
    double market_price = 0.0;
    double bs_price = 0.0;
    double baw_price = 0.0;
    double x_bs = 0.0;
    double x_baw = 0.0;
    std::int64_t volume = 0;
};

/// A pricing failure with the offending contract attached.
class ContractPricingError : public std::runtime_error {
public:
    ContractPricingError(const ContractKey& key, Date trade_date, const std::string& cause);
};

/// Prices the record's European twin with Black-Scholes and the American
/// contract with Barone-Adesi/Whaley, then subtracts the mid price.
/// params.spot is taken as given (normally the record's underlying close).
[[nodiscard]] ErrorRecord compute_errors(const market::OptionRecord& record,
                                         const pricing::MarketParams& params);

struct OutlierFilterResult {
    std::vector<ErrorRecord> retained;
    std::size_t dropped = 0;
};

inline constexpr double kDefaultOutlierThreshold = 25.0;

/// Drops rows where either |x_bs| or |x_baw| exceeds the threshold.
[[nodiscard]] OutlierFilterResult drop_outliers(std::span<const ErrorRecord> errors,
                                                double threshold = kDefaultOutlierThreshold);

struct SeriesStats {
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;   // sample (n - 1); 0 when n == 1
    double min = 0.0;
    double max = 0.0;
    bool sd_defined = false;
};

/// Throws std::domain_error on an empty series.
[[nodiscard]] SeriesStats descriptive_stats(std::span<const double> series);

/// Persisted intermediate: one ErrorRecord per delimited row.
void write_error_records(std::ostream& out, std::span<const ErrorRecord> records,
                         char delimiter = ',');
[[nodiscard]] std::vector<ErrorRecord> read_error_records(std::istream& in, char delimiter = ',');

}  // namespace sysnoise::errors
