#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "sysnoise/dates.hpp"
#include "sysnoise/delimited.hpp"
#include "sysnoise/pricing_models.hpp"

namespace sysnoise::market {

using pricing::OptionType;

/// One end-of-day option-chain row.
struct OptionRecord {
    Date trade_date;
    Date expiration_date;
    OptionType option_type = OptionType::call;
    double strike = 0.0;
    double bid = 0.0;
    double ask = 0.0;
    std::int64_t volume = 0;
    std::int64_t open_interest = 0;
    double underlying_close = 0.0;
};

/// Header names for each required option-chain column.
struct OptionColumns {
    std::string trade_date = "trade_date";
    std::string expiration = "expiration";
    std::string type = "type";
    std::string strike = "strike";
    std::string bid = "bid";
    std::string ask = "ask";
    std::string volume = "volume";
    std::string open_interest = "open_interest";
    std::string underlying_close = "underlying_close";
};

/// Why a row was rejected at ingest.
enum class RowIssue {
    field_count,
    bad_date,
    bad_type,
    bad_number,
    crossed_quote,     // ask < bid
    negative_quote,
    negative_count,
    expired_before_trade,
    non_positive_strike,
    non_positive_close,
    missing_tenor,
};

[[nodiscard]] const char* to_string(RowIssue issue) noexcept;

struct Diagnostic {
    std::size_t line = 0;
    RowIssue issue = RowIssue::field_count;
    std::string detail;
};

template <typename Row>
struct IngestResult {
    std::vector<Row> rows;
    std::vector<Diagnostic> diagnostics;
    std::size_t rows_read = 0;  // == rows.size() + diagnostics.size()
};

/// Reads an option chain. Malformed rows are reported as diagnostics, never
/// silently dropped. Throws io::SchemaError naming a missing column and
/// io::FormatError (with line number) for text that cannot be tokenised.
[[nodiscard]] IngestResult<OptionRecord> load_option_records(std::istream& source,
                                                             const OptionColumns& columns = {},
                                                             char delimiter = ',');

/// Rows with volume > 0 and open interest > 0, in input order.
[[nodiscard]] std::vector<OptionRecord> filter_active(std::span<const OptionRecord> records);

/// (bid + ask) / 2.
[[nodiscard]] double mid_price(const OptionRecord& record) noexcept;

/// Calendar days / 365.
[[nodiscard]] double time_to_expiry(Date trade_date, Date expiration_date) noexcept;

// --- treasury curve -------------------------------------------------------

inline constexpr std::size_t kTenorCount = 11;

/// Column labels and maturities (years) of the constant-maturity tenors.
inline constexpr std::array<const char*, kTenorCount> kTenorLabels = {
    "1mo", "3mo", "6mo", "1yr", "2yr", "3yr", "5yr", "7yr", "10yr", "20yr", "30yr"};
inline constexpr std::array<double, kTenorCount> kTenorYears = {
    1.0 / 12.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 20.0, 30.0};

/// One day's par yields in percent per annum, ordered as kTenorLabels.
struct TreasuryCurveDay {
    Date date;
    std::array<double, kTenorCount> yields_pct{};
};

/// Reads a `date` column plus the eleven tenor columns. Tenor headers may be
/// written "1mo" or in the "X1.mo" style. Rows with a blank or negative yield
/// become missing_tenor diagnostics.
[[nodiscard]] IngestResult<TreasuryCurveDay> load_treasury_curves(std::istream& source,
                                                                  char delimiter = ',');

/// Decimal rate for a maturity: linear in maturity between bracketing tenors,
/// flat beyond the first and last tenor.
[[nodiscard]] double rate_for_maturity(const TreasuryCurveDay& curve, double time_to_expiry);

/// Date-indexed curves with carry-forward over holidays.
class TreasuryHistory {
public:
    TreasuryHistory() = default;
    explicit TreasuryHistory(std::vector<TreasuryCurveDay> days);

    /// Most recent curve dated on or before `date`, or nullptr if none.
    [[nodiscard]] const TreasuryCurveDay* curve_on(Date date) const;

    [[nodiscard]] std::size_t size() const noexcept { return days_.size(); }

private:
    std::vector<TreasuryCurveDay> days_;  // sorted by date, unique
};

// --- underlying closes ----------------------------------------------------

struct ClosePoint {
    Date date;
    double close = 0.0;
};

/// Reads `date` and `close` columns (column names configurable).
[[nodiscard]] IngestResult<ClosePoint> load_closes(std::istream& source,
                                                   const std::string& date_column = "date",
                                                   const std::string& close_column = "close",
                                                   char delimiter = ',');

struct VolatilityPoint {
    Date date;
    double sigma = 0.0;

    /// Zero sample deviation; cannot be used for pricing.
    [[nodiscard]] bool degenerate() const noexcept { return !(sigma > 0.0); }
};

inline constexpr std::size_t kDefaultVolatilityWindow = 21;
inline constexpr double kTradingDaysPerYear = 252.0;

/// Annualised sample deviation of the trailing `window` log returns, one point
/// per date that has a full window behind it. Output length is
/// closes.size() - window. Throws std::invalid_argument if closes are not
/// strictly date-ordered, contain a non-positive price or window < 2.
[[nodiscard]] std::vector<VolatilityPoint> trailing_volatility(
    std::span<const ClosePoint> closes, std::size_t window = kDefaultVolatilityWindow);

}  // namespace sysnoise::market
