#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sysnoise::io {

/// Input that cannot be read as delimited text at all.
class FormatError : public std::runtime_error {
public:
    FormatError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A required column is absent from the header.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& column)
        : std::runtime_error("missing required column '" + column + "'"), column_(column) {}

    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// Splits one record. Fields may be wrapped in double quotes, with "" as an
/// escaped quote. Returns nullopt on an unterminated quote.
[[nodiscard]] std::optional<std::vector<std::string>> split_fields(std::string_view line,
                                                                   char delimiter);

[[nodiscard]] std::string_view trim(std::string_view text) noexcept;
[[nodiscard]] std::optional<double> parse_double(std::string_view text) noexcept;
[[nodiscard]] std::optional<std::int64_t> parse_int(std::string_view text) noexcept;

/// Shortest round-trip decimal representation of a double.
[[nodiscard]] std::string format_double(double value);

/// Row-at-a-time reader over header-led delimited text.
class DelimitedReader {
public:
    /// Reads the header. Throws FormatError if the stream has no header line.
    DelimitedReader(std::istream& in, char delimiter);

    /// Index of a header column, or throws SchemaError naming it.
    [[nodiscard]] std::size_t require(const std::string& column) const;
    [[nodiscard]] std::optional<std::size_t> find(const std::string& column) const;

    [[nodiscard]] const std::vector<std::string>& header() const noexcept { return header_; }

    /// Next non-blank record. Throws FormatError on an unterminated quote.
    [[nodiscard]] std::optional<std::vector<std::string>> next();

    /// 1-based line number of the record last returned by next().
    [[nodiscard]] std::size_t line() const noexcept { return line_; }

private:
    std::istream& in_;
    char delimiter_;
    std::size_t line_ = 0;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace sysnoise::io
