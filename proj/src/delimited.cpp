#include "sysnoise/delimited.hpp"

#include <charconv>
#include <cmath>

namespace sysnoise::io {

std::optional<std::vector<std::string>> split_fields(std::string_view line, char delimiter) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delimiter) {
            fields.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (quoted) {
        return std::nullopt;
    }
    fields.push_back(std::move(current));
    return fields;
}

std::string_view trim(std::string_view text) noexcept {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = text.find_last_not_of(" \t\r\n");
    return text.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view text) noexcept {
    text = trim(text);
    if (!text.empty() && text.front() == '+') {
        text.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() ||
        !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) noexcept {
    text = trim(text);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

DelimitedReader::DelimitedReader(std::istream& in, char delimiter)
    : in_(in), delimiter_(delimiter) {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_;
        if (!trim(raw).empty()) {
            break;
        }
        raw.clear();
    }
    if (trim(raw).empty()) {
        throw FormatError(line_ == 0 ? 1 : line_, "no header row");
    }
    auto fields = split_fields(trim(raw), delimiter_);
    if (!fields) {
        throw FormatError(line_, "unterminated quote in header");
    }
    for (auto& f : *fields) {
        header_.emplace_back(trim(f));
    }
    for (std::size_t i = 0; i < header_.size(); ++i) {
        index_.emplace(header_[i], i);
    }
}

std::optional<std::size_t> DelimitedReader::find(const std::string& column) const {
    const auto it = index_.find(column);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t DelimitedReader::require(const std::string& column) const {
    if (auto idx = find(column)) {
        return *idx;
    }
    throw SchemaError(column);
}

std::optional<std::vector<std::string>> DelimitedReader::next() {
    std::string raw;
    while (std::getline(in_, raw)) {
        ++line_;
        const auto body = trim(raw);
        if (body.empty()) {
            continue;
        }
        auto fields = split_fields(body, delimiter_);
        if (!fields) {
            throw FormatError(line_, "unterminated quote");
        }
        return fields;
    }
    return std::nullopt;
}

}  // namespace sysnoise::io
