#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <vector>

namespace ppaview {

/// Shortest decimal form that round-trips the double; stable across runs.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Like format_double, but integral values keep a ".0" suffix (8 -> "8.0").
inline std::string format_param(double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eni") == std::string::npos) s += ".0";
    return s;
}

/// Splits one CSV line on commas; no quoting support.
std::vector<std::string> split_csv_line(std::string_view line);

class CsvRow {
public:
    CsvRow& operator<<(double v) { return add(format_double(v)); }
    CsvRow& operator<<(int v) { return add(std::to_string(v)); }
    CsvRow& operator<<(long v) { return add(std::to_string(v)); }
    CsvRow& operator<<(unsigned long v) { return add(std::to_string(v)); }
    CsvRow& operator<<(unsigned long long v) { return add(std::to_string(v)); }
    CsvRow& operator<<(const std::string& v) { return add(v); }
    CsvRow& operator<<(const char* v) { return add(v); }

    const std::string& str() const { return line_; }

private:
    CsvRow& add(const std::string& cell) {
        if (!first_) line_ += ',';
        line_ += cell;
        first_ = false;
        return *this;
    }
    std::string line_;
    bool first_{true};
};

}  // namespace ppaview
