#include "macroalloc/core/date.hpp"

#include <charconv>
#include <cstdio>

#include "macroalloc/core/error.hpp"

namespace macroalloc {

namespace {

bool parse_uint(std::string_view text, unsigned& out) {
    if (text.empty()) return false;
    for (char c : text) {
        if (c < '0' || c > '9') return false;
    }
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw ParseError("invalid calendar date " + std::to_string(year) + "-" +
                         std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd}.time_since_epoch().count();
}

bool Date::try_parse(std::string_view text, Date& out) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
    unsigned y = 0, m = 0, d = 0;
    if (!parse_uint(text.substr(0, 4), y) || !parse_uint(text.substr(5, 2), m) ||
        !parse_uint(text.substr(8, 2), d)) {
        return false;
    }
    std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) return false;
    out = Date{std::chrono::sys_days{ymd}};
    return true;
}

Date Date::parse(std::string_view text) {
    Date out;
    if (!try_parse(text, out)) {
        throw ParseError("invalid ISO date '" + std::string(text) + "'");
    }
    return out;
}

std::string Date::to_string() const {
    const auto v = ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                  static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
    return buf;
}

YearMonth YearMonth::parse(std::string_view text) {
    unsigned y = 0, m = 0;
    if (text.size() != 7 || text[4] != '-' || !parse_uint(text.substr(0, 4), y) ||
        !parse_uint(text.substr(5, 2), m) || m < 1 || m > 12) {
        throw ParseError("invalid year-month '" + std::string(text) + "'");
    }
    return YearMonth{static_cast<int>(y), m};
}

std::string YearMonth::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
    return buf;
}

Date YearMonth::last_day() const {
    using namespace std::chrono;
    year_month_day_last last{std::chrono::year{year} / std::chrono::month{month} / std::chrono::last};
    return Date{sys_days{last}};
}

}  // namespace macroalloc
