#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace macroalloc {

/// Calendar date with day resolution, stored as days since 1970-01-01.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days.time_since_epoch().count()) {}
    Date(int year, unsigned month, unsigned day);

    /// Strict ISO-8601 `YYYY-MM-DD`; throws ParseError otherwise.
    static Date parse(std::string_view text);
    static bool try_parse(std::string_view text, Date& out);

    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] std::chrono::sys_days sys_days() const {
        return std::chrono::sys_days{std::chrono::days{days_}};
    }
    [[nodiscard]] std::chrono::year_month_day ymd() const { return {sys_days()}; }
    [[nodiscard]] std::int32_t serial() const { return days_; }

    [[nodiscard]] Date plus_days(int n) const { return Date{sys_days() + std::chrono::days{n}}; }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::int32_t days_ = 0;
};

/// A reference month such as `2018-12`.
struct YearMonth {
    int year = 1970;
    unsigned month = 1;

    static YearMonth parse(std::string_view text);
    [[nodiscard]] std::string to_string() const;
    [[nodiscard]] Date last_day() const;
    [[nodiscard]] int index() const { return year * 12 + static_cast<int>(month) - 1; }

    friend constexpr auto operator<=>(const YearMonth&, const YearMonth&) = default;
};

}  // namespace macroalloc

template <>
struct std::hash<macroalloc::Date> {
    std::size_t operator()(const macroalloc::Date& d) const noexcept {
        return std::hash<std::int32_t>{}(d.serial());
    }
};
