#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace macroalloc {

/// Share price in fixed-point units of 1e-4 USD.
class Price {
public:
    static constexpr std::int64_t kScale = 10'000;

    constexpr Price() = default;
    static constexpr Price from_units(std::int64_t units) { return Price{units}; }
    /// Exact decimal parse; digits beyond the fourth decimal round half away from zero.
    static Price parse(std::string_view text);
    static Price from_double(double usd);

    [[nodiscard]] constexpr std::int64_t units() const { return units_; }
    [[nodiscard]] double to_double() const { return static_cast<double>(units_) / kScale; }
    [[nodiscard]] std::string to_string() const;

    friend constexpr auto operator<=>(const Price&, const Price&) = default;

private:
    constexpr explicit Price(std::int64_t u) : units_(u) {}
    std::int64_t units_ = 0;
};

/// Currency amount in fixed-point units of 1e-8 USD. A notional of integer shares at a
/// 4-decimal price times an integer basis-point rate is always representable exactly.
class Money {
public:
    static constexpr std::int64_t kScale = 100'000'000;

    constexpr Money() = default;
    static constexpr Money from_units(std::int64_t units) { return Money{units}; }
    static Money parse(std::string_view text);
    static Money from_double(double usd);
    static constexpr Money usd(std::int64_t dollars) { return Money{dollars * kScale}; }

    [[nodiscard]] constexpr std::int64_t units() const { return units_; }
    [[nodiscard]] double to_double() const { return static_cast<double>(units_) / kScale; }
    /// Exact decimal rendering with at least two and at most eight fractional digits.
    [[nodiscard]] std::string to_string() const;
    /// Rounded to whole cents, half away from zero.
    [[nodiscard]] std::int64_t cents() const;

    constexpr Money operator-() const { return Money{-units_}; }
    constexpr Money& operator+=(Money o) { units_ += o.units_; return *this; }
    constexpr Money& operator-=(Money o) { units_ -= o.units_; return *this; }
    friend constexpr Money operator+(Money a, Money b) { return Money{a.units_ + b.units_}; }
    friend constexpr Money operator-(Money a, Money b) { return Money{a.units_ - b.units_}; }
    friend constexpr auto operator<=>(const Money&, const Money&) = default;

private:
    constexpr explicit Money(std::int64_t u) : units_(u) {}
    std::int64_t units_ = 0;
};

/// quantity × price, exact.
Money notional(std::int64_t quantity, Price price);

/// amount × bps / 10'000. Exact whenever `amount` is a share notional.
Money basis_points_of(Money amount, std::int64_t bps);

/// floor(equity × pct_micro / 1e8 / price): whole shares purchasable with `pct_micro`
/// millionths of a percent of `equity`.
std::int64_t shares_for_fraction(Money equity, std::int64_t pct_micro, Price price);

/// Converts a percentage such as 1.25 into integer millionths of a percent.
std::int64_t percent_to_micro(double pct);

}  // namespace macroalloc
