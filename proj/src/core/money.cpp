#include "macroalloc/core/money.hpp"

#include <cmath>
#include <limits>

#include "macroalloc/core/error.hpp"

namespace macroalloc {

namespace {

using i128 = __int128;

std::int64_t checked(i128 v, const char* what) {
    if (v > std::numeric_limits<std::int64_t>::max() ||
        v < std::numeric_limits<std::int64_t>::min()) {
        throw RangeError(std::string("fixed-point overflow in ") + what);
    }
    return static_cast<std::int64_t>(v);
}

// Parses a plain decimal literal into units of 10^-digits.
std::int64_t parse_decimal(std::string_view text, int digits) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) throw ParseError("empty decimal '" + std::string(text) + "'");

    i128 value = 0;
    int frac = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    bool round_up = false;
    bool rounded = false;
    for (char c : s) {
        if (c == '.') {
            if (seen_dot) throw ParseError("invalid decimal '" + std::string(text) + "'");
            seen_dot = true;
            continue;
        }
        if (c < '0' || c > '9') throw ParseError("invalid decimal '" + std::string(text) + "'");
        seen_digit = true;
        if (seen_dot && frac >= digits) {
            if (!rounded) {
                round_up = c >= '5';
                rounded = true;
            }
            continue;
        }
        value = value * 10 + (c - '0');
        if (value > static_cast<i128>(std::numeric_limits<std::int64_t>::max())) {
            throw RangeError("decimal out of range '" + std::string(text) + "'");
        }
        if (seen_dot) ++frac;
    }
    if (!seen_digit) throw ParseError("invalid decimal '" + std::string(text) + "'");
    for (; frac < digits; ++frac) value *= 10;
    if (round_up) value += 1;
    return checked(negative ? -value : value, "decimal parse");
}

std::string render_decimal(std::int64_t units, std::int64_t scale, int digits, int min_digits) {
    const bool negative = units < 0;
    const auto mag = static_cast<unsigned long long>(negative ? -static_cast<i128>(units) : units);
    const auto whole = mag / static_cast<unsigned long long>(scale);
    auto frac = mag % static_cast<unsigned long long>(scale);
    std::string frac_str(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
        frac_str[static_cast<std::size_t>(i)] = static_cast<char>('0' + frac % 10);
        frac /= 10;
    }
    while (static_cast<int>(frac_str.size()) > min_digits && frac_str.back() == '0') {
        frac_str.pop_back();
    }
    std::string out = negative ? "-" : "";
    out += std::to_string(whole);
    if (!frac_str.empty()) out += "." + frac_str;
    return out;
}

}  // namespace

Price Price::parse(std::string_view text) { return Price{parse_decimal(text, 4)}; }

Price Price::from_double(double usd) {
    if (!std::isfinite(usd)) throw RangeError("non-finite price");
    return Price{checked(static_cast<i128>(std::llround(usd * kScale)), "price")};
}

std::string Price::to_string() const { return render_decimal(units_, kScale, 4, 2); }

Money Money::parse(std::string_view text) { return Money{parse_decimal(text, 8)}; }

Money Money::from_double(double usd) {
    if (!std::isfinite(usd) || std::fabs(usd) > 9.0e10) throw RangeError("money out of range");
    return Money{std::llround(usd * static_cast<double>(kScale))};
}

std::string Money::to_string() const { return render_decimal(units_, kScale, 8, 2); }

std::int64_t Money::cents() const {
    constexpr std::int64_t per_cent = kScale / 100;
    const std::int64_t q = units_ / per_cent;
    const std::int64_t r = units_ % per_cent;
    if (r * 2 >= per_cent) return q + 1;
    if (r * 2 <= -per_cent) return q - 1;
    return q;
}

Money notional(std::int64_t quantity, Price price) {
    constexpr std::int64_t factor = Money::kScale / Price::kScale;
    return Money::from_units(
        checked(static_cast<i128>(quantity) * price.units() * factor, "notional"));
}

Money basis_points_of(Money amount, std::int64_t bps) {
    const i128 product = static_cast<i128>(amount.units()) * bps;
    return Money::from_units(checked(product / 10'000, "basis points"));
}

std::int64_t shares_for_fraction(Money equity, std::int64_t pct_micro, Price price) {
    if (price.units() <= 0 || equity.units() <= 0 || pct_micro <= 0) return 0;
    constexpr std::int64_t factor = Money::kScale / Price::kScale;
    // equity_units * pct_micro / (100 * 1e6) / (price_units * factor)
    const i128 numerator = static_cast<i128>(equity.units()) * pct_micro;
    const i128 denominator = static_cast<i128>(100'000'000) * price.units() * factor;
    return checked(numerator / denominator, "share count");
}

std::int64_t percent_to_micro(double pct) {
    if (!std::isfinite(pct) || std::fabs(pct) > 1.0e6) throw RangeError("percentage out of range");
    return std::llround(pct * 1'000'000.0);
}

}  // namespace macroalloc
