#include "amlab/arithmetic/angle.hpp"

#include "amlab/errors.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace amlab {

double frac(double x) noexcept {
    const double f = x - std::floor(x);
    // x slightly below an integer can round up to exactly 1.
    return f >= 1.0 ? 0.0 : f;
}

HighFloat frac(const HighFloat& x) {
    HighFloat f = x - floor(x);
    return f >= 1 ? HighFloat(0) : f;
}

Rational frac(const Rational& x) {
    const BigInt& num = boost::multiprecision::numerator(x);
    const BigInt& den = boost::multiprecision::denominator(x);
    BigInt r = num % den;
    if (r < 0) r += den;
    return Rational(r, den);
}

HighFloat to_high(const Rational& x) {
    return HighFloat(boost::multiprecision::numerator(x)) /
           HighFloat(boost::multiprecision::denominator(x));
}

Angle Angle::exact(const Rational& value) {
    Angle a;
    a.exact_ = frac(value);
    a.value_ = to_high(*a.exact_);
    a.approx_ = static_cast<double>(a.value_);
    if (a.approx_ >= 1.0) a.approx_ = 0.0;
    return a;
}

Angle Angle::exact(std::int64_t num, std::int64_t den) {
    require(den != 0, ErrorCode::kInvalidInput, "angle denominator must be non-zero");
    return exact(Rational(BigInt(num), BigInt(den)));
}

Angle Angle::approximate(const HighFloat& value, double error_bound) {
    Angle a;
    a.value_ = frac(value);
    a.approx_ = static_cast<double>(a.value_);
    if (a.approx_ >= 1.0) a.approx_ = 0.0;
    a.error_ = error_bound;
    return a;
}

Angle Angle::from_double(double value, double error_bound) {
    require(std::isfinite(value), ErrorCode::kInvalidInput, "angle must be finite");
    return approximate(HighFloat(value), error_bound);
}

namespace {

std::optional<Rational> parse_decimal_exact(std::string_view text) {
    // Decimal literals without exponent are exact rationals: "0.25" -> 1/4.
    if (text.find_first_of("eE") != std::string_view::npos) return std::nullopt;
    bool negative = false;
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) {
        negative = text[pos] == '-';
        ++pos;
    }
    BigInt num = 0;
    BigInt den = 1;
    bool seen_point = false;
    bool seen_digit = false;
    for (; pos < text.size(); ++pos) {
        const char c = text[pos];
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (seen_point) den *= 10;
            seen_digit = true;
        } else {
            return std::nullopt;
        }
    }
    if (!seen_digit) return std::nullopt;
    if (negative) num = -num;
    return Rational(num, den);
}

} // namespace

Angle Angle::parse(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
    require(!text.empty(), ErrorCode::kInvalidInput, "empty angle literal");
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
        auto num = parse_decimal_exact(text.substr(0, slash));
        auto den = parse_decimal_exact(text.substr(slash + 1));
        require(num && den, ErrorCode::kInvalidInput,
                "cannot parse angle '" + std::string(text) + "'");
        require(*den != 0, ErrorCode::kInvalidInput, "angle denominator must be non-zero");
        return exact(*num / *den);
    }
    if (auto exact_value = parse_decimal_exact(text)) return exact(*exact_value);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    require(ec == std::errc() && ptr == text.data() + text.size(), ErrorCode::kInvalidInput,
            "cannot parse angle '" + std::string(text) + "'");
    return from_double(v, 0.0);
}

Angle Angle::operator+(const Angle& other) const {
    if (exact_ && other.exact_) return exact(*exact_ + *other.exact_);
    return approximate(value_ + other.value_, error_ + other.error_);
}

Angle Angle::operator-(const Angle& other) const {
    if (exact_ && other.exact_) return exact(*exact_ - *other.exact_);
    return approximate(value_ - other.value_, error_ + other.error_);
}

Angle Angle::operator-() const {
    if (exact_) return exact(-*exact_);
    return approximate(-value_, error_);
}

std::string Angle::to_string() const {
    if (exact_) {
        std::ostringstream os;
        os << boost::multiprecision::numerator(*exact_) << '/'
           << boost::multiprecision::denominator(*exact_);
        return os.str();
    }
    return value_.str(40);
}

double circle_norm(double x) noexcept {
    const double f = frac(x);
    return std::min(f, 1.0 - f);
}

double circle_norm(const Angle& x) {
    if (x.is_exact()) return static_cast<double>(to_high(circle_norm(*x.rational())));
    return static_cast<double>(circle_norm(x.high()));
}

HighFloat circle_norm(const HighFloat& x) {
    HighFloat f = frac(x);
    HighFloat g = 1 - f;
    return f < g ? f : g;
}

Rational circle_norm(const Rational& x) {
    Rational f = frac(x);
    Rational g = 1 - f;
    return f < g ? f : g;
}

} // namespace amlab
