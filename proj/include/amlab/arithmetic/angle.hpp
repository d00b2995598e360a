#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace amlab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;
using HighFloat = boost::multiprecision::cpp_bin_float_100;

/// Fractional part, right-continuous: frac(0) = 0, frac(-0.25) = 0.75.
double frac(double x) noexcept;
HighFloat frac(const HighFloat& x);
Rational frac(const Rational& x);

HighFloat to_high(const Rational& x);

/// Point of T = R/Z in [0,1).
///
/// An angle is either exact (a reduced rational, e.g. derived from convergents or
/// parsed from "p/q") or a ~100-digit binary float. `error_bound()` reports the
/// absolute uncertainty carried along; it is 0 for exact angles.
class Angle {
public:
    Angle() = default;

    static Angle exact(const Rational& value);
    static Angle exact(std::int64_t num, std::int64_t den);
    static Angle approximate(const HighFloat& value, double error_bound);
    static Angle from_double(double value, double error_bound = 0.0);

    /// Accepts "p/q", "-p/q", decimal literals and scientific notation.
    static Angle parse(std::string_view text);

    bool is_exact() const noexcept { return exact_.has_value(); }
    const std::optional<Rational>& rational() const noexcept { return exact_; }
    const HighFloat& high() const noexcept { return value_; }
    double value() const noexcept { return approx_; }
    double error_bound() const noexcept { return error_; }

    Angle operator+(const Angle& other) const;
    Angle operator-(const Angle& other) const;
    Angle operator-() const;

    /// "p/q" for exact angles, 40 significant digits otherwise.
    std::string to_string() const;

private:
    std::optional<Rational> exact_;
    HighFloat value_{0};
    double approx_ = 0.0;
    double error_ = 0.0;
};

/// Distance to the closest integer, in [0, 1/2].
double circle_norm(double x) noexcept;
double circle_norm(const Angle& x);
HighFloat circle_norm(const HighFloat& x);
Rational circle_norm(const Rational& x);

} // namespace amlab
