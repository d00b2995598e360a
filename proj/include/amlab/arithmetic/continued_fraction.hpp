#pragma once

#include "amlab/arithmetic/angle.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace amlab {

/// An irrational alpha in (0,1) given by partial quotients a_1..a_N.
///
/// Convergents follow q_{-1} = q_0 = 1, q_n = a_n q_{n-1} + q_{n-2} and
/// p_{-1} = 0, p_0 = 1, p_n = a_n p_{n-1} + p_{n-2}, so that p_n/q_n are the
/// convergents of alpha = [0; 1, a_1, a_2, ...]. The stored value is p_N/q_N,
/// within 1/(q_N q_{N+1}) of the limit.
class ContinuedFraction {
public:
    explicit ContinuedFraction(std::vector<std::int64_t> partial_quotients);

    /// a_n = 1 for every n: alpha = (sqrt(5) - 1)/2.
    static ContinuedFraction golden(int depth);

    /// Repeats `pattern` cyclically up to `depth` quotients.
    static ContinuedFraction periodic(std::span<const std::int64_t> pattern, int depth);

    int depth() const noexcept { return static_cast<int>(a_.size()); }
    std::span<const std::int64_t> partial_quotients() const noexcept { return a_; }
    std::int64_t a(int n) const;   // 1 <= n <= depth

    const BigInt& q(int n) const;  // -1 <= n <= depth
    const BigInt& p(int n) const;

    const Rational& value_rational() const noexcept { return value_; }
    const Angle& alpha() const noexcept { return alpha_; }
    double alpha_double() const noexcept { return alpha_.value(); }

    /// Certified bound on |alpha - p_N/q_N| using q_{N+1} >= q_N + q_{N-1}.
    HighFloat value_error_bound() const;

private:
    std::vector<std::int64_t> a_;
    std::vector<BigInt> q_;  // index n + 1
    std::vector<BigInt> p_;
    Rational value_;
    Angle alpha_;
};

} // namespace amlab
