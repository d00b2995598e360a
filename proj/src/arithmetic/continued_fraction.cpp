#include "amlab/arithmetic/continued_fraction.hpp"

#include "amlab/errors.hpp"

namespace amlab {

ContinuedFraction::ContinuedFraction(std::vector<std::int64_t> partial_quotients)
    : a_(std::move(partial_quotients)) {
    require(!a_.empty(), ErrorCode::kInvalidInput, "continued fraction needs depth >= 1");
    for (std::size_t i = 0; i < a_.size(); ++i) {
        require(a_[i] >= 1, ErrorCode::kInvalidInput,
                "partial quotient a_" + std::to_string(i + 1) + " must be a positive integer");
    }
    q_.reserve(a_.size() + 2);
    p_.reserve(a_.size() + 2);
    q_.push_back(1);  // q_{-1}
    q_.push_back(1);  // q_0
    p_.push_back(0);
    p_.push_back(1);
    for (std::size_t i = 0; i < a_.size(); ++i) {
        const std::size_t n = i + 2;
        q_.push_back(a_[i] * q_[n - 1] + q_[n - 2]);
        p_.push_back(a_[i] * p_[n - 1] + p_[n - 2]);
    }
    value_ = Rational(p_.back(), q_.back());
    alpha_ = Angle::approximate(to_high(value_), static_cast<double>(value_error_bound()));
}

ContinuedFraction ContinuedFraction::golden(int depth) {
    require(depth >= 1, ErrorCode::kInvalidInput, "continued fraction needs depth >= 1");
    return ContinuedFraction(std::vector<std::int64_t>(static_cast<std::size_t>(depth), 1));
}

ContinuedFraction ContinuedFraction::periodic(std::span<const std::int64_t> pattern, int depth) {
    require(!pattern.empty(), ErrorCode::kInvalidInput, "empty partial-quotient pattern");
    require(depth >= 1, ErrorCode::kInvalidInput, "continued fraction needs depth >= 1");
    std::vector<std::int64_t> a(static_cast<std::size_t>(depth));
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = pattern[i % pattern.size()];
    return ContinuedFraction(std::move(a));
}

std::int64_t ContinuedFraction::a(int n) const {
    require(n >= 1 && n <= depth(), ErrorCode::kInvalidInput, "partial quotient index out of range");
    return a_[static_cast<std::size_t>(n - 1)];
}

const BigInt& ContinuedFraction::q(int n) const {
    require(n >= -1 && n <= depth(), ErrorCode::kInsufficientDepth,
            "convergent index " + std::to_string(n) + " beyond stored depth");
    return q_[static_cast<std::size_t>(n + 1)];
}

const BigInt& ContinuedFraction::p(int n) const {
    require(n >= -1 && n <= depth(), ErrorCode::kInsufficientDepth,
            "convergent index " + std::to_string(n) + " beyond stored depth");
    return p_[static_cast<std::size_t>(n + 1)];
}

HighFloat ContinuedFraction::value_error_bound() const {
    const BigInt& qn = q_.back();
    const BigInt& qn1 = q_[q_.size() - 2];
    return HighFloat(1) / (HighFloat(qn) * HighFloat(qn + qn1));
}

} // namespace amlab
