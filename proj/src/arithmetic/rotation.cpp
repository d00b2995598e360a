#include "amlab/arithmetic/rotation.hpp"

#include "amlab/errors.hpp"

#include <cmath>
#include <cstdlib>

namespace amlab {

namespace {

constexpr std::int64_t kMaxIterate = 1'000'000'000;

bool fits_q(const BigInt& q) {
    static const BigInt limit = BigInt(1) << 62;
    return q < limit;
}

} // namespace

Rotation::Rotation(const ContinuedFraction& cf) {
    int n = cf.depth();
    while (n > 0 && !fits_q(cf.q(n))) --n;
    p_ = static_cast<std::int64_t>(cf.p(n));
    q_ = static_cast<std::int64_t>(cf.q(n));
    inv_q_ = 1.0 / static_cast<double>(q_);
    const Rational correction = cf.value_rational() - Rational(cf.p(n), cf.q(n));
    delta_ = static_cast<double>(to_high(correction));
    alpha_ = cf.alpha_double();

    // |m| / (q_N (q_N + q_{N-1})) < 1e-15
    const HighFloat certified =
        HighFloat(cf.q(cf.depth())) * HighFloat(cf.q(cf.depth()) + cf.q(cf.depth() - 1)) / 1e15;
    max_iterate_ = certified >= kMaxIterate ? kMaxIterate
                                            : static_cast<std::int64_t>(floor(certified));
}

void Rotation::ensure_certified(std::int64_t m) const {
    if (m > max_iterate_ || m < -max_iterate_) {
        fail(ErrorCode::kInsufficientDepth,
             "iterate " + std::to_string(m) + " exceeds the certified range +-" +
                 std::to_string(max_iterate_) + " of the stored continued fraction");
    }
}

double Rotation::assemble(double x0, std::int64_t residue, std::int64_t m) const noexcept {
    const double base = static_cast<double>(residue) * inv_q_;
    return frac(frac(x0 + base) + static_cast<double>(m) * delta_);
}

double Rotation::point(double x0, std::int64_t m) const {
    ensure_certified(m);
    __int128 r = static_cast<__int128>(m) * p_ % q_;
    if (r < 0) r += q_;
    return assemble(x0, static_cast<std::int64_t>(r), m);
}

Rotation::Cursor Rotation::cursor(double x0, std::int64_t m0) const {
    ensure_certified(m0);
    return Cursor(this, x0, m0);
}

Rotation::Cursor::Cursor(const Rotation* rot, double x0, std::int64_t m0)
    : rot_(rot), x0_(x0), m_(m0) {
    __int128 r = static_cast<__int128>(m0) * rot->p_ % rot->q_;
    if (r < 0) r += rot->q_;
    residue_ = static_cast<std::int64_t>(r);
    refresh();
}

void Rotation::Cursor::refresh() noexcept { value_ = rot_->assemble(x0_, residue_, m_); }

void Rotation::Cursor::advance() noexcept {
    ++m_;
    residue_ += rot_->p_;
    if (residue_ >= rot_->q_) residue_ -= rot_->q_;
    refresh();
}

void Rotation::Cursor::retreat() noexcept {
    --m_;
    residue_ -= rot_->p_;
    if (residue_ < 0) residue_ += rot_->q_;
    refresh();
}

Angle orbit_point(const ContinuedFraction& cf, const Angle& x0, std::int64_t m) {
    require(std::llabs(m) <= kMaxIterate, ErrorCode::kInvalidInput, "|m| must not exceed 1e9");
    if (m == 0) return x0;
    const Rotation rot(cf);
    return Angle::from_double(rot.point(x0.value(), m), 1e-15 + x0.error_bound());
}

} // namespace amlab
