#pragma once

#include "amlab/arithmetic/continued_fraction.hpp"

#include <cstdint>

namespace amlab {

/// Exact evaluation of the orbit {x0 + m alpha} of the rotation R_alpha.
///
/// {m alpha} is split into ((m p mod q) / q) + m (alpha_N - p/q) for a convergent
/// p/q with q < 2^62: the first part is exact integer arithmetic, the second is a
/// tiny correction. Absolute error of every returned point is below 1e-15.
class Rotation {
public:
    explicit Rotation(const ContinuedFraction& cf);

    double alpha() const noexcept { return alpha_; }

    /// Largest |m| the stored depth certifies to 1e-15 (capped at 1e9).
    std::int64_t max_iterate() const noexcept { return max_iterate_; }

    /// {x0 + m alpha}; throws insufficient-depth beyond max_iterate().
    double point(double x0, std::int64_t m) const;

    /// {m alpha}.
    double shift(std::int64_t m) const { return point(0.0, m); }

    /// Sequential orbit walker: same values as point(x0, m0 + i), O(1) per step.
    class Cursor {
    public:
        double value() const noexcept { return value_; }
        std::int64_t index() const noexcept { return m_; }
        void advance() noexcept;
        void retreat() noexcept;

    private:
        friend class Rotation;
        Cursor(const Rotation* rot, double x0, std::int64_t m0);
        void refresh() noexcept;

        const Rotation* rot_;
        double x0_;
        std::int64_t m_;
        std::int64_t residue_;  // (m p) mod q
        double value_ = 0.0;
    };

    Cursor cursor(double x0, std::int64_t m0 = 0) const;

    /// Throws insufficient-depth when |m| > max_iterate().
    void ensure_certified(std::int64_t m) const;

private:
    double assemble(double x0, std::int64_t residue, std::int64_t m) const noexcept;

    std::int64_t p_ = 0;
    std::int64_t q_ = 1;
    double inv_q_ = 1.0;
    double delta_ = 0.0;  // alpha_N - p/q
    double alpha_ = 0.0;
    std::int64_t max_iterate_ = 0;
};

/// {x0 + m alpha} as an Angle carrying the 1e-15 error bound.
Angle orbit_point(const ContinuedFraction& cf, const Angle& x0, std::int64_t m);

} // namespace amlab
