#pragma once

#include "amlab/arithmetic/continued_fraction.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace amlab {

/// One orbit of wandering intervals: gaps k = -K..K projecting to {beta + k alpha}.
struct HoleSpec {
    Angle beta;
    std::vector<double> lengths;  // lengths[k + k_gap], before normalization
    int k_gap = 0;
    bool hyperbolic = false;      // lengths decay like C Delta^|k|
    double C = 0.0;
    double Delta = 0.0;

    double length(int k) const { return lengths[static_cast<std::size_t>(k + k_gap)]; }

    /// l_k = C Delta^|k| for |k| <= k_gap.
    static HoleSpec geometric(Angle beta, double C, double Delta, int k_gap = 200);
    static HoleSpec explicit_lengths(Angle beta, std::vector<double> lengths);
};

struct GapId {
    int hole = 0;
    std::int64_t k = 0;
    bool operator==(const GapId&) const = default;
};

enum class PointKind { kCantor, kGap };

/// Point of the model circle.
///
/// `x` is the coordinate in [0,1). Besides it, every point keeps its address on
/// the rotation circle: `theta` = h(point) and, when theta lies on a hole orbit,
/// which gap. In truncated models with no Cantor mass, distinct Cantor points can
/// share a coordinate; the address keeps them apart.
struct CantorPoint {
    double x = 0.0;
    PointKind kind = PointKind::kCantor;
    double theta = 0.0;
    std::optional<GapId> gap;  // set when theta is a hole-orbit point (retained or not)
    double offset = 0.0;       // distance from the gap's left endpoint, in [0, length]

    /// Relative position inside the gap, in [0,1]; 0 for Cantor points off the holes.
    double relative_position(double gap_length) const {
        return gap_length > 0.0 ? offset / gap_length : 0.0;
    }
};

/// Minimal Cantor circle system (Denjoy counterexample) semi-conjugate to R_alpha.
///
/// The staircase H(theta) = (1 - G) theta + sum_{gaps at or left of theta} l_{j,k} places
/// the gap (j,k) at [H(theta_jk^-), H(theta_jk)] with theta_jk = {beta_j + k alpha}.
class DenjoyModel {
public:
    DenjoyModel(const ContinuedFraction& cf, std::vector<HoleSpec> holes, double cantor_mass);

    const ContinuedFraction& cf() const noexcept { return cf_; }
    double alpha() const noexcept { return alpha_; }
    const std::vector<HoleSpec>& holes() const noexcept { return holes_; }
    int hole_count() const noexcept { return static_cast<int>(holes_.size()); }
    double cantor_mass() const noexcept { return cantor_mass_; }
    double total_gap_mass() const noexcept { return 1.0 - cantor_mass_; }

    /// Normalized length of gap (j,k); 0 when |k| exceeds the truncation.
    double gap_length(const GapId& id) const;
    double gap_left(const GapId& id) const;
    double gap_right(const GapId& id) const;
    double gap_theta(const GapId& id) const;
    std::size_t gap_count() const noexcept { return sorted_theta_.size(); }

    /// Staircase H(theta) (right-continuous) and its left limit H(theta^-), not reduced mod 1.
    double staircase(double theta) const;
    double staircase_left(double theta) const;

    /// h: collapses each gap to its orbit point.
    double semiconj_h(const CantorPoint& p) const { return p.theta; }

    /// Right-continuous section of h: the right endpoint of the gap at theta, if any.
    CantorPoint semiconj_h_inv(double theta) const;

    /// Classifies a raw coordinate. Exact when cantor_mass > 0; with zero Cantor
    /// mass a coordinate shared by two gaps resolves to the left gap's right end.
    CantorPoint locate(double x) const;

    /// f: Cantor points advance by alpha in the address; gap (j,k) maps affinely onto (j,k+1).
    CantorPoint map(const CantorPoint& p) const;

    /// mu_alpha([0, x]) for the point: equal to h(x).
    double invariant_measure_cdf(const CantorPoint& p) const { return p.theta; }

    /// Integral of psi (a function of the model coordinate) against mu_alpha,
    /// by 10-point Gauss-Legendre quadrature in theta on each inter-gap segment.
    double integrate(const std::function<double(double)>& psi) const;

    /// Points (theta, H(theta)) on a uniform theta grid.
    std::string staircase_csv(int samples) const;

    nlohmann::json to_json() const;

private:
    struct Gap {
        GapId id;
        double theta;
        double left;
        double length;
    };

    std::optional<std::size_t> index_of(const GapId& id) const;
    double theta_of(const GapId& id) const;
    CantorPoint make_point(double theta, std::optional<GapId> gap, double offset) const;

    ContinuedFraction cf_;
    double alpha_ = 0.0;
    std::vector<HoleSpec> holes_;
    double cantor_mass_ = 1.0;
    std::vector<Gap> gaps_;                  // sorted by theta
    std::vector<double> sorted_theta_;
    std::vector<double> sorted_left_;
    std::vector<std::vector<std::size_t>> index_;  // [hole][k + K] -> position in gaps_
};

/// Least-squares fit log l_k = log C + |k| log Delta.
struct GapDecayFit {
    double C = 0.0;
    double Delta = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

GapDecayFit gap_decay_fit(const std::vector<std::pair<std::int64_t, double>>& lengths);
GapDecayFit gap_decay_fit(const DenjoyModel& model, int hole);

} // namespace amlab
