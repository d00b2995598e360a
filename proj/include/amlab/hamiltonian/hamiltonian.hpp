#pragma once

#include "amlab/arithmetic/continued_fraction.hpp"
#include "amlab/denjoy/denjoy.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace amlab {

/// c r^n cos(2 pi (a theta + b s)) or the sine analogue.
struct TrigTerm {
    double coef = 0.0;
    int a = 0;
    int b = 0;
    int r_power = 0;
    bool sine = false;
};

struct TrigDerivs {
    double v = 0, t = 0, r = 0, s = 0;     // value and first derivatives
    double tt = 0, tr = 0, rr = 0;         // second derivatives used by the tangent flow
};

/// Finite trigonometric polynomial in (theta, s) with polynomial dependence on r.
class TrigPoly {
public:
    TrigPoly() = default;
    explicit TrigPoly(std::vector<TrigTerm> terms);

    /// cos(2 pi theta) (1 + c cos(2 pi s)).
    static TrigPoly standard(double c);
    static TrigPoly constant(double c);

    TrigDerivs eval(double theta, double r, double s) const noexcept;
    double value(double theta, double r, double s) const noexcept { return eval(theta, r, s).v; }
    /// Sum of |coef| r_max^n: bound on |value| for |r| <= r_max.
    double sup_bound(double r_max) const noexcept;
    const std::vector<TrigTerm>& terms() const noexcept { return terms_; }

    static TrigPoly from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

private:
    std::vector<TrigTerm> terms_;
};

/// Time change equal to 1/(1 - eps) or 1/(1 + eps) according to the flow-box base point
/// theta0 (the orbit's theta at s = 0): (1 - eps)^-1 for theta0 in [0, beta), (1 + eps)^-1
/// on [beta, 1), switched smoothly inside transition windows of the given width that end at
/// beta and at 1 (placed inside gaps of the invariant Cantor set).
struct FlowBoxStep {
    double eps = 0.25;
    double beta = 0.5;
    double width = 0.0;

    double inverse(double theta0) const noexcept;  // 1/phi
};

struct HamiltonianSystem {
    TrigPoly H;
    double epsilon = 0.0;
    double H0 = 0.0;
    std::optional<TrigPoly> phi;
    std::optional<FlowBoxStep> flow_box;
    int map_steps = 100;     // fixed RKF78 steps of the time-1 map
    double tolerance = 1e-13;

    static HamiltonianSystem from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

using State = std::array<double, 4>;  // theta, r, s, u

/// u on the section s = 0 fixing the energy H0.
double section_u(const HamiltonianSystem& sys, double theta, double r);
/// u + r^2/2 + eps H, or phi (that - H0) when a trigonometric time change is present.
double energy(const HamiltonianSystem& sys, const State& x);
double hat_energy(const HamiltonianSystem& sys, const State& x);

/// Adaptive RKF78 integration of the Hamiltonian vector field for time t.
State integrate(const HamiltonianSystem& sys, const State& x, double t);

struct MapPoint {
    double theta = 0.0;  // lifted
    double r = 0.0;
    std::array<double, 4> tangent{1, 0, 0, 1};  // row-major d(theta', r')/d(theta, r)
};

/// Time-1 return map to s = 0 of the reduced (theta, r) dynamics, with its tangent.
MapPoint poincare_map(const HamiltonianSystem& sys, double theta, double r);
/// Finite-difference Jacobian of the Poincare map.
std::array<double, 4> jacobian_fd(const HamiltonianSystem& sys, double theta, double r,
                                  double h = 1e-5);

struct TwistReport {
    double min_derivative = 0.0;
    double max_derivative = 0.0;
    bool monotone_twist = false;
    nlohmann::json to_json() const;
};

TwistReport twist_check(const HamiltonianSystem& sys, double r_lo, double r_hi, int grid);

/// Generating function data of one segment theta0 -> theta1 of the time-1 map.
struct Segment {
    double r0 = 0.0, r1 = 0.0;
    double action = 0.0;
    double h11 = 0.0, h12 = 0.0, h22 = 0.0;
};

/// Shoots for r0 with theta'(theta0, r0) = theta1 and returns the Lagrangian action.
Segment generating_function(const HamiltonianSystem& sys, double theta0, double theta1);

struct OrbitConfiguration {
    std::int64_t p = 0;
    std::int64_t q = 1;
    std::vector<double> theta;  // lifted, theta_{i+q} = theta_i + p
    std::vector<double> r;      // momentum at each theta_i on the section
    double action = 0.0;
    double gradient_norm = 0.0;
    bool monotone = false;
    bool f_ordered = false;

    std::string to_csv() const;  // i,theta,r
    nlohmann::json to_json() const;
};

/// Minimizes sum h(theta_i, theta_{i+1}) over periodic configurations of type p/q.
OrbitConfiguration am_minimize(const HamiltonianSystem& sys, std::int64_t p, std::int64_t q,
                               int restarts = 4, std::uint64_t seed = 1);

/// True when the cyclic order of the points mod 1 is shifted rigidly by i -> i+1.
bool is_f_ordered(const std::vector<double>& theta);

/// theta after q iterations of the Poincare map from (theta_0, r_0), minus theta_0.
double orbit_displacement(const HamiltonianSystem& sys, const OrbitConfiguration& orbit);

struct CantorLevel {
    std::int64_t p = 0, q = 1;
    double lipschitz = 0.0;
    double largest_gap = 0.0;
    double gap_ratio = 0.0;  // largest_gap * q; about 1 for an evenly filled circle
};

struct AmCantorApprox {
    std::vector<CantorLevel> levels;
    std::vector<std::pair<double, double>> points;  // (theta mod 1, r), sorted
    double gap_left = 0.0, gap_right = 0.0;          // largest gap of the deepest level
    std::vector<std::pair<std::int64_t, double>> iterate_lengths;
    std::optional<GapDecayFit> fit;

    std::string to_csv() const;  // theta,r
    nlohmann::json to_json() const;
};

AmCantorApprox am_cantor_approx(const HamiltonianSystem& sys, const ContinuedFraction& cf,
                                int n_levels, int first_level = 1);

/// Integral over s in [0,1] of 1/phi along the orbit of X_H from (theta, r, 0).
double reparam_ceiling(const HamiltonianSystem& sys, double theta, double r);

/// Time for the time-changed flow to bring s from 0 to 1 (event detection).
double return_time(const HamiltonianSystem& sys, double theta, double r);

struct LyapunovResult {
    double top = 0.0;
    double second = 0.0;
    int iterates = 0;
    nlohmann::json to_json() const;
};

/// Exponents of the tangent cocycle along the periodic configuration, repeated to T iterates.
LyapunovResult lyapunov_exponent(const HamiltonianSystem& sys, const OrbitConfiguration& orbit,
                                 int T);
/// Exponents along the forward orbit of (theta, r).
LyapunovResult lyapunov_exponent(const HamiltonianSystem& sys, double theta, double r, int T);

} // namespace amlab
