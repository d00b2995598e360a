#pragma once

#include "amlab/arithmetic/rotation.hpp"
#include "amlab/denjoy/denjoy.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace amlab {

struct GeometricTail {
    double C = 0.0;
    double Delta = 0.0;
    int K = 0;
    bool alternating = false;
};

/// Jumps Delta_k of a BV circle function at the points {k alpha}, plus its mean.
///
/// Stored densely on the window [k_min, k_max]; zero outside.
class JumpSequence {
public:
    JumpSequence() = default;

    /// Finite support; throws unbalanced-jumps when |sum Delta_k| > tolerance.
    static JumpSequence finite(const std::vector<std::pair<std::int64_t, double>>& support,
                               double mean, double tolerance = 1e-12);

    /// Delta_k = C sign(k) Delta^|k| for 0 < |k| <= K. With `alternating`,
    /// Delta_k = C (-Delta)^|k| for k != 0 and Delta_0 restores the balance.
    static JumpSequence geometric(double C, double Delta, int K, double mean,
                                  bool alternating = false);

    static JumpSequence from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    std::int64_t k_min() const noexcept { return k_min_; }
    std::int64_t k_max() const noexcept { return k_min_ + static_cast<std::int64_t>(deltas_.size()) - 1; }
    bool empty() const noexcept { return deltas_.empty(); }
    double delta(std::int64_t k) const noexcept;
    const std::vector<double>& deltas() const noexcept { return deltas_; }
    double mean() const noexcept { return mean_; }
    const std::optional<GeometricTail>& tail() const noexcept { return tail_; }

    /// sum |k Delta_k|
    double weighted_mass() const noexcept { return weighted_mass_; }
    /// sum (1 + |k|) |Delta_k|: bound on sum |sigma_k|.
    double sigma_bound() const noexcept;
    double balance() const noexcept;  // sum Delta_k
    /// Bound on the sigma mass dropped by truncating a geometric tail; 0 otherwise.
    double tail_bound() const noexcept;

private:
    std::int64_t k_min_ = 0;
    std::vector<double> deltas_;
    double mean_ = 0.0;
    std::optional<GeometricTail> tail_;
    double weighted_mass_ = 0.0;
};

/// sigma_k = sum_{j <= k} Delta_j on [k_min, k_max].
struct SigmaSequence {
    std::int64_t k_min = 0;
    std::vector<double> sigma;
    double l1 = 0.0;                // sum |sigma_k|
    double formula_mismatch = 0.0;  // max |left sum + right sum| over the window

    double at(std::int64_t k) const noexcept;
    std::int64_t k_max() const noexcept { return k_min + static_cast<std::int64_t>(sigma.size()) - 1; }
};

SigmaSequence sigma_from_jumps(const JumpSequence& jumps);

/// e_k(x) = {x - (k+1) alpha} - {x - k alpha}.
double e_k_eval(std::int64_t k, const Angle& x, const ContinuedFraction& cf);
double e_k_eval(std::int64_t k, double x, const Rotation& rot);
/// Direct evaluation for a plain numeric alpha (any rotation number, rational included).
double e_k_eval(std::int64_t k, double x, double alpha);

struct PhiValue {
    double value = 0.0;
    double tail_bound = 0.0;
};

/// mean + sum_k sigma_k e_k(x), summed term by term.
PhiValue phi_from_jumps(const JumpSequence& jumps, const ContinuedFraction& cf, const Angle& x);
PhiValue phi_from_jumps(const JumpSequence& jumps, double alpha, double x);

/// Fast evaluation of phi and of the transfer function xi.
///
/// phi = mean - sum_j Delta_j {x - j alpha}, xi = sum_k sigma_k ({x - (k+1) alpha} - 1/2):
/// both are weighted fractional-part sums over precomputed exact shifts.
class CocycleEvaluator {
public:
    CocycleEvaluator(const JumpSequence& jumps, const ContinuedFraction& cf);

    double phi(double x) const noexcept;
    double xi(double x) const noexcept;
    double mean() const noexcept { return mean_; }
    const SigmaSequence& sigma() const noexcept { return sigma_; }
    const Rotation& rotation() const noexcept { return rot_; }
    double tail_bound() const noexcept { return tail_bound_; }
    /// Breakpoints {k alpha} of xi (k = k_min+1..k_max+1), for exact integration.
    const std::vector<double>& xi_shifts() const noexcept { return xi_shifts_; }
    const std::vector<double>& xi_weights() const noexcept { return xi_weights_; }

private:
    Rotation rot_;
    SigmaSequence sigma_;
    double mean_;
    double tail_bound_;
    std::vector<double> phi_shifts_, phi_weights_;
    std::vector<double> xi_shifts_, xi_weights_;
    double xi_offset_;
};

double transfer_function(const JumpSequence& jumps, const ContinuedFraction& cf, const Angle& x);

/// Exact integral of exp(-i lambda xi) over the circle: xi is piecewise linear with
/// common slope between consecutive breakpoints.
std::complex<double> transfer_phase_integral(const CocycleEvaluator& ev, double lambda);
double transfer_function(const JumpSequence& jumps, double alpha, double x);

/// Throws invalid-input unless mean > 2 sum |sigma_k| (so phi >= mean/2 > 0).
void certify_positive_ceiling(const JumpSequence& jumps);

/// S_m f(x) = sum_{i<m} f({x + i alpha}), compensated summation.
double birkhoff_sum(const std::function<double(double)>& f, const Rotation& rot, double x,
                    std::int64_t m);
double birkhoff_sum(const std::function<double(double)>& f, const ContinuedFraction& cf,
                    const Angle& x, std::int64_t m);

struct SpreadReport {
    double spread = 0.0;
    double bound = 0.0;     // sum (1 + |i|) |Delta_i|
    double sigma_l1 = 0.0;  // sum |sigma_k|
    bool within_bound = true;  // spread <= 2 sigma_l1 <= 2 bound
    std::vector<double> spread_by_m;  // index m - 1

    std::string to_csv() const;  // m,spread_m,bound
    nlohmann::json to_json() const;
};

/// max over m <= m_max and grid pairs of |S_m phi0(x) - S_m phi0(x')|, phi0 = phi - mean.
SpreadReport birkhoff_spread(const JumpSequence& jumps, const ContinuedFraction& cf,
                             std::int64_t m_max, int grid_size);

/// Same statistic for psi - integral(psi) along f on the Denjoy model, started at
/// h^{-1}(beta_0 + theta) for theta on the grid.
double denjoy_birkhoff_spread(const DenjoyModel& model, const std::function<double(double)>& psi,
                              std::int64_t m_max, int grid_size);

struct CoboundaryCheck {
    double max_residual = 0.0;
    int samples = 0;
};

/// max |xi(x) - xi(x + alpha) - (phi(x) - mean)| over pseudo-random x.
CoboundaryCheck coboundary_residual(const JumpSequence& jumps, const ContinuedFraction& cf,
                                    int samples, std::uint64_t seed);

/// Delta_k = psi(right end of gap k) - psi(left end of gap k), k = -K..K, hole 0.
std::vector<std::pair<std::int64_t, double>> gap_jumps(const DenjoyModel& model,
                                                       const std::function<double(double)>& psi);

/// Jump sequence of the one-hole full-gap-measure model's function psi, with
/// mean = integral of psi against mu_alpha. Jumps sit at {k alpha}: the base point
/// of the rotation side is beta_0.
JumpSequence jumps_from_ceiling(const DenjoyModel& model, const std::function<double(double)>& psi,
                                double balance_tolerance = 1e-9);

} // namespace amlab
