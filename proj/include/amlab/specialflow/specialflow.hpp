#pragma once

#include "amlab/arithmetic/predicates.hpp"
#include "amlab/arithmetic/rotation.hpp"
#include "amlab/cocycle/cocycle.hpp"

#include <json.hpp>

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace amlab {

/// Positive ceiling over the circle.
class CeilingFunction {
public:
    enum class Kind { kConstant, kStep, kJumpBV, kSampled };
    enum class Interpolation { kPiecewiseConstant, kLinear };

    static CeilingFunction constant(double c);
    /// values[i] on [breakpoints[i], breakpoints[i+1]), the last one wrapping through 0.
    static CeilingFunction step(std::vector<double> breakpoints, std::vector<double> values);
    /// phi = mean + sum sigma_k e_k; positivity must be certified (mean > 2 sum|sigma_k|).
    static CeilingFunction jump_bv(const JumpSequence& jumps, const ContinuedFraction& cf);
    /// Periodic samples (base[i], values[i]), base sorted in [0,1).
    static CeilingFunction sampled(std::vector<double> base, std::vector<double> values,
                                   Interpolation rule);

    double operator()(double x) const;
    Kind kind() const noexcept { return kind_; }
    double mean() const noexcept { return mean_; }
    double lower_bound() const noexcept { return lower_; }

    const std::vector<double>& breakpoints() const noexcept { return points_; }
    const std::vector<double>& values() const noexcept { return values_; }
    /// Index of the step interval containing x (Step and piecewise-constant Sampled).
    std::size_t step_index(double x) const;
    const CocycleEvaluator* cocycle() const noexcept { return cocycle_.get(); }
    const JumpSequence* jumps() const noexcept { return jumps_.get(); }

    nlohmann::json to_json() const;

private:
    Kind kind_ = Kind::kConstant;
    Interpolation rule_ = Interpolation::kPiecewiseConstant;
    std::vector<double> points_;
    std::vector<double> values_;
    double mean_ = 1.0;
    double lower_ = 1.0;
    std::shared_ptr<const JumpSequence> jumps_;
    std::shared_ptr<const CocycleEvaluator> cocycle_;
};

/// (1 - eps) on [0, beta), (1 + eps) on [beta, 1).
CeilingFunction make_step_ceiling(double epsilon, const Angle& beta);

/// Point (x, s) with 0 <= s < ceiling(x).
struct SpecialFlowPoint {
    double base = 0.0;
    double height = 0.0;
};

/// Special flow over R_alpha under a ceiling.
class SpecialFlow {
public:
    SpecialFlow(const ContinuedFraction& cf, CeilingFunction ceiling);

    const Rotation& rotation() const noexcept { return rot_; }
    const CeilingFunction& ceiling() const noexcept { return ceiling_; }

    /// Moves up with unit speed, jumping (x, ceiling(x)) -> (x + alpha, 0).
    SpecialFlowPoint advance(const SpecialFlowPoint& p, double t) const;

    /// S_m ceiling(x) for m = 0..n-1 (S_0 = 0). Step ceilings use exact visit counts.
    std::vector<double> birkhoff_sums(double x, std::int64_t n) const;

private:
    Rotation rot_;
    CeilingFunction ceiling_;
};

/// Walks the flow forward in increments of dt (sequential, exact base points).
class FlowSampler {
public:
    FlowSampler(const SpecialFlow& flow, SpecialFlowPoint start);
    const SpecialFlowPoint& point() const noexcept { return point_; }
    void step(double dt);

private:
    const SpecialFlow* flow_;
    Rotation::Cursor cursor_;
    SpecialFlowPoint point_;
    double ceiling_here_;
};

/// (1/N) |sum_{m<N} exp(i lambda S_m ceiling(x))|.
double weyl_sum(const SpecialFlow& flow, double lambda, double x, std::int64_t N);

enum class WeylVerdict { kEigenvalueEvidence, kDecayEvidence, kInconclusive };
std::string_view to_string(WeylVerdict v) noexcept;

struct ScanThresholds {
    double decay = 0.2;
    double eigen = 0.6;
    double stability = 0.05;       // max spread across N and across x for eigenvalue evidence
    double monotone_fraction = 0.95;
};

struct WeylReport {
    double lambda = 0.0;
    std::vector<std::int64_t> N;
    std::vector<std::vector<double>> magnitudes;  // [x sample][N index]
    std::vector<double> max_over_x;                // per N
    std::vector<double> min_over_x;
    bool decreasing = false;  // max_over_x strictly decreasing along N
    bool stable = false;
    WeylVerdict verdict = WeylVerdict::kInconclusive;
};

struct ScanResult {
    std::vector<WeylReport> reports;
    std::vector<double> x_samples;
    ScanThresholds thresholds;
    WeylVerdict verdict = WeylVerdict::kInconclusive;
    double max_final = 0.0;          // max magnitude at the largest N
    double monotone_fraction = 0.0;

    const WeylReport* find(double lambda, double tol = 1e-12) const;
    std::string to_csv() const;  // lambda,N,x_index,magnitude
    nlohmann::json to_json() const;
};

/// 400 points k 8pi/400 plus lambda = l pi / eps, 0 < |l| <= 20.
std::vector<double> default_lambda_grid(double epsilon, int points = 400, int suspect = 20);

ScanResult eigenvalue_scan(const SpecialFlow& flow, const std::vector<double>& lambda_grid,
                           const std::vector<std::int64_t>& N_schedule,
                           const std::vector<double>& x_samples, const ScanThresholds& th = {});

enum class KsStatus { kExcludedByStepLemma, kRelationFound, kNoRelation, kNotExcluded };
std::string_view to_string(KsStatus s) noexcept;

struct KsResult {
    KsStatus status = KsStatus::kNotExcluded;
    std::int64_t l = 0;
    std::optional<IntegerRelation> relation;
};

/// Arithmetic exclusion of lambda as an eigenvalue of the step-ceiling flow.
KsResult ks_exclusion(double epsilon, const ContinuedFraction& cf, double lambda, std::int64_t K);

/// Observable on the suspended space, F(x, s).
using Observable = std::function<std::complex<double>(double, double)>;

struct CorrelationOptions {
    double dt = 0.5;
    double t_avg = 1e5;
    double x0 = 0.1234567890123;
};

/// <F o T^t, G> - <F><G> by averaging along one orbit.
std::complex<double> correlation(const SpecialFlow& flow, const Observable& F, const Observable& G,
                                 double t, const CorrelationOptions& opt = {});

struct CesaroCurve {
    std::vector<double> t;
    std::vector<double> corr_sq;  // |corr(t)|^2
    std::vector<double> M;        // (1/T) int_0^T |corr|^2
    double variance_product = 0.0;
};

struct MixingResult {
    std::vector<CesaroCurve> curves;
    bool weak_mixing_evidence = false;
    double threshold_factor = 0.05;
    std::string to_csv() const;  // pair,t,M_t
    nlohmann::json to_json() const;
};

/// Cesaro means of squared correlations for each pair, lags on a grid of step `resolution`
/// (a multiple of opt.dt). Evidence iff every M decreases at t_max/100, t_max/10, t_max
/// and ends below threshold_factor * Var F * Var G.
MixingResult cesaro_mixing_test(const SpecialFlow& flow,
                                const std::vector<std::pair<Observable, Observable>>& pairs,
                                double t_max, double resolution, const CorrelationOptions& opt = {},
                                double threshold_factor = 0.05);

} // namespace amlab
