#include "amlab/specialflow/specialflow.hpp"

#include "amlab/errors.hpp"
#include "amlab/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace amlab {

namespace {

struct Accumulator {
    double sum = 0.0;
    double comp = 0.0;
    void add(double v) noexcept {
        const double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + comp; }
};

void check_periodic_grid(const std::vector<double>& pts, const std::vector<double>& vals,
                         const char* what) {
    require(!pts.empty() && pts.size() == vals.size(), ErrorCode::kInvalidInput,
            std::string(what) + ": need matching, non-empty point and value lists");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        require(pts[i] >= 0.0 && pts[i] < 1.0, ErrorCode::kInvalidInput,
                std::string(what) + ": points must lie in [0,1)");
        require(i == 0 || pts[i] > pts[i - 1], ErrorCode::kInvalidInput,
                std::string(what) + ": points must be strictly increasing");
        require(std::isfinite(vals[i]) && vals[i] > 0.0, ErrorCode::kInvalidInput,
                std::string(what) + ": ceiling values must be positive");
    }
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

} // namespace

CeilingFunction CeilingFunction::constant(double c) {
    require(std::isfinite(c) && c > 0.0, ErrorCode::kInvalidInput, "constant ceiling must be > 0");
    CeilingFunction f;
    f.kind_ = Kind::kConstant;
    f.points_ = {0.0};
    f.values_ = {c};
    f.mean_ = c;
    f.lower_ = c;
    return f;
}

CeilingFunction CeilingFunction::step(std::vector<double> breakpoints, std::vector<double> values) {
    check_periodic_grid(breakpoints, values, "step ceiling");
    CeilingFunction f;
    f.kind_ = Kind::kStep;
    f.points_ = std::move(breakpoints);
    f.values_ = std::move(values);
    const std::size_t n = f.points_.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double len = i + 1 < n ? f.points_[i + 1] - f.points_[i]
                                     : 1.0 - f.points_[i] + f.points_[0];
        mean += len * f.values_[i];
    }
    f.mean_ = mean;
    f.lower_ = *std::min_element(f.values_.begin(), f.values_.end());
    return f;
}

CeilingFunction CeilingFunction::jump_bv(const JumpSequence& jumps, const ContinuedFraction& cf) {
    certify_positive_ceiling(jumps);
    CeilingFunction f;
    f.kind_ = Kind::kJumpBV;
    f.jumps_ = std::make_shared<const JumpSequence>(jumps);
    f.cocycle_ = std::make_shared<const CocycleEvaluator>(jumps, cf);
    f.mean_ = jumps.mean();
    f.lower_ = jumps.mean() - f.cocycle_->sigma().l1 - f.cocycle_->tail_bound();
    return f;
}

CeilingFunction CeilingFunction::sampled(std::vector<double> base, std::vector<double> values,
                                         Interpolation rule) {
    if (rule == Interpolation::kPiecewiseConstant) {
        CeilingFunction f = step(std::move(base), std::move(values));
        f.kind_ = Kind::kSampled;
        return f;
    }
    check_periodic_grid(base, values, "sampled ceiling");
    CeilingFunction f;
    f.kind_ = Kind::kSampled;
    f.rule_ = Interpolation::kLinear;
    f.points_ = std::move(base);
    f.values_ = std::move(values);
    const std::size_t n = f.points_.size();
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = (i + 1) % n;
        const double len = i + 1 < n ? f.points_[j] - f.points_[i] : 1.0 - f.points_[i] + f.points_[0];
        mean += 0.5 * len * (f.values_[i] + f.values_[j]);
    }
    f.mean_ = mean;
    f.lower_ = *std::min_element(f.values_.begin(), f.values_.end());
    return f;
}

std::size_t CeilingFunction::step_index(double x) const {
    const auto it = std::upper_bound(points_.begin(), points_.end(), x);
    if (it == points_.begin()) return points_.size() - 1;
    return static_cast<std::size_t>(it - points_.begin()) - 1;
}

double CeilingFunction::operator()(double x) const {
    x = frac(x);
    switch (kind_) {
    case Kind::kConstant: return values_[0];
    case Kind::kJumpBV: return cocycle_->phi(x);
    case Kind::kStep: return values_[step_index(x)];
    case Kind::kSampled: {
        const std::size_t i = step_index(x);
        if (rule_ == Interpolation::kPiecewiseConstant) return values_[i];
        const std::size_t n = points_.size();
        const std::size_t j = (i + 1) % n;
        double a = points_[i];
        double b = points_[j];
        if (j == 0) b += 1.0;
        double t = x;
        if (t < a) t += 1.0;
        if (b == a) return values_[i];
        return values_[i] + (values_[j] - values_[i]) * (t - a) / (b - a);
    }
    }
    return values_[0];
}

nlohmann::json CeilingFunction::to_json() const {
    nlohmann::json j;
    switch (kind_) {
    case Kind::kConstant: j["variant"] = "constant"; j["value"] = values_[0]; break;
    case Kind::kStep:
        j["variant"] = "step";
        j["breakpoints"] = points_;
        j["values"] = values_;
        break;
    case Kind::kJumpBV: j["variant"] = "jump-bv"; j["jumps"] = jumps_->to_json(); break;
    case Kind::kSampled:
        j["variant"] = "sampled";
        j["base"] = points_;
        j["values"] = values_;
        j["interpolation"] = rule_ == Interpolation::kLinear ? "linear" : "piecewise-constant";
        break;
    }
    j["mean"] = mean_;
    j["lower_bound"] = lower_;
    return j;
}

CeilingFunction make_step_ceiling(double epsilon, const Angle& beta) {
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidInput,
            "step ceiling needs 0 < epsilon < 1 (got " + fmt("%.17g", epsilon) + ")");
    const double b = beta.value();
    require(b > 0.0 && b < 1.0, ErrorCode::kInvalidInput, "step ceiling needs 0 < beta < 1");
    return CeilingFunction::step({0.0, b}, {1.0 - epsilon, 1.0 + epsilon});
}

SpecialFlow::SpecialFlow(const ContinuedFraction& cf, CeilingFunction ceiling)
    : rot_(cf), ceiling_(std::move(ceiling)) {
    require(ceiling_.lower_bound() > 0.0, ErrorCode::kInvalidInput, "ceiling must be positive");
}

namespace {

// Running S_m along an orbit, with the same arithmetic as birkhoff_sums.
class RoofSum {
public:
    explicit RoofSum(const CeilingFunction& c)
        : ceiling_(&c),
          stepwise_(c.kind() == CeilingFunction::Kind::kStep || c.kind() == CeilingFunction::Kind::kConstant),
          counts_(stepwise_ ? c.values().size() : 0, 0) {}

    double value() const noexcept {
        if (!stepwise_) return acc_.value();
        double s = 0.0;
        for (std::size_t i = 0; i < counts_.size(); ++i) s += static_cast<double>(counts_[i]) * ceiling_->values()[i];
        return s;
    }
    // Adds (sign = +1) or removes (sign = -1) the roof over x.
    void add(double x, int sign) {
        if (stepwise_) {
            counts_[ceiling_->kind() == CeilingFunction::Kind::kConstant ? 0 : ceiling_->step_index(x)] += sign;
        } else {
            acc_.add(sign * (*ceiling_)(x));
        }
    }

private:
    const CeilingFunction* ceiling_;
    bool stepwise_;
    std::vector<std::int64_t> counts_;
    Accumulator acc_;
};

} // namespace

SpecialFlowPoint SpecialFlow::advance(const SpecialFlowPoint& p, double t) const {
    require(std::isfinite(t) && std::abs(t) <= 1e9 * ceiling_.mean(), ErrorCode::kInvalidInput,
            "flow time exceeds 1e9 * mean(ceiling)");
    const double steps = std::abs(p.height + t) / ceiling_.lower_bound() + 2.0;
    rot_.ensure_certified(static_cast<std::int64_t>(std::min(steps, 2e18)));
    auto cur = rot_.cursor(frac(p.base), 0);
    const double target = p.height + t;
    // Locate m with S_m <= target < S_{m+1}.
    RoofSum S(ceiling_);
    while (true) {
        const double x = cur.value();
        S.add(x, +1);
        if (S.value() > target) {
            S.add(x, -1);
            break;
        }
        cur.advance();
    }
    while (S.value() > target) {
        cur.retreat();
        S.add(cur.value(), -1);
    }
    return {cur.value(), std::max(0.0, target - S.value())};
}

std::vector<double> SpecialFlow::birkhoff_sums(double x, std::int64_t n) const {
    require(n >= 1, ErrorCode::kInvalidInput, "need at least one Birkhoff sum");
    rot_.ensure_certified(n);
    std::vector<double> S(static_cast<std::size_t>(n));
    auto cur = rot_.cursor(frac(x), 0);
    const bool stepwise = ceiling_.kind() == CeilingFunction::Kind::kStep ||
                          ceiling_.kind() == CeilingFunction::Kind::kConstant;
    if (stepwise) {
        // S_m from exact visit counts: no accumulated rounding.
        const auto& v = ceiling_.values();
        std::vector<std::int64_t> counts(v.size(), 0);
        for (std::size_t m = 0; m < S.size(); ++m) {
            double s = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) s += static_cast<double>(counts[i]) * v[i];
            S[m] = s;
            ++counts[ceiling_.kind() == CeilingFunction::Kind::kConstant ? 0 : ceiling_.step_index(cur.value())];
            cur.advance();
        }
        return S;
    }
    Accumulator acc;
    for (std::size_t m = 0; m < S.size(); ++m) {
        S[m] = acc.value();
        acc.add(ceiling_(cur.value()));
        cur.advance();
    }
    return S;
}

FlowSampler::FlowSampler(const SpecialFlow& flow, SpecialFlowPoint start)
    : flow_(&flow), cursor_(flow.rotation().cursor(frac(start.base), 0)), point_(start) {
    point_.base = cursor_.value();
    ceiling_here_ = flow.ceiling()(point_.base);
    require(point_.height >= 0.0 && point_.height < ceiling_here_, ErrorCode::kInvalidInput,
            "start point must lie under the ceiling");
}

void FlowSampler::step(double dt) {
    double h = point_.height + dt;
    while (h >= ceiling_here_) {
        h -= ceiling_here_;
        cursor_.advance();
        ceiling_here_ = flow_->ceiling()(cursor_.value());
    }
    point_ = {cursor_.value(), h};
}

double weyl_sum(const SpecialFlow& flow, double lambda, double x, std::int64_t N) {
    require(N >= 1, ErrorCode::kInvalidInput, "N must be >= 1");
    const std::vector<double> S = flow.birkhoff_sums(x, N);
    return std::min(1.0, std::abs(kernels::phase_sum(lambda, S)) / static_cast<double>(N));
}

std::string_view to_string(WeylVerdict v) noexcept {
    switch (v) {
    case WeylVerdict::kEigenvalueEvidence: return "eigenvalue-evidence";
    case WeylVerdict::kDecayEvidence: return "decay-evidence";
    case WeylVerdict::kInconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::vector<double> default_lambda_grid(double epsilon, int points, int suspect) {
    require(epsilon > 0.0, ErrorCode::kInvalidInput, "epsilon must be > 0");
    require(points >= 1 && suspect >= 0, ErrorCode::kInvalidInput, "bad grid sizes");
    std::vector<double> grid;
    const double top = 8.0 * std::numbers::pi;
    for (int k = 1; k <= points; ++k) grid.push_back(top * k / points);
    for (int l = -suspect; l <= suspect; ++l) {
        if (l != 0) grid.push_back(l * std::numbers::pi / epsilon);
    }
    return grid;
}

const WeylReport* ScanResult::find(double lambda, double tol) const {
    for (const auto& r : reports) {
        if (std::abs(r.lambda - lambda) <= tol * std::max(1.0, std::abs(lambda))) return &r;
    }
    return nullptr;
}

std::string ScanResult::to_csv() const {
    std::ostringstream os;
    os << "lambda,N,x_index,magnitude\n";
    char buf[128];
    for (const auto& r : reports) {
        for (std::size_t x = 0; x < r.magnitudes.size(); ++x) {
            for (std::size_t n = 0; n < r.N.size(); ++n) {
                std::snprintf(buf, sizeof buf, "%.17g,%lld,%zu,%.17g\n", r.lambda,
                              static_cast<long long>(r.N[n]), x, r.magnitudes[x][n]);
                os << buf;
            }
        }
    }
    return os.str();
}

nlohmann::json ScanResult::to_json() const {
    nlohmann::json ev = nlohmann::json::array();
    for (const auto& r : reports) {
        ev.push_back({{"lambda", r.lambda},
                      {"max_over_x", r.max_over_x},
                      {"min_over_x", r.min_over_x},
                      {"decreasing", r.decreasing},
                      {"stable", r.stable},
                      {"verdict", to_string(r.verdict)}});
    }
    return {{"verdict", to_string(verdict)},
            {"thresholds",
             {{"decay", thresholds.decay},
              {"eigen", thresholds.eigen},
              {"stability", thresholds.stability},
              {"monotone_fraction", thresholds.monotone_fraction}}},
            {"max_final", max_final},
            {"monotone_fraction", monotone_fraction},
            {"x_samples", x_samples},
            {"evidence", ev}};
}

ScanResult eigenvalue_scan(const SpecialFlow& flow, const std::vector<double>& lambda_grid,
                           const std::vector<std::int64_t>& N_schedule,
                           const std::vector<double>& x_samples, const ScanThresholds& th) {
    require(!lambda_grid.empty(), ErrorCode::kInvalidInput, "lambda grid is empty");
    for (double l : lambda_grid) {
        require(std::isfinite(l) && l != 0.0, ErrorCode::kInvalidInput,
                "lambda grid must exclude 0");
    }
    require(!N_schedule.empty(), ErrorCode::kInvalidInput, "N schedule is empty");
    for (std::size_t i = 0; i < N_schedule.size(); ++i) {
        require(N_schedule[i] >= 1 && (i == 0 || N_schedule[i] > N_schedule[i - 1]),
                ErrorCode::kInvalidInput, "N schedule must be positive and increasing");
    }
    require(!x_samples.empty(), ErrorCode::kInvalidInput, "need at least one base point");

    ScanResult res;
    res.thresholds = th;
    res.x_samples = x_samples;
    res.reports.resize(lambda_grid.size());
    for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
        res.reports[l].lambda = lambda_grid[l];
        res.reports[l].N = N_schedule;
        res.reports[l].magnitudes.assign(x_samples.size(), std::vector<double>(N_schedule.size()));
    }
    const std::int64_t n_max = N_schedule.back();
    for (std::size_t xi = 0; xi < x_samples.size(); ++xi) {
        const std::vector<double> S = flow.birkhoff_sums(x_samples[xi], n_max);
        const std::span<const double> all(S);
        for (std::size_t l = 0; l < lambda_grid.size(); ++l) {
            std::complex<double> total{0.0, 0.0};
            std::int64_t done = 0;
            for (std::size_t n = 0; n < N_schedule.size(); ++n) {
                const std::int64_t N = N_schedule[n];
                total += kernels::phase_sum(lambda_grid[l],
                                            all.subspan(static_cast<std::size_t>(done),
                                                        static_cast<std::size_t>(N - done)));
                done = N;
                res.reports[l].magnitudes[xi][n] =
                    std::min(1.0, std::abs(total) / static_cast<double>(N));
            }
        }
    }

    std::size_t monotone = 0;
    bool all_small = true;
    bool any_eigen = false;
    for (auto& r : res.reports) {
        const std::size_t nN = r.N.size();
        r.max_over_x.assign(nN, 0.0);
        r.min_over_x.assign(nN, 1.0);
        bool stable = true;
        for (const auto& row : r.magnitudes) {
            for (std::size_t n = 0; n < nN; ++n) {
                r.max_over_x[n] = std::max(r.max_over_x[n], row[n]);
                r.min_over_x[n] = std::min(r.min_over_x[n], row[n]);
            }
            const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
            if (*hi - *lo > th.stability) stable = false;
        }
        if (r.max_over_x.back() - r.min_over_x.back() > th.stability) stable = false;
        r.stable = stable;
        r.decreasing = true;
        for (std::size_t n = 1; n < nN; ++n) {
            if (!(r.max_over_x[n] < r.max_over_x[n - 1])) r.decreasing = false;
        }
        if (r.min_over_x.back() > th.eigen && r.stable) {
            r.verdict = WeylVerdict::kEigenvalueEvidence;
            any_eigen = true;
        } else if (r.max_over_x.back() < th.decay && r.decreasing) {
            r.verdict = WeylVerdict::kDecayEvidence;
        }
        if (r.decreasing) ++monotone;
        if (!(r.max_over_x.back() < th.decay)) all_small = false;
        res.max_final = std::max(res.max_final, r.max_over_x.back());
    }
    res.monotone_fraction = static_cast<double>(monotone) / static_cast<double>(res.reports.size());
    if (any_eigen) {
        res.verdict = WeylVerdict::kEigenvalueEvidence;
    } else if (all_small && res.monotone_fraction >= th.monotone_fraction) {
        res.verdict = WeylVerdict::kDecayEvidence;
    }
    return res;
}

std::string_view to_string(KsStatus s) noexcept {
    switch (s) {
    case KsStatus::kExcludedByStepLemma: return "excluded-by-step-lemma";
    case KsStatus::kRelationFound: return "relation-found";
    case KsStatus::kNoRelation: return "no-relation-up-to-K";
    case KsStatus::kNotExcluded: return "not-excluded";
    }
    return "not-excluded";
}

KsResult ks_exclusion(double epsilon, const ContinuedFraction& cf, double lambda, std::int64_t K) {
    require(K >= 1, ErrorCode::kInvalidInput, "K must be >= 1");
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidInput, "epsilon must lie in (0,1)");
    KsResult out;
    if (lambda == 0.0) return out;
    const double r = lambda * epsilon / std::numbers::pi;
    const double l = std::round(r);
    if (std::abs(r - l) > 1e-9) {
        out.status = KsStatus::kExcludedByStepLemma;
        return out;
    }
    out.l = static_cast<std::int64_t>(l);
    if (out.l == 0) return out;
    out.relation = find_relation_for_l(epsilon, cf, out.l, K);
    out.status = out.relation ? KsStatus::kRelationFound : KsStatus::kNoRelation;
    return out;
}

std::complex<double> correlation(const SpecialFlow& flow, const Observable& F, const Observable& G,
                                 double t, const CorrelationOptions& opt) {
    require(opt.dt > 0.0, ErrorCode::kInvalidInput, "dt must be > 0");
    require(opt.t_avg >= 1e3 * flow.ceiling().mean(), ErrorCode::kInvalidInput,
            "averaging time must be >= 1e3 * mean(ceiling)");
    const SpecialFlowPoint p0{opt.x0, 0.0};
    FlowSampler g_stream(flow, p0);
    FlowSampler f_stream(flow, flow.advance(p0, t));
    const auto n = static_cast<std::int64_t>(opt.t_avg / opt.dt);
    std::complex<double> sum_fg{0, 0}, sum_f{0, 0}, sum_g{0, 0};
    for (std::int64_t j = 0; j < n; ++j) {
        const auto& pf = f_stream.point();
        const auto& pg = g_stream.point();
        const std::complex<double> fv = F(pf.base, pf.height);
        const std::complex<double> gv = G(pg.base, pg.height);
        sum_fg += fv * std::conj(gv);
        sum_f += fv;
        sum_g += gv;
        f_stream.step(opt.dt);
        g_stream.step(opt.dt);
    }
    const double inv = 1.0 / static_cast<double>(n);
    return sum_fg * inv - (sum_f * inv) * std::conj(sum_g * inv);
}

std::string MixingResult::to_csv() const {
    std::ostringstream os;
    os << "pair,t,M_t\n";
    char buf[96];
    for (std::size_t p = 0; p < curves.size(); ++p) {
        for (std::size_t i = 0; i < curves[p].t.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p, curves[p].t[i], curves[p].M[i]);
            os << buf;
        }
    }
    return os.str();
}

nlohmann::json MixingResult::to_json() const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : curves) {
        cs.push_back({{"M_final", c.M.back()}, {"variance_product", c.variance_product},
                      {"t_max", c.t.back()}});
    }
    return {{"verdict", weak_mixing_evidence ? "weak-mixing-evidence" : "inconclusive"},
            {"threshold_factor", threshold_factor},
            {"curves", cs}};
}

MixingResult cesaro_mixing_test(const SpecialFlow& flow,
                                const std::vector<std::pair<Observable, Observable>>& pairs,
                                double t_max, double resolution, const CorrelationOptions& opt,
                                double threshold_factor) {
    require(t_max >= 100.0, ErrorCode::kInvalidInput, "t_max must be >= 100");
    require(opt.dt > 0.0 && resolution >= opt.dt, ErrorCode::kInvalidInput,
            "resolution must be >= dt > 0");
    const double ratio = resolution / opt.dt;
    require(std::abs(ratio - std::round(ratio)) < 1e-9, ErrorCode::kInvalidInput,
            "resolution must be a multiple of dt");
    require(opt.t_avg >= 1e3 * flow.ceiling().mean(), ErrorCode::kInvalidInput,
            "averaging time must be >= 1e3 * mean(ceiling)");
    const auto lag_step = static_cast<std::size_t>(std::llround(ratio));
    const auto n_lags = static_cast<std::size_t>(std::floor(t_max / resolution + 1e-9)) + 1;
    const auto n_avg = static_cast<std::size_t>(opt.t_avg / opt.dt);
    const std::size_t n_total = n_avg + (n_lags - 1) * lag_step;

    std::vector<SpecialFlowPoint> orbit(n_total);
    FlowSampler walker(flow, {opt.x0, 0.0});
    for (std::size_t j = 0; j < n_total; ++j) {
        orbit[j] = walker.point();
        walker.step(opt.dt);
    }

    MixingResult res;
    res.threshold_factor = threshold_factor;
    res.weak_mixing_evidence = !pairs.empty();
    const double inv = 1.0 / static_cast<double>(n_avg);
    for (const auto& [F, G] : pairs) {
        std::vector<std::complex<double>> fv(n_total), gv(n_avg);
        for (std::size_t j = 0; j < n_total; ++j) fv[j] = F(orbit[j].base, orbit[j].height);
        for (std::size_t j = 0; j < n_avg; ++j) gv[j] = G(orbit[j].base, orbit[j].height);
        std::complex<double> mean_g{0, 0};
        double g2 = 0.0;
        for (const auto& g : gv) {
            mean_g += g;
            g2 += std::norm(g);
        }
        mean_g *= inv;
        std::complex<double> mean_f0{0, 0};
        double f2 = 0.0;
        for (std::size_t j = 0; j < n_avg; ++j) {
            mean_f0 += fv[j];
            f2 += std::norm(fv[j]);
        }
        mean_f0 *= inv;

        CesaroCurve c;
        c.variance_product = std::max(0.0, f2 * inv - std::norm(mean_f0)) *
                             std::max(0.0, g2 * inv - std::norm(mean_g));
        std::complex<double> window_f{0, 0};
        for (std::size_t j = 0; j < n_avg; ++j) window_f += fv[j];
        for (std::size_t L = 0; L < n_lags; ++L) {
            const std::size_t lag = L * lag_step;
            if (L > 0) {
                for (std::size_t j = lag - lag_step; j < lag; ++j) {
                    window_f -= fv[j];
                    window_f += fv[j + n_avg];
                }
            }
            std::complex<double> s{0, 0};
            const std::complex<double>* fp = fv.data() + lag;
            for (std::size_t j = 0; j < n_avg; ++j) s += fp[j] * std::conj(gv[j]);
            const std::complex<double> corr = s * inv - (window_f * inv) * std::conj(mean_g);
            c.t.push_back(static_cast<double>(L) * resolution);
            c.corr_sq.push_back(std::norm(corr));
        }
        // Cesaro mean by the trapezoid rule; M(0) = |corr(0)|^2.
        c.M.resize(c.t.size());
        c.M[0] = c.corr_sq[0];
        double integral = 0.0;
        for (std::size_t i = 1; i < c.t.size(); ++i) {
            integral += 0.5 * (c.corr_sq[i] + c.corr_sq[i - 1]) * (c.t[i] - c.t[i - 1]);
            c.M[i] = integral / c.t[i];
        }
        auto at = [&](double T) {
            const auto i = static_cast<std::size_t>(std::llround(T / resolution));
            return c.M[std::min(i, c.M.size() - 1)];
        };
        const double m1 = at(t_max / 100.0), m2 = at(t_max / 10.0), m3 = c.M.back();
        const bool ok = m1 > m2 && m2 > m3 && m3 < threshold_factor * c.variance_product;
        res.weak_mixing_evidence = res.weak_mixing_evidence && ok;
        res.curves.push_back(std::move(c));
    }
    return res;
}

} // namespace amlab
