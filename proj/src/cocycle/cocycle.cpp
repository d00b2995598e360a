#include "amlab/cocycle/cocycle.hpp"

#include "amlab/errors.hpp"
#include "amlab/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>

namespace amlab {

namespace {

// Neumaier compensated accumulator.
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

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

} // namespace

JumpSequence JumpSequence::finite(const std::vector<std::pair<std::int64_t, double>>& support,
                                  double mean, double tolerance) {
    require(std::isfinite(mean), ErrorCode::kInvalidInput, "mean must be finite");
    std::map<std::int64_t, double> merged;
    for (const auto& [k, d] : support) {
        require(std::isfinite(d), ErrorCode::kInvalidInput, "jumps must be finite");
        merged[k] += d;
    }
    JumpSequence j;
    j.mean_ = mean;
    if (!merged.empty()) {
        j.k_min_ = merged.begin()->first;
        const std::int64_t k_max = merged.rbegin()->first;
        require(k_max - j.k_min_ < 10'000'000, ErrorCode::kInvalidInput, "jump support too wide");
        j.deltas_.assign(static_cast<std::size_t>(k_max - j.k_min_ + 1), 0.0);
        for (const auto& [k, d] : merged) j.deltas_[static_cast<std::size_t>(k - j.k_min_)] = d;
    }
    for (std::size_t i = 0; i < j.deltas_.size(); ++i) {
        j.weighted_mass_ += std::abs(static_cast<double>(j.k_min_ + static_cast<std::int64_t>(i)) * j.deltas_[i]);
    }
    const double b = j.balance();
    if (!(std::abs(b) <= tolerance)) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "jumps do not sum to zero (sum = %.3e)", b);
        fail(ErrorCode::kUnbalancedJumps, buf);
    }
    return j;
}

JumpSequence JumpSequence::geometric(double C, double Delta, int K, double mean, bool alternating) {
    require(std::isfinite(C), ErrorCode::kInvalidInput, "C must be finite");
    require(Delta > 0.0 && Delta < 1.0, ErrorCode::kInvalidInput, "Delta must lie in (0,1)");
    require(K >= 1, ErrorCode::kInvalidInput, "K_jump must be >= 1");
    std::vector<std::pair<std::int64_t, double>> support;
    double others = 0.0;
    for (int k = -K; k <= K; ++k) {
        if (k == 0) continue;
        const double mag = C * std::pow(Delta, std::abs(k));
        const double d = alternating ? ((std::abs(k) % 2 == 1) ? -mag : mag) : (k > 0 ? mag : -mag);
        support.emplace_back(k, d);
        others += d;
    }
    if (alternating) support.emplace_back(0, -others);
    JumpSequence j = finite(support, mean, 1e-12 * std::max(1.0, std::abs(C)));
    j.tail_ = GeometricTail{C, Delta, K, alternating};
    return j;
}

double JumpSequence::delta(std::int64_t k) const noexcept {
    if (k < k_min_ || k > k_max()) return 0.0;
    return deltas_[static_cast<std::size_t>(k - k_min_)];
}

double JumpSequence::balance() const noexcept {
    Accumulator acc;
    for (double d : deltas_) acc.add(d);
    return acc.value();
}

double JumpSequence::sigma_bound() const noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < deltas_.size(); ++i) {
        const double k = static_cast<double>(k_min_ + static_cast<std::int64_t>(i));
        s += (1.0 + std::abs(k)) * std::abs(deltas_[i]);
    }
    return s;
}

double JumpSequence::tail_bound() const noexcept {
    if (!tail_) return 0.0;
    // Dropped jumps |k| > K contribute at most sum (1+|k|) |Delta_k| to sup |phi - phi_K|.
    const double r = tail_->Delta;
    const double C = std::abs(tail_->C);
    const double K = tail_->K;
    const double rk1 = std::pow(r, K + 1);
    double bound = 2.0 * C * rk1 * ((K + 2.0) / (1.0 - r) + r / ((1.0 - r) * (1.0 - r)));
    if (tail_->alternating) bound += 2.0 * C * rk1 / (1.0 - r);
    return bound;
}

nlohmann::json JumpSequence::to_json() const {
    nlohmann::json j;
    j["support"] = nlohmann::json::array();
    for (std::size_t i = 0; i < deltas_.size(); ++i) {
        if (deltas_[i] != 0.0) {
            j["support"].push_back({k_min_ + static_cast<std::int64_t>(i), deltas_[i]});
        }
    }
    if (tail_) {
        j["tail"] = {{"C", tail_->C}, {"Delta", tail_->Delta}, {"K", tail_->K},
                     {"alternating", tail_->alternating}};
    } else {
        j["tail"] = nullptr;
    }
    j["mean"] = mean_;
    j["weighted_mass"] = weighted_mass_;
    return j;
}

JumpSequence JumpSequence::from_json(const nlohmann::json& j) {
    require(j.is_object(), ErrorCode::kInvalidInput, "jump sequence must be a JSON object");
    const double mean = j.value("mean", 0.0);
    if (j.contains("tail") && j["tail"].is_object()) {
        const auto& t = j["tail"];
        require(t.contains("C") && t.contains("Delta"), ErrorCode::kInvalidInput,
                "tail needs C and Delta");
        return geometric(t["C"].get<double>(), t["Delta"].get<double>(), t.value("K", 60), mean,
                         t.value("alternating", false));
    }
    std::vector<std::pair<std::int64_t, double>> support;
    if (j.contains("support")) {
        for (const auto& e : j["support"]) {
            require(e.is_array() && e.size() == 2, ErrorCode::kInvalidInput,
                    "support entries must be [k, delta_k]");
            support.emplace_back(e[0].get<std::int64_t>(), e[1].get<double>());
        }
    }
    return finite(support, mean);
}

double SigmaSequence::at(std::int64_t k) const noexcept {
    if (sigma.empty() || k < k_min) return 0.0;
    if (k > k_max()) return sigma.back();
    return sigma[static_cast<std::size_t>(k - k_min)];
}

SigmaSequence sigma_from_jumps(const JumpSequence& jumps) {
    SigmaSequence s;
    s.k_min = jumps.k_min();
    const auto& d = jumps.deltas();
    const double scale = std::max(1.0, jumps.sigma_bound());
    require(std::abs(jumps.balance()) <= 1e-12 * scale, ErrorCode::kUnbalancedJumps,
            "jumps do not sum to zero");
    s.sigma.resize(d.size());
    Accumulator left;
    for (std::size_t i = 0; i < d.size(); ++i) {
        left.add(d[i]);
        s.sigma[i] = left.value();
    }
    // sigma_k = -sum_{j > k} Delta_j
    Accumulator right;
    for (std::size_t i = d.size(); i-- > 0;) {
        s.formula_mismatch = std::max(s.formula_mismatch, std::abs(s.sigma[i] + right.value()));
        right.add(d[i]);
    }
    require(s.formula_mismatch <= 1e-12 * scale, ErrorCode::kUnbalancedJumps,
            "left and right partial sums disagree");
    if (!s.sigma.empty()) s.sigma.back() = 0.0;
    for (double v : s.sigma) s.l1 += std::abs(v);
    return s;
}

template <class Shift>
double e_k_with(std::int64_t k, double x, const Shift& shift) {
    return frac(x - shift(k + 1)) - frac(x - shift(k));
}

template <class Shift>
PhiValue phi_with(const JumpSequence& jumps, double x, const Shift& shift) {
    const SigmaSequence s = sigma_from_jumps(jumps);
    Accumulator acc;
    acc.add(jumps.mean());
    for (std::size_t i = 0; i < s.sigma.size(); ++i) {
        if (s.sigma[i] == 0.0) continue;
        acc.add(s.sigma[i] * e_k_with(s.k_min + static_cast<std::int64_t>(i), x, shift));
    }
    return {acc.value(), jumps.tail_bound()};
}

template <class Shift>
double xi_with(const JumpSequence& jumps, double x, const Shift& shift) {
    const SigmaSequence s = sigma_from_jumps(jumps);
    Accumulator acc;
    for (std::size_t i = 0; i < s.sigma.size(); ++i) {
        if (s.sigma[i] == 0.0) continue;
        const std::int64_t k = s.k_min + static_cast<std::int64_t>(i);
        acc.add(s.sigma[i] * (frac(x - shift(k + 1)) - 0.5));
    }
    return acc.value();
}

auto numeric_shift(double alpha) {
    return [alpha](std::int64_t k) { return frac(static_cast<double>(k) * alpha); };
}

auto rotation_shift(const Rotation& rot) {
    return [&rot](std::int64_t k) { return rot.shift(k); };
}

double e_k_eval(std::int64_t k, double x, const Rotation& rot) {
    return e_k_with(k, x, rotation_shift(rot));
}

double e_k_eval(std::int64_t k, double x, double alpha) { return e_k_with(k, x, numeric_shift(alpha)); }

double e_k_eval(std::int64_t k, const Angle& x, const ContinuedFraction& cf) {
    return e_k_eval(k, x.value(), Rotation(cf));
}

PhiValue phi_from_jumps(const JumpSequence& jumps, const ContinuedFraction& cf, const Angle& x) {
    const Rotation rot(cf);
    return phi_with(jumps, x.value(), rotation_shift(rot));
}

PhiValue phi_from_jumps(const JumpSequence& jumps, double alpha, double x) {
    return phi_with(jumps, x, numeric_shift(alpha));
}

double transfer_function(const JumpSequence& jumps, const ContinuedFraction& cf, const Angle& x) {
    const Rotation rot(cf);
    return xi_with(jumps, x.value(), rotation_shift(rot));
}

double transfer_function(const JumpSequence& jumps, double alpha, double x) {
    return xi_with(jumps, x, numeric_shift(alpha));
}

CocycleEvaluator::CocycleEvaluator(const JumpSequence& jumps, const ContinuedFraction& cf)
    : rot_(cf), sigma_(sigma_from_jumps(jumps)), mean_(jumps.mean()),
      tail_bound_(jumps.tail_bound()) {
    const auto& d = jumps.deltas();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] == 0.0) continue;
        phi_shifts_.push_back(rot_.shift(jumps.k_min() + static_cast<std::int64_t>(i)));
        phi_weights_.push_back(-d[i]);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < sigma_.sigma.size(); ++i) {
        if (sigma_.sigma[i] == 0.0) continue;
        xi_shifts_.push_back(rot_.shift(sigma_.k_min + static_cast<std::int64_t>(i) + 1));
        xi_weights_.push_back(sigma_.sigma[i]);
        total += sigma_.sigma[i];
    }
    xi_offset_ = -0.5 * total;
}

double CocycleEvaluator::phi(double x) const noexcept {
    return mean_ + kernels::weighted_frac_sum(frac(x), phi_shifts_, phi_weights_);
}

double CocycleEvaluator::xi(double x) const noexcept {
    return xi_offset_ + kernels::weighted_frac_sum(frac(x), xi_shifts_, xi_weights_);
}

std::complex<double> transfer_phase_integral(const CocycleEvaluator& ev, double lambda) {
    std::vector<double> cuts = ev.xi_shifts();
    cuts.push_back(0.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double slope = 0.0;
    for (double w : ev.xi_weights()) slope += w;
    const std::complex<double> I(0.0, 1.0);
    std::complex<double> total{0.0, 0.0};
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = i + 1 < cuts.size() ? cuts[i + 1] : 1.0;
        const double len = b - a;
        if (len <= 0.0) continue;
        const std::complex<double> start = std::exp(-I * lambda * ev.xi(a));
        const double k = lambda * slope;
        if (std::abs(k * len) < 1e-8) {
            total += start * len * (1.0 - 0.5 * I * k * len);
        } else {
            total += start * (std::exp(-I * k * len) - 1.0) / (-I * k);
        }
    }
    return total;
}

void certify_positive_ceiling(const JumpSequence& jumps) {
    const SigmaSequence s = sigma_from_jumps(jumps);
    const double need = 2.0 * (s.l1 + jumps.tail_bound());
    if (!(jumps.mean() > need)) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "ceiling positivity not certified: mean %.6g <= 2 sum|sigma_k| = %.6g",
                      jumps.mean(), need);
        fail(ErrorCode::kInvalidInput, buf);
    }
}

double birkhoff_sum(const std::function<double(double)>& f, const Rotation& rot, double x,
                    std::int64_t m) {
    require(m >= 0, ErrorCode::kInvalidInput, "Birkhoff sum length must be >= 0");
    if (m == 0) return 0.0;
    rot.ensure_certified(m - 1);
    auto cur = rot.cursor(frac(x), 0);
    Accumulator acc;
    for (std::int64_t i = 0; i < m; ++i) {
        acc.add(f(cur.value()));
        cur.advance();
    }
    return acc.value();
}

double birkhoff_sum(const std::function<double(double)>& f, const ContinuedFraction& cf,
                    const Angle& x, std::int64_t m) {
    return birkhoff_sum(f, Rotation(cf), x.value(), m);
}

std::string SpreadReport::to_csv() const {
    std::ostringstream os;
    os << "m,spread_m,bound\n";
    char buf[96];
    for (std::size_t i = 0; i < spread_by_m.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i + 1, spread_by_m[i], bound);
        os << buf;
    }
    return os.str();
}

nlohmann::json SpreadReport::to_json() const {
    return {{"spread", spread}, {"bound", bound}, {"sigma_l1", sigma_l1},
            {"within_bound", within_bound}, {"m_max", spread_by_m.size()}};
}

SpreadReport birkhoff_spread(const JumpSequence& jumps, const ContinuedFraction& cf,
                             std::int64_t m_max, int grid_size) {
    require(m_max >= 1, ErrorCode::kInvalidInput, "m_max must be >= 1");
    require(grid_size >= 2, ErrorCode::kInvalidInput, "grid_size must be >= 2");
    const CocycleEvaluator ev(jumps, cf);
    ev.rotation().ensure_certified(m_max);
    const auto n = static_cast<std::size_t>(m_max);
    std::vector<double> hi(n, -INFINITY), lo(n, INFINITY);
    for (int g = 0; g < grid_size; ++g) {
        auto cur = ev.rotation().cursor(static_cast<double>(g) / grid_size, 0);
        Accumulator acc;
        for (std::size_t m = 0; m < n; ++m) {
            acc.add(ev.phi(cur.value()) - ev.mean());
            cur.advance();
            const double v = acc.value();
            hi[m] = std::max(hi[m], v);
            lo[m] = std::min(lo[m], v);
        }
    }
    SpreadReport r;
    r.bound = jumps.sigma_bound();
    r.sigma_l1 = ev.sigma().l1;
    r.spread_by_m.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        r.spread_by_m[m] = hi[m] - lo[m];
        r.spread = std::max(r.spread, r.spread_by_m[m]);
    }
    const double slack = 1e-9 * std::max(1.0, r.bound);
    r.within_bound = r.spread <= 2.0 * r.sigma_l1 + slack && r.sigma_l1 <= r.bound + slack;
    return r;
}

double denjoy_birkhoff_spread(const DenjoyModel& model, const std::function<double(double)>& psi,
                              std::int64_t m_max, int grid_size) {
    require(m_max >= 1, ErrorCode::kInvalidInput, "m_max must be >= 1");
    require(grid_size >= 2, ErrorCode::kInvalidInput, "grid_size must be >= 2");
    const double mean = model.integrate(psi);
    const double base = model.hole_count() > 0 ? model.holes()[0].beta.value() : 0.0;
    const auto n = static_cast<std::size_t>(m_max);
    std::vector<double> hi(n, -INFINITY), lo(n, INFINITY);
    for (int g = 0; g < grid_size; ++g) {
        CantorPoint p = model.semiconj_h_inv(base + static_cast<double>(g) / grid_size);
        Accumulator acc;
        for (std::size_t m = 0; m < n; ++m) {
            acc.add(psi(p.x) - mean);
            p = model.map(p);
            hi[m] = std::max(hi[m], acc.value());
            lo[m] = std::min(lo[m], acc.value());
        }
    }
    double spread = 0.0;
    for (std::size_t m = 0; m < n; ++m) spread = std::max(spread, hi[m] - lo[m]);
    return spread;
}

CoboundaryCheck coboundary_residual(const JumpSequence& jumps, const ContinuedFraction& cf,
                                    int samples, std::uint64_t seed) {
    require(samples >= 1, ErrorCode::kInvalidInput, "samples must be >= 1");
    const CocycleEvaluator ev(jumps, cf);
    const double alpha = ev.rotation().alpha();
    std::mt19937_64 rng(seed);
    CoboundaryCheck out;
    out.samples = samples;
    for (int i = 0; i < samples; ++i) {
        const double x = uniform01(rng);
        const double r = ev.xi(x) - ev.xi(frac(x + alpha)) - (ev.phi(x) - ev.mean());
        out.max_residual = std::max(out.max_residual, std::abs(r));
    }
    return out;
}

std::vector<std::pair<std::int64_t, double>> gap_jumps(const DenjoyModel& model,
                                                       const std::function<double(double)>& psi) {
    require(model.hole_count() == 1, ErrorCode::kNotOneHole,
            "gap jumps are defined for one-hole models");
    const HoleSpec& h = model.holes()[0];
    std::vector<std::pair<std::int64_t, double>> out;
    for (int k = -h.k_gap; k <= h.k_gap; ++k) {
        const GapId id{0, k};
        const double left = model.gap_left(id);
        out.emplace_back(k, psi(left + model.gap_length(id)) - psi(left));
    }
    return out;
}

JumpSequence jumps_from_ceiling(const DenjoyModel& model, const std::function<double(double)>& psi,
                                double balance_tolerance) {
    require(model.hole_count() == 1, ErrorCode::kNotOneHole,
            "the reduction needs exactly one hole");
    require(model.cantor_mass() == 0.0, ErrorCode::kNotFullGapMeasure,
            "the reduction needs gaps of full measure (cantor_mass = 0)");
    return JumpSequence::finite(gap_jumps(model, psi), model.integrate(psi), balance_tolerance);
}

} // namespace amlab
