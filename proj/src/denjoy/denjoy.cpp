#include "amlab/denjoy/denjoy.hpp"

#include "amlab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace amlab {

namespace {

constexpr int kOrbitCheckIterates = 10'000;
constexpr double kSameOrbitTolerance = 1e-12;

double wrap_unit(double x) {
    const double f = frac(x);
    return f;
}

} // namespace

HoleSpec HoleSpec::geometric(Angle beta, double C, double Delta, int k_gap) {
    require(C > 0.0 && std::isfinite(C), ErrorCode::kInvalidInput, "gap constant C must be > 0");
    require(Delta > 0.0 && Delta < 1.0, ErrorCode::kInvalidInput, "gap decay rate must lie in (0,1)");
    require(k_gap >= 0, ErrorCode::kInvalidInput, "K_gap must be >= 0");
    HoleSpec h;
    h.beta = std::move(beta);
    h.k_gap = k_gap;
    h.hyperbolic = true;
    h.C = C;
    h.Delta = Delta;
    h.lengths.resize(static_cast<std::size_t>(2 * k_gap + 1));
    for (int k = -k_gap; k <= k_gap; ++k) {
        h.lengths[static_cast<std::size_t>(k + k_gap)] = C * std::pow(Delta, std::abs(k));
    }
    return h;
}

HoleSpec HoleSpec::explicit_lengths(Angle beta, std::vector<double> lengths) {
    require(lengths.size() % 2 == 1, ErrorCode::kInvalidInput,
            "explicit gap lengths must cover k = -K..K (odd count)");
    HoleSpec h;
    h.beta = std::move(beta);
    h.k_gap = static_cast<int>(lengths.size() / 2);
    h.lengths = std::move(lengths);
    return h;
}

DenjoyModel::DenjoyModel(const ContinuedFraction& cf, std::vector<HoleSpec> holes,
                         double cantor_mass)
    : cf_(cf), alpha_(cf.alpha_double()), holes_(std::move(holes)), cantor_mass_(cantor_mass) {
    require(std::isfinite(cantor_mass) && cantor_mass >= 0.0 && cantor_mass <= 1.0,
            ErrorCode::kInvalidMass, "cantor_mass must lie in [0,1]");
    if (holes_.empty()) {
        require(cantor_mass == 1.0, ErrorCode::kInvalidMass,
                "a model without holes must have cantor_mass 1");
    } else {
        require(cantor_mass < 1.0, ErrorCode::kInvalidMass,
                "holes need positive gap mass: cantor_mass must be < 1");
    }

    double total = 0.0;
    for (std::size_t j = 0; j < holes_.size(); ++j) {
        const HoleSpec& h = holes_[j];
        require(h.k_gap >= 0 && h.lengths.size() == static_cast<std::size_t>(2 * h.k_gap + 1),
                ErrorCode::kInvalidInput, "hole " + std::to_string(j) + ": malformed length table");
        for (double l : h.lengths) {
            require(std::isfinite(l) && l > 0.0, ErrorCode::kInvalidInput,
                    "hole " + std::to_string(j) + ": gap lengths must be positive");
            total += l;
        }
    }

    // Holes must lie on pairwise distinct R_alpha-orbits (checked up to 1e4 iterates).
    const HighFloat alpha_high = to_high(cf.value_rational());
    for (std::size_t i = 0; i < holes_.size(); ++i) {
        for (std::size_t j = i + 1; j < holes_.size(); ++j) {
            const HighFloat d = holes_[i].beta.high() - holes_[j].beta.high();
            HighFloat up = d;
            HighFloat down = d;
            for (int k = 0; k <= kOrbitCheckIterates; ++k) {
                if (circle_norm(up) < kSameOrbitTolerance || circle_norm(down) < kSameOrbitTolerance) {
                    fail(ErrorCode::kInvalidHoles,
                         "holes " + std::to_string(i) + " and " + std::to_string(j) +
                             " project onto the same rotation orbit (offset " + std::to_string(k) +
                             ")");
                }
                up -= alpha_high;
                down += alpha_high;
            }
        }
    }

    if (holes_.empty()) return;
    require(std::isfinite(total) && total > 0.0, ErrorCode::kInvalidMass,
            "gap masses cannot be normalized");
    const double scale = (1.0 - cantor_mass_) / total;
    for (HoleSpec& h : holes_) {
        for (double& l : h.lengths) l *= scale;
        if (h.hyperbolic) h.C *= scale;
    }

    index_.resize(holes_.size());
    for (std::size_t j = 0; j < holes_.size(); ++j) {
        const HoleSpec& h = holes_[j];
        for (int k = -h.k_gap; k <= h.k_gap; ++k) {
            const double theta =
                static_cast<double>(frac(h.beta.high() + HighFloat(k) * alpha_high));
            gaps_.push_back({GapId{static_cast<int>(j), k}, theta >= 1.0 ? 0.0 : theta, 0.0,
                             h.length(k)});
        }
    }
    std::sort(gaps_.begin(), gaps_.end(),
              [](const Gap& a, const Gap& b) { return a.theta < b.theta; });
    double prefix = 0.0;
    for (std::size_t i = 0; i < gaps_.size(); ++i) {
        gaps_[i].left = cantor_mass_ * gaps_[i].theta + prefix;
        prefix += gaps_[i].length;
        sorted_theta_.push_back(gaps_[i].theta);
        sorted_left_.push_back(gaps_[i].left);
    }
    for (std::size_t j = 0; j < holes_.size(); ++j) {
        index_[j].resize(holes_[j].lengths.size());
    }
    for (std::size_t i = 0; i < gaps_.size(); ++i) {
        const GapId& id = gaps_[i].id;
        index_[static_cast<std::size_t>(id.hole)]
              [static_cast<std::size_t>(id.k + holes_[static_cast<std::size_t>(id.hole)].k_gap)] = i;
    }
}

std::optional<std::size_t> DenjoyModel::index_of(const GapId& id) const {
    if (id.hole < 0 || id.hole >= hole_count()) return std::nullopt;
    const HoleSpec& h = holes_[static_cast<std::size_t>(id.hole)];
    if (id.k < -h.k_gap || id.k > h.k_gap) return std::nullopt;
    return index_[static_cast<std::size_t>(id.hole)][static_cast<std::size_t>(id.k + h.k_gap)];
}

double DenjoyModel::theta_of(const GapId& id) const {
    if (auto i = index_of(id)) return gaps_[*i].theta;
    require(id.hole >= 0 && id.hole < hole_count(), ErrorCode::kInvalidInput, "unknown hole index");
    const HighFloat t = frac(holes_[static_cast<std::size_t>(id.hole)].beta.high() +
                             HighFloat(id.k) * to_high(cf_.value_rational()));
    const double v = static_cast<double>(t);
    return v >= 1.0 ? 0.0 : v;
}

double DenjoyModel::gap_length(const GapId& id) const {
    if (auto i = index_of(id)) return gaps_[*i].length;
    return 0.0;
}

double DenjoyModel::gap_theta(const GapId& id) const { return theta_of(id); }

double DenjoyModel::gap_left(const GapId& id) const {
    if (auto i = index_of(id)) return gaps_[*i].left;
    return wrap_unit(staircase_left(theta_of(id)));
}

double DenjoyModel::gap_right(const GapId& id) const {
    if (auto i = index_of(id)) return gaps_[*i].left + gaps_[*i].length;
    return wrap_unit(staircase(theta_of(id)));
}

double DenjoyModel::staircase(double theta) const {
    theta = frac(theta);
    const auto c = static_cast<std::size_t>(
        std::upper_bound(sorted_theta_.begin(), sorted_theta_.end(), theta) - sorted_theta_.begin());
    if (c == 0) return cantor_mass_ * theta;
    const Gap& g = gaps_[c - 1];
    return g.left + g.length + cantor_mass_ * (theta - g.theta);
}

double DenjoyModel::staircase_left(double theta) const {
    theta = frac(theta);
    const auto c = static_cast<std::size_t>(
        std::lower_bound(sorted_theta_.begin(), sorted_theta_.end(), theta) - sorted_theta_.begin());
    if (c == 0) return cantor_mass_ * theta;
    const Gap& g = gaps_[c - 1];
    return g.left + g.length + cantor_mass_ * (theta - g.theta);
}

CantorPoint DenjoyModel::make_point(double theta, std::optional<GapId> gap, double offset) const {
    CantorPoint p;
    p.theta = theta;
    p.gap = gap;
    p.offset = offset;
    double length = 0.0;
    if (gap) {
        length = gap_length(*gap);
        p.offset = std::clamp(offset, 0.0, length);
    }
    p.kind = (length > 0.0 && p.offset > 0.0 && p.offset < length) ? PointKind::kGap
                                                                     : PointKind::kCantor;
    p.x = wrap_unit(staircase_left(theta) + p.offset);
    if (gap && length == 0.0) p.x = wrap_unit(staircase(theta));
    return p;
}

CantorPoint DenjoyModel::semiconj_h_inv(double theta) const {
    theta = frac(theta);
    const auto it = std::lower_bound(sorted_theta_.begin(), sorted_theta_.end(), theta);
    if (it != sorted_theta_.end() && *it == theta) {
        const Gap& g = gaps_[static_cast<std::size_t>(it - sorted_theta_.begin())];
        return make_point(theta, g.id, g.length);
    }
    return make_point(theta, std::nullopt, 0.0);
}

CantorPoint DenjoyModel::locate(double x) const {
    x = frac(x);
    if (gaps_.empty()) return make_point(x, std::nullopt, 0.0);
    const auto pos = std::upper_bound(sorted_left_.begin(), sorted_left_.end(), x);
    if (pos == sorted_left_.begin()) {
        // Before the first gap: H(theta) = cantor_mass * theta there.
        const double theta = cantor_mass_ > 0.0 ? std::min(x / cantor_mass_, gaps_.front().theta) : 0.0;
        return make_point(theta, std::nullopt, 0.0);
    }
    const std::size_t i = static_cast<std::size_t>(pos - sorted_left_.begin()) - 1;
    const Gap& g = gaps_[i];
    const double right = g.left + g.length;
    if (x == g.left && i > 0) {
        const Gap& prev = gaps_[i - 1];
        if (prev.left + prev.length >= x) return make_point(prev.theta, prev.id, prev.length);
    }
    if (x < right) return make_point(g.theta, g.id, x - g.left);
    if (cantor_mass_ == 0.0) return make_point(g.theta, g.id, g.length);
    const double next_theta = i + 1 < gaps_.size() ? gaps_[i + 1].theta : 1.0;
    const double theta = std::min(g.theta + (x - right) / cantor_mass_, next_theta);
    if (theta == g.theta) return make_point(g.theta, g.id, g.length);
    if (theta >= next_theta) {
        if (i + 1 < gaps_.size()) return make_point(gaps_[i + 1].theta, gaps_[i + 1].id, 0.0);
        return make_point(0.0, std::nullopt, 0.0);
    }
    return make_point(theta, std::nullopt, 0.0);
}

CantorPoint DenjoyModel::map(const CantorPoint& p) const {
    if (p.gap) {
        const GapId next{p.gap->hole, p.gap->k + 1};
        const double length = gap_length(*p.gap);
        const double next_length = gap_length(next);
        const double offset = length > 0.0 ? p.offset * (next_length / length) : next_length;
        return make_point(theta_of(next), next, offset);
    }
    return make_point(frac(p.theta + alpha_), std::nullopt, 0.0);
}

double DenjoyModel::integrate(const std::function<double(double)>& psi) const {
    using Quad = boost::math::quadrature::gauss<double, 10>;
    // Coordinates are H(theta) in [0,1]; a value of 1 is 1 - tiny rounded up, not 0.
    const double below_one = std::nextafter(1.0, 0.0);
    auto coord = [below_one](double v) { return std::min(v, below_one); };
    auto segment = [&](double a, double b, double base) {
        if (b <= a) return 0.0;
        if (cantor_mass_ == 0.0) return (b - a) * psi(coord(base));
        return Quad::integrate([&](double t) { return psi(coord(base + cantor_mass_ * (t - a))); },
                               a, b);
    };
    if (gaps_.empty()) return Quad::integrate([&](double t) { return psi(t); }, 0.0, 1.0);
    double total = segment(0.0, gaps_.front().theta, 0.0);
    for (std::size_t i = 0; i < gaps_.size(); ++i) {
        const double b = i + 1 < gaps_.size() ? gaps_[i + 1].theta : 1.0;
        total += segment(gaps_[i].theta, b, gaps_[i].left + gaps_[i].length);
    }
    return total;
}

std::string DenjoyModel::staircase_csv(int samples) const {
    require(samples >= 2, ErrorCode::kInvalidInput, "staircase export needs >= 2 samples");
    std::ostringstream os;
    os << "theta,H\n";
    char buf[64];
    for (int i = 0; i < samples; ++i) {
        const double theta = static_cast<double>(i) / samples;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", theta, staircase(theta));
        os << buf;
    }
    return os.str();
}

nlohmann::json DenjoyModel::to_json() const {
    nlohmann::json j;
    j["cf"] = {{"partial_quotients", std::vector<std::int64_t>(cf_.partial_quotients().begin(),
                                                                cf_.partial_quotients().end())},
               {"depth", cf_.depth()}};
    j["cantor_mass"] = cantor_mass_;
    j["holes"] = nlohmann::json::array();
    for (const HoleSpec& h : holes_) {
        nlohmann::json hj{{"beta", h.beta.to_string()}, {"K_gap", h.k_gap}};
        if (h.hyperbolic) {
            hj["C"] = h.C;
            hj["Delta"] = h.Delta;
        }
        hj["mass"] = std::accumulate(h.lengths.begin(), h.lengths.end(), 0.0);
        j["holes"].push_back(hj);
    }
    return j;
}

GapDecayFit gap_decay_fit(const std::vector<std::pair<std::int64_t, double>>& lengths) {
    require(lengths.size() >= 10, ErrorCode::kInvalidInput, "gap decay fit needs >= 10 lengths");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& [k, l] : lengths) {
        require(std::isfinite(l) && l > 0.0, ErrorCode::kInvalidInput,
                "gap decay fit needs positive lengths");
        const double x = static_cast<double>(k < 0 ? -k : k);
        const double y = std::log(l);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(lengths.size());
    const double denom = n * sxx - sx * sx;
    require(denom > 0.0, ErrorCode::kInvalidInput, "gap decay fit needs at least two distinct |k|");
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (const auto& [k, l] : lengths) {
        const double x = static_cast<double>(k < 0 ? -k : k);
        const double y = std::log(l);
        const double fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - mean_y) * (y - mean_y);
    }
    GapDecayFit out;
    out.C = std::exp(intercept);
    out.Delta = std::exp(slope);
    out.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    out.samples = lengths.size();
    return out;
}

GapDecayFit gap_decay_fit(const DenjoyModel& model, int hole) {
    require(hole >= 0 && hole < model.hole_count(), ErrorCode::kInvalidInput, "unknown hole index");
    const HoleSpec& h = model.holes()[static_cast<std::size_t>(hole)];
    std::vector<std::pair<std::int64_t, double>> data;
    for (int k = -h.k_gap; k <= h.k_gap; ++k) data.emplace_back(k, h.length(k));
    return gap_decay_fit(data);
}

} // namespace amlab
