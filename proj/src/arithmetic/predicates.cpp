#include "amlab/arithmetic/predicates.hpp"

#include "amlab/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace amlab {

std::string_view to_string(Evidence e) noexcept {
    switch (e) {
    case Evidence::kHolds: return "evidence-holds";
    case Evidence::kFails: return "evidence-fails";
    case Evidence::kInconclusive: return "inconclusive";
    }
    return "inconclusive";
}

namespace {

double norm_of_multiple(const BigInt& q, const Angle& x) {
    if (x.is_exact()) return static_cast<double>(to_high(circle_norm(Rational(q) * *x.rational())));
    return static_cast<double>(circle_norm(HighFloat(q) * x.high()));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

GeneralPositionReport general_position(const ContinuedFraction& cf, const Angle& beta, int depth,
                                       double fail_threshold) {
    require(depth >= 1, ErrorCode::kInvalidInput, "general_position needs depth >= 1");
    require(depth <= cf.depth(), ErrorCode::kInsufficientDepth,
            "requested depth " + std::to_string(depth) + " exceeds stored depth " +
                std::to_string(cf.depth()));
    GeneralPositionReport rep;
    rep.beta = beta;
    rep.depth = depth;
    rep.fail_threshold = fail_threshold;
    const Angle alpha = Angle::exact(cf.value_rational());
    for (int n = 0; n <= depth; ++n) {
        rep.q.push_back(cf.q(n));
        rep.norms.push_back(norm_of_multiple(cf.q(n), beta));
        rep.alpha_norms.push_back(norm_of_multiple(cf.q(n), alpha));
    }
    const int count = depth + 1;
    rep.tail_begin = count - std::max(1, count / 3);
    const auto tail = std::span(rep.norms).subspan(static_cast<std::size_t>(rep.tail_begin));
    rep.tail_max = *std::max_element(tail.begin(), tail.end());
    rep.tail_min = *std::min_element(tail.begin(), tail.end());
    const bool non_increasing = std::is_sorted(tail.rbegin(), tail.rend());
    if (rep.tail_max > fail_threshold) {
        rep.verdict = Evidence::kHolds;
    } else if (non_increasing) {
        rep.verdict = Evidence::kFails;
    } else {
        rep.verdict = Evidence::kInconclusive;
    }
    return rep;
}

nlohmann::json GeneralPositionReport::to_json() const {
    nlohmann::json j;
    j["beta"] = beta.to_string();
    j["depth"] = depth;
    j["fail_threshold"] = fail_threshold;
    j["tail_window"] = {tail_begin, depth};
    j["tail_max"] = tail_max;
    j["tail_min"] = tail_min;
    j["norms"] = norms;
    j["verdict"] = std::string(to_string(verdict));
    return j;
}

std::string GeneralPositionReport::to_csv() const {
    std::ostringstream os;
    os << "n,q_n,norm_qn_alpha,norm_qn_beta\n";
    for (std::size_t n = 0; n < norms.size(); ++n) {
        os << n << ',' << q[n] << ',' << fmt(alpha_norms[n]) << ',' << fmt(norms[n]) << '\n';
    }
    return os.str();
}

ParityCertificate half_general_position_certificate(const ContinuedFraction& cf, int depth) {
    require(depth >= 2, ErrorCode::kInvalidInput, "parity certificate needs depth >= 2");
    require(depth <= cf.depth(), ErrorCode::kInsufficientDepth, "depth exceeds stored depth");
    ParityCertificate cert;
    cert.covers_every_pair = true;
    cert.consecutive_coprime = true;
    for (int n = 0; n <= depth; ++n) {
        if (boost::multiprecision::bit_test(cf.q(n), 0)) cert.odd_indices.push_back(n);
    }
    for (int n = 0; n < depth; ++n) {
        const bool odd_n = boost::multiprecision::bit_test(cf.q(n), 0);
        const bool odd_next = boost::multiprecision::bit_test(cf.q(n + 1), 0);
        if (!odd_n && !odd_next) cert.covers_every_pair = false;
        if (boost::multiprecision::gcd(cf.q(n), cf.q(n + 1)) != 1) cert.consecutive_coprime = false;
    }
    return cert;
}

std::optional<IntegerRelation> find_relation_for_l(double epsilon, const ContinuedFraction& cf,
                                                   std::int64_t l, std::int64_t search_bound) {
    require(epsilon > 0.0 && epsilon < 1.0, ErrorCode::kInvalidInput, "epsilon must lie in (0,1)");
    require(search_bound >= 1, ErrorCode::kInvalidInput, "search bound K must be >= 1");
    const long double alpha = static_cast<long double>(to_high(cf.value_rational()));
    const long double tol = 1e-12L * static_cast<long double>(search_bound);
    const long double lhs = static_cast<long double>(l) * (1.0L + 1.0L / epsilon);
    std::optional<IntegerRelation> best;
    for (std::int64_t k = 0; k <= search_bound; ++k) {
        for (int sign : {1, -1}) {
            if (k == 0 && sign < 0) continue;
            const std::int64_t kk = sign * k;
            const long double half = (lhs - static_cast<long double>(kk) * alpha) / 2.0L;
            const long double p = std::nearbyint(half);
            if (std::fabs(p) > static_cast<long double>(search_bound)) continue;
            const long double residual = std::fabs(lhs - kk * alpha - 2.0L * p);
            if (residual <= tol) {
                return IntegerRelation{l, kk, static_cast<std::int64_t>(p),
                                       static_cast<double>(residual)};
            }
        }
    }
    return best;
}

std::optional<IntegerRelation> find_l_alpha_relation(double epsilon, const ContinuedFraction& cf,
                                                     std::int64_t search_bound) {
    for (std::int64_t l = 1; l <= search_bound; ++l) {
        for (std::int64_t signed_l : {l, -l}) {
            if (auto rel = find_relation_for_l(epsilon, cf, signed_l, search_bound)) return rel;
        }
    }
    return std::nullopt;
}

} // namespace amlab
