#pragma once

#include "amlab/arithmetic/continued_fraction.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace amlab {

enum class Evidence { kHolds, kFails, kInconclusive };

std::string_view to_string(Evidence e) noexcept;

/// Finite-depth evidence for ||q_n beta|| not tending to 0.
struct GeneralPositionReport {
    Angle beta;
    int depth = 0;
    double fail_threshold = 1e-3;
    std::vector<BigInt> q;               // q_0..q_depth
    std::vector<double> norms;           // ||q_n beta||
    std::vector<double> alpha_norms;     // ||q_n alpha||
    int tail_begin = 0;                  // first index of the last-third window
    double tail_max = 0.0;
    double tail_min = 0.0;
    Evidence verdict = Evidence::kInconclusive;

    nlohmann::json to_json() const;
    /// Columns: n, q_n, norm_qn_alpha, norm_qn_beta.
    std::string to_csv() const;
};

inline constexpr double kDefaultGeneralPositionThreshold = 1e-3;

/// ||q_n beta|| for 0 <= n <= depth; exact for rational beta.
///
/// Holds when the maximum over the last third of the indices exceeds the
/// threshold; fails when that window stays below it and is non-increasing.
GeneralPositionReport general_position(const ContinuedFraction& cf, const Angle& beta, int depth,
                                       double fail_threshold = kDefaultGeneralPositionThreshold);

struct ParityCertificate {
    std::vector<int> odd_indices;   // n in [0, depth] with q_n odd
    bool covers_every_pair = false; // every {n, n+1} meets odd_indices
    bool consecutive_coprime = false;
};

/// Indices with q_n odd, so ||q_n / 2|| = 1/2 along them.
ParityCertificate half_general_position_certificate(const ContinuedFraction& cf, int depth);

struct IntegerRelation {
    std::int64_t l = 0;
    std::int64_t k = 0;
    std::int64_t p = 0;
    double residual = 0.0;
};

/// Exhaustive search of l + l/eps = k alpha + 2p with 0 < |l| <= K, |k|, |p| <= K,
/// tolerance 1e-12 K. No relation found is evidence for eps in L_alpha.
std::optional<IntegerRelation> find_l_alpha_relation(double epsilon, const ContinuedFraction& cf,
                                                     std::int64_t search_bound);

/// Same search restricted to one value of l.
std::optional<IntegerRelation> find_relation_for_l(double epsilon, const ContinuedFraction& cf,
                                                   std::int64_t l, std::int64_t search_bound);

} // namespace amlab
